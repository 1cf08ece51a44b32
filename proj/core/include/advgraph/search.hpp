#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advgraph/ranking.hpp"
#include "advgraph/scoring.hpp"
#include "advgraph/transformer.hpp"

namespace advgraph {

struct BeamParams {
  std::size_t width = 5;
  std::size_t depth = 2;  // applied edges
  bool operator==(const BeamParams&) const = default;
};

struct AnnealParams {
  double time_budget = 1.0;  // seconds per sample
  std::size_t max_transforms = 5;
  double initial_temperature = 1.0;
  double cooling = 0.95;
  bool operator==(const AnnealParams&) const = default;
};

void Validate(const BeamParams& params);    // kInvalidArgument
void Validate(const AnnealParams& params);  // kInvalidArgument

// How a search orders edges. Lookup and guided rankers need their artifact.
struct Ranker {
  RankerKind kind = RankerKind::kRandom;
  std::shared_ptr<const EdgeWeightTable> table;
  std::optional<double> default_weight;
  std::shared_ptr<const GuidedPolicy> policy;
};

struct GenerationRecord {
  std::size_t index = 0;
  InputState original;
  InputState final;
  std::vector<TransformationEdge> edge_sequence;
  bool success = false;
  std::size_t transforms_used = 0;
  double elapsed = 0.0;  // seconds
  double original_score = 0.0;
  double best_score = 0.0;
  std::size_t original_label = 0;
  std::size_t final_label = 0;
  std::optional<std::string> error;
};

// Level-by-level beam over applied edges. Successors of the whole beam are
// pooled, deduplicated by (state, budget) and the top `width` survive. Stops
// at the first goal vertex; otherwise returns the best vertex seen.
GenerationRecord BeamSearch(const InputGraph& graph, const VertexEvaluator& evaluator,
                            const InputState& original, const SampleContext& ctx,
                            const Ranker& ranker, const BeamParams& params, Rng& rng);

// Metropolis rule: always accept delta >= 0, else with probability
// exp(delta / temperature).
class MetropolisAcceptor {
 public:
  static double Probability(double delta, double temperature);
  static bool Accept(double delta, double temperature, Rng& rng);
};

// Random-walk proposals from the current vertex until the time budget runs
// out or a goal is found. A walk that hits the transform budget, or a vertex
// without edges, restarts from the original.
GenerationRecord SimulatedAnnealing(const InputGraph& graph, const VertexEvaluator& evaluator,
                                    const InputState& original, const SampleContext& ctx,
                                    const AnnealParams& params, Rng& rng);

enum class SearchKind { kBeam, kAnnealing };
std::string_view ToString(SearchKind kind);
SearchKind ParseSearchKind(std::string_view name);

struct ExploreOptions {
  SearchKind search = SearchKind::kBeam;
  BeamParams beam;
  AnnealParams anneal;
  Ranker ranker;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  // Per-sample target features (feature_distance scoring), parallel to samples.
  std::vector<std::vector<double>> target_features;
};

// kInvalidPairing for annealing with anything but the random ranker, and for
// lookup/guided rankers without their artifact.
void Validate(const ExploreOptions& options);

struct MetricsReport {
  std::size_t total = 0;
  std::size_t successes = 0;
  std::size_t errors = 0;
  double success_rate = 0.0;
  std::optional<double> avg_transforms;  // over successes only
  double avg_time = 0.0;                 // over all records
};

MetricsReport Summarize(std::span<const GenerationRecord> records);

// Runs the configured search per sample; sample i draws from
// DeriveSeed(seed, i), so results do not depend on the worker count.
// Per-sample failures land in GenerationRecord::error.
std::vector<GenerationRecord> ExploreBatch(const InputGraph& graph,
                                           const VertexEvaluator& evaluator,
                                           std::span<const InputState> samples,
                                           const ExploreOptions& options);

}  // namespace advgraph
