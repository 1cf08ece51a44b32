#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advgraph/edge.hpp"
#include "advgraph/random.hpp"
#include "advgraph/scoring.hpp"
#include "advgraph/transformer.hpp"

namespace advgraph {

enum class RankerKind { kRandom, kBruteForce, kLookup, kGuided };
std::string_view ToString(RankerKind kind);
RankerKind ParseRankerKind(std::string_view name);

struct RankedEntry {
  TransformationEdge edge;
  double estimated_score = 0.0;
  // Brute-Force only: the visited vertex.
  std::optional<InputState> resulting_state;
  std::optional<BudgetLedger> ledger;
  std::optional<VertexScore> score;
};

struct RankedEdges {
  std::vector<RankedEntry> entries;
  bool sorted = true;
  std::vector<TransformationEdge> unusable;  // Brute-Force apply/extract failures
};

// k edges uniformly without replacement, in draw order. kEmptyEdgeSet for no
// edges, kInvalidArgument for k == 0.
RankedEdges RankRandom(std::span<const TransformationEdge> edges, std::size_t k, Rng& rng);

// Applies every edge and scores the result with one batched model query.
// Edges that fail to apply or encode are moved to `unusable`.
RankedEdges RankBruteforce(const InputGraph& graph, const InputState& state,
                           const BudgetLedger& ledger, std::span<const TransformationEdge> edges,
                           const VertexEvaluator& evaluator, const SampleContext& ctx);

// ---------------------------------------------------------------------------

class EdgeWeightTable {
 public:
  struct Entry {
    double mean = 0.0;
    std::size_t count = 0;
    bool operator==(const Entry&) const = default;
  };

  void Observe(const EdgeKey& key, double score);
  const std::map<EdgeKey, Entry>& entries() const { return entries_; }
  std::optional<Entry> Find(const EdgeKey& key) const;
  // Mean over every observation; 0 for an empty table.
  double GlobalMean() const;
  std::size_t observations() const { return observations_; }

  std::string Serialize() const;
  static EdgeWeightTable Parse(const std::string& text);

  bool operator==(const EdgeWeightTable&) const = default;

 private:
  std::map<EdgeKey, Entry> entries_;
  double global_mean_ = 0.0;
  std::size_t observations_ = 0;
};

struct EdgeObservation {
  std::size_t sample = 0;
  TransformationEdge edge;
  double score = 0.0;
};

// One-hop brute-force exploration of each sample. `contexts` parallels
// `samples`. Every observation is appended to `log` when given.
EdgeWeightTable TrainLookupTable(const InputGraph& graph, std::span<const InputState> samples,
                                 std::span<const SampleContext> contexts,
                                 const VertexEvaluator& evaluator,
                                 std::vector<EdgeObservation>* log = nullptr);

// Stable sort by table mean; unseen keys take `default_weight`, or the
// table-wide mean when unset.
RankedEdges RankLookup(std::span<const TransformationEdge> edges, const EdgeWeightTable& table,
                       std::optional<double> default_weight = std::nullopt);

// ---------------------------------------------------------------------------

struct SourceMix {
  double ideal = 0.0;
  double policy = 0.0;
  double random = 0.0;
  bool operator==(const SourceMix&) const = default;
};

// Linear interpolation between `start` (episode 0) and `end` (last episode).
struct MixingSchedule {
  SourceMix start{0.8, 0.0, 0.2};
  SourceMix end{0.0, 0.9, 0.1};

  SourceMix At(std::size_t episode, std::size_t episodes) const;
  bool operator==(const MixingSchedule&) const = default;
};

void Validate(const MixingSchedule& schedule);  // kInvalidArgument

struct GuidedParams {
  std::size_t feature_dim = 64;  // hashed buckets, plus one bias term
  double gamma = 0.9;
  double learning_rate = 0.01;
  double blend = 0.5;  // weight of the ideal-sequence match in the reward
  std::size_t horizon = 3;
  std::size_t episodes = 10;
  std::uint64_t seed = 0;
  MixingSchedule schedule;

  bool operator==(const GuidedParams&) const = default;
};

// Hashed token features of a state: feature_dim buckets then a bias of 1.
std::vector<double> GuidedFeatures(const InputState& state, std::size_t feature_dim);

// Q-learning step for a linear value w.phi. Returns the TD error.
double TdUpdate(std::vector<double>& weights, std::span<const double> phi, double reward,
                double next_max, bool terminal, double learning_rate, double gamma);

class GuidedPolicy {
 public:
  GuidedPolicy() = default;
  explicit GuidedPolicy(GuidedParams params) : params_(std::move(params)) {}

  const GuidedParams& params() const { return params_; }
  const std::map<EdgeKey, std::vector<double>>& weights() const { return weights_; }
  std::vector<double>& MutableWeights(const EdgeKey& key);

  // kFeatureMapMismatch when phi or a stored weight vector has the wrong width.
  double Value(std::span<const double> phi, const TransformationEdge& edge) const;

  std::string Serialize() const;
  static GuidedPolicy Parse(const std::string& text);

  bool operator==(const GuidedPolicy&) const = default;

 private:
  GuidedParams params_;
  std::map<EdgeKey, std::vector<double>> weights_;
};

// Episodes are passes over `samples`. kInvalidArgument for zero episodes,
// kDivergence for non-finite weights.
GuidedPolicy TrainGuidedPolicy(const InputGraph& graph, std::span<const InputState> samples,
                               std::span<const SampleContext> contexts,
                               const VertexEvaluator& evaluator, const GuidedParams& params);

RankedEdges RankGuided(const InputState& state, std::span<const TransformationEdge> edges,
                       const GuidedPolicy& policy);

}  // namespace advgraph
