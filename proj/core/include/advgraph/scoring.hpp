#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advgraph/input_state.hpp"
#include "advgraph/model.hpp"

namespace advgraph {

enum class ScoreKind { kClassifierLoss, kFeatureDistance, kCustom };
enum class DistanceKind { kL2, kLp, kCosine };
enum class ScoreDirection { kMaximize, kMinimize };

std::string_view ToString(ScoreKind kind);
std::string_view ToString(DistanceKind kind);
std::string_view ToString(ScoreDirection direction);
ScoreKind ParseScoreKind(std::string_view name);
DistanceKind ParseDistanceKind(std::string_view name);
ScoreDirection ParseScoreDirection(std::string_view name);

struct ScorerSpec {
  ScoreKind kind = ScoreKind::kClassifierLoss;
  std::string loss = "cross_entropy";
  std::optional<std::size_t> target_label;  // targeted attack when set
  DistanceKind distance = DistanceKind::kL2;
  double p = 2.0;  // kLp only
  // Shared target for every sample; per-sample targets come through
  // SampleContext instead.
  std::optional<std::vector<double>> target_features;
  // The search maximises value; kMinimize negates the raw score.
  ScoreDirection direction = ScoreDirection::kMaximize;
  std::string custom_name;  // kCustom

  bool operator==(const ScorerSpec&) const = default;
};

// Throws kInvalidArgument for an inconsistent spec.
void Validate(const ScorerSpec& spec);

struct VertexScore {
  double value = 0.0;
  bool is_adversarial = false;
  std::size_t predicted_label = 0;
  bool degenerate = false;  // cosine of a zero perturbation

  bool operator==(const VertexScore&) const = default;
};

// kInvalidDistribution unless probs is non-negative and sums to 1 +- 1e-6;
// kLabelOutOfRange for y (or the target label) outside probs.
VertexScore ScoreClassifierLoss(std::span<const double> probs, std::size_t y,
                                const ScorerSpec& spec);

// is_adversarial is left false; the caller decides it from a model query.
// kDimensionMismatch when features, target and baseline disagree in size.
VertexScore ScoreFeatureDistance(std::span<const double> features,
                                 std::span<const double> target,
                                 const ScorerSpec& spec,
                                 std::optional<std::span<const double>> baseline = std::nullopt);

bool IsGoal(const VertexScore& score, std::size_t original_label, const ScorerSpec& spec);

// -log(max(p, 1e-12))
double CrossEntropy(std::span<const double> probs, std::size_t label);

// ---------------------------------------------------------------------------
// User-defined scorers

struct ScoreInputs {
  std::span<const double> probs;
  std::span<const double> features;
  std::size_t original_label = 0;
  const std::vector<double>* target_features = nullptr;
  const std::vector<double>* baseline = nullptr;
};

using CustomScorer = std::function<double(const ScoreInputs&)>;

class ScorerRegistry {
 public:
  static ScorerRegistry& Global();
  void Register(const std::string& name, CustomScorer scorer);  // kDuplicateName
  bool Contains(const std::string& name) const;
  CustomScorer Get(const std::string& name) const;  // kUnresolvedHook

 private:
  ScorerRegistry() = default;
  mutable std::mutex mu_;
  std::map<std::string, CustomScorer> scorers_;
};

// ---------------------------------------------------------------------------

// Per-sample facts the score depends on.
struct SampleContext {
  std::size_t original_label = 0;  // F(x), not the dataset label
  std::optional<std::vector<double>> target_features;
  std::optional<std::vector<double>> baseline;  // E(x)
};

// Scores vertices with exactly one model query per call; the score and the
// adversarial flag come from the same query.
class VertexEvaluator {
 public:
  VertexEvaluator(const FeatureExtractor& extractor, const Model& model, ScorerSpec spec,
                  const ScorerRegistry& registry = ScorerRegistry::Global());

  const ScorerSpec& spec() const { return spec_; }
  const Model& model() const { return model_; }
  const FeatureExtractor& extractor() const { return extractor_; }

  std::vector<double> Features(const InputState& state) const;

  // Queries the model on the original to fix y = argmax F(x).
  SampleContext MakeContext(const InputState& original,
                            std::optional<std::vector<double>> target_features = {}) const;

  VertexScore Evaluate(const InputState& state, const SampleContext& ctx) const;
  // One query for the whole batch.
  std::vector<VertexScore> EvaluateFeatures(const std::vector<std::vector<double>>& features,
                                            const SampleContext& ctx) const;

 private:
  VertexScore FromRow(std::span<const double> probs, std::span<const double> features,
                      const SampleContext& ctx) const;

  const FeatureExtractor& extractor_;
  const Model& model_;
  ScorerSpec spec_;
  CustomScorer custom_;
};

// One vector per non-empty line, whitespace or comma separated.
std::vector<std::vector<double>> LoadTargetFeatures(const std::string& path);

}  // namespace advgraph
