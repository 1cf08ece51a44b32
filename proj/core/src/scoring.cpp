#include "advgraph/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "advgraph/constraints.hpp"
#include "advgraph/error.hpp"

namespace advgraph {

std::string_view ToString(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kClassifierLoss: return "classifier_loss";
    case ScoreKind::kFeatureDistance: return "feature_distance";
    case ScoreKind::kCustom: return "custom";
  }
  return "?";
}

std::string_view ToString(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::kL2: return "l2";
    case DistanceKind::kLp: return "lp";
    case DistanceKind::kCosine: return "cosine_similarity";
  }
  return "?";
}

std::string_view ToString(ScoreDirection direction) {
  return direction == ScoreDirection::kMaximize ? "maximize" : "minimize";
}

ScoreKind ParseScoreKind(std::string_view name) {
  for (auto k : {ScoreKind::kClassifierLoss, ScoreKind::kFeatureDistance, ScoreKind::kCustom}) {
    if (ToString(k) == name) return k;
  }
  throw Error(ErrorCode::kParse, "unknown scoring kind " + std::string(name));
}

DistanceKind ParseDistanceKind(std::string_view name) {
  for (auto k : {DistanceKind::kL2, DistanceKind::kLp, DistanceKind::kCosine}) {
    if (ToString(k) == name) return k;
  }
  throw Error(ErrorCode::kParse, "unknown distance " + std::string(name));
}

ScoreDirection ParseScoreDirection(std::string_view name) {
  if (name == "maximize") return ScoreDirection::kMaximize;
  if (name == "minimize") return ScoreDirection::kMinimize;
  throw Error(ErrorCode::kParse, "unknown direction " + std::string(name));
}

void Validate(const ScorerSpec& spec) {
  if (spec.loss != "cross_entropy") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported loss " + spec.loss);
  }
  if (spec.kind == ScoreKind::kFeatureDistance && spec.distance == DistanceKind::kLp &&
      !(spec.p >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lp distance needs p >= 1");
  }
  if (spec.kind == ScoreKind::kCustom && spec.custom_name.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "custom scorer without a name");
  }
}

double CrossEntropy(std::span<const double> probs, std::size_t label) {
  return -std::log(std::clamp(probs[label], 1e-12, 1.0));
}

namespace {

void CheckDistribution(std::span<const double> probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::kInvalidDistribution, "negative or non-finite probability");
    }
    sum += p;
  }
  if (probs.empty() || std::abs(sum - 1.0) > 1e-6) {
    throw Error(ErrorCode::kInvalidDistribution, "probabilities sum to " + std::to_string(sum));
  }
}

double Signed(double v, const ScorerSpec& spec) {
  return spec.direction == ScoreDirection::kMaximize ? v : -v;
}

}  // namespace

VertexScore ScoreClassifierLoss(std::span<const double> probs, std::size_t y,
                                const ScorerSpec& spec) {
  CheckDistribution(probs);
  if (y >= probs.size()) {
    throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(y));
  }
  if (spec.target_label && *spec.target_label >= probs.size()) {
    throw Error(ErrorCode::kLabelOutOfRange, "target label " + std::to_string(*spec.target_label));
  }
  VertexScore s;
  s.predicted_label = Argmax(probs);
  if (spec.target_label) {
    s.value = Signed(-CrossEntropy(probs, *spec.target_label), spec);
  } else {
    s.value = Signed(CrossEntropy(probs, y), spec);
  }
  s.is_adversarial = IsGoal(s, y, spec);
  return s;
}

VertexScore ScoreFeatureDistance(std::span<const double> features,
                                 std::span<const double> target, const ScorerSpec& spec,
                                 std::optional<std::span<const double>> baseline) {
  if (features.size() != target.size() || (baseline && baseline->size() != features.size())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "features " + std::to_string(features.size()) + " vs target " +
                    std::to_string(target.size()));
  }
  VertexScore s;
  switch (spec.distance) {
    // Translation invariant, so a baseline does not change the value.
    case DistanceKind::kL2: s.value = -LpDistance(features, target, 2.0); break;
    case DistanceKind::kLp: s.value = -LpDistance(features, target, spec.p); break;
    case DistanceKind::kCosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < features.size(); ++i) {
        const double base = baseline ? (*baseline)[i] : 0.0;
        const double a = features[i] - base;
        const double b = target[i] - base;
        dot += a * b;
        na += a * a;
        nb += b * b;
      }
      if (na == 0.0 || nb == 0.0) {
        s.value = 0.0;
        s.degenerate = true;
      } else {
        s.value = dot / (std::sqrt(na) * std::sqrt(nb));
      }
      break;
    }
  }
  s.value = Signed(s.value, spec);
  return s;
}

bool IsGoal(const VertexScore& score, std::size_t original_label, const ScorerSpec& spec) {
  if (spec.target_label) return score.predicted_label == *spec.target_label;
  return score.predicted_label != original_label;
}

// ---------------------------------------------------------------------------

ScorerRegistry& ScorerRegistry::Global() {
  static ScorerRegistry registry;
  return registry;
}

void ScorerRegistry::Register(const std::string& name, CustomScorer scorer) {
  std::lock_guard lock(mu_);
  if (!scorers_.emplace(name, std::move(scorer)).second) {
    throw Error(ErrorCode::kDuplicateName, "scorer " + name);
  }
}

bool ScorerRegistry::Contains(const std::string& name) const {
  std::lock_guard lock(mu_);
  return scorers_.count(name) > 0;
}

CustomScorer ScorerRegistry::Get(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = scorers_.find(name);
  if (it == scorers_.end()) throw Error(ErrorCode::kUnresolvedHook, "scorer " + name);
  return it->second;
}

// ---------------------------------------------------------------------------

VertexEvaluator::VertexEvaluator(const FeatureExtractor& extractor, const Model& model,
                                 ScorerSpec spec, const ScorerRegistry& registry)
    : extractor_(extractor), model_(model), spec_(std::move(spec)) {
  Validate(spec_);
  if (spec_.kind == ScoreKind::kCustom) custom_ = registry.Get(spec_.custom_name);
  if (extractor_.output_dim() != model_.feature_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "extractor produces " + std::to_string(extractor_.output_dim()) +
                    " features, model expects " + std::to_string(model_.feature_dim()));
  }
}

std::vector<double> VertexEvaluator::Features(const InputState& state) const {
  return extractor_.Extract(state);
}

SampleContext VertexEvaluator::MakeContext(const InputState& original,
                                           std::optional<std::vector<double>> target) const {
  SampleContext ctx;
  auto features = Features(original);
  ctx.original_label = Argmax(model_.PredictOne(features));
  if (!target) target = spec_.target_features;
  if (spec_.kind == ScoreKind::kFeatureDistance && !target) {
    throw Error(ErrorCode::kInvalidArgument, "feature_distance scoring needs target features");
  }
  ctx.target_features = std::move(target);
  ctx.baseline = std::move(features);
  return ctx;
}

VertexScore VertexEvaluator::FromRow(std::span<const double> probs,
                                     std::span<const double> features,
                                     const SampleContext& ctx) const {
  switch (spec_.kind) {
    case ScoreKind::kClassifierLoss:
      return ScoreClassifierLoss(probs, ctx.original_label, spec_);
    case ScoreKind::kFeatureDistance: {
      if (!ctx.target_features) {
        throw Error(ErrorCode::kInvalidArgument, "feature_distance scoring needs target features");
      }
      std::optional<std::span<const double>> base;
      if (ctx.baseline) base = std::span<const double>(*ctx.baseline);
      VertexScore s = ScoreFeatureDistance(features, *ctx.target_features, spec_, base);
      s.predicted_label = Argmax(probs);
      s.is_adversarial = IsGoal(s, ctx.original_label, spec_);
      return s;
    }
    case ScoreKind::kCustom: {
      ScoreInputs in{probs, features, ctx.original_label,
                     ctx.target_features ? &*ctx.target_features : nullptr,
                     ctx.baseline ? &*ctx.baseline : nullptr};
      VertexScore s;
      s.value = Signed(custom_(in), spec_);
      if (!std::isfinite(s.value)) {
        throw Error(ErrorCode::kInvalidArgument, "custom scorer returned a non-finite value");
      }
      s.predicted_label = Argmax(probs);
      s.is_adversarial = IsGoal(s, ctx.original_label, spec_);
      return s;
    }
  }
  return {};
}

VertexScore VertexEvaluator::Evaluate(const InputState& state, const SampleContext& ctx) const {
  return EvaluateFeatures({Features(state)}, ctx).front();
}

std::vector<VertexScore> VertexEvaluator::EvaluateFeatures(
    const std::vector<std::vector<double>>& features, const SampleContext& ctx) const {
  if (features.empty()) return {};
  Matrix probs = model_.Predict(Matrix::FromRows(features));
  std::vector<VertexScore> out;
  out.reserve(features.size());
  for (std::size_t r = 0; r < features.size(); ++r) {
    out.push_back(FromRow(probs.row(r), features[r], ctx));
  }
  return out;
}

std::vector<std::vector<double>> LoadTargetFeatures(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParse, path + ":" + std::to_string(lineno) + ": bad number '" +
                                           tok + "'");
      }
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kDimensionMismatch, path + ":" + std::to_string(lineno));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace advgraph
