#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advgraph/dataset.hpp"
#include "advgraph/model.hpp"
#include "advgraph/ranking.hpp"
#include "advgraph/scoring.hpp"
#include "advgraph/search.hpp"
#include "advgraph/transformer.hpp"

namespace advgraph {

struct ModelConfig {
  ModelKind kind = ModelKind::kBuiltinLogistic;
  std::string path;  // built-in weights file
  std::size_t hidden = 16;
  TrainOptions train;
  std::vector<std::string> command;  // external process argv
  std::size_t num_classes = 2;
  std::size_t feature_dim = 0;  // external only; built-ins take it from the extractor
  std::size_t timeout_ms = 10000;
  bool operator==(const ModelConfig&) const = default;
};

enum class ExtractorChoice { kIdentity, kTabularEncoder, kRegisteredHook, kExternalProcess };
std::string_view ToString(ExtractorChoice choice);

struct ExtractorConfig {
  ExtractorChoice kind = ExtractorChoice::kTabularEncoder;
  std::string name;  // registered hook
  std::size_t output_dim = 0;  // identity / external
  std::vector<std::string> command;
  bool operator==(const ExtractorConfig&) const = default;
};

struct DependencyConfig {
  std::string name;
  std::string kind;  // registry key, e.g. "sum"
  std::vector<std::size_t> reads;
  std::vector<std::size_t> writes;
  bool operator==(const DependencyConfig&) const = default;
};

struct RankingConfig {
  RankerKind type = RankerKind::kBruteForce;
  std::string table;  // lookup artifact
  std::optional<double> default_weight;
  std::size_t training_samples = 500;
  std::string policy;  // guided artifact
  GuidedParams guided;
  bool operator==(const RankingConfig&) const = default;
};

struct SearchConfig {
  SearchKind type = SearchKind::kBeam;
  BeamParams beam;
  AnnealParams anneal;
  bool operator==(const SearchConfig&) const = default;
};

struct AdvTrainConfig {
  double mix_ratio = 0.5;
  std::size_t epochs = 30;
  double test_fraction = 0.3;
  std::size_t attack_samples = 0;  // 0 = the whole test split
  bool operator==(const AdvTrainConfig&) const = default;
};

struct ExplorerConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool multi_feature_input = false;
  std::string predict_function_name = "predict";
  ModelConfig model;
  ExtractorConfig feature_extractor;
  DatasetSchema dataset;
  std::vector<TransformerSpec> transformer_params;  // declaration order
  std::vector<ConstraintSpec> global_constraints;
  std::vector<DependencyConfig> dependencies;
  ScorerSpec scoring_alg;
  std::string target_features;  // per-sample target file (feature_distance)
  RankingConfig ranking_alg;
  SearchConfig search_alg;
  AdvTrainConfig adversarial_training;

  bool operator==(const ExplorerConfig&) const = default;
};

// Parses and validates. Relative paths resolve against `base_dir`. Errors:
// kParse (with line:column or key path), kUnknownTransformerType,
// kInvalidPairing, kUnresolvedHook, kUnknownProcessor.
ExplorerConfig ParseConfig(std::string_view text, const std::string& base_dir = ".",
                           const std::string& source = "<config>");
ExplorerConfig LoadConfig(const std::string& path);
std::string SerializeConfig(const ExplorerConfig& config);

// Everything a run needs, built from a config. Members refer to each other,
// so an Explorer stays where it was built.
class Explorer {
 public:
  // `model` overrides the configured model (used for freshly trained ones).
  explicit Explorer(ExplorerConfig config, std::shared_ptr<const Model> model = nullptr);
  Explorer(const Explorer&) = delete;
  Explorer& operator=(const Explorer&) = delete;

  const ExplorerConfig& config() const { return config_; }
  const InputGraph& graph() const { return *graph_; }
  const FeatureExtractor& extractor() const { return *extractor_; }
  const Model& model() const { return *model_; }
  const VertexEvaluator& evaluator() const { return *evaluator_; }

  // Search options with ranker artifacts loaded from the configured paths.
  // Missing artifacts are left unset (ExploreBatch rejects them).
  ExploreOptions Options() const;

 private:
  ExplorerConfig config_;
  std::unique_ptr<InputGraph> graph_;
  std::unique_ptr<FeatureExtractor> extractor_;
  std::shared_ptr<ProcessChannel> channel_;
  std::shared_ptr<const Model> model_;
  std::unique_ptr<VertexEvaluator> evaluator_;
};

// Extractor of a config, without a model.
std::unique_ptr<FeatureExtractor> MakeExtractor(const ExplorerConfig& config,
                                                std::shared_ptr<ProcessChannel> channel = nullptr);
InputGraph MakeGraph(const ExplorerConfig& config);
// Untrained built-in model sized for `feature_dim`.
std::unique_ptr<TrainableModel> MakeBuiltinModel(const ModelConfig& config, std::size_t feature_dim);

}  // namespace advgraph
