#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advgraph/config.hpp"
#include "advgraph/dataset.hpp"
#include "advgraph/search.hpp"

namespace advgraph {

// Command-line values win over ADVGRAPH_SEED / ADVGRAPH_WORKERS, which win
// over the config file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool strict_schema = false;
};

void ApplyOverrides(ExplorerConfig& config, const RunOverrides& overrides);

// "Beam (Brute-Force)", "SA (Random)", ...
std::string AlgorithmLabel(const ExplorerConfig& config);

struct TableRow {
  std::string model;
  std::string algorithm;
  MetricsReport report;
};

// Success Rate / Avg. # of Transforms / Avg. Time per sample.
std::string FormatMetricsTable(std::span<const TableRow> rows);

Dataset LoadConfiguredDataset(const ExplorerConfig& config, const std::string& path, bool strict);

// Writes `out` (records), `out`.timing.jsonl and `out`.report.json; prints
// the table to `log`.
MetricsReport RunGenerate(const ExplorerConfig& config, const std::string& dataset_path,
                          const std::string& out_path, bool strict, std::ostream& log);

// Lookup table or guided policy trained on a seeded random subset of
// `training_samples` rows. Returns the artifact text written to `out_path`.
std::string RunTrainRanker(const ExplorerConfig& config, const std::string& dataset_path,
                           const std::string& out_path, bool strict, std::ostream& log);

TrainReport RunTrainModel(const ExplorerConfig& config, const std::string& dataset_path,
                          const std::string& out_path, bool strict, std::ostream& log);

// Adversarial training: every epoch, a mix_ratio share of the rows (drawn
// afresh) is replaced by the best vertex a search finds against the current
// weights, keeping the row's label. With mix_ratio 0 this is TrainBuiltin.
void AdversarialTrain(TrainableModel& model, const std::vector<InputState>& inputs,
                      std::span<const std::size_t> labels, const InputGraph& graph,
                      const FeatureExtractor& extractor, const ScorerSpec& scorer,
                      const ExploreOptions& attack, double mix_ratio, std::size_t epochs,
                      const TrainOptions& train);

// Share of samples that are classified correctly and stay so under attack.
double AdversarialAccuracy(const Model& model, const std::vector<InputState>& inputs,
                           std::span<const std::size_t> labels, const InputGraph& graph,
                           const FeatureExtractor& extractor, const ScorerSpec& scorer,
                           const ExploreOptions& attack);

struct AdvTrainReport {
  double standard_natural = 0.0;
  double standard_adversarial = 0.0;
  double hardened_natural = 0.0;
  double hardened_adversarial = 0.0;
};

std::string FormatAdvTrainTable(const AdvTrainReport& report);

// Trains a standard and an adversarially trained model on the training split
// and attacks both on the test split. Writes the hardened model to
// `out_path` and the standard one to `out_path`.standard.json.
AdvTrainReport RunAdvTrain(const ExplorerConfig& config, const std::string& dataset_path,
                           const std::string& out_path, bool strict, std::ostream& log);

struct ReplayReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // records carrying an error
  std::vector<std::string> problems;
};

// Re-applies each record's edges and checks the final state, the prediction,
// the success flag and the constraints.
ReplayReport RunReplay(const ExplorerConfig& config, const std::string& records_path);

}  // namespace advgraph
