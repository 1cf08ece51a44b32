#include "advgraph/harness.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "advgraph/error.hpp"
#include "advgraph/random.hpp"
#include "advgraph/records.hpp"

namespace advgraph {
namespace {

std::optional<std::uint64_t> EnvNumber(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  unsigned long long n = std::strtoull(v, &end, 10);
  if (errno != 0 || *end != '\0' || v[0] == '-') {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " is not a non-negative integer");
  }
  return n;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

std::string Percent(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << v * 100.0 << "%";
  return s.str();
}

std::string Fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string RenderTable(const std::vector<std::string>& head,
                        const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    width[c] = head[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    out << "|";
    for (std::size_t c = 0; c < cells.size(); ++c) {
      out << " " << cells[c] << std::string(width[c] - cells[c].size(), ' ') << " |";
    }
    out << "\n";
  };
  line(head);
  out << "|";
  for (auto w : width) out << std::string(w + 2, '-') << "|";
  out << "\n";
  for (const auto& r : rows) line(r);
  return out.str();
}

std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  Shuffle(idx, rng);
  idx.resize(std::min(n, k));
  return idx;
}

std::vector<SampleContext> Contexts(const VertexEvaluator& evaluator,
                                    const std::vector<InputState>& samples,
                                    const std::vector<std::vector<double>>& targets) {
  std::vector<SampleContext> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::optional<std::vector<double>> t;
    if (!targets.empty()) t = targets[i];
    out.push_back(evaluator.MakeContext(samples[i], std::move(t)));
  }
  return out;
}

void RequireLabels(const Dataset& d, const std::string& path) {
  if (d.labels.size() != d.inputs.size()) {
    throw Error(ErrorCode::kSchemaMismatch, path + ": labels are required here");
  }
}

}  // namespace

void ApplyOverrides(ExplorerConfig& config, const RunOverrides& o) {
  if (auto s = EnvNumber("ADVGRAPH_SEED")) config.seed = *s;
  if (auto w = EnvNumber("ADVGRAPH_WORKERS")) config.workers = static_cast<std::size_t>(*w);
  if (o.seed) config.seed = *o.seed;
  if (o.workers) config.workers = *o.workers;
  if (config.workers == 0) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  config.ranking_alg.guided.seed = config.seed;
}

std::string AlgorithmLabel(const ExplorerConfig& config) {
  std::string ranker;
  switch (config.ranking_alg.type) {
    case RankerKind::kRandom: ranker = "Random"; break;
    case RankerKind::kBruteForce: ranker = "Brute-Force"; break;
    case RankerKind::kLookup: ranker = "Lookup Table"; break;
    case RankerKind::kGuided: ranker = "Model-Guided"; break;
  }
  return (config.search_alg.type == SearchKind::kBeam ? "Beam (" : "SA (") + ranker + ")";
}

std::string FormatMetricsTable(std::span<const TableRow> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.model, r.algorithm, Percent(r.report.success_rate),
                     r.report.avg_transforms ? Fixed(*r.report.avg_transforms, 2) : "n/a",
                     Fixed(r.report.avg_time, 3) + " s"});
  }
  return RenderTable({"Model", "Algorithm", "Success Rate", "Avg. # of Transforms",
                      "Avg. Time per sample"},
                     cells);
}

Dataset LoadConfiguredDataset(const ExplorerConfig& config, const std::string& path, bool strict) {
  Dataset d = LoadDataset(path, config.dataset, strict);
  for (auto l : d.labels) {
    if (l >= config.model.num_classes) {
      throw Error(ErrorCode::kSchemaMismatch,
                  path + ": label " + std::to_string(l) + " outside the model's classes");
    }
  }
  return d;
}

MetricsReport RunGenerate(const ExplorerConfig& config, const std::string& dataset_path,
                          const std::string& out_path, bool strict, std::ostream& log) {
  Explorer explorer(config);
  ExploreOptions options = explorer.Options();
  Dataset data = LoadConfiguredDataset(config, dataset_path, strict);
  if (data.skipped_rows) log << "skipped " << data.skipped_rows << " malformed rows\n";
  auto records = ExploreBatch(explorer.graph(), explorer.evaluator(), data.inputs, options);
  WriteRecords(out_path, records);
  WriteTimings(out_path + ".timing.jsonl", records);
  MetricsReport report = Summarize(records);
  WriteText(out_path + ".report.json", ReportToJson(report) + "\n");
  TableRow row{std::string(ToString(config.model.kind)), AlgorithmLabel(config), report};
  log << FormatMetricsTable({&row, 1});
  if (report.errors) log << report.errors << " samples failed; see the error field in " << out_path << "\n";
  return report;
}

std::string RunTrainRanker(const ExplorerConfig& config, const std::string& dataset_path,
                           const std::string& out_path, bool strict, std::ostream& log) {
  const auto& r = config.ranking_alg;
  if (r.type != RankerKind::kLookup && r.type != RankerKind::kGuided) {
    throw Error(ErrorCode::kInvalidArgument,
                "train-ranker needs ranking_alg lookup_table or model_guided, got " +
                    std::string(ToString(r.type)));
  }
  Explorer explorer(config);
  Dataset data = LoadConfiguredDataset(config, dataset_path, strict);
  if (data.inputs.empty()) throw Error(ErrorCode::kInvalidArgument, dataset_path + " is empty");
  std::vector<std::vector<double>> all_targets;
  if (!config.target_features.empty()) all_targets = LoadTargetFeatures(config.target_features);

  std::vector<InputState> samples;
  std::vector<std::vector<double>> targets;
  for (auto i : SampleIndices(data.inputs.size(), r.training_samples, config.seed)) {
    samples.push_back(data.inputs[i]);
    if (!all_targets.empty()) targets.push_back(all_targets.at(i));
  }
  auto contexts = Contexts(explorer.evaluator(), samples, targets);
  std::string text;
  if (r.type == RankerKind::kLookup) {
    auto table = TrainLookupTable(explorer.graph(), samples, contexts, explorer.evaluator());
    log << "lookup table: " << table.entries().size() << " keys from " << table.observations()
        << " observations over " << samples.size() << " samples\n";
    text = table.Serialize();
  } else {
    GuidedParams p = r.guided;
    p.seed = config.seed;
    auto policy = TrainGuidedPolicy(explorer.graph(), samples, contexts, explorer.evaluator(), p);
    log << "guided policy: " << policy.weights().size() << " action keys, " << p.episodes
        << " episodes over " << samples.size() << " samples\n";
    text = policy.Serialize();
  }
  text += "\n";
  WriteText(out_path, text);
  return text;
}

TrainReport RunTrainModel(const ExplorerConfig& config, const std::string& dataset_path,
                          const std::string& out_path, bool strict, std::ostream& log) {
  auto extractor = MakeExtractor(config);
  Dataset data = LoadConfiguredDataset(config, dataset_path, strict);
  RequireLabels(data, dataset_path);
  Matrix x = FeatureMatrix(*extractor, data.inputs);
  auto model = MakeBuiltinModel(config.model, extractor->output_dim());
  TrainReport report = TrainBuiltin(*model, x, data.labels, config.model.train);
  SaveModel(*model, out_path);
  log << ToString(model->kind()) << ": loss " << Fixed(report.final_loss, 4) << ", training accuracy "
      << Percent(report.train_accuracy) << " on " << data.inputs.size() << " rows\n";
  return report;
}

void AdversarialTrain(TrainableModel& model, const std::vector<InputState>& inputs,
                      std::span<const std::size_t> labels, const InputGraph& graph,
                      const FeatureExtractor& extractor, const ScorerSpec& scorer,
                      const ExploreOptions& attack, double mix_ratio, std::size_t epochs,
                      const TrainOptions& train) {
  if (inputs.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (labels.size() != inputs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "labels do not align with rows");
  }
  if (!(mix_ratio >= 0.0 && mix_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mix_ratio must lie in [0, 1]");
  }
  const Matrix x = FeatureMatrix(extractor, inputs);
  // Same stream as TrainBuiltin; adversarial choices draw from their own.
  Rng shuffle_rng(train.seed);
  Rng pick_rng(DeriveSeed(train.seed, 0x5eed));
  const auto n_adv = static_cast<std::size_t>(
      std::llround(mix_ratio * static_cast<double>(inputs.size())));
  VertexEvaluator evaluator(extractor, model, scorer);

  for (std::size_t e = 0; e < epochs; ++e) {
    Matrix xe = x;
    if (n_adv > 0) {
      std::vector<std::size_t> order(inputs.size());
      std::iota(order.begin(), order.end(), 0);
      Shuffle(order, pick_rng);
      order.resize(n_adv);
      std::vector<InputState> chosen;
      for (auto i : order) chosen.push_back(inputs[i]);
      ExploreOptions o = attack;
      o.seed = DeriveSeed(attack.seed, e + 1);
      o.target_features.clear();
      auto records = ExploreBatch(graph, evaluator, chosen, o);
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (records[k].error) continue;
        auto f = extractor.Extract(records[k].final);
        std::copy(f.begin(), f.end(), xe.row(order[k]).begin());
      }
    }
    TrainEpoch(model, xe, labels, train, shuffle_rng);
  }
}

double AdversarialAccuracy(const Model& model, const std::vector<InputState>& inputs,
                           std::span<const std::size_t> labels, const InputGraph& graph,
                           const FeatureExtractor& extractor, const ScorerSpec& scorer,
                           const ExploreOptions& attack) {
  if (inputs.empty()) return 0.0;
  VertexEvaluator evaluator(extractor, model, scorer);
  auto records = ExploreBatch(graph, evaluator, inputs, attack);
  std::size_t robust = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& r = records[i];
    if (r.error) continue;
    if (r.original_label == labels[i] && r.final_label == labels[i]) ++robust;
  }
  return static_cast<double>(robust) / static_cast<double>(inputs.size());
}

std::string FormatAdvTrainTable(const AdvTrainReport& r) {
  return RenderTable({"Training", "Natural Accuracy", "Adversarial Accuracy"},
                     {{"Standard", Percent(r.standard_natural), Percent(r.standard_adversarial)},
                      {"Adversarial objects", Percent(r.hardened_natural),
                       Percent(r.hardened_adversarial)}});
}

AdvTrainReport RunAdvTrain(const ExplorerConfig& config, const std::string& dataset_path,
                           const std::string& out_path, bool strict, std::ostream& log) {
  if (config.model.kind == ModelKind::kExternalProcess) {
    throw Error(ErrorCode::kInvalidArgument, "adv-train needs a built-in model");
  }
  const auto& at = config.adversarial_training;
  Dataset data = LoadConfiguredDataset(config, dataset_path, strict);
  RequireLabels(data, dataset_path);
  Split split = SplitDataset(data, at.test_fraction, config.seed);
  if (at.attack_samples && split.test.inputs.size() > at.attack_samples) {
    split.test.inputs.resize(at.attack_samples);
    split.test.labels.resize(at.attack_samples);
  }

  auto extractor = MakeExtractor(config);
  const Matrix x_train = FeatureMatrix(*extractor, split.train.inputs);
  const Matrix x_test = FeatureMatrix(*extractor, split.test.inputs);

  std::shared_ptr<TrainableModel> standard = MakeBuiltinModel(config.model, extractor->output_dim());
  std::shared_ptr<TrainableModel> hardened = standard->Clone();
  TrainOptions train = config.model.train;
  TrainBuiltin(*standard, x_train, split.train.labels, train);

  // The attack as configured, ranker artifacts included.
  Explorer explorer(config, standard);
  ExploreOptions attack = explorer.Options();
  attack.target_features.clear();

  AdversarialTrain(*hardened, split.train.inputs, split.train.labels, explorer.graph(), *extractor,
                   config.scoring_alg, attack, at.mix_ratio, at.epochs, train);

  AdvTrainReport r;
  r.standard_natural = Accuracy(*standard, x_test, split.test.labels);
  r.hardened_natural = Accuracy(*hardened, x_test, split.test.labels);
  r.standard_adversarial = AdversarialAccuracy(*standard, split.test.inputs, split.test.labels,
                                               explorer.graph(), *extractor, config.scoring_alg, attack);
  r.hardened_adversarial = AdversarialAccuracy(*hardened, split.test.inputs, split.test.labels,
                                               explorer.graph(), *extractor, config.scoring_alg, attack);
  SaveModel(*hardened, out_path);
  SaveModel(*standard, out_path + ".standard.json");
  log << FormatAdvTrainTable(r);
  return r;
}

ReplayReport RunReplay(const ExplorerConfig& config, const std::string& records_path) {
  Explorer explorer(config);
  ReplayReport rep;
  for (const auto& r : ReadRecords(records_path)) {
    const std::string at = "record " + std::to_string(r.index) + ": ";
    if (r.error) {
      ++rep.skipped;
      continue;
    }
    ++rep.checked;
    try {
      Successor s = explorer.graph().Replay(r.original, r.edge_sequence);
      if (!(s.state == r.final)) {
        rep.problems.push_back(at + "replayed state " + ToString(s.state) + " differs from " +
                               ToString(r.final));
        continue;
      }
      for (const auto& v : explorer.graph().CheckFinal(s.state, r.original, &s.ledger)) {
        rep.problems.push_back(at + "violates " + v.constraint + ": " + v.detail);
      }
      const auto& ev = explorer.evaluator();
      const std::size_t y = Argmax(explorer.model().PredictOne(ev.Features(r.original)));
      const std::size_t label = Argmax(explorer.model().PredictOne(ev.Features(s.state)));
      if (y != r.original_label || label != r.final_label) {
        rep.problems.push_back(at + "prediction differs from the recorded one");
      }
      VertexScore vs;
      vs.predicted_label = label;
      if (IsGoal(vs, y, ev.spec()) != r.success) {
        rep.problems.push_back(at + "success flag does not match the prediction");
      }
    } catch (const Error& e) {
      rep.problems.push_back(at + e.what());
    }
  }
  return rep;
}

}  // namespace advgraph
