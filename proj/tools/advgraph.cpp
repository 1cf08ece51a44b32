#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "advgraph/config.hpp"
#include "advgraph/error.hpp"
#include "advgraph/harness.hpp"

namespace {

using namespace advgraph;

struct Common {
  std::string config;
  std::string dataset;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool strict = false;
};

void AddCommon(CLI::App* cmd, Common& c, bool dataset, bool out) {
  cmd->add_option("--config", c.config, "explorer config (JSON)")->required()->check(CLI::ExistingFile);
  if (dataset) cmd->add_option("--dataset", c.dataset, "input dataset")->required()->check(CLI::ExistingFile);
  if (out) cmd->add_option("--out", c.out, "output path")->required();
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--workers", c.workers, "override the worker count");
  cmd->add_flag("--strict-schema", c.strict, "fail on the first malformed dataset row");
}

ExplorerConfig Load(const Common& c) {
  ExplorerConfig config = LoadConfig(c.config);
  ApplyOverrides(config, RunOverrides{c.seed, c.workers, c.strict});
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint-preserving adversarial input generation over transformation graphs"};
  app.require_subcommand(1);

  Common gen, rank, adv, model, replay, validate;
  auto* g = app.add_subcommand("generate", "search every dataset row, write records and a report");
  AddCommon(g, gen, true, true);
  auto* r = app.add_subcommand("train-ranker", "train a lookup table or guided policy");
  AddCommon(r, rank, true, true);
  auto* a = app.add_subcommand("adv-train", "standard vs adversarial training, natural and adversarial accuracy");
  AddCommon(a, adv, true, true);
  auto* m = app.add_subcommand("train-model", "train the configured built-in model");
  AddCommon(m, model, true, true);
  auto* p = app.add_subcommand("replay", "re-apply recorded edges and verify states and predictions");
  AddCommon(p, replay, false, false);
  std::string records;
  p->add_option("--records", records, "results file from generate")->required()->check(CLI::ExistingFile);
  auto* v = app.add_subcommand("validate-config", "parse and validate a config, print it normalized");
  AddCommon(v, validate, false, false);

  SyntheticOptions synth;
  std::string synth_out;
  auto* d = app.add_subcommand("make-dataset", "write the seeded synthetic tabular dataset as CSV");
  d->add_option("--out", synth_out, "CSV path")->required();
  d->add_option("--rows", synth.rows, "row count")->capture_default_str();
  d->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  d->add_option("--numeric-columns", synth.numeric_columns)->capture_default_str();
  d->add_option("--categorical-weight", synth.categorical_weight)->capture_default_str();
  d->add_option("--numeric-weight", synth.numeric_weight)->capture_default_str();
  d->add_option("--noise", synth.noise)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) {
      RunGenerate(Load(gen), gen.dataset, gen.out, gen.strict, std::cout);
    } else if (*r) {
      RunTrainRanker(Load(rank), rank.dataset, rank.out, rank.strict, std::cout);
    } else if (*a) {
      RunAdvTrain(Load(adv), adv.dataset, adv.out, adv.strict, std::cout);
    } else if (*m) {
      RunTrainModel(Load(model), model.dataset, model.out, model.strict, std::cout);
    } else if (*p) {
      auto rep = RunReplay(Load(replay), records);
      for (const auto& s : rep.problems) std::cout << s << "\n";
      std::cout << rep.checked << " records checked, " << rep.skipped << " skipped, "
                << rep.problems.size() << " problems\n";
      return rep.problems.empty() ? 0 : 1;
    } else if (*v) {
      std::cout << SerializeConfig(Load(validate)) << "\n";
    } else if (*d) {
      WriteCsv(synth_out, SyntheticSchema(synth), MakeSyntheticDataset(synth));
    }
  } catch (const Error& e) {
    std::cerr << "advgraph: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "advgraph: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
