#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "advgraph/config.hpp"
#include "advgraph/error.hpp"
#include "advgraph/harness.hpp"
#include "advgraph/records.hpp"
#include "test_util.hpp"

namespace advgraph {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// A tiny tabular task in a fresh directory: two swappable categorical
// columns, one numeric column the attacker cannot touch.
class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("advgraph_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ostringstream csv;
    csv << "c0,c1,n,label\n";
    Rng rng(12);
    for (int i = 0; i < 120; ++i) {
      const auto a = UniformIndex(rng, 4), b = UniformIndex(rng, 3);
      const double n = UniformReal(rng);
      csv << "x" << a << ",y" << b << "," << n << "," << (a + b + (n > 0.5 ? 1 : 0) >= 4 ? 1 : 0) << "\n";
    }
    Spit(dir_ / "data.csv", csv.str());
    Spit(dir_ / "config.json", Config());
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string Config(const std::string& ranking = R"({"type":"brute_force"})",
                            const std::string& search = R"({"type":"beam_search","args":{"width":2,"depth":2}})") {
    return R"({
  "seed": 5,
  "multi_feature_input": true,
  "model": {"kind": "builtin_logistic", "path": "model.json", "epochs": 80},
  "feature_extractor": {"kind": "builtin_tabular_encoder"},
  "dataset": {"format": "csv", "columns": [
    {"name": "c0", "type": "categorical", "vocabulary": ["x0", "x1", "x2", "x3"]},
    {"name": "c1", "type": "categorical", "vocabulary": ["y0", "y1", "y2"]},
    {"name": "n", "type": "numeric"}]},
  "transformer_params": {
    "c0": {"transformer_type": "categorical", "field": "c0", "subtransformer_args": {"swap": {}}},
    "c1": {"transformer_type": "categorical", "field": "c1", "subtransformer_args": {"swap": {}}}
  },
  "global_constraints": [{"type": "max_total_actions", "n": 2}],
  "ranking_alg": )" + ranking + R"(,
  "search_alg": )" + search + R"(,
  "adversarial_training": {"mix_ratio": 0.5, "epochs": 20}
})";
  }

  ExplorerConfig Load() { return LoadConfig((dir_ / "config.json").string()); }
  std::string P(const std::string& name) { return (dir_ / name).string(); }

  void TrainModel(const ExplorerConfig& c) {
    std::ostringstream log;
    RunTrainModel(c, P("data.csv"), c.model.path, true, log);
  }

  fs::path dir_;
};

TEST(Config, ShippedDgaConfigIsValid) {
  auto c = LoadConfig(testing::SourceDir() + "/tools/configs/dga.json");
  EXPECT_EQ(c.transformer_params.size(), 1u);
  EXPECT_EQ(c.predict_function_name, "predict");
  EXPECT_EQ(c.search_alg.beam, (BeamParams{3, 3}));
  EXPECT_EQ(AlgorithmLabel(c), "Beam (Brute-Force)");
}

TEST_F(Workspace, ConfigErrors) {
  try {
    ParseConfig(Config(R"({"type":"lookup_table","args":{"table":"t.json"}})",
                       R"({"type":"simulated_annealing"})"),
                dir_.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidPairing);
  }
  std::string extra = Config();
  extra.insert(1, "\"colour\": 1,");
  try {
    ParseConfig(extra, dir_.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
  try {
    ParseConfig("{\n  \"seed\": ,\n}", ".", "cfg.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("cfg.json:2:"), std::string::npos) << e.what();
  }
  std::string bad_type = Config();
  bad_type.replace(bad_type.find("\"transformer_type\": \"categorical\""), 33,
                   "\"transformer_type\": \"wavelet\"");
  try {
    ParseConfig(bad_type, dir_.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownTransformerType);
  }
}

TEST_F(Workspace, SerializeRoundTrip) {
  auto c = Load();
  EXPECT_EQ(ParseConfig(SerializeConfig(c), "/"), c);
}

TEST_F(Workspace, DatasetStrictAndLenient) {
  auto c = Load();
  Spit(dir_ / "bad.csv", "c0,c1,n,label\nx0,y0,0.5,1\nx9,y0,0.5,0\nx1,y2,abc,1\nx1,y1,0.1,0\n");
  auto d = LoadConfiguredDataset(c, P("bad.csv"), false);
  EXPECT_EQ(d.inputs.size(), 2u);
  EXPECT_EQ(d.skipped_rows, 2u);
  try {
    LoadConfiguredDataset(c, P("bad.csv"), true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
  Spit(dir_ / "empty.csv", "c0,c1,n,label\n");
  TrainModel(c);
  std::ostringstream log;
  auto m = RunGenerate(c, P("empty.csv"), P("out.jsonl"), true, log);
  EXPECT_EQ(m.total, 0u);
  EXPECT_EQ(Slurp(dir_ / "out.jsonl"), "");
}

TEST_F(Workspace, RecordsRoundTrip) {
  GenerationRecord r;
  r.index = 3;
  r.original = InputState::VectorOf({InputState::Cat("x0"), InputState::Float(0.1)});
  r.final = InputState::VectorOf({InputState::Cat("x2"), InputState::Float(0.1)});
  r.edge_sequence = {{"c0", "swap", LabelParam{"x2"}}};
  r.success = true;
  r.transforms_used = 1;
  r.elapsed = 0.25;
  r.original_score = 0.1;
  r.best_score = 1.0 / 3.0;
  r.final_label = 1;
  const auto line = RecordToJson(r);
  auto back = RecordFromJson(line);
  EXPECT_EQ(RecordToJson(back), line);
  EXPECT_EQ(back.final, r.final);
  EXPECT_EQ(back.best_score, r.best_score);
  EXPECT_EQ(back.edge_sequence, r.edge_sequence);
  EXPECT_EQ(line.find("elapsed"), std::string::npos);
  WriteRecords(P("r.jsonl"), {r});
  WriteTimings(P("r.jsonl.timing.jsonl"), {r});
  EXPECT_EQ(ReadRecords(P("r.jsonl"), P("r.jsonl.timing.jsonl"))[0].elapsed, 0.25);
  EXPECT_THROW(RecordFromJson("{\"index\":"), Error);
}

TEST_F(Workspace, GenerateIsByteIdenticalAndReplays) {
  auto c = Load();
  TrainModel(c);
  std::ostringstream log;
  auto m = RunGenerate(c, P("data.csv"), P("a.jsonl"), true, log);
  EXPECT_EQ(m.total, 120u);
  EXPECT_NE(log.str().find("Success Rate"), std::string::npos);
  c.workers = 3;
  RunGenerate(c, P("data.csv"), P("b.jsonl"), true, log);
  EXPECT_EQ(Slurp(dir_ / "a.jsonl"), Slurp(dir_ / "b.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "a.jsonl.timing.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "a.jsonl.report.json"));

  auto rep = RunReplay(c, P("a.jsonl"));
  EXPECT_EQ(rep.checked, 120u);
  EXPECT_TRUE(rep.problems.empty()) << rep.problems.front();

  // A tampered record is caught.
  auto recs = ReadRecords(P("a.jsonl"));
  for (auto& r : recs) {
    if (r.success) {
      r.final = r.original;
      break;
    }
  }
  WriteRecords(P("t.jsonl"), recs);
  EXPECT_FALSE(RunReplay(c, P("t.jsonl")).problems.empty());
}

TEST_F(Workspace, TrainRankerIsReproducible) {
  Spit(dir_ / "config.json", Config(R"({"type":"lookup_table","args":{"table":"t.json","training_samples":50}})"));
  auto c = Load();
  TrainModel(c);
  std::ostringstream log;
  auto text = RunTrainRanker(c, P("data.csv"), P("t1.json"), true, log);
  RunTrainRanker(c, P("data.csv"), P("t2.json"), true, log);
  EXPECT_EQ(Slurp(dir_ / "t1.json"), Slurp(dir_ / "t2.json"));
  EXPECT_EQ(Slurp(dir_ / "t1.json"), text);
  EXPECT_FALSE(EdgeWeightTable::Parse(text).entries().empty());
  fs::copy_file(dir_ / "t1.json", dir_ / "t.json");
  EXPECT_EQ(RunGenerate(c, P("data.csv"), P("g.jsonl"), true, log).total, 120u);
}

TEST_F(Workspace, ZeroMixIsPlainTraining) {
  auto c = Load();
  auto data = LoadConfiguredDataset(c, P("data.csv"), true);
  Explorer ex(c, std::make_shared<LogisticModel>(8, 2));
  auto a = MakeBuiltinModel(c.model, ex.extractor().output_dim());
  auto b = a->Clone();
  TrainOptions t = c.model.train;
  t.epochs = 15;
  AdversarialTrain(*a, data.inputs, data.labels, ex.graph(), ex.extractor(), c.scoring_alg,
                   ex.Options(), 0.0, t.epochs, t);
  TrainBuiltin(*b, FeatureMatrix(ex.extractor(), data.inputs), data.labels, t);
  EXPECT_EQ(a->parameters(), b->parameters());
}

TEST_F(Workspace, AdvTrainWritesBothModels) {
  auto c = Load();
  std::ostringstream log;
  auto r = RunAdvTrain(c, P("data.csv"), P("hard.json"), true, log);
  EXPECT_TRUE(fs::exists(dir_ / "hard.json"));
  EXPECT_TRUE(fs::exists(dir_ / "hard.json.standard.json"));
  EXPECT_LE(r.standard_adversarial, r.standard_natural);
  EXPECT_LE(r.hardened_adversarial, r.hardened_natural);
  EXPECT_NE(log.str().find("Adversarial objects"), std::string::npos);
}

TEST(Overrides, CliBeatsEnvironmentBeatsFile) {
  ExplorerConfig c;
  c.seed = 1;
  ::setenv("ADVGRAPH_SEED", "2", 1);
  ApplyOverrides(c, {});
  EXPECT_EQ(c.seed, 2u);
  ApplyOverrides(c, {3, std::nullopt, false});
  EXPECT_EQ(c.seed, 3u);
  ::setenv("ADVGRAPH_WORKERS", "x", 1);
  EXPECT_THROW(ApplyOverrides(c, {}), Error);
  ::unsetenv("ADVGRAPH_SEED");
  ::unsetenv("ADVGRAPH_WORKERS");
}

}  // namespace
}  // namespace advgraph
