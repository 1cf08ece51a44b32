#include "advgraph/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "advgraph/error.hpp"
#include "json_io.hpp"

namespace advgraph {
namespace {

using detail::json;
namespace fs = std::filesystem;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string StripCode(const Error& e) {
  std::string msg = e.what();
  const std::string head = std::string(ToString(e.code())) + ": ";
  if (msg.rfind(head, 0) == 0) msg.erase(0, head.size());
  return msg;
}

[[noreturn]] void Rethrow(const Error& e, const std::string& where) {
  throw Error(e.code(), where + ": " + StripCode(e));
}

void OnlyKeys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw Error(ErrorCode::kParse, where + ": unknown key '" + k + "'");
  }
}

template <typename T>
T Get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kParse, where + "." + key + ": wrong type");
  }
}

std::string Resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return fs::absolute(fs::path(base) / p).lexically_normal().string();
}

// --- sections ---------------------------------------------------------------

ModelConfig ParseModel(const json& j, std::uint64_t seed, const std::string& base) {
  const std::string w = "model";
  OnlyKeys(j, {"kind", "path", "hidden", "epochs", "learning_rate", "batch_size", "train_seed",
               "command", "num_classes", "feature_dim", "timeout_ms"},
           w);
  ModelConfig m;
  m.kind = ParseModelKind(Get<std::string>(j, "kind", w, "builtin_logistic"));
  m.path = Resolve(base, Get<std::string>(j, "path", w, ""));
  m.hidden = Get<std::size_t>(j, "hidden", w, m.hidden);
  m.train.epochs = Get<std::size_t>(j, "epochs", w, m.train.epochs);
  m.train.learning_rate = Get<double>(j, "learning_rate", w, m.train.learning_rate);
  m.train.batch_size = Get<std::size_t>(j, "batch_size", w, m.train.batch_size);
  m.train.seed = Get<std::uint64_t>(j, "train_seed", w, seed);
  m.command = Get<std::vector<std::string>>(j, "command", w, {});
  m.num_classes = Get<std::size_t>(j, "num_classes", w, m.num_classes);
  m.feature_dim = Get<std::size_t>(j, "feature_dim", w, 0);
  m.timeout_ms = Get<std::size_t>(j, "timeout_ms", w, m.timeout_ms);
  if (m.num_classes < 2) throw Error(ErrorCode::kParse, "model.num_classes must be >= 2");
  if (m.kind == ModelKind::kExternalProcess && m.command.empty()) {
    throw Error(ErrorCode::kParse, "model.command is required for external_process");
  }
  return m;
}

ExtractorChoice ParseExtractorChoice(const std::string& s) {
  for (auto c : {ExtractorChoice::kIdentity, ExtractorChoice::kTabularEncoder,
                 ExtractorChoice::kRegisteredHook, ExtractorChoice::kExternalProcess}) {
    if (ToString(c) == s) return c;
  }
  throw Error(ErrorCode::kParse, "feature_extractor.kind: unknown '" + s + "'");
}

ExtractorConfig ParseExtractor(const json& j) {
  const std::string w = "feature_extractor";
  OnlyKeys(j, {"kind", "name", "output_dim", "command"}, w);
  ExtractorConfig e;
  e.kind = ParseExtractorChoice(Get<std::string>(j, "kind", w, "builtin_tabular_encoder"));
  e.name = Get<std::string>(j, "name", w, "");
  e.output_dim = Get<std::size_t>(j, "output_dim", w, 0);
  e.command = Get<std::vector<std::string>>(j, "command", w, {});
  if (e.kind == ExtractorChoice::kRegisteredHook && !ExtractorRegistry::Global().Contains(e.name)) {
    throw Error(ErrorCode::kUnresolvedHook, "feature_extractor.name: no hook '" + e.name + "'");
  }
  if (e.kind == ExtractorChoice::kExternalProcess && (e.command.empty() || e.output_dim == 0)) {
    throw Error(ErrorCode::kParse, "feature_extractor: external_process needs command and output_dim");
  }
  if (e.kind == ExtractorChoice::kIdentity && e.output_dim == 0) {
    throw Error(ErrorCode::kParse, "feature_extractor: identity needs output_dim");
  }
  return e;
}

DatasetSchema ParseSchema(const json& j, const std::string& base) {
  const std::string w = "dataset";
  OnlyKeys(j, {"format", "columns", "label_column", "header", "labels_file", "class_names"}, w);
  DatasetSchema s;
  const auto format = Get<std::string>(j, "format", w, "csv");
  if (format == "csv") {
    s.format = DatasetFormat::kCsv;
  } else if (format == "text") {
    s.format = DatasetFormat::kText;
  } else {
    throw Error(ErrorCode::kParse, "dataset.format: expected csv or text");
  }
  if (j.contains("columns")) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < j["columns"].size(); ++i) {
      const auto& c = j["columns"][i];
      const std::string cw = w + ".columns[" + std::to_string(i) + "]";
      OnlyKeys(c, {"name", "type", "vocabulary"}, cw);
      ColumnSpec col;
      col.name = Get<std::string>(c, "name", cw, "");
      if (col.name.empty() || !names.insert(col.name).second) {
        throw Error(ErrorCode::kParse, cw + ": missing or duplicate name");
      }
      try {
        col.type = ParseColumnType(Get<std::string>(c, "type", cw, "numeric"));
      } catch (const Error& e) {
        Rethrow(e, cw);
      }
      col.vocabulary = Get<std::vector<std::string>>(c, "vocabulary", cw, {});
      if (col.type == ColumnType::kCategorical && col.vocabulary.empty()) {
        throw Error(ErrorCode::kParse, cw + ": categorical column without vocabulary");
      }
      s.columns.push_back(std::move(col));
    }
  }
  s.label_column = Get<std::string>(j, "label_column", w, s.label_column);
  s.header = Get<bool>(j, "header", w, true);
  s.labels_file = Resolve(base, Get<std::string>(j, "labels_file", w, ""));
  s.class_names = Get<std::vector<std::string>>(j, "class_names", w, {});
  return s;
}

SubtransformerArgs ParseAction(const json& j, const std::string& action, const std::string& w) {
  OnlyKeys(j, {"action", "charset", "relative_steps", "absolute_steps", "options"}, w);
  SubtransformerArgs a;
  a.action = action.empty() ? Get<std::string>(j, "action", w, "") : action;
  if (a.action.empty()) throw Error(ErrorCode::kParse, w + ": missing action");
  a.charset = Get<std::string>(j, "charset", w, "");
  a.relative_steps = Get<std::vector<double>>(j, "relative_steps", w, {});
  a.absolute_steps = Get<std::vector<double>>(j, "absolute_steps", w, {});
  a.options = Get<std::map<std::string, std::string>>(j, "options", w, {});
  return a;
}

TransformerSpec ParseTransformer(const std::string& name, const json& j, const DatasetSchema& schema) {
  const std::string w = "transformer_params." + name;
  OnlyKeys(j, {"name", "field", "transformer_type", "custom_type", "vocabulary", "onehot_size",
               "subtransformer_args", "input_constraints", "input_processor_name"},
           w);
  TransformerSpec t;
  t.name = name;
  try {
    t.type = ParseTransformerType(Get<std::string>(j, "transformer_type", w, ""));
  } catch (const Error& e) {
    Rethrow(e, w + ".transformer_type");
  }
  t.custom_type = Get<std::string>(j, "custom_type", w, "");
  if (j.contains("field")) {
    const auto& f = j["field"];
    if (f.is_number_unsigned()) {
      t.field = f.get<std::size_t>();
    } else if (f.is_string()) {
      auto it = std::find_if(schema.columns.begin(), schema.columns.end(),
                             [&](const ColumnSpec& c) { return c.name == f.get<std::string>(); });
      if (it == schema.columns.end()) {
        throw Error(ErrorCode::kParse, w + ".field: no dataset column '" + f.get<std::string>() + "'");
      }
      t.field = static_cast<std::size_t>(it - schema.columns.begin());
    } else {
      throw Error(ErrorCode::kParse, w + ".field: expected an index or a column name");
    }
    if (!schema.columns.empty() && *t.field >= schema.columns.size()) {
      throw Error(ErrorCode::kParse, w + ".field: index beyond the dataset columns");
    }
  }
  t.vocabulary = Get<std::vector<std::string>>(j, "vocabulary", w, {});
  if (t.vocabulary.empty() && t.type == TransformerType::kCategorical && t.field &&
      *t.field < schema.columns.size()) {
    t.vocabulary = schema.columns[*t.field].vocabulary;
  }
  t.onehot_size = Get<std::size_t>(j, "onehot_size", w, 0);
  if (j.contains("subtransformer_args")) {
    const auto& s = j["subtransformer_args"];
    if (s.is_array()) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        t.subtransformer_args.push_back(
            ParseAction(s[i], "", w + ".subtransformer_args[" + std::to_string(i) + "]"));
      }
    } else if (s.is_object()) {
      for (const auto& [action, args] : s.items()) {
        t.subtransformer_args.push_back(
            ParseAction(args.is_null() ? json::object() : args, action,
                        w + ".subtransformer_args." + action));
      }
    } else {
      throw Error(ErrorCode::kParse, w + ".subtransformer_args: expected a list or an object");
    }
  }
  if (j.contains("input_constraints")) {
    const auto& c = j["input_constraints"];
    for (std::size_t i = 0; i < c.size(); ++i) {
      t.input_constraints.push_back(
          detail::ConstraintFrom(c[i], w + ".input_constraints[" + std::to_string(i) + "]"));
    }
  }
  t.input_processor_name = Get<std::string>(j, "input_processor_name", w, "");
  try {
    ValidateSpec(t);
  } catch (const Error& e) {
    Rethrow(e, w);
  }
  return t;
}

RankingConfig ParseRanking(const json& j, std::uint64_t seed, const std::string& base,
                           std::optional<bool>& multi) {
  const std::string w = "ranking_alg";
  OnlyKeys(j, {"type", "args", "multi_feature_input"}, w);
  if (j.contains("multi_feature_input")) multi = Get<bool>(j, "multi_feature_input", w, false);
  RankingConfig r;
  try {
    r.type = ParseRankerKind(Get<std::string>(j, "type", w, "brute_force"));
  } catch (const Error& e) {
    Rethrow(e, w + ".type");
  }
  const json args = j.value("args", json::object());
  const std::string aw = w + ".args";
  switch (r.type) {
    case RankerKind::kRandom:
    case RankerKind::kBruteForce: OnlyKeys(args, {}, aw); break;
    case RankerKind::kLookup:
      OnlyKeys(args, {"table", "default_weight", "training_samples"}, aw);
      r.table = Resolve(base, Get<std::string>(args, "table", aw, ""));
      if (args.contains("default_weight")) r.default_weight = Get<double>(args, "default_weight", aw, 0.0);
      r.training_samples = Get<std::size_t>(args, "training_samples", aw, r.training_samples);
      break;
    case RankerKind::kGuided: {
      OnlyKeys(args, {"policy", "training_samples", "feature_dim", "gamma", "learning_rate", "blend",
                      "horizon", "episodes", "schedule"},
               aw);
      r.policy = Resolve(base, Get<std::string>(args, "policy", aw, ""));
      r.training_samples = Get<std::size_t>(args, "training_samples", aw, r.training_samples);
      auto& g = r.guided;
      g.feature_dim = Get<std::size_t>(args, "feature_dim", aw, g.feature_dim);
      g.gamma = Get<double>(args, "gamma", aw, g.gamma);
      g.learning_rate = Get<double>(args, "learning_rate", aw, g.learning_rate);
      g.blend = Get<double>(args, "blend", aw, g.blend);
      g.horizon = Get<std::size_t>(args, "horizon", aw, g.horizon);
      g.episodes = Get<std::size_t>(args, "episodes", aw, g.episodes);
      g.seed = seed;
      if (args.contains("schedule")) {
        const auto& s = args["schedule"];
        OnlyKeys(s, {"start", "end"}, aw + ".schedule");
        auto mix = [&](const char* key, SourceMix fallback) {
          if (!s.contains(key)) return fallback;
          const std::string mw = aw + ".schedule." + key;
          OnlyKeys(s[key], {"ideal", "policy", "random"}, mw);
          return SourceMix{Get<double>(s[key], "ideal", mw, 0.0), Get<double>(s[key], "policy", mw, 0.0),
                           Get<double>(s[key], "random", mw, 0.0)};
        };
        g.schedule.start = mix("start", g.schedule.start);
        g.schedule.end = mix("end", g.schedule.end);
      }
      try {
        Validate(g.schedule);
      } catch (const Error& e) {
        Rethrow(e, aw + ".schedule");
      }
      if (g.feature_dim == 0) throw Error(ErrorCode::kParse, aw + ".feature_dim must be >= 1");
      break;
    }
  }
  return r;
}

SearchConfig ParseSearch(const json& j) {
  const std::string w = "search_alg";
  OnlyKeys(j, {"type", "args"}, w);
  SearchConfig s;
  try {
    s.type = ParseSearchKind(Get<std::string>(j, "type", w, "beam_search"));
  } catch (const Error& e) {
    Rethrow(e, w + ".type");
  }
  const json args = j.value("args", json::object());
  const std::string aw = w + ".args";
  try {
    if (s.type == SearchKind::kBeam) {
      OnlyKeys(args, {"width", "depth"}, aw);
      s.beam.width = Get<std::size_t>(args, "width", aw, s.beam.width);
      s.beam.depth = Get<std::size_t>(args, "depth", aw, s.beam.depth);
      Validate(s.beam);
    } else {
      OnlyKeys(args, {"time_budget", "max_transforms", "initial_temperature", "cooling"}, aw);
      s.anneal.time_budget = Get<double>(args, "time_budget", aw, s.anneal.time_budget);
      s.anneal.max_transforms = Get<std::size_t>(args, "max_transforms", aw, s.anneal.max_transforms);
      s.anneal.initial_temperature =
          Get<double>(args, "initial_temperature", aw, s.anneal.initial_temperature);
      s.anneal.cooling = Get<double>(args, "cooling", aw, s.anneal.cooling);
      Validate(s.anneal);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, aw + ": " + StripCode(e));
  }
  return s;
}

ScorerSpec ParseScoring(const json& j, std::string& target_file, const std::string& base) {
  const std::string w = "scoring_alg";
  OnlyKeys(j, {"type", "loss", "target_label", "distance", "p", "target_features", "direction", "name"}, w);
  ScorerSpec s;
  try {
    s.kind = ParseScoreKind(Get<std::string>(j, "type", w, "classifier_loss"));
    s.distance = ParseDistanceKind(Get<std::string>(j, "distance", w, "l2"));
    s.direction = ParseScoreDirection(Get<std::string>(j, "direction", w, "maximize"));
  } catch (const Error& e) {
    Rethrow(e, w);
  }
  s.loss = Get<std::string>(j, "loss", w, s.loss);
  if (j.contains("target_label")) s.target_label = Get<std::size_t>(j, "target_label", w, 0);
  s.p = Get<double>(j, "p", w, s.p);
  s.custom_name = Get<std::string>(j, "name", w, "");
  if (j.contains("target_features")) {
    if (j["target_features"].is_string()) {
      target_file = Resolve(base, j["target_features"].get<std::string>());
    } else {
      s.target_features = Get<std::vector<double>>(j, "target_features", w, {});
    }
  }
  try {
    Validate(s);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, w + ": " + StripCode(e));
  }
  if (s.kind == ScoreKind::kFeatureDistance && !s.target_features && target_file.empty()) {
    throw Error(ErrorCode::kParse, w + ": feature_distance requires target_features");
  }
  if (s.kind == ScoreKind::kCustom && !ScorerRegistry::Global().Contains(s.custom_name)) {
    throw Error(ErrorCode::kUnresolvedHook, w + ".name: no scorer '" + s.custom_name + "'");
  }
  return s;
}

}  // namespace

std::string_view ToString(ExtractorChoice choice) {
  switch (choice) {
    case ExtractorChoice::kIdentity: return "identity";
    case ExtractorChoice::kTabularEncoder: return "builtin_tabular_encoder";
    case ExtractorChoice::kRegisteredHook: return "registered_hook";
    case ExtractorChoice::kExternalProcess: return "external_process";
  }
  return "?";
}

ExplorerConfig ParseConfig(std::string_view text, const std::string& base_dir,
                           const std::string& source) {
  json j = detail::ParseDocument(text, source);
  OnlyKeys(j,
           {"seed", "workers", "multi_feature_input", "predict_function_name", "model",
            "feature_extractor", "dataset", "transformer_params", "global_constraints",
            "dependencies", "scoring_alg", "ranking_alg", "search_alg", "adversarial_training"},
           "config");
  ExplorerConfig c;
  const std::string w = "config";
  c.seed = Get<std::uint64_t>(j, "seed", w, 0);
  c.workers = Get<std::size_t>(j, "workers", w, 1);
  if (c.workers == 0) throw Error(ErrorCode::kParse, "config.workers must be >= 1");
  c.predict_function_name = Get<std::string>(j, "predict_function_name", w, "predict");
  c.dataset = ParseSchema(j.value("dataset", json::object()), base_dir);
  c.model = ParseModel(j.value("model", json::object()), c.seed, base_dir);
  c.feature_extractor = ParseExtractor(j.value("feature_extractor", json::object()));

  if (!j.contains("transformer_params")) {
    throw Error(ErrorCode::kParse, "config: transformer_params is required");
  }
  const auto& tp = j["transformer_params"];
  if (tp.is_object()) {
    for (const auto& [name, spec] : tp.items()) {
      c.transformer_params.push_back(ParseTransformer(name, spec, c.dataset));
    }
  } else if (tp.is_array()) {
    for (std::size_t i = 0; i < tp.size(); ++i) {
      auto name = Get<std::string>(tp[i], "name", "transformer_params[" + std::to_string(i) + "]", "");
      if (name.empty()) throw Error(ErrorCode::kParse, "transformer_params[" + std::to_string(i) + "]: missing name");
      c.transformer_params.push_back(ParseTransformer(name, tp[i], c.dataset));
    }
  } else {
    throw Error(ErrorCode::kParse, "transformer_params: expected an object or a list");
  }
  if (c.transformer_params.empty()) throw Error(ErrorCode::kParse, "transformer_params is empty");

  if (j.contains("global_constraints")) {
    for (std::size_t i = 0; i < j["global_constraints"].size(); ++i) {
      c.global_constraints.push_back(detail::ConstraintFrom(
          j["global_constraints"][i], "global_constraints[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("dependencies")) {
    for (std::size_t i = 0; i < j["dependencies"].size(); ++i) {
      const auto& d = j["dependencies"][i];
      const std::string dw = "dependencies[" + std::to_string(i) + "]";
      OnlyKeys(d, {"name", "type", "reads", "writes"}, dw);
      DependencyConfig dc{Get<std::string>(d, "name", dw, ""), Get<std::string>(d, "type", dw, ""),
                          Get<std::vector<std::size_t>>(d, "reads", dw, {}),
                          Get<std::vector<std::size_t>>(d, "writes", dw, {})};
      if (!DependencyRegistry::Global().Contains(dc.kind)) {
        throw Error(ErrorCode::kUnresolvedHook, dw + ".type: no dependency '" + dc.kind + "'");
      }
      c.dependencies.push_back(std::move(dc));
    }
  }
  c.scoring_alg = ParseScoring(j.value("scoring_alg", json::object()), c.target_features, base_dir);
  std::optional<bool> multi;
  if (j.contains("multi_feature_input")) multi = Get<bool>(j, "multi_feature_input", w, false);
  c.ranking_alg = ParseRanking(j.value("ranking_alg", json::object()), c.seed, base_dir, multi);
  c.multi_feature_input = multi.value_or(false);
  c.search_alg = ParseSearch(j.value("search_alg", json::object()));

  if (j.contains("adversarial_training")) {
    const auto& a = j["adversarial_training"];
    const std::string aw = "adversarial_training";
    OnlyKeys(a, {"mix_ratio", "epochs", "test_fraction", "attack_samples"}, aw);
    auto& at = c.adversarial_training;
    at.mix_ratio = Get<double>(a, "mix_ratio", aw, at.mix_ratio);
    at.epochs = Get<std::size_t>(a, "epochs", aw, at.epochs);
    at.test_fraction = Get<double>(a, "test_fraction", aw, at.test_fraction);
    at.attack_samples = Get<std::size_t>(a, "attack_samples", aw, at.attack_samples);
    if (!(at.mix_ratio >= 0.0 && at.mix_ratio <= 1.0)) {
      throw Error(ErrorCode::kParse, aw + ".mix_ratio must lie in [0, 1]");
    }
    if (!(at.test_fraction > 0.0 && at.test_fraction < 1.0)) {
      throw Error(ErrorCode::kParse, aw + ".test_fraction must lie in (0, 1)");
    }
  }

  // Cross-section rules.
  if (c.search_alg.type == SearchKind::kAnnealing && c.ranking_alg.type != RankerKind::kRandom) {
    throw Error(ErrorCode::kInvalidPairing,
                "search_alg simulated_annealing requires ranking_alg random, got " +
                    std::string(ToString(c.ranking_alg.type)));
  }
  std::size_t field_level = 0;
  for (const auto& t : c.transformer_params) field_level += t.field ? 1 : 0;
  if (field_level != 0 && field_level != c.transformer_params.size()) {
    throw Error(ErrorCode::kParse, "transformer_params: mix of field-level and whole-input transformers");
  }
  if (c.multi_feature_input != (field_level > 1)) {
    throw Error(ErrorCode::kParse,
                std::string("multi_feature_input must be ") + (field_level > 1 ? "true" : "false") +
                    " for " + std::to_string(field_level) + " field-level transformers");
  }
  if (c.feature_extractor.kind == ExtractorChoice::kTabularEncoder) {
    try {
      EncodingsFor(c.dataset);
    } catch (const Error& e) {
      Rethrow(e, "feature_extractor");
    }
  }
  MakeGraph(c);  // resolves processors, custom transformers and dependencies
  return c;
}

ExplorerConfig LoadConfig(const std::string& path) {
  auto base = fs::path(path).parent_path().string();
  if (base.empty()) base = ".";
  return ParseConfig(ReadFile(path), base, path);
}

std::string SerializeConfig(const ExplorerConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["multi_feature_input"] = c.multi_feature_input;
  j["predict_function_name"] = c.predict_function_name;

  json m{{"kind", std::string(ToString(c.model.kind))}};
  if (!c.model.path.empty()) m["path"] = c.model.path;
  m["hidden"] = c.model.hidden;
  m["epochs"] = c.model.train.epochs;
  m["learning_rate"] = c.model.train.learning_rate;
  m["batch_size"] = c.model.train.batch_size;
  m["train_seed"] = c.model.train.seed;
  if (!c.model.command.empty()) m["command"] = c.model.command;
  m["num_classes"] = c.model.num_classes;
  m["feature_dim"] = c.model.feature_dim;
  m["timeout_ms"] = c.model.timeout_ms;
  j["model"] = std::move(m);

  json e{{"kind", std::string(ToString(c.feature_extractor.kind))}};
  if (!c.feature_extractor.name.empty()) e["name"] = c.feature_extractor.name;
  e["output_dim"] = c.feature_extractor.output_dim;
  if (!c.feature_extractor.command.empty()) e["command"] = c.feature_extractor.command;
  j["feature_extractor"] = std::move(e);

  json d;
  d["format"] = c.dataset.format == DatasetFormat::kCsv ? "csv" : "text";
  json cols = json::array();
  for (const auto& col : c.dataset.columns) {
    json cj{{"name", col.name}, {"type", std::string(ToString(col.type))}};
    if (!col.vocabulary.empty()) cj["vocabulary"] = col.vocabulary;
    cols.push_back(std::move(cj));
  }
  d["columns"] = std::move(cols);
  d["label_column"] = c.dataset.label_column;
  d["header"] = c.dataset.header;
  if (!c.dataset.labels_file.empty()) d["labels_file"] = c.dataset.labels_file;
  if (!c.dataset.class_names.empty()) d["class_names"] = c.dataset.class_names;
  j["dataset"] = std::move(d);

  json tp = json::object();
  for (const auto& t : c.transformer_params) {
    json tj;
    tj["transformer_type"] = std::string(ToString(t.type));
    if (!t.custom_type.empty()) tj["custom_type"] = t.custom_type;
    if (t.field) tj["field"] = *t.field;
    if (!t.vocabulary.empty()) tj["vocabulary"] = t.vocabulary;
    if (t.onehot_size) tj["onehot_size"] = t.onehot_size;
    json sa = json::array();
    for (const auto& a : t.subtransformer_args) {
      json aj{{"action", a.action}};
      if (!a.charset.empty()) aj["charset"] = a.charset;
      if (!a.relative_steps.empty()) aj["relative_steps"] = a.relative_steps;
      if (!a.absolute_steps.empty()) aj["absolute_steps"] = a.absolute_steps;
      if (!a.options.empty()) aj["options"] = a.options;
      sa.push_back(std::move(aj));
    }
    tj["subtransformer_args"] = std::move(sa);
    json ic = json::array();
    for (const auto& k : t.input_constraints) ic.push_back(detail::ToJson(k));
    tj["input_constraints"] = std::move(ic);
    if (!t.input_processor_name.empty()) tj["input_processor_name"] = t.input_processor_name;
    tp[t.name] = std::move(tj);
  }
  j["transformer_params"] = std::move(tp);

  json gc = json::array();
  for (const auto& k : c.global_constraints) gc.push_back(detail::ToJson(k));
  j["global_constraints"] = std::move(gc);
  json deps = json::array();
  for (const auto& dc : c.dependencies) {
    deps.push_back(json{{"name", dc.name}, {"type", dc.kind}, {"reads", dc.reads}, {"writes", dc.writes}});
  }
  j["dependencies"] = std::move(deps);

  const auto& s = c.scoring_alg;
  json sj{{"type", std::string(ToString(s.kind))}, {"loss", s.loss}};
  if (s.target_label) sj["target_label"] = *s.target_label;
  sj["distance"] = std::string(ToString(s.distance));
  sj["p"] = s.p;
  if (s.target_features) {
    sj["target_features"] = *s.target_features;
  } else if (!c.target_features.empty()) {
    sj["target_features"] = c.target_features;
  }
  sj["direction"] = std::string(ToString(s.direction));
  if (!s.custom_name.empty()) sj["name"] = s.custom_name;
  j["scoring_alg"] = std::move(sj);

  const auto& r = c.ranking_alg;
  json rargs = json::object();
  if (r.type == RankerKind::kLookup) {
    if (!r.table.empty()) rargs["table"] = r.table;
    if (r.default_weight) rargs["default_weight"] = *r.default_weight;
    rargs["training_samples"] = r.training_samples;
  } else if (r.type == RankerKind::kGuided) {
    if (!r.policy.empty()) rargs["policy"] = r.policy;
    rargs["training_samples"] = r.training_samples;
    rargs["feature_dim"] = r.guided.feature_dim;
    rargs["gamma"] = r.guided.gamma;
    rargs["learning_rate"] = r.guided.learning_rate;
    rargs["blend"] = r.guided.blend;
    rargs["horizon"] = r.guided.horizon;
    rargs["episodes"] = r.guided.episodes;
    auto mix = [](const SourceMix& m) {
      return json{{"ideal", m.ideal}, {"policy", m.policy}, {"random", m.random}};
    };
    rargs["schedule"] = json{{"start", mix(r.guided.schedule.start)}, {"end", mix(r.guided.schedule.end)}};
  }
  j["ranking_alg"] = json{{"type", std::string(ToString(r.type))}, {"args", std::move(rargs)}};

  json sargs;
  if (c.search_alg.type == SearchKind::kBeam) {
    sargs = json{{"width", c.search_alg.beam.width}, {"depth", c.search_alg.beam.depth}};
  } else {
    const auto& a = c.search_alg.anneal;
    sargs = json{{"time_budget", a.time_budget},
                 {"max_transforms", a.max_transforms},
                 {"initial_temperature", a.initial_temperature},
                 {"cooling", a.cooling}};
  }
  j["search_alg"] = json{{"type", std::string(ToString(c.search_alg.type))}, {"args", std::move(sargs)}};

  const auto& at = c.adversarial_training;
  j["adversarial_training"] = json{{"mix_ratio", at.mix_ratio},
                                   {"epochs", at.epochs},
                                   {"test_fraction", at.test_fraction},
                                   {"attack_samples", at.attack_samples}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------

InputGraph MakeGraph(const ExplorerConfig& config) {
  std::vector<DependencyFunction> deps;
  for (const auto& d : config.dependencies) {
    deps.push_back(DependencyRegistry::Global().Make(d.kind, d.name, d.reads, d.writes));
  }
  return InputGraph(config.transformer_params, std::move(deps), config.global_constraints);
}

std::unique_ptr<FeatureExtractor> MakeExtractor(const ExplorerConfig& config,
                                                std::shared_ptr<ProcessChannel> channel) {
  const auto& e = config.feature_extractor;
  switch (e.kind) {
    case ExtractorChoice::kIdentity: return std::make_unique<IdentityExtractor>(e.output_dim);
    case ExtractorChoice::kTabularEncoder:
      return std::make_unique<TabularEncoder>(EncodingsFor(config.dataset));
    case ExtractorChoice::kRegisteredHook: return std::make_unique<HookExtractor>(e.name);
    case ExtractorChoice::kExternalProcess:
      if (!channel) {
        channel = std::make_shared<ProcessChannel>(
            e.command, std::chrono::milliseconds(config.model.timeout_ms));
      }
      return std::make_unique<ExternalExtractor>(std::move(channel), e.output_dim);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown extractor kind");
}

std::unique_ptr<TrainableModel> MakeBuiltinModel(const ModelConfig& config, std::size_t feature_dim) {
  switch (config.kind) {
    case ModelKind::kBuiltinLogistic:
      return std::make_unique<LogisticModel>(feature_dim, config.num_classes);
    case ModelKind::kBuiltinMlp:
      return std::make_unique<MlpModel>(feature_dim, config.hidden, config.num_classes, config.train.seed);
    case ModelKind::kExternalProcess: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "external_process models are not trainable here");
}

Explorer::Explorer(ExplorerConfig config, std::shared_ptr<const Model> model)
    : config_(std::move(config)) {
  graph_ = std::make_unique<InputGraph>(MakeGraph(config_));
  extractor_ = MakeExtractor(config_);
  if (model) {
    model_ = std::move(model);
  } else if (config_.model.kind == ModelKind::kExternalProcess) {
    channel_ = std::make_shared<ProcessChannel>(config_.model.command,
                                                std::chrono::milliseconds(config_.model.timeout_ms));
    const std::size_t dim = config_.model.feature_dim ? config_.model.feature_dim : extractor_->output_dim();
    model_ = std::make_shared<ExternalProcessModel>(channel_, config_.model.num_classes, dim,
                                                    config_.predict_function_name);
  } else {
    if (config_.model.path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "model.path is required for built-in models");
    }
    std::shared_ptr<const TrainableModel> loaded = LoadModel(config_.model.path);
    if (loaded->kind() != config_.model.kind) {
      throw Error(ErrorCode::kSchemaMismatch, config_.model.path + " holds a " +
                                                  std::string(ToString(loaded->kind())) + " model");
    }
    model_ = std::move(loaded);
  }
  evaluator_ = std::make_unique<VertexEvaluator>(*extractor_, *model_, config_.scoring_alg);
}

ExploreOptions Explorer::Options() const {
  ExploreOptions o;
  o.search = config_.search_alg.type;
  o.beam = config_.search_alg.beam;
  o.anneal = config_.search_alg.anneal;
  o.seed = config_.seed;
  o.workers = config_.workers;
  o.ranker.kind = config_.ranking_alg.type;
  o.ranker.default_weight = config_.ranking_alg.default_weight;
  const auto& r = config_.ranking_alg;
  if (r.type == RankerKind::kLookup && !r.table.empty() && fs::exists(r.table)) {
    o.ranker.table = std::make_shared<EdgeWeightTable>(EdgeWeightTable::Parse(ReadFile(r.table)));
  }
  if (r.type == RankerKind::kGuided && !r.policy.empty() && fs::exists(r.policy)) {
    auto p = std::make_shared<GuidedPolicy>(GuidedPolicy::Parse(ReadFile(r.policy)));
    if (p->params().feature_dim != r.guided.feature_dim) {
      throw Error(ErrorCode::kFeatureMapMismatch,
                  r.policy + " was trained with feature_dim " + std::to_string(p->params().feature_dim) +
                      ", config says " + std::to_string(r.guided.feature_dim));
    }
    o.ranker.policy = std::move(p);
  }
  if (!config_.target_features.empty()) o.target_features = LoadTargetFeatures(config_.target_features);
  return o;
}

}  // namespace advgraph
