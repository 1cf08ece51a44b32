#include "advgraph/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "advgraph/error.hpp"
#include "advgraph/random.hpp"

namespace advgraph {
namespace {

std::string Trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(Trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(Trim(cur));
  return out;
}

double ParseDouble(const std::string& s) {
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

std::int64_t ParseInt(const std::string& s) {
  std::size_t used = 0;
  long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

InputState ParseCell(const std::string& cell, const ColumnSpec& col) {
  switch (col.type) {
    case ColumnType::kNumeric: return InputState::Float(ParseDouble(cell));
    case ColumnType::kInteger: return InputState::Int(ParseInt(cell));
    case ColumnType::kBoolean:
      if (cell == "1" || cell == "true") return InputState::Bool(true);
      if (cell == "0" || cell == "false") return InputState::Bool(false);
      throw std::invalid_argument(cell);
    case ColumnType::kCategorical:
      if (std::find(col.vocabulary.begin(), col.vocabulary.end(), cell) == col.vocabulary.end()) {
        throw std::invalid_argument("unknown category '" + cell + "'");
      }
      return InputState::Cat(cell);
    case ColumnType::kText: return InputState::TextOf(cell);
  }
  throw std::invalid_argument(cell);
}

std::size_t ParseLabel(const std::string& cell, const DatasetSchema& schema) {
  if (!schema.class_names.empty()) {
    auto it = std::find(schema.class_names.begin(), schema.class_names.end(), cell);
    if (it == schema.class_names.end()) throw std::invalid_argument("unknown class '" + cell + "'");
    return static_cast<std::size_t>(it - schema.class_names.begin());
  }
  auto v = ParseInt(cell);
  if (v < 0) throw std::invalid_argument("negative label");
  return static_cast<std::size_t>(v);
}

double Gaussian(Rng& rng) {
  const double u1 = 1.0 - UniformReal(rng);
  const double u2 = UniformReal(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

std::string_view ToString(ColumnType type) {
  switch (type) {
    case ColumnType::kNumeric: return "numeric";
    case ColumnType::kInteger: return "integer";
    case ColumnType::kBoolean: return "boolean";
    case ColumnType::kCategorical: return "categorical";
    case ColumnType::kText: return "text";
  }
  return "?";
}

ColumnType ParseColumnType(std::string_view name) {
  for (auto t : {ColumnType::kNumeric, ColumnType::kInteger, ColumnType::kBoolean,
                 ColumnType::kCategorical, ColumnType::kText}) {
    if (ToString(t) == name) return t;
  }
  throw Error(ErrorCode::kParse, "unknown column type " + std::string(name));
}

Dataset LoadDataset(const std::string& path, const DatasetSchema& schema, bool strict) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  Dataset data;
  std::string line;
  std::size_t lineno = 0;

  if (schema.format == DatasetFormat::kText) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      data.inputs.push_back(InputState::TextOf(line));
    }
    if (!schema.labels_file.empty()) {
      std::ifstream lin(schema.labels_file);
      if (!lin) throw Error(ErrorCode::kIo, "cannot read " + schema.labels_file);
      std::size_t n = 0;
      while (std::getline(lin, line)) {
        ++n;
        line = Trim(line);
        if (line.empty()) continue;
        try {
          data.labels.push_back(ParseLabel(line, schema));
        } catch (const std::exception& e) {
          throw Error(ErrorCode::kSchemaMismatch,
                      schema.labels_file + ":" + std::to_string(n) + ": " + e.what());
        }
      }
      if (data.labels.size() != data.inputs.size()) {
        throw Error(ErrorCode::kSchemaMismatch, "labels file length differs from the dataset");
      }
    }
    return data;
  }

  // CSV: the feature columns plus an optional label column, in file order.
  std::vector<std::string> expected;
  for (const auto& c : schema.columns) expected.push_back(c.name);
  std::vector<int> slot;  // file column -> feature index, -1 label
  bool has_label = false;
  if (schema.header) {
    if (!std::getline(in, line)) return data;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto names = SplitCsv(line);
    std::vector<bool> seen(expected.size(), false);
    for (const auto& n : names) {
      if (n == schema.label_column) {
        slot.push_back(-1);
        has_label = true;
        continue;
      }
      auto it = std::find(expected.begin(), expected.end(), n);
      if (it == expected.end()) {
        throw Error(ErrorCode::kSchemaMismatch, path + ": column '" + n + "' not in schema");
      }
      auto idx = static_cast<std::size_t>(it - expected.begin());
      if (seen[idx]) throw Error(ErrorCode::kSchemaMismatch, path + ": duplicate column " + n);
      seen[idx] = true;
      slot.push_back(static_cast<int>(idx));
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        throw Error(ErrorCode::kSchemaMismatch, path + ": missing column '" + expected[i] + "'");
      }
    }
  } else {
    for (std::size_t i = 0; i < expected.size(); ++i) slot.push_back(static_cast<int>(i));
    slot.push_back(-1);
    has_label = true;
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    auto cells = SplitCsv(line);
    try {
      if (cells.size() != slot.size()) {
        throw std::invalid_argument("expected " + std::to_string(slot.size()) + " cells, got " +
                                    std::to_string(cells.size()));
      }
      InputState::Vector fields(expected.size());
      std::size_t label = 0;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (slot[c] < 0) {
          label = ParseLabel(cells[c], schema);
        } else {
          fields[static_cast<std::size_t>(slot[c])] =
              ParseCell(cells[c], schema.columns[static_cast<std::size_t>(slot[c])]);
        }
      }
      data.inputs.push_back(InputState::VectorOf(std::move(fields)));
      if (has_label) data.labels.push_back(label);
    } catch (const std::exception& e) {
      if (strict) {
        throw Error(ErrorCode::kSchemaMismatch,
                    path + ":" + std::to_string(lineno) + ": " + e.what());
      }
      ++data.skipped_rows;
    }
  }
  return data;
}

std::vector<ColumnEncoding> EncodingsFor(const DatasetSchema& schema) {
  std::vector<ColumnEncoding> out;
  for (const auto& c : schema.columns) {
    ColumnEncoding e;
    switch (c.type) {
      case ColumnType::kNumeric:
      case ColumnType::kInteger: e.type = ColumnEncoding::Type::kNumeric; break;
      case ColumnType::kBoolean: e.type = ColumnEncoding::Type::kBoolean; break;
      case ColumnType::kCategorical:
        e.type = ColumnEncoding::Type::kCategorical;
        e.vocabulary = c.vocabulary;
        break;
      case ColumnType::kText:
        throw Error(ErrorCode::kSchemaMismatch,
                    "column '" + c.name + "' is text; the tabular encoder cannot encode it");
    }
    out.push_back(std::move(e));
  }
  return out;
}

Matrix FeatureMatrix(const FeatureExtractor& extractor, const std::vector<InputState>& inputs) {
  Matrix m(inputs.size(), extractor.output_dim());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto f = extractor.Extract(inputs[i]);
    std::copy(f.begin(), f.end(), m.row(i).begin());
  }
  return m;
}

namespace {

struct CategoricalColumn {
  const char* name;
  std::size_t levels;
};

constexpr CategoricalColumn kSyntheticColumns[] = {
    {"age", 7},          {"income_band", 8}, {"loan_purpose", 6}, {"co_applicant", 2},
    {"occupancy", 2},    {"lien_status", 2}, {"preapproval", 2},
};

}  // namespace

DatasetSchema SyntheticSchema(const SyntheticOptions& options) {
  DatasetSchema s;
  for (const auto& c : kSyntheticColumns) {
    ColumnSpec col{c.name, ColumnType::kCategorical, {}};
    for (std::size_t v = 0; v < c.levels; ++v) col.vocabulary.push_back(std::string(c.name) + "_" + std::to_string(v));
    s.columns.push_back(std::move(col));
  }
  for (std::size_t k = 0; k < options.numeric_columns; ++k) {
    s.columns.push_back({"x" + std::to_string(k), ColumnType::kNumeric, {}});
  }
  return s;
}

Dataset MakeSyntheticDataset(const SyntheticOptions& options) {
  DatasetSchema schema = SyntheticSchema(options);
  Rng rng(options.seed);
  // Level effects, centred per column so neither class dominates.
  std::vector<std::vector<double>> effects;
  for (const auto& c : kSyntheticColumns) {
    std::vector<double> w(c.levels);
    for (auto& v : w) v = Gaussian(rng) * options.categorical_weight;
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    for (auto& v : w) v -= mean;
    effects.push_back(std::move(w));
  }
  std::vector<double> slopes(options.numeric_columns);
  for (auto& s : slopes) s = (Gaussian(rng) >= 0 ? 1.0 : -1.0) * options.numeric_weight;

  Dataset data;
  for (std::size_t r = 0; r < options.rows; ++r) {
    InputState::Vector fields;
    double logit = 0.0;
    for (std::size_t j = 0; j < effects.size(); ++j) {
      const std::size_t v = UniformIndex(rng, effects[j].size());
      fields.push_back(InputState::Cat(schema.columns[j].vocabulary[v]));
      logit += effects[j][v];
    }
    for (std::size_t k = 0; k < slopes.size(); ++k) {
      // Rounded so the CSV round trip is exact.
      const double x = std::round(Gaussian(rng) * 1e4) / 1e4;
      fields.push_back(InputState::Float(x));
      logit += slopes[k] * x;
    }
    logit += options.noise * Gaussian(rng);
    data.inputs.push_back(InputState::VectorOf(std::move(fields)));
    data.labels.push_back(logit > 0.0 ? 1 : 0);
  }
  return data;
}

void WriteCsv(const std::string& path, const DatasetSchema& schema, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (const auto& c : schema.columns) out << c.name << ",";
  out << schema.label_column << "\n";
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    for (const auto& f : data.inputs[i].as_vector()) {
      switch (f.kind()) {
        case InputState::Kind::kCategorical: out << f.as_categorical().label; break;
        case InputState::Kind::kBool: out << (f.as_bool() ? 1 : 0); break;
        case InputState::Kind::kText: out << f.as_text(); break;
        default: {
          char buf[32];
          auto res = std::to_chars(buf, buf + sizeof buf, f.numeric());
          out << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
      }
      out << ",";
    }
    out << (data.labels.empty() ? 0 : data.labels[i]) << "\n";
  }
}

Split SplitDataset(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(data.inputs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  Shuffle(order, rng);
  const auto n_test =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(order.size())));
  Split s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Dataset& d = i < n_test ? s.test : s.train;
    d.inputs.push_back(data.inputs[order[i]]);
    if (!data.labels.empty()) d.labels.push_back(data.labels[order[i]]);
  }
  return s;
}

}  // namespace advgraph
