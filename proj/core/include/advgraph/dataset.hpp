#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "advgraph/input_state.hpp"
#include "advgraph/model.hpp"

namespace advgraph {

enum class ColumnType { kNumeric, kInteger, kBoolean, kCategorical, kText };
std::string_view ToString(ColumnType type);
ColumnType ParseColumnType(std::string_view name);

struct ColumnSpec {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
  std::vector<std::string> vocabulary;  // categorical
  bool operator==(const ColumnSpec&) const = default;
};

enum class DatasetFormat { kCsv, kText };

struct DatasetSchema {
  DatasetFormat format = DatasetFormat::kCsv;
  std::vector<ColumnSpec> columns;  // feature columns, in file order
  std::string label_column = "label";
  bool header = true;
  std::string labels_file;               // text format: one label per line
  std::vector<std::string> class_names;  // labels by name; empty = integer labels
  bool operator==(const DatasetSchema&) const = default;
};

struct Dataset {
  std::vector<InputState> inputs;
  std::vector<std::size_t> labels;  // empty when the file carries none
  std::size_t skipped_rows = 0;     // lenient mode
};

// CSV rows become Vector states over the feature columns; text lines become
// Text states. Strict mode raises kSchemaMismatch on the first bad row,
// lenient mode skips and counts it.
Dataset LoadDataset(const std::string& path, const DatasetSchema& schema, bool strict);

// One ColumnEncoding per feature column; kSchemaMismatch for text columns.
std::vector<ColumnEncoding> EncodingsFor(const DatasetSchema& schema);

// Features of every input through `extractor`.
Matrix FeatureMatrix(const FeatureExtractor& extractor, const std::vector<InputState>& inputs);

// Seeded synthetic tabular task: seven categorical columns (7, 8, 6, 2, 2, 2
// and 2 levels) the attacker may change, plus numeric columns it may not.
struct SyntheticOptions {
  std::size_t rows = 1000;
  std::uint64_t seed = 1;
  std::size_t numeric_columns = 3;
  double categorical_weight = 1.0;
  double numeric_weight = 1.0;
  double noise = 0.5;
};

DatasetSchema SyntheticSchema(const SyntheticOptions& options);
Dataset MakeSyntheticDataset(const SyntheticOptions& options);
void WriteCsv(const std::string& path, const DatasetSchema& schema, const Dataset& data);

// Deterministic split: a seeded permutation, the first `test_fraction` rows
// become the test set.
struct Split {
  Dataset train;
  Dataset test;
};
Split SplitDataset(const Dataset& data, double test_fraction, std::uint64_t seed);

}  // namespace advgraph
