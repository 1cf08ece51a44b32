#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "advgraph/input_state.hpp"

namespace advgraph {

// Dense row-major matrix. Rows are feature vectors or probability rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix FromRows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<std::vector<double>> ToRows() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class ModelKind { kBuiltinLogistic, kBuiltinMlp, kExternalProcess };
std::string_view ToString(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);

// Victim classifier F. Every Predict call counts as exactly one query.
class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual std::size_t feature_dim() const = 0;

  // kDimensionMismatch when batch.cols() != feature_dim().
  Matrix Predict(const Matrix& batch) const;
  std::vector<double> PredictOne(std::span<const double> features) const;

  std::uint64_t query_count() const { return queries_.load(); }
  void ResetQueryCount() { queries_.store(0); }

 protected:
  virtual Matrix DoPredict(const Matrix& batch) const = 0;

 private:
  mutable std::atomic<std::uint64_t> queries_{0};
};

std::size_t Argmax(std::span<const double> v);

// Built-in gradient-trained classifiers (softmax output, mean cross-entropy).
class TrainableModel : public Model {
 public:
  virtual std::vector<double> parameters() const = 0;
  virtual void set_parameters(std::span<const double> params) = 0;
  virtual std::unique_ptr<TrainableModel> Clone() const = 0;

  // Mean cross-entropy over the batch; fills `grad` (same layout as
  // parameters()) when non-null. Does not count as a query.
  virtual double LossAndGradient(const Matrix& x, std::span<const std::size_t> y,
                                 std::vector<double>* grad) const = 0;
};

class LogisticModel final : public TrainableModel {
 public:
  // Zero-initialised: predicts the uniform distribution until trained.
  LogisticModel(std::size_t feature_dim, std::size_t num_classes);

  ModelKind kind() const override { return ModelKind::kBuiltinLogistic; }
  std::size_t num_classes() const override { return classes_; }
  std::size_t feature_dim() const override { return dim_; }
  std::vector<double> parameters() const override { return params_; }
  void set_parameters(std::span<const double> params) override;
  std::unique_ptr<TrainableModel> Clone() const override;
  double LossAndGradient(const Matrix& x, std::span<const std::size_t> y,
                         std::vector<double>* grad) const override;

 protected:
  Matrix DoPredict(const Matrix& batch) const override;

 private:
  std::size_t dim_;
  std::size_t classes_;
  std::vector<double> params_;  // W (classes x dim, row-major) then b (classes)
};

// One hidden tanh layer.
class MlpModel final : public TrainableModel {
 public:
  MlpModel(std::size_t feature_dim, std::size_t hidden, std::size_t num_classes,
           std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kBuiltinMlp; }
  std::size_t num_classes() const override { return classes_; }
  std::size_t feature_dim() const override { return dim_; }
  std::size_t hidden() const { return hidden_; }
  std::vector<double> parameters() const override { return params_; }
  void set_parameters(std::span<const double> params) override;
  std::unique_ptr<TrainableModel> Clone() const override;
  double LossAndGradient(const Matrix& x, std::span<const std::size_t> y,
                         std::vector<double>* grad) const override;

 protected:
  Matrix DoPredict(const Matrix& batch) const override;

 private:
  // W1 (hidden x dim), b1 (hidden), W2 (classes x hidden), b2 (classes)
  std::size_t dim_;
  std::size_t hidden_;
  std::size_t classes_;
  std::vector<double> params_;
};

struct TrainOptions {
  std::size_t epochs = 100;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  bool operator==(const TrainOptions&) const = default;
};

struct TrainReport {
  double final_loss = 0.0;
  double train_accuracy = 0.0;
};

// One pass of mini-batch gradient descent over (x, y) in an order drawn from
// `rng`. kDivergence when the loss becomes non-finite.
double TrainEpoch(TrainableModel& model, const Matrix& x, std::span<const std::size_t> y,
                  const TrainOptions& options, std::mt19937_64& rng);

// Bit-reproducible for a fixed seed.
TrainReport TrainBuiltin(TrainableModel& model, const Matrix& x,
                         std::span<const std::size_t> y, const TrainOptions& options);

double Accuracy(const Model& model, const Matrix& x, std::span<const std::size_t> y);

void SaveModel(const TrainableModel& model, const std::string& path);
std::unique_ptr<TrainableModel> LoadModel(const std::string& path);
std::string SerializeModel(const TrainableModel& model);
std::unique_ptr<TrainableModel> ParseModel(const std::string& text);

// ---------------------------------------------------------------------------
// Feature extraction E

enum class ExtractorKind { kIdentity, kTabularEncoder, kRegisteredHook, kExternalProcess };

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual ExtractorKind kind() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual std::vector<double> Extract(const InputState& state) const = 0;
};

// Numeric states pass through unchanged (Bool as 0/1). Anything else is a
// kTypeMismatch.
class IdentityExtractor final : public FeatureExtractor {
 public:
  explicit IdentityExtractor(std::size_t dim) : dim_(dim) {}
  ExtractorKind kind() const override { return ExtractorKind::kIdentity; }
  std::size_t output_dim() const override { return dim_; }
  std::vector<double> Extract(const InputState& state) const override;

 private:
  std::size_t dim_;
};

struct ColumnEncoding {
  enum class Type { kNumeric, kBoolean, kCategorical, kOneHot };
  Type type = Type::kNumeric;
  std::vector<std::string> vocabulary;  // categorical
  std::size_t onehot_size = 0;

  bool operator==(const ColumnEncoding&) const = default;
};

// Vector states: categorical fields one-hot over their vocabulary, numeric
// fields as-is, booleans as 0/1, one-hot fields expanded.
class TabularEncoder final : public FeatureExtractor {
 public:
  explicit TabularEncoder(std::vector<ColumnEncoding> columns);
  ExtractorKind kind() const override { return ExtractorKind::kTabularEncoder; }
  std::size_t output_dim() const override { return dim_; }
  std::vector<double> Extract(const InputState& state) const override;

 private:
  std::vector<ColumnEncoding> columns_;
  std::size_t dim_ = 0;
};

struct ExtractorHook {
  std::size_t output_dim = 0;
  std::function<std::vector<double>(const InputState&)> fn;
};

// Named feature-extraction hooks. "text_stats" (character statistics of a
// domain-like string) is pre-registered.
class ExtractorRegistry {
 public:
  static ExtractorRegistry& Global();
  void Register(const std::string& name, ExtractorHook hook);
  bool Contains(const std::string& name) const;
  ExtractorHook Get(const std::string& name) const;  // kUnresolvedHook

 private:
  ExtractorRegistry();
  mutable std::mutex mu_;
  std::map<std::string, ExtractorHook> hooks_;
};

class HookExtractor final : public FeatureExtractor {
 public:
  explicit HookExtractor(const std::string& name,
                         const ExtractorRegistry& registry = ExtractorRegistry::Global());
  ExtractorKind kind() const override { return ExtractorKind::kRegisteredHook; }
  std::size_t output_dim() const override { return hook_.output_dim; }
  std::vector<double> Extract(const InputState& state) const override;

 private:
  ExtractorHook hook_;
};

// ---------------------------------------------------------------------------
// External process wire protocol: one JSON object per line.
//   request  {"id":N,"op":"predict"|"extract","data":[[...],...]}
//   response {"id":N,"result":[[...],...]}   or   {"id":N,"error":"..."}

struct ProtocolRequest {
  std::uint64_t id = 0;
  std::string op;
  std::vector<std::vector<double>> data;
  bool operator==(const ProtocolRequest&) const = default;
};

struct ProtocolResponse {
  std::uint64_t id = 0;
  std::vector<std::vector<double>> result;
  std::optional<std::string> error;
  bool operator==(const ProtocolResponse&) const = default;
};

std::string SerializeRequest(const ProtocolRequest& request);
ProtocolRequest ParseRequest(std::string_view line);     // kExternalProtocol
std::string SerializeResponse(const ProtocolResponse& response);
ProtocolResponse ParseResponse(std::string_view line);   // kExternalProtocol

// A child process spoken to over its stdin/stdout, one line per message.
// Requests are serialised through an internal mutex.
class ProcessChannel {
 public:
  ProcessChannel(std::vector<std::string> argv, std::chrono::milliseconds timeout);
  ~ProcessChannel();
  ProcessChannel(const ProcessChannel&) = delete;
  ProcessChannel& operator=(const ProcessChannel&) = delete;

  std::vector<std::vector<double>> Call(const std::string& op,
                                        const std::vector<std::vector<double>>& data);

 private:
  std::string ReadLine();

  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::chrono::milliseconds timeout_;
  std::uint64_t next_id_ = 1;
  std::string buffer_;
};

class ExternalProcessModel final : public Model {
 public:
  ExternalProcessModel(std::shared_ptr<ProcessChannel> channel, std::size_t num_classes,
                       std::size_t feature_dim, std::string predict_op = "predict");
  ModelKind kind() const override { return ModelKind::kExternalProcess; }
  std::size_t num_classes() const override { return classes_; }
  std::size_t feature_dim() const override { return dim_; }

 protected:
  Matrix DoPredict(const Matrix& batch) const override;

 private:
  std::shared_ptr<ProcessChannel> channel_;
  std::size_t classes_;
  std::size_t dim_;
  std::string predict_op_;
};

class ExternalExtractor final : public FeatureExtractor {
 public:
  // States are sent as their numeric leaves; text states as character codes.
  ExternalExtractor(std::shared_ptr<ProcessChannel> channel, std::size_t output_dim);
  ExtractorKind kind() const override { return ExtractorKind::kExternalProcess; }
  std::size_t output_dim() const override { return dim_; }
  std::vector<double> Extract(const InputState& state) const override;

 private:
  std::shared_ptr<ProcessChannel> channel_;
  std::size_t dim_;
};

}  // namespace advgraph
