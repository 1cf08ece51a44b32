#include "advgraph/model.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "advgraph/error.hpp"
#include "advgraph/random.hpp"

namespace advgraph {
namespace {

using json = nlohmann::ordered_json;

constexpr int kModelFormatVersion = 1;

void Softmax(std::span<double> z) {
  double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// log(sum(exp(z)))
double LogSumExp(std::span<const double> z) {
  double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum);
}

void CheckBatch(const Matrix& x, std::span<const std::size_t> y, std::size_t dim,
                std::size_t classes) {
  if (x.cols() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "batch has " + std::to_string(x.cols()) + " columns, model expects " +
                    std::to_string(dim));
  }
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "labels do not align with rows");
  }
  for (auto label : y) {
    if (label >= classes) throw Error(ErrorCode::kLabelOutOfRange, std::to_string(label));
  }
}

std::vector<std::vector<double>> ParseRows(const json& j, const char* what) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kExternalProtocol, std::string(what) + " is not an array");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) {
      throw Error(ErrorCode::kExternalProtocol, std::string(what) + " row is not an array");
    }
    std::vector<double> row;
    for (const auto& v : r) {
      if (!v.is_number()) {
        throw Error(ErrorCode::kExternalProtocol, std::string(what) + " holds a non-number");
      }
      row.push_back(v.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json ParseLine(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kExternalProtocol, std::string("malformed message: ") + e.what());
  }
}

std::uint64_t ParseId(const json& j) {
  if (!j.contains("id") || !j["id"].is_number_unsigned()) {
    throw Error(ErrorCode::kExternalProtocol, "message without a numeric id");
  }
  return j["id"].get<std::uint64_t>();
}

}  // namespace

// ---------------------------------------------------------------------------

Matrix Matrix::FromRows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged rows");
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::ToRows() const {
  std::vector<std::vector<double>> out;
  out.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto s = row(r);
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

std::string_view ToString(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBuiltinLogistic: return "builtin_logistic";
    case ModelKind::kBuiltinMlp: return "builtin_mlp";
    case ModelKind::kExternalProcess: return "external_process";
  }
  return "?";
}

ModelKind ParseModelKind(std::string_view name) {
  for (auto k : {ModelKind::kBuiltinLogistic, ModelKind::kBuiltinMlp,
                 ModelKind::kExternalProcess}) {
    if (ToString(k) == name) return k;
  }
  throw Error(ErrorCode::kParse, "unknown model kind " + std::string(name));
}

Matrix Model::Predict(const Matrix& batch) const {
  if (batch.cols() != feature_dim() && batch.rows() > 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "features have " + std::to_string(batch.cols()) + " columns, model expects " +
                    std::to_string(feature_dim()));
  }
  queries_.fetch_add(1);
  Matrix out = DoPredict(batch);
  if (out.rows() != batch.rows() || (batch.rows() > 0 && out.cols() != num_classes())) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction has the wrong shape");
  }
  return out;
}

std::vector<double> Model::PredictOne(std::span<const double> features) const {
  Matrix m(1, features.size());
  std::copy(features.begin(), features.end(), m.row(0).begin());
  const Matrix out = Predict(m);
  auto p = out.row(0);
  return {p.begin(), p.end()};
}

std::size_t Argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// ---------------------------------------------------------------------------

LogisticModel::LogisticModel(std::size_t feature_dim, std::size_t num_classes)
    : dim_(feature_dim), classes_(num_classes), params_(num_classes * (feature_dim + 1), 0.0) {
  if (num_classes < 2) throw Error(ErrorCode::kInvalidArgument, "num_classes must be >= 2");
}

void LogisticModel::set_parameters(std::span<const double> params) {
  if (params.size() != params_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "logistic parameter count");
  }
  params_.assign(params.begin(), params.end());
}

std::unique_ptr<TrainableModel> LogisticModel::Clone() const {
  auto m = std::make_unique<LogisticModel>(dim_, classes_);
  m->set_parameters(params_);
  return m;
}

Matrix LogisticModel::DoPredict(const Matrix& batch) const {
  Matrix out(batch.rows(), classes_);
  const double* w = params_.data();
  const double* b = w + classes_ * dim_;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    auto x = batch.row(r);
    auto z = out.row(r);
    for (std::size_t c = 0; c < classes_; ++c) {
      double acc = b[c];
      for (std::size_t d = 0; d < dim_; ++d) acc += w[c * dim_ + d] * x[d];
      z[c] = acc;
    }
    Softmax(z);
  }
  return out;
}

double LogisticModel::LossAndGradient(const Matrix& x, std::span<const std::size_t> y,
                                      std::vector<double>* grad) const {
  CheckBatch(x, y, dim_, classes_);
  const double* w = params_.data();
  const double* b = w + classes_ * dim_;
  if (grad) grad->assign(params_.size(), 0.0);
  const double n = static_cast<double>(std::max<std::size_t>(x.rows(), 1));
  double loss = 0.0;
  std::vector<double> z(classes_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    for (std::size_t c = 0; c < classes_; ++c) {
      double acc = b[c];
      for (std::size_t d = 0; d < dim_; ++d) acc += w[c * dim_ + d] * xr[d];
      z[c] = acc;
    }
    loss += LogSumExp(z) - z[y[r]];
    if (!grad) continue;
    Softmax(z);
    z[y[r]] -= 1.0;
    double* gw = grad->data();
    double* gb = gw + classes_ * dim_;
    for (std::size_t c = 0; c < classes_; ++c) {
      const double g = z[c] / n;
      for (std::size_t d = 0; d < dim_; ++d) gw[c * dim_ + d] += g * xr[d];
      gb[c] += g;
    }
  }
  return loss / n;
}

// ---------------------------------------------------------------------------

MlpModel::MlpModel(std::size_t feature_dim, std::size_t hidden, std::size_t num_classes,
                   std::uint64_t seed)
    : dim_(feature_dim),
      hidden_(hidden),
      classes_(num_classes),
      params_(hidden * feature_dim + hidden + num_classes * hidden + num_classes, 0.0) {
  if (num_classes < 2) throw Error(ErrorCode::kInvalidArgument, "num_classes must be >= 2");
  if (hidden == 0) throw Error(ErrorCode::kInvalidArgument, "hidden width must be >= 1");
  Rng rng(seed);
  const double a1 = std::sqrt(6.0 / static_cast<double>(dim_ + hidden_));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_ + classes_));
  double* p = params_.data();
  for (std::size_t i = 0; i < hidden_ * dim_; ++i) *p++ = (2.0 * UniformReal(rng) - 1.0) * a1;
  p += hidden_;
  for (std::size_t i = 0; i < classes_ * hidden_; ++i) {
    *p++ = (2.0 * UniformReal(rng) - 1.0) * a2;
  }
}

void MlpModel::set_parameters(std::span<const double> params) {
  if (params.size() != params_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "mlp parameter count");
  }
  params_.assign(params.begin(), params.end());
}

std::unique_ptr<TrainableModel> MlpModel::Clone() const {
  auto m = std::make_unique<MlpModel>(dim_, hidden_, classes_, 0);
  m->set_parameters(params_);
  return m;
}

Matrix MlpModel::DoPredict(const Matrix& batch) const {
  Matrix out(batch.rows(), classes_);
  const double* w1 = params_.data();
  const double* b1 = w1 + hidden_ * dim_;
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + classes_ * hidden_;
  std::vector<double> h(hidden_);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    auto x = batch.row(r);
    for (std::size_t j = 0; j < hidden_; ++j) {
      double acc = b1[j];
      for (std::size_t d = 0; d < dim_; ++d) acc += w1[j * dim_ + d] * x[d];
      h[j] = std::tanh(acc);
    }
    auto z = out.row(r);
    for (std::size_t c = 0; c < classes_; ++c) {
      double acc = b2[c];
      for (std::size_t j = 0; j < hidden_; ++j) acc += w2[c * hidden_ + j] * h[j];
      z[c] = acc;
    }
    Softmax(z);
  }
  return out;
}

double MlpModel::LossAndGradient(const Matrix& x, std::span<const std::size_t> y,
                                 std::vector<double>* grad) const {
  CheckBatch(x, y, dim_, classes_);
  const double* w1 = params_.data();
  const double* b1 = w1 + hidden_ * dim_;
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + classes_ * hidden_;
  if (grad) grad->assign(params_.size(), 0.0);
  const double n = static_cast<double>(std::max<std::size_t>(x.rows(), 1));
  double loss = 0.0;
  std::vector<double> h(hidden_), z(classes_), dh(hidden_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    for (std::size_t j = 0; j < hidden_; ++j) {
      double acc = b1[j];
      for (std::size_t d = 0; d < dim_; ++d) acc += w1[j * dim_ + d] * xr[d];
      h[j] = std::tanh(acc);
    }
    for (std::size_t c = 0; c < classes_; ++c) {
      double acc = b2[c];
      for (std::size_t j = 0; j < hidden_; ++j) acc += w2[c * hidden_ + j] * h[j];
      z[c] = acc;
    }
    loss += LogSumExp(z) - z[y[r]];
    if (!grad) continue;
    Softmax(z);
    z[y[r]] -= 1.0;
    double* gw1 = grad->data();
    double* gb1 = gw1 + hidden_ * dim_;
    double* gw2 = gb1 + hidden_;
    double* gb2 = gw2 + classes_ * hidden_;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < classes_; ++c) {
      const double g = z[c] / n;
      for (std::size_t j = 0; j < hidden_; ++j) {
        gw2[c * hidden_ + j] += g * h[j];
        dh[j] += g * w2[c * hidden_ + j];
      }
      gb2[c] += g;
    }
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double da = dh[j] * (1.0 - h[j] * h[j]);
      for (std::size_t d = 0; d < dim_; ++d) gw1[j * dim_ + d] += da * xr[d];
      gb1[j] += da;
    }
  }
  return loss / n;
}

// ---------------------------------------------------------------------------

double TrainEpoch(TrainableModel& model, const Matrix& x, std::span<const std::size_t> y,
                  const TrainOptions& options, Rng& rng) {
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  Shuffle(order, rng);
  const std::size_t batch = std::max<std::size_t>(options.batch_size, 1);
  std::vector<double> grad;
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t end = std::min(order.size(), start + batch);
    Matrix xb(end - start, x.cols());
    std::vector<std::size_t> yb(end - start);
    for (std::size_t i = start; i < end; ++i) {
      auto src = x.row(order[i]);
      std::copy(src.begin(), src.end(), xb.row(i - start).begin());
      yb[i - start] = y[order[i]];
    }
    double loss = model.LossAndGradient(xb, yb, &grad);
    if (!std::isfinite(loss)) throw Error(ErrorCode::kDivergence, "non-finite training loss");
    total += loss * static_cast<double>(end - start);
    if (options.learning_rate != 0.0) {
      auto params = model.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= options.learning_rate * grad[i];
        if (!std::isfinite(params[i])) throw Error(ErrorCode::kDivergence, "non-finite parameter update");
      }
      model.set_parameters(params);
    }
  }
  return order.empty() ? 0.0 : total / static_cast<double>(order.size());
}

TrainReport TrainBuiltin(TrainableModel& model, const Matrix& x,
                         std::span<const std::size_t> y, const TrainOptions& options) {
  if (x.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  CheckBatch(x, y, model.feature_dim(), model.num_classes());
  Rng rng(options.seed);
  for (std::size_t e = 0; e < options.epochs; ++e) TrainEpoch(model, x, y, options, rng);
  TrainReport report;
  report.final_loss = model.LossAndGradient(x, y, nullptr);
  if (!std::isfinite(report.final_loss)) {
    throw Error(ErrorCode::kDivergence, "non-finite training loss");
  }
  report.train_accuracy = Accuracy(model, x, y);
  return report;
}

double Accuracy(const Model& model, const Matrix& x, std::span<const std::size_t> y) {
  if (x.rows() == 0) return 0.0;
  Matrix p = model.Predict(x);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < x.rows(); ++r) hits += Argmax(p.row(r)) == y[r] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

std::string SerializeModel(const TrainableModel& model) {
  json j;
  j["format"] = "advgraph-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = std::string(ToString(model.kind()));
  j["num_classes"] = model.num_classes();
  j["feature_dim"] = model.feature_dim();
  if (const auto* mlp = dynamic_cast<const MlpModel*>(&model)) j["hidden"] = mlp->hidden();
  j["parameters"] = model.parameters();
  return j.dump();
}

std::unique_ptr<TrainableModel> ParseModel(const std::string& text) {
  try {
    json j = json::parse(text);
    if (j.at("format") != "advgraph-model" || j.at("version") != kModelFormatVersion) {
      throw Error(ErrorCode::kParse, "not a version-1 model file");
    }
    const auto kind = ParseModelKind(j.at("kind").get<std::string>());
    const auto classes = j.at("num_classes").get<std::size_t>();
    const auto dim = j.at("feature_dim").get<std::size_t>();
    std::unique_ptr<TrainableModel> m;
    if (kind == ModelKind::kBuiltinLogistic) {
      m = std::make_unique<LogisticModel>(dim, classes);
    } else if (kind == ModelKind::kBuiltinMlp) {
      m = std::make_unique<MlpModel>(dim, j.at("hidden").get<std::size_t>(), classes, 0);
    } else {
      throw Error(ErrorCode::kParse, "external models have no weight file");
    }
    m->set_parameters(j.at("parameters").get<std::vector<double>>());
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model file: ") + e.what());
  }
}

void SaveModel(const TrainableModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << SerializeModel(model) << "\n";
}

std::unique_ptr<TrainableModel> LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseModel(ss.str());
}

// ---------------------------------------------------------------------------

std::vector<double> IdentityExtractor::Extract(const InputState& state) const {
  std::vector<double> out;
  auto check = [](const InputState& s) {
    if (s.kind() != InputState::Kind::kInt && s.kind() != InputState::Kind::kFloat &&
        s.kind() != InputState::Kind::kBool) {
      throw Error(ErrorCode::kTypeMismatch, "identity extractor needs numeric values");
    }
  };
  if (state.kind() == InputState::Kind::kVector) {
    for (const auto& f : state.as_vector()) check(f);
  } else {
    check(state);
  }
  out = NumericLeaves(state);
  if (out.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "identity extractor expected " + std::to_string(dim_) + " values");
  }
  return out;
}

TabularEncoder::TabularEncoder(std::vector<ColumnEncoding> columns) : columns_(std::move(columns)) {
  for (const auto& c : columns_) {
    switch (c.type) {
      case ColumnEncoding::Type::kNumeric:
      case ColumnEncoding::Type::kBoolean: dim_ += 1; break;
      case ColumnEncoding::Type::kCategorical: dim_ += c.vocabulary.size(); break;
      case ColumnEncoding::Type::kOneHot: dim_ += c.onehot_size; break;
    }
  }
}

std::vector<double> TabularEncoder::Extract(const InputState& state) const {
  const auto& fields = state.as_vector();
  if (fields.size() != columns_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "row arity does not match the encoder");
  }
  std::vector<double> out;
  out.reserve(dim_);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& c = columns_[i];
    const auto& f = fields[i];
    switch (c.type) {
      case ColumnEncoding::Type::kNumeric:
        if (!f.is_numeric()) throw Error(ErrorCode::kEncoding, "field " + std::to_string(i));
        out.push_back(f.numeric());
        break;
      case ColumnEncoding::Type::kBoolean:
        out.push_back(f.as_bool() ? 1.0 : 0.0);
        break;
      case ColumnEncoding::Type::kCategorical: {
        if (f.kind() != InputState::Kind::kCategorical) {
          throw Error(ErrorCode::kEncoding, "field " + std::to_string(i) + " is not categorical");
        }
        const auto& label = f.as_categorical().label;
        auto it = std::find(c.vocabulary.begin(), c.vocabulary.end(), label);
        if (it == c.vocabulary.end()) {
          throw Error(ErrorCode::kEncoding, "unknown category '" + label + "'");
        }
        for (std::size_t k = 0; k < c.vocabulary.size(); ++k) {
          out.push_back(c.vocabulary.begin() + static_cast<std::ptrdiff_t>(k) == it ? 1.0 : 0.0);
        }
        break;
      }
      case ColumnEncoding::Type::kOneHot: {
        const auto& h = f.as_onehot();
        if (h.size != c.onehot_size || h.index >= h.size) {
          throw Error(ErrorCode::kEncoding, "field " + std::to_string(i) + " one-hot shape");
        }
        for (std::size_t k = 0; k < h.size; ++k) out.push_back(k == h.index ? 1.0 : 0.0);
        break;
      }
    }
  }
  return out;
}

namespace {

std::vector<double> TextStats(const InputState& state) {
  if (state.kind() != InputState::Kind::kText) {
    throw Error(ErrorCode::kTypeMismatch, "text_stats needs a text value");
  }
  std::string s = state.as_text();
  if (auto dot = s.rfind('.'); dot != std::string::npos && dot > 0) s = s.substr(0, dot);
  const double len = static_cast<double>(s.size());
  const double denom = std::max(len, 1.0);
  double digits = 0, vowels = 0, consonants = 0, hyphens = 0;
  std::size_t run = 0, longest_run = 0;
  std::map<char, double> counts;
  for (char c : s) {
    counts[c] += 1.0;
    bool consonant = false;
    if (c >= '0' && c <= '9') {
      digits += 1;
    } else if (std::strchr("aeiou", c) != nullptr) {
      vowels += 1;
    } else if (c >= 'a' && c <= 'z') {
      consonants += 1;
      consonant = true;
    } else if (c == '-') {
      hyphens += 1;
    }
    run = consonant ? run + 1 : 0;
    longest_run = std::max(longest_run, run);
  }
  double entropy = 0.0;
  for (const auto& [c, n] : counts) {
    const double p = n / denom;
    entropy -= p * std::log2(p);
  }
  return {len / 10.0,
          digits / denom,
          vowels / denom,
          consonants / denom,
          static_cast<double>(counts.size()) / denom,
          static_cast<double>(longest_run) / denom,
          hyphens,
          entropy / 4.0};
}

}  // namespace

ExtractorRegistry::ExtractorRegistry() { hooks_["text_stats"] = ExtractorHook{8, TextStats}; }

ExtractorRegistry& ExtractorRegistry::Global() {
  static ExtractorRegistry registry;
  return registry;
}

void ExtractorRegistry::Register(const std::string& name, ExtractorHook hook) {
  std::lock_guard lock(mu_);
  if (!hooks_.emplace(name, std::move(hook)).second) {
    throw Error(ErrorCode::kDuplicateName, "extractor " + name);
  }
}

bool ExtractorRegistry::Contains(const std::string& name) const {
  std::lock_guard lock(mu_);
  return hooks_.count(name) > 0;
}

ExtractorHook ExtractorRegistry::Get(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = hooks_.find(name);
  if (it == hooks_.end()) throw Error(ErrorCode::kUnresolvedHook, "extractor " + name);
  return it->second;
}

HookExtractor::HookExtractor(const std::string& name, const ExtractorRegistry& registry)
    : hook_(registry.Get(name)) {}

std::vector<double> HookExtractor::Extract(const InputState& state) const {
  auto v = hook_.fn(state);
  if (v.size() != hook_.output_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "extractor hook returned the wrong width");
  }
  return v;
}

// ---------------------------------------------------------------------------

std::string SerializeRequest(const ProtocolRequest& request) {
  json j;
  j["id"] = request.id;
  j["op"] = request.op;
  j["data"] = request.data;
  return j.dump();
}

ProtocolRequest ParseRequest(std::string_view line) {
  json j = ParseLine(line);
  ProtocolRequest r;
  r.id = ParseId(j);
  if (!j.contains("op") || !j["op"].is_string()) {
    throw Error(ErrorCode::kExternalProtocol, "request without op");
  }
  r.op = j["op"].get<std::string>();
  r.data = ParseRows(j.value("data", json::array()), "data");
  return r;
}

std::string SerializeResponse(const ProtocolResponse& response) {
  json j;
  j["id"] = response.id;
  if (response.error) {
    j["error"] = *response.error;
  } else {
    j["result"] = response.result;
  }
  return j.dump();
}

ProtocolResponse ParseResponse(std::string_view line) {
  json j = ParseLine(line);
  ProtocolResponse r;
  r.id = ParseId(j);
  if (j.contains("error")) {
    if (!j["error"].is_string()) throw Error(ErrorCode::kExternalProtocol, "non-string error");
    r.error = j["error"].get<std::string>();
    return r;
  }
  if (!j.contains("result")) throw Error(ErrorCode::kExternalProtocol, "response without result");
  r.result = ParseRows(j["result"], "result");
  return r;
}

ProcessChannel::ProcessChannel(std::vector<std::string> argv, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (argv.empty()) throw Error(ErrorCode::kInvalidArgument, "empty external command");
  // Writes to a dead child must surface as EPIPE, not kill the process.
  static std::once_flag sigpipe;
  std::call_once(sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
    throw Error(ErrorCode::kIo, std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = ::fork();
  if (pid_ < 0) throw Error(ErrorCode::kIo, std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

ProcessChannel::~ProcessChannel() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Closing stdin is the shutdown signal; give the child a moment to exit.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(2000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

std::string ProcessChannel::ReadLine() {
  auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorCode::kExternalProtocol, "timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) throw Error(ErrorCode::kExternalProtocol, "timed out");
    char chunk[4096];
    ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::kExternalProtocol, "external process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::vector<std::vector<double>> ProcessChannel::Call(
    const std::string& op, const std::vector<std::vector<double>>& data) {
  std::lock_guard lock(mu_);
  ProtocolRequest req{next_id_++, op, data};
  std::string line = SerializeRequest(req) + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t n = ::write(to_child_, line.data() + written, line.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::kExternalProtocol, "cannot write to external process");
    written += static_cast<std::size_t>(n);
  }
  for (;;) {
    ProtocolResponse resp = ParseResponse(ReadLine());
    if (resp.id < req.id) continue;  // stale reply to an abandoned request
    if (resp.id != req.id) throw Error(ErrorCode::kExternalProtocol, "response id mismatch");
    if (resp.error) throw Error(ErrorCode::kExternalProtocol, *resp.error);
    return std::move(resp.result);
  }
}

ExternalProcessModel::ExternalProcessModel(std::shared_ptr<ProcessChannel> channel,
                                           std::size_t num_classes, std::size_t feature_dim,
                                           std::string predict_op)
    : channel_(std::move(channel)),
      classes_(num_classes),
      dim_(feature_dim),
      predict_op_(std::move(predict_op)) {}

Matrix ExternalProcessModel::DoPredict(const Matrix& batch) const {
  auto rows = channel_->Call(predict_op_, batch.ToRows());
  if (rows.size() != batch.rows()) {
    throw Error(ErrorCode::kExternalProtocol, "wrong number of probability rows");
  }
  for (const auto& r : rows) {
    if (r.size() != classes_) throw Error(ErrorCode::kExternalProtocol, "wrong row width");
    double sum = 0.0;
    for (double p : r) {
      if (!(p >= 0.0)) throw Error(ErrorCode::kExternalProtocol, "negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error(ErrorCode::kExternalProtocol, "probabilities do not sum to 1");
    }
  }
  return rows.empty() ? Matrix(0, classes_) : Matrix::FromRows(rows);
}

ExternalExtractor::ExternalExtractor(std::shared_ptr<ProcessChannel> channel,
                                     std::size_t output_dim)
    : channel_(std::move(channel)), dim_(output_dim) {}

std::vector<double> ExternalExtractor::Extract(const InputState& state) const {
  std::vector<double> payload;
  if (state.kind() == InputState::Kind::kText) {
    for (unsigned char c : state.as_text()) payload.push_back(static_cast<double>(c));
  } else {
    payload = NumericLeaves(state);
  }
  auto rows = channel_->Call("extract", {payload});
  if (rows.size() != 1 || rows[0].size() != dim_) {
    throw Error(ErrorCode::kExternalProtocol, "extractor returned the wrong shape");
  }
  return rows[0];
}

}  // namespace advgraph
