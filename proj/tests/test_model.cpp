#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>

#include "advgraph/error.hpp"
#include "advgraph/model.hpp"
#include "test_util.hpp"

namespace advgraph {
namespace {

Matrix RandomMatrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = 2.0 * UniformReal(rng) - 1.0;
  return m;
}

TEST(Predict, ZeroLogisticIsUniform) {
  LogisticModel m(4, 3);
  auto p = m.PredictOne(std::vector<double>{1, 2, 3, 4});
  for (double v : p) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Predict, ShapeRowsSumAndDimensionCheck) {
  Rng rng(1);
  MlpModel m(5, 7, 4, 9);
  auto x = RandomMatrix(6, 5, rng);
  auto p = m.Predict(x);
  ASSERT_EQ(p.rows(), 6u);
  ASSERT_EQ(p.cols(), 4u);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double s = 0;
    for (double v : p.row(r)) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
  try {
    m.Predict(RandomMatrix(1, 4, rng));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

void CheckGradient(TrainableModel& m, Rng& rng) {
  auto x = RandomMatrix(8, m.feature_dim(), rng);
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < 8; ++i) y.push_back(UniformIndex(rng, m.num_classes()));
  std::vector<double> grad;
  m.LossAndGradient(x, y, &grad);
  auto p = m.parameters();
  ASSERT_EQ(grad.size(), p.size());
  const double h = 1e-5;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto q = p;
    q[i] = p[i] + h;
    m.set_parameters(q);
    const double up = m.LossAndGradient(x, y, nullptr);
    q[i] = p[i] - h;
    m.set_parameters(q);
    const double down = m.LossAndGradient(x, y, nullptr);
    const double fd = (up - down) / (2 * h);
    EXPECT_LE(std::abs(fd - grad[i]), 1e-4 * std::max(1.0, std::abs(fd))) << "param " << i;
  }
  m.set_parameters(p);
}

TEST(Gradient, MatchesCentralDifferences) {
  Rng rng(4);
  MlpModel mlp(4, 5, 3, 17);
  CheckGradient(mlp, rng);
  auto lr = testing::RandomLogistic(4, 3, rng);
  CheckGradient(*lr, rng);
}

TEST(Train, SeparableReachesFullAccuracy) {
  Rng rng(8);
  Matrix x(60, 2);
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < 60; ++i) {
    const bool pos = i % 2 == 0;
    x(i, 0) = (pos ? 1.0 : -1.0) + 0.3 * (UniformReal(rng) - 0.5);
    x(i, 1) = UniformReal(rng) - 0.5;
    y.push_back(pos ? 1 : 0);
  }
  LogisticModel m(2, 2);
  TrainOptions o;
  o.epochs = 200;
  o.seed = 3;
  EXPECT_EQ(TrainBuiltin(m, x, y, o).train_accuracy, 1.0);
  EXPECT_EQ(Accuracy(m, x, y), 1.0);
}

TEST(Train, ZeroLearningRateAndSeedReproducibility) {
  Rng rng(6);
  auto x = RandomMatrix(40, 3, rng);
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < 40; ++i) y.push_back(x(i, 0) > 0 ? 1 : 0);
  MlpModel a(3, 4, 2, 5);
  const auto before = a.parameters();
  TrainOptions o;
  o.learning_rate = 0.0;
  o.epochs = 5;
  TrainBuiltin(a, x, y, o);
  EXPECT_EQ(a.parameters(), before);

  o.learning_rate = 0.2;
  MlpModel b(3, 4, 2, 5), c(3, 4, 2, 5);
  TrainBuiltin(b, x, y, o);
  TrainBuiltin(c, x, y, o);
  EXPECT_EQ(b.parameters(), c.parameters());
}

TEST(Train, DivergenceIsReported) {
  Matrix x(4, 1);
  for (std::size_t i = 0; i < 4; ++i) x(i, 0) = 1e200;
  std::vector<std::size_t> y{0, 0, 0, 1};
  LogisticModel m(1, 2);
  TrainOptions o;
  o.learning_rate = 1e200;
  o.epochs = 3;
  try {
    TrainBuiltin(m, x, y, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
  }
}

TEST(Serialize, RoundTripIsExact) {
  Rng rng(2);
  MlpModel m(3, 4, 2, 7);
  auto text = SerializeModel(m);
  auto back = ParseModel(text);
  EXPECT_EQ(back->kind(), ModelKind::kBuiltinMlp);
  EXPECT_EQ(back->parameters(), m.parameters());
  EXPECT_EQ(SerializeModel(*back), text);
  EXPECT_THROW(ParseModel("{\"format\":\"other\"}"), Error);
}

TEST(Extractors, TabularIdentityAndUnknownLabel) {
  ColumnEncoding cat{ColumnEncoding::Type::kCategorical, {"A", "B"}, 0};
  ColumnEncoding num{ColumnEncoding::Type::kNumeric, {}, 0};
  TabularEncoder enc({cat, num});
  EXPECT_EQ(enc.output_dim(), 3u);
  EXPECT_EQ(enc.Extract(InputState::VectorOf({InputState::Cat("A"), InputState::Float(2.0)})),
            (std::vector<double>{1, 0, 2.0}));
  try {
    enc.Extract(InputState::VectorOf({InputState::Cat("C"), InputState::Float(2.0)}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEncoding);
  }
  IdentityExtractor id(3);
  EXPECT_EQ(id.Extract(InputState::VectorOf({InputState::Float(1), InputState::Float(2), InputState::Float(3)})),
            (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(id.Extract(InputState::TextOf("x")), Error);
}

TEST(Protocol, RoundTripFixtures) {
  for (const std::string line : {R"({"id":1,"op":"predict","data":[[1.5,-2.0],[0.0,3.25]]})",
                                 R"({"id":7,"op":"extract","data":[]})"}) {
    EXPECT_EQ(SerializeRequest(ParseRequest(line)), line);
  }
  for (const std::string line : {R"({"id":1,"result":[[0.125,0.875]]})", R"({"id":2,"error":"boom"})"}) {
    EXPECT_EQ(SerializeResponse(ParseResponse(line)), line);
  }
  try {
    ParseResponse("{\"result\":[[1]]}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExternalProtocol);
  }
}

std::vector<std::string> Fixture(const std::string& mode = "ok") {
  return {"python3", testing::SourceDir() + "/tests/fixtures/echo_model.py", mode};
}

TEST(ExternalProcess, PredictIsParsedBitExactly) {
  auto ch = std::make_shared<ProcessChannel>(Fixture(), std::chrono::milliseconds(10000));
  ExternalProcessModel m(ch, 2, 3);
  Matrix x(4, 3, 1.0);
  auto p = m.Predict(x);
  ASSERT_EQ(p.rows(), 4u);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(p(r, 0), 0.125);
    EXPECT_EQ(p(r, 1), 0.875);
  }
  EXPECT_EQ(m.query_count(), 1u);
  ExternalExtractor ex(ch, 3);
  EXPECT_EQ(ex.Extract(InputState::TextOf("ab")), (std::vector<double>{97, 98, 0}));
}

TEST(ExternalProcess, MalformedResponsesAndTimeout) {
  {
    auto ch = std::make_shared<ProcessChannel>(Fixture("garbage"), std::chrono::milliseconds(10000));
    ExternalProcessModel m(ch, 2, 1);
    try {
      m.Predict(Matrix(1, 1));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kExternalProtocol);
    }
  }
  {
    auto ch = std::make_shared<ProcessChannel>(Fixture("badrows"), std::chrono::milliseconds(10000));
    ExternalProcessModel m(ch, 2, 1);
    EXPECT_THROW(m.Predict(Matrix(1, 1)), Error);
  }
  {
    auto ch = std::make_shared<ProcessChannel>(Fixture("silent"), std::chrono::milliseconds(300));
    ExternalProcessModel m(ch, 2, 1);
    try {
      m.Predict(Matrix(1, 1));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kExternalProtocol);
    }
  }
}

}  // namespace
}  // namespace advgraph
