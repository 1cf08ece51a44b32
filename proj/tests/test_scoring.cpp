#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "advgraph/error.hpp"
#include "advgraph/scoring.hpp"
#include "test_util.hpp"

namespace advgraph {
namespace {

TEST(CrossEntropy, IsMinusLogP) {
  std::vector<double> p{0.2, 0.3, 0.5};
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(CrossEntropy(p, k), -std::log(p[k]), 1e-15);
  std::vector<double> z{0.0, 1.0};
  EXPECT_NEAR(CrossEntropy(z, 0), -std::log(1e-12), 1e-9);
}

TEST(ClassifierLoss, UntargetedAndTargeted) {
  ScorerSpec spec;
  std::vector<double> p{0.7, 0.2, 0.1};
  auto s = ScoreClassifierLoss(p, 0, spec);
  EXPECT_NEAR(s.value, -std::log(0.7), 1e-15);
  EXPECT_EQ(s.predicted_label, 0u);
  EXPECT_FALSE(s.is_adversarial);

  std::vector<double> q{0.3, 0.6, 0.1};
  EXPECT_TRUE(ScoreClassifierLoss(q, 0, spec).is_adversarial);

  spec.target_label = 2;
  auto t = ScoreClassifierLoss(q, 0, spec);
  EXPECT_NEAR(t.value, std::log(0.1), 1e-15);
  EXPECT_FALSE(t.is_adversarial);  // label 1 is not the target
  std::vector<double> r{0.1, 0.2, 0.7};
  EXPECT_TRUE(ScoreClassifierLoss(r, 0, spec).is_adversarial);
}

TEST(ClassifierLoss, RejectsBadInput) {
  ScorerSpec spec;
  std::vector<double> bad{0.5, 0.6};
  try {
    ScoreClassifierLoss(bad, 0, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidDistribution);
  }
  std::vector<double> ok{0.5, 0.5};
  try {
    ScoreClassifierLoss(ok, 2, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabelOutOfRange);
  }
}

TEST(FeatureDistance, NormsAndCosine) {
  ScorerSpec spec;
  spec.kind = ScoreKind::kFeatureDistance;
  std::vector<double> f{1, 2}, t{4, 6};
  EXPECT_NEAR(ScoreFeatureDistance(f, t, spec).value, -5.0, 1e-12);
  spec.distance = DistanceKind::kLp;
  spec.p = 1.0;
  EXPECT_NEAR(ScoreFeatureDistance(f, t, spec).value, -7.0, 1e-12);
  spec.direction = ScoreDirection::kMinimize;
  EXPECT_NEAR(ScoreFeatureDistance(f, t, spec).value, 7.0, 1e-12);

  ScorerSpec cos;
  cos.kind = ScoreKind::kFeatureDistance;
  cos.distance = DistanceKind::kCosine;
  std::vector<double> base{0, 0}, along{2, 3}, target{4, 6};
  EXPECT_NEAR(ScoreFeatureDistance(along, target, cos, std::span<const double>(base)).value, 1.0, 1e-12);
  auto zero = ScoreFeatureDistance(base, target, cos, std::span<const double>(base));
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.value, 0.0);
  std::vector<double> shorter{1};
  try {
    ScoreFeatureDistance(shorter, target, cos);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Validate, FeatureDistanceNeedsTarget) {
  ScorerSpec s;
  s.target_label = 1;
  Validate(s);
  s.loss = "hinge";
  EXPECT_THROW(Validate(s), Error);
}

TEST(Evaluator, OneQueryPerCallAndConsistentFlag) {
  Rng rng(2);
  auto model = testing::RandomLogistic(3, 2, rng, 2.0);
  IdentityExtractor id(3);
  VertexEvaluator ev(id, *model, ScorerSpec{});
  const auto x = InputState::VectorOf({InputState::Float(1), InputState::Float(-1), InputState::Float(0.5)});
  model->ResetQueryCount();
  auto ctx = ev.MakeContext(x);
  EXPECT_EQ(model->query_count(), 1u);
  auto s = ev.Evaluate(x, ctx);
  EXPECT_EQ(model->query_count(), 2u);
  EXPECT_EQ(s.predicted_label, ctx.original_label);
  EXPECT_FALSE(s.is_adversarial);
  std::vector<std::vector<double>> batch(5, ev.Features(x));
  EXPECT_EQ(ev.EvaluateFeatures(batch, ctx).size(), 5u);
  EXPECT_EQ(model->query_count(), 3u);
}

TEST(Registry, CustomScorer) {
  ScorerRegistry::Global().Register("neg_first_feature", [](const ScoreInputs& in) {
    return -in.features[0];
  });
  try {
    ScorerRegistry::Global().Register("neg_first_feature", [](const ScoreInputs&) { return 0.0; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateName);
  }
  LogisticModel zero(2, 2);
  IdentityExtractor id(2);
  ScorerSpec spec;
  spec.kind = ScoreKind::kCustom;
  spec.custom_name = "neg_first_feature";
  VertexEvaluator ev(id, zero, spec);
  const auto x = InputState::VectorOf({InputState::Float(3), InputState::Float(1)});
  EXPECT_DOUBLE_EQ(ev.Evaluate(x, ev.MakeContext(x)).value, -3.0);
}

}  // namespace
}  // namespace advgraph
