#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <memory>

#include "advgraph/error.hpp"
#include "advgraph/search.hpp"
#include "test_util.hpp"

namespace advgraph {
namespace {

using testing::CategoricalField;

struct Instance {
  std::vector<TransformerSpec> specs;
  std::unique_ptr<InputGraph> graph;
  std::unique_ptr<TabularEncoder> enc;
  std::unique_ptr<LogisticModel> model;
  std::unique_ptr<VertexEvaluator> ev;

  explicit Instance(std::uint64_t seed, std::size_t budget = 2) {
    Rng rng(seed);
    for (std::size_t f = 0; f < 3; ++f) {
      specs.push_back(CategoricalField("f" + std::to_string(f), f,
                                       testing::Vocab("v" + std::to_string(f) + "_", 3)));
    }
    graph = std::make_unique<InputGraph>(specs, std::vector<DependencyFunction>{},
                                         std::vector<ConstraintSpec>{MaxTotalActions{budget}});
    enc = std::make_unique<TabularEncoder>(testing::CategoricalEncodings(specs));
    model = testing::RandomLogistic(enc->output_dim(), 2, rng, 1.5);
    ev = std::make_unique<VertexEvaluator>(*enc, *model, ScorerSpec{});
  }
};

// Depth of the shallowest goal vertex, by exhaustive level expansion.
std::optional<std::size_t> ShallowestGoal(const Instance& in, const InputState& x,
                                          const SampleContext& ctx, std::size_t depth) {
  std::vector<Successor> level{{{}, x, BudgetLedger(x)}};
  for (std::size_t d = 1; d <= depth; ++d) {
    std::vector<Successor> next;
    for (const auto& v : level) {
      for (auto& s : in.graph->Successors(v.state, v.ledger)) {
        if (in.ev->Evaluate(s.state, ctx).is_adversarial) return d;
        next.push_back(std::move(s));
      }
    }
    level = std::move(next);
  }
  return std::nullopt;
}

TEST(Beam, WideBeamAgreesWithExhaustiveSearch) {
  Ranker bf{RankerKind::kBruteForce, nullptr, std::nullopt, nullptr};
  int goals = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Instance in(seed);
    Rng rng(seed + 100);
    const auto x = testing::RandomCategoricalState(in.specs, rng);
    const auto ctx = in.ev->MakeContext(x);
    auto rec = BeamSearch(*in.graph, *in.ev, x, ctx, bf, {1000, 2}, rng);
    auto oracle = ShallowestGoal(in, x, ctx, 2);
    ASSERT_EQ(rec.success, oracle.has_value()) << seed;
    if (oracle) {
      ++goals;
      EXPECT_EQ(rec.transforms_used, *oracle);
      EXPECT_NE(rec.final_label, rec.original_label);
      EXPECT_EQ(in.graph->Replay(x, rec.edge_sequence).state, rec.final);
    }
  }
  EXPECT_GT(goals, 0);
}

TEST(Beam, FailureReportsBestVertex) {
  Instance in(1, 1);
  LogisticModel flat(in.enc->output_dim(), 2);
  auto w = flat.parameters();
  w[w.size() - 2] = 10.0;  // class 0 always wins
  w[in.enc->output_dim() + 1] = 1.0;  // v0_1 makes it slightly less sure
  flat.set_parameters(w);
  VertexEvaluator ev(*in.enc, flat, ScorerSpec{});
  const auto x = InputState::VectorOf({InputState::Cat("v0_0"), InputState::Cat("v1_0"),
                                       InputState::Cat("v2_0")});
  Rng rng(1);
  Ranker bf{RankerKind::kBruteForce, nullptr, std::nullopt, nullptr};
  auto rec = BeamSearch(*in.graph, ev, x, ev.MakeContext(x), bf, {3, 3}, rng);
  EXPECT_FALSE(rec.success);
  EXPECT_GE(rec.best_score, rec.original_score);
  ASSERT_EQ(rec.edge_sequence.size(), 1u);
  EXPECT_EQ(rec.final.as_vector()[0], InputState::Cat("v0_1"));
  EXPECT_EQ(rec.transforms_used, rec.edge_sequence.size());
}

TEST(Anneal, AcceptanceRule) {
  EXPECT_EQ(MetropolisAcceptor::Probability(0.5, 1.0), 1.0);
  EXPECT_EQ(MetropolisAcceptor::Probability(0.0, 1e-9), 1.0);
  EXPECT_NEAR(MetropolisAcceptor::Probability(-1.0, 2.0), std::exp(-0.5), 1e-15);
  Rng rng(9);
  int acc = 0;
  for (int i = 0; i < 20000; ++i) acc += MetropolisAcceptor::Accept(-1.0, 1.0, rng);
  EXPECT_NEAR(acc / 20000.0, std::exp(-1.0), 0.015);
}

TEST(Anneal, FindsGoalAndRespectsBudget) {
  Instance in(4);
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    const auto x = testing::RandomCategoricalState(in.specs, rng);
    const auto ctx = in.ev->MakeContext(x);
    auto rec = SimulatedAnnealing(*in.graph, *in.ev, x, ctx, {0.05, 2, 1.0, 0.95}, rng);
    EXPECT_LE(rec.transforms_used, 2u);
    EXPECT_LT(rec.elapsed, 0.5);
    if (rec.success) {
      EXPECT_EQ(in.graph->Replay(x, rec.edge_sequence).state, rec.final);
    }
    EXPECT_EQ(rec.success, ShallowestGoal(in, x, ctx, 2).has_value());
  }
}

TEST(Anneal, NonGoalRunsForTheBudget) {
  Instance in(1);
  LogisticModel sure(in.enc->output_dim(), 2);
  auto w = sure.parameters();
  w[w.size() - 2] = 50.0;
  sure.set_parameters(w);
  VertexEvaluator ev(*in.enc, sure, ScorerSpec{});
  Rng rng(3);
  const auto x = testing::RandomCategoricalState(in.specs, rng);
  auto rec = SimulatedAnnealing(*in.graph, ev, x, ev.MakeContext(x), {0.2, 2, 1.0, 0.95}, rng);
  EXPECT_FALSE(rec.success);
  EXPECT_GE(rec.elapsed, 0.2);
  EXPECT_LT(rec.elapsed, 0.3);
}

TEST(Explore, PairingValidation) {
  ExploreOptions o;
  o.search = SearchKind::kAnnealing;
  o.ranker.kind = RankerKind::kLookup;
  o.ranker.table = std::make_shared<EdgeWeightTable>();
  try {
    Validate(o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidPairing);
  }
  o.search = SearchKind::kBeam;
  Validate(o);
  o.ranker.table = nullptr;
  EXPECT_THROW(Validate(o), Error);
  o.ranker.kind = RankerKind::kRandom;
  o.search = SearchKind::kAnnealing;
  Validate(o);
  EXPECT_THROW(Validate(BeamParams{0, 2}), Error);
}

TEST(Explore, WorkerCountDoesNotChangeResults) {
  Instance in(6);
  Rng rng(6);
  std::vector<InputState> xs;
  for (int i = 0; i < 24; ++i) xs.push_back(testing::RandomCategoricalState(in.specs, rng));
  ExploreOptions o;
  o.ranker.kind = RankerKind::kRandom;
  o.beam = {2, 2};
  o.seed = 77;
  auto one = ExploreBatch(*in.graph, *in.ev, xs, o);
  o.workers = 4;
  auto four = ExploreBatch(*in.graph, *in.ev, xs, o);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].index, i);
    EXPECT_EQ(one[i].final, four[i].final);
    EXPECT_EQ(one[i].edge_sequence, four[i].edge_sequence);
    EXPECT_EQ(one[i].success, four[i].success);
  }
}

TEST(Summarize, AveragesOverTheRightSubsets) {
  std::vector<GenerationRecord> r(4);
  r[0].success = true;
  r[0].transforms_used = 1;
  r[0].elapsed = 1.0;
  r[1].success = true;
  r[1].transforms_used = 3;
  r[1].elapsed = 2.0;
  r[2].elapsed = 3.0;
  r[3].error = "boom";
  r[3].elapsed = 2.0;
  auto m = Summarize(r);
  EXPECT_EQ(m.total, 4u);
  EXPECT_EQ(m.successes, 2u);
  EXPECT_EQ(m.errors, 1u);
  EXPECT_DOUBLE_EQ(m.success_rate, 0.5);
  EXPECT_DOUBLE_EQ(*m.avg_transforms, 2.0);
  EXPECT_DOUBLE_EQ(m.avg_time, 2.0);
  EXPECT_FALSE(Summarize(std::vector<GenerationRecord>{}).avg_transforms.has_value());
}

}  // namespace
}  // namespace advgraph
