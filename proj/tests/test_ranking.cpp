#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "advgraph/error.hpp"
#include "advgraph/ranking.hpp"
#include "test_util.hpp"

namespace advgraph {
namespace {

using testing::CategoricalField;

std::vector<TransformationEdge> Edges(std::size_t n) {
  std::vector<TransformationEdge> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"t", "swap", LabelParam{std::to_string(i)}});
  return out;
}

TEST(Random, SamplesWithoutReplacementAndCoversUniformly) {
  Rng rng(5);
  auto edges = Edges(6);
  std::map<std::string, int> first;
  for (int trial = 0; trial < 6000; ++trial) {
    auto r = RankRandom(edges, 3, rng);
    ASSERT_EQ(r.entries.size(), 3u);
    EXPECT_FALSE(r.sorted);
    std::set<std::string> seen;
    for (const auto& e : r.entries) seen.insert(std::get<LabelParam>(e.edge.parameter).label);
    EXPECT_EQ(seen.size(), 3u);
    first[std::get<LabelParam>(r.entries[0].edge.parameter).label]++;
  }
  for (const auto& [label, c] : first) EXPECT_NEAR(c / 6000.0, 1.0 / 6.0, 0.03) << label;
  EXPECT_EQ(RankRandom(edges, 10, rng).entries.size(), 6u);
  EXPECT_THROW(RankRandom(edges, 0, rng), Error);
  try {
    RankRandom({}, 1, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyEdgeSet);
  }
}

TEST(BruteForce, DomainWithTldScoresEachSubstitution) {
  TransformerSpec spec = testing::StringSpec("domain", "z");
  spec.subtransformer_args = {SubtransformerArgs{"substitute", "z", {}, {}, {}}};
  spec.input_processor_name = "tld_split";
  InputGraph graph({spec});
  HookExtractor ex("text_stats");
  Rng rng(3);
  auto model = testing::RandomLogistic(ex.output_dim(), 2, rng, 3.0);
  VertexEvaluator ev(ex, *model, ScorerSpec{});
  const auto x = InputState::TextOf("lfjx.com");
  auto ctx = ev.MakeContext(x);
  BudgetLedger ledger(x);
  auto edges = graph.EnumerateEdges(x, ledger);
  ASSERT_EQ(edges.size(), 4u);
  model->ResetQueryCount();
  auto ranked = RankBruteforce(graph, x, ledger, edges, ev, ctx);
  EXPECT_EQ(model->query_count(), 1u);
  std::set<std::string> got;
  for (const auto& e : ranked.entries) got.insert(e.resulting_state->as_text());
  EXPECT_EQ(got, (std::set<std::string>{"zfjx.com", "lzjx.com", "lfzx.com", "lfjz.com"}));
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    const auto& e = ranked.entries[i];
    EXPECT_EQ(e.estimated_score, ev.Evaluate(*e.resulting_state, ctx).value);
    if (i > 0) {
      EXPECT_GE(ranked.entries[i - 1].estimated_score, e.estimated_score);
    }
  }
}

struct CatFixture {
  std::vector<TransformerSpec> specs{CategoricalField("a", 0, testing::Vocab("a", 4)),
                                     CategoricalField("b", 1, testing::Vocab("b", 3))};
  InputGraph graph{specs};
  TabularEncoder enc{testing::CategoricalEncodings(specs)};
};

TEST(Lookup, MeansMatchTheLogAndUnseenKeysFallBack) {
  CatFixture f;
  Rng rng(11);
  auto model = testing::RandomLogistic(f.enc.output_dim(), 2, rng, 2.0);
  VertexEvaluator ev(f.enc, *model, ScorerSpec{});
  std::vector<InputState> samples;
  std::vector<SampleContext> ctx;
  for (int i = 0; i < 20; ++i) {
    samples.push_back(testing::RandomCategoricalState(f.specs, rng));
    ctx.push_back(ev.MakeContext(samples.back()));
  }
  std::vector<EdgeObservation> log;
  auto table = TrainLookupTable(f.graph, samples, ctx, ev, &log);
  std::map<EdgeKey, std::pair<double, std::size_t>> sums;
  double total = 0.0;
  for (const auto& o : log) {
    auto& s = sums[KeyOf(o.edge)];
    s.first += o.score;
    s.second += 1;
    total += o.score;
  }
  ASSERT_EQ(sums.size(), table.entries().size());
  for (const auto& [k, s] : sums) {
    EXPECT_NEAR(table.Find(k)->mean, s.first / s.second, 1e-12);
    EXPECT_EQ(table.Find(k)->count, s.second);
  }
  EXPECT_NEAR(table.GlobalMean(), total / log.size(), 1e-12);
  EXPECT_EQ(EdgeWeightTable::Parse(table.Serialize()), table);

  std::vector<TransformationEdge> edges{{"zz", "swap", LabelParam{"q"}},
                                        {"a", "swap", LabelParam{"a1"}}};
  auto r = RankLookup(edges, table, 1e9);
  EXPECT_EQ(r.entries[0].edge.transformer_id, "zz");
  EXPECT_EQ(r.entries[0].estimated_score, 1e9);
  auto d = RankLookup(edges, table);
  const auto& unseen = d.entries[0].edge.transformer_id == "zz" ? d.entries[0] : d.entries[1];
  EXPECT_EQ(unseen.estimated_score, table.GlobalMean());
}

TEST(Lookup, RankingIsStableAndQueryFree) {
  EdgeWeightTable table;
  table.Observe({"t", "swap", "x"}, 2.0);
  table.Observe({"t", "swap", "y"}, 2.0);
  table.Observe({"t", "swap", "z"}, 5.0);
  std::vector<TransformationEdge> edges{{"t", "swap", LabelParam{"x"}},
                                        {"t", "swap", LabelParam{"y"}},
                                        {"t", "swap", LabelParam{"z"}}};
  auto r = RankLookup(edges, table);
  EXPECT_EQ(std::get<LabelParam>(r.entries[0].edge.parameter).label, "z");
  EXPECT_EQ(std::get<LabelParam>(r.entries[1].edge.parameter).label, "x");
  EXPECT_EQ(std::get<LabelParam>(r.entries[2].edge.parameter).label, "y");
}

TEST(Schedule, EndpointsAreExact) {
  MixingSchedule s;
  EXPECT_EQ(s.At(0, 10), s.start);
  EXPECT_EQ(s.At(9, 10), s.end);
  EXPECT_EQ(s.At(0, 1), s.start);
  auto mid = s.At(5, 11);
  EXPECT_NEAR(mid.ideal, 0.4, 1e-12);
  EXPECT_NEAR(mid.ideal + mid.policy + mid.random, 1.0, 1e-12);
  s.end.random = 0.5;
  EXPECT_THROW(Validate(s), Error);
}

TEST(Td, ConvergesToGeometricSum) {
  std::vector<double> w{0.0};
  std::vector<double> phi{1.0};
  for (int i = 0; i < 5000; ++i) TdUpdate(w, phi, 1.0, w[0], false, 0.1, 0.9);
  EXPECT_NEAR(w[0], 10.0, 1e-6);
  std::vector<double> wrong{0.0, 0.0};
  EXPECT_THROW(TdUpdate(wrong, phi, 1.0, 0.0, true, 0.1, 0.9), Error);
}

TEST(Guided, HigherWeightRanksFirst) {
  GuidedParams p;
  p.feature_dim = 4;
  GuidedPolicy policy(p);
  std::vector<TransformationEdge> edges{{"t", "swap", LabelParam{"x"}},
                                        {"t", "swap", LabelParam{"y"}}};
  auto& wy = policy.MutableWeights(KeyOf(edges[1]));
  wy.back() = 1.0;  // bias term
  auto r = RankGuided(InputState::Cat("x"), edges, policy);
  EXPECT_EQ(std::get<LabelParam>(r.entries[0].edge.parameter).label, "y");
  EXPECT_EQ(GuidedPolicy::Parse(policy.Serialize()), policy);
  std::vector<double> narrow(3, 0.0);
  EXPECT_THROW(policy.Value(narrow, edges[0]), Error);
}

TEST(Guided, TrainingFindsTheDecisiveSwap) {
  std::vector<TransformerSpec> specs{CategoricalField("a", 0, testing::Vocab("a", 5))};
  InputGraph graph(specs);
  TabularEncoder enc(testing::CategoricalEncodings(specs));
  LogisticModel model(5, 2);
  // Class 1 logit: only a4 pushes towards it.
  std::vector<double> w(12, 0.0);
  w[5 + 4] = 4.0;
  w[10] = 1.0;
  model.set_parameters(w);
  VertexEvaluator ev(enc, model, ScorerSpec{});
  std::vector<InputState> samples;
  std::vector<SampleContext> ctx;
  for (int i = 0; i < 4; ++i) {
    samples.push_back(InputState::VectorOf({InputState::Cat("a" + std::to_string(i))}));
    ctx.push_back(ev.MakeContext(samples.back()));
  }
  GuidedParams p;
  p.episodes = 20;
  p.horizon = 1;
  p.blend = 0.0;
  p.learning_rate = 0.1;
  p.seed = 3;
  model.ResetQueryCount();
  auto policy = TrainGuidedPolicy(graph, samples, ctx, ev, p);
  const auto x = samples[0];
  auto edges = graph.EnumerateEdges(x, BudgetLedger(x));
  const auto before = model.query_count();
  auto r = RankGuided(x, edges, policy);
  EXPECT_EQ(model.query_count(), before);
  EXPECT_EQ(std::get<LabelParam>(r.entries[0].edge.parameter).label, "a4");

  p.episodes = 0;
  EXPECT_THROW(TrainGuidedPolicy(graph, samples, ctx, ev, p), Error);
}

}  // namespace
}  // namespace advgraph
