#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "advgraph/ranking.hpp"
#include "advgraph/search.hpp"

using namespace advgraph;

namespace {

TransformerSpec Field(std::size_t f, std::size_t levels) {
  TransformerSpec t;
  t.name = "f" + std::to_string(f);
  t.type = TransformerType::kCategorical;
  t.field = f;
  for (std::size_t i = 0; i < levels; ++i) t.vocabulary.push_back(t.name + "_" + std::to_string(i));
  t.subtransformer_args = {SubtransformerArgs{"swap", {}, {}, {}, {}}};
  return t;
}

struct Tabular {
  std::vector<TransformerSpec> specs;
  std::vector<ColumnEncoding> cols;
  std::vector<InputState> rows;

  explicit Tabular(std::size_t fields) {
    Rng rng(1);
    for (std::size_t f = 0; f < fields; ++f) {
      specs.push_back(Field(f, 6));
      cols.push_back({ColumnEncoding::Type::kCategorical, specs.back().vocabulary, 0});
    }
    for (int r = 0; r < 64; ++r) {
      InputState::Vector v;
      for (const auto& s : specs) v.push_back(InputState::Cat(s.vocabulary[UniformIndex(rng, 6)]));
      rows.push_back(InputState::VectorOf(std::move(v)));
    }
  }
};

void BM_EnumerateEdges(benchmark::State& state) {
  Tabular t(static_cast<std::size_t>(state.range(0)));
  InputGraph g(t.specs, {}, {MaxTotalActions{3}});
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& x = t.rows[i++ % t.rows.size()];
    benchmark::DoNotOptimize(g.EnumerateEdges(x, BudgetLedger(x)));
  }
}
BENCHMARK(BM_EnumerateEdges)->Arg(4)->Arg(16)->Arg(64);

void BM_BruteForceRank(benchmark::State& state) {
  Tabular t(static_cast<std::size_t>(state.range(0)));
  InputGraph g(t.specs);
  TabularEncoder enc(t.cols);
  MlpModel m(enc.output_dim(), 16, 2, 3);
  VertexEvaluator ev(enc, m, ScorerSpec{});
  const auto& x = t.rows[0];
  const auto ctx = ev.MakeContext(x);
  const BudgetLedger l(x);
  const auto edges = g.EnumerateEdges(x, l);
  for (auto _ : state) benchmark::DoNotOptimize(RankBruteforce(g, x, l, edges, ev, ctx));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(edges.size()));
}
BENCHMARK(BM_BruteForceRank)->Arg(4)->Arg(16)->Arg(64);

void BM_BeamSearch(benchmark::State& state) {
  Tabular t(7);
  InputGraph g(t.specs, {}, {MaxTotalActions{3}});
  TabularEncoder enc(t.cols);
  MlpModel m(enc.output_dim(), 16, 2, 3);
  ScorerSpec spec;
  spec.target_label = 1;
  VertexEvaluator ev(enc, m, spec);
  Ranker r{RankerKind::kBruteForce, nullptr, std::nullopt, nullptr};
  const BeamParams p{static_cast<std::size_t>(state.range(0)), 3};
  Rng rng(2);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& x = t.rows[i++ % t.rows.size()];
    benchmark::DoNotOptimize(BeamSearch(g, ev, x, ev.MakeContext(x), r, p, rng));
  }
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(4)->Arg(16);

void BM_Levenshtein(benchmark::State& state) {
  const std::string a(static_cast<std::size_t>(state.range(0)), 'a');
  std::string b = a;
  for (std::size_t i = 0; i < b.size(); i += 3) b[i] = 'b';
  for (auto _ : state) benchmark::DoNotOptimize(Levenshtein(a, b));
}
BENCHMARK(BM_Levenshtein)->Arg(16)->Arg(64)->Arg(256);

}  // namespace
BENCHMARK_MAIN();
