#include "advgraph/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "advgraph/error.hpp"

namespace advgraph {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Node {
  InputState state;
  BudgetLedger ledger;
  std::vector<TransformationEdge> path;
  VertexScore score;
};

GenerationRecord Finish(const InputState& original, const SampleContext& ctx,
                        double original_score, const Node& node, bool success,
                        Clock::time_point start) {
  GenerationRecord r;
  r.original = original;
  r.final = node.state;
  r.edge_sequence = node.path;
  r.success = success;
  r.transforms_used = node.path.size();
  r.original_score = original_score;
  r.best_score = node.score.value;
  r.original_label = ctx.original_label;
  r.final_label = node.score.predicted_label;
  r.elapsed = Seconds(start);
  return r;
}

// Children of one beam parent, in the order the ranker yields them.
std::vector<Node> Expand(const InputGraph& graph, const VertexEvaluator& evaluator,
                         const SampleContext& ctx, const Node& parent, const Ranker& ranker,
                         std::size_t width, Rng& rng) {
  auto edges = graph.EnumerateEdges(parent.state, parent.ledger);
  std::vector<Node> out;
  if (edges.empty()) return out;

  auto child = [&](const TransformationEdge& e, InputState s, BudgetLedger l, VertexScore sc) {
    Node n{std::move(s), std::move(l), parent.path, sc};
    n.path.push_back(e);
    out.push_back(std::move(n));
  };

  if (ranker.kind == RankerKind::kBruteForce) {
    auto ranked = RankBruteforce(graph, parent.state, parent.ledger, edges, evaluator, ctx);
    for (auto& e : ranked.entries) {
      child(e.edge, std::move(*e.resulting_state), std::move(*e.ledger), *e.score);
    }
    return out;
  }

  const std::size_t k = std::min(width, edges.size());
  RankedEdges ranked;
  switch (ranker.kind) {
    case RankerKind::kRandom: ranked = RankRandom(edges, k, rng); break;
    case RankerKind::kLookup: ranked = RankLookup(edges, *ranker.table, ranker.default_weight); break;
    case RankerKind::kGuided: ranked = RankGuided(parent.state, edges, *ranker.policy); break;
    case RankerKind::kBruteForce: break;
  }
  if (ranked.entries.size() > k) ranked.entries.resize(k);

  std::vector<Successor> succ;
  std::vector<std::vector<double>> features;
  for (const auto& e : ranked.entries) {
    auto s = graph.ApplyEdge(parent.state, parent.ledger, e.edge);
    features.push_back(evaluator.Features(s.state));
    succ.push_back(std::move(s));
  }
  auto scores = evaluator.EvaluateFeatures(features, ctx);
  for (std::size_t i = 0; i < succ.size(); ++i) {
    child(succ[i].edge, std::move(succ[i].state), std::move(succ[i].ledger), scores[i]);
  }
  return out;
}

}  // namespace

void Validate(const BeamParams& params) {
  if (params.width == 0) throw Error(ErrorCode::kInvalidArgument, "beam width must be >= 1");
  if (params.depth == 0) throw Error(ErrorCode::kInvalidArgument, "beam depth must be >= 1");
}

void Validate(const AnnealParams& params) {
  if (!(params.time_budget > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time_budget must be > 0");
  }
  if (params.max_transforms == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_transforms must be >= 1");
  }
  if (!(params.initial_temperature > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "initial temperature must be > 0");
  }
  if (!(params.cooling > 0.0 && params.cooling < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cooling must lie in (0, 1)");
  }
}

GenerationRecord BeamSearch(const InputGraph& graph, const VertexEvaluator& evaluator,
                            const InputState& original, const SampleContext& ctx,
                            const Ranker& ranker, const BeamParams& params, Rng& rng) {
  Validate(params);
  const auto start = Clock::now();
  Node root{original, BudgetLedger(original), {}, evaluator.Evaluate(original, ctx)};
  const double root_score = root.score.value;
  if (root.score.is_adversarial) return Finish(original, ctx, root_score, root, true, start);

  Node best = root;
  std::vector<Node> beam{root};
  for (std::size_t level = 0; level < params.depth && !beam.empty(); ++level) {
    std::vector<Node> pool;
    for (const auto& parent : beam) {
      for (auto& c : Expand(graph, evaluator, ctx, parent, ranker, params.width, rng)) {
        if (c.score.is_adversarial) return Finish(original, ctx, root_score, c, true, start);
        bool dup = std::any_of(pool.begin(), pool.end(), [&](const Node& n) {
          return n.state == c.state && n.ledger == c.ledger;
        });
        if (!dup) pool.push_back(std::move(c));
      }
    }
    std::stable_sort(pool.begin(), pool.end(), [](const Node& a, const Node& b) {
      return a.score.value > b.score.value;
    });
    if (pool.size() > params.width) pool.resize(params.width);
    if (!pool.empty() && pool.front().score.value > best.score.value) best = pool.front();
    beam = std::move(pool);
  }
  return Finish(original, ctx, root_score, best, false, start);
}

double MetropolisAcceptor::Probability(double delta, double temperature) {
  if (delta >= 0.0) return 1.0;
  return std::exp(delta / temperature);
}

bool MetropolisAcceptor::Accept(double delta, double temperature, Rng& rng) {
  if (delta >= 0.0) return true;
  return UniformReal(rng) < Probability(delta, temperature);
}

GenerationRecord SimulatedAnnealing(const InputGraph& graph, const VertexEvaluator& evaluator,
                                    const InputState& original, const SampleContext& ctx,
                                    const AnnealParams& params, Rng& rng) {
  Validate(params);
  const auto start = Clock::now();
  const Node root{original, BudgetLedger(original), {}, evaluator.Evaluate(original, ctx)};
  const double root_score = root.score.value;
  if (root.score.is_adversarial) return Finish(original, ctx, root_score, root, true, start);
  if (graph.EnumerateEdges(original, root.ledger).empty()) {
    return Finish(original, ctx, root_score, root, false, start);
  }

  Node current = root;
  Node best = root;
  double temperature = params.initial_temperature;
  while (Seconds(start) < params.time_budget) {
    if (current.path.size() >= params.max_transforms) current = root;
    const std::size_t remaining = params.max_transforms - current.path.size();
    const std::size_t length = 1 + UniformIndex(rng, remaining);
    Node proposal{current.state, current.ledger, current.path, {}};
    for (std::size_t i = 0; i < length; ++i) {
      auto succ = graph.Successors(proposal.state, proposal.ledger);
      if (succ.empty()) break;
      auto& pick = succ[UniformIndex(rng, succ.size())];
      proposal.state = std::move(pick.state);
      proposal.ledger = std::move(pick.ledger);
      proposal.path.push_back(std::move(pick.edge));
    }
    if (proposal.path.size() == current.path.size()) {
      current = root;  // dead end
      continue;
    }
    proposal.score = evaluator.Evaluate(proposal.state, ctx);
    if (proposal.score.is_adversarial) {
      return Finish(original, ctx, root_score, proposal, true, start);
    }
    if (proposal.score.value > best.score.value) best = proposal;
    // Rejected proposals leave `current` and its budget untouched.
    if (MetropolisAcceptor::Accept(proposal.score.value - current.score.value, temperature, rng)) {
      current = std::move(proposal);
    }
    temperature *= params.cooling;
  }
  return Finish(original, ctx, root_score, best, false, start);
}

std::string_view ToString(SearchKind kind) {
  return kind == SearchKind::kBeam ? "beam_search" : "simulated_annealing";
}

SearchKind ParseSearchKind(std::string_view name) {
  if (name == "beam_search") return SearchKind::kBeam;
  if (name == "simulated_annealing") return SearchKind::kAnnealing;
  throw Error(ErrorCode::kParse, "unknown search algorithm " + std::string(name));
}

void Validate(const ExploreOptions& options) {
  if (options.search == SearchKind::kAnnealing) {
    if (options.ranker.kind != RankerKind::kRandom) {
      throw Error(ErrorCode::kInvalidPairing,
                  "simulated_annealing only works with the random ranker, not " +
                      std::string(ToString(options.ranker.kind)));
    }
    Validate(options.anneal);
  } else {
    Validate(options.beam);
  }
  if (options.ranker.kind == RankerKind::kLookup && !options.ranker.table) {
    throw Error(ErrorCode::kInvalidPairing, "lookup_table ranker without a trained table");
  }
  if (options.ranker.kind == RankerKind::kGuided && !options.ranker.policy) {
    throw Error(ErrorCode::kInvalidPairing, "model_guided ranker without a trained policy");
  }
  if (options.workers == 0) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
}

MetricsReport Summarize(std::span<const GenerationRecord> records) {
  MetricsReport m;
  m.total = records.size();
  double transforms = 0.0;
  double time = 0.0;
  for (const auto& r : records) {
    if (r.error) ++m.errors;
    if (r.success) {
      ++m.successes;
      transforms += static_cast<double>(r.transforms_used);
    }
    time += r.elapsed;
  }
  if (m.total > 0) {
    m.success_rate = static_cast<double>(m.successes) / static_cast<double>(m.total);
    m.avg_time = time / static_cast<double>(m.total);
  }
  if (m.successes > 0) m.avg_transforms = transforms / static_cast<double>(m.successes);
  return m;
}

std::vector<GenerationRecord> ExploreBatch(const InputGraph& graph,
                                           const VertexEvaluator& evaluator,
                                           std::span<const InputState> samples,
                                           const ExploreOptions& options) {
  Validate(options);
  if (!options.target_features.empty() && options.target_features.size() != samples.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one target feature row per sample");
  }
  std::vector<GenerationRecord> records(samples.size());
  std::atomic<std::size_t> next{0};

  auto run_one = [&](std::size_t i) {
    const auto start = Clock::now();
    try {
      std::optional<std::vector<double>> target;
      if (!options.target_features.empty()) target = options.target_features[i];
      SampleContext ctx = evaluator.MakeContext(samples[i], std::move(target));
      Rng rng(DeriveSeed(options.seed, i));
      if (options.search == SearchKind::kBeam) {
        records[i] = BeamSearch(graph, evaluator, samples[i], ctx, options.ranker, options.beam, rng);
      } else {
        records[i] = SimulatedAnnealing(graph, evaluator, samples[i], ctx, options.anneal, rng);
      }
    } catch (const Error& e) {
      GenerationRecord r;
      r.original = samples[i];
      r.final = samples[i];
      r.error = e.what();
      r.elapsed = Seconds(start);
      records[i] = std::move(r);
    }
    records[i].index = i;
  };

  auto worker = [&] {
    for (std::size_t i = next++; i < samples.size(); i = next++) run_one(i);
  };

  const std::size_t n = std::min(options.workers, std::max<std::size_t>(samples.size(), 1));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return records;
}

}  // namespace advgraph
