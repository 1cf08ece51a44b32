#include "advgraph/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <nlohmann/json.hpp>

#include "advgraph/error.hpp"

namespace advgraph {
namespace {

using json = nlohmann::ordered_json;

constexpr int kTableVersion = 1;
constexpr int kPolicyVersion = 1;

void SortDescending(std::vector<RankedEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.estimated_score > b.estimated_score;
  });
}

json KeyJson(const EdgeKey& k) {
  return json{{"transformer", k.transformer_id}, {"action", k.action_id}, {"bucket", k.bucket}};
}

EdgeKey KeyFrom(const json& j) {
  return EdgeKey{j.at("transformer").get<std::string>(), j.at("action").get<std::string>(),
                 j.at("bucket").get<std::string>()};
}

void CheckHeader(const json& j, const char* format, int version) {
  if (j.at("format") != format || j.at("version") != version) {
    throw Error(ErrorCode::kParse, std::string("not a version-") + std::to_string(version) +
                                       " " + format + " file");
  }
}

json MixJson(const SourceMix& m) {
  return json{{"ideal", m.ideal}, {"policy", m.policy}, {"random", m.random}};
}

SourceMix MixFrom(const json& j) {
  return SourceMix{j.at("ideal").get<double>(), j.at("policy").get<double>(),
                   j.at("random").get<double>()};
}

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void Tokens(const InputState& s, const std::string& prefix, std::vector<std::string>& out) {
  switch (s.kind()) {
    case InputState::Kind::kVector: {
      const auto& fields = s.as_vector();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        Tokens(fields[i], prefix + "f" + std::to_string(i) + ".", out);
      }
      break;
    }
    case InputState::Kind::kText: {
      const auto& t = s.as_text();
      out.push_back(prefix + "len=" + std::to_string(t.size()));
      for (std::size_t i = 0; i < t.size(); ++i) {
        out.push_back(prefix + "c=" + t.substr(i, 1));
        if (i + 1 < t.size()) out.push_back(prefix + "b=" + t.substr(i, 2));
      }
      break;
    }
    case InputState::Kind::kInt:
    case InputState::Kind::kFloat: {
      const double v = s.numeric();
      const int mag = v == 0.0 ? -99 : static_cast<int>(std::floor(std::log2(std::abs(v))));
      out.push_back(prefix + (v < 0 ? "neg" : "pos") + std::to_string(mag));
      break;
    }
    default:
      out.push_back(prefix + ToString(s));
  }
}

}  // namespace

std::string_view ToString(RankerKind kind) {
  switch (kind) {
    case RankerKind::kRandom: return "random";
    case RankerKind::kBruteForce: return "brute_force";
    case RankerKind::kLookup: return "lookup_table";
    case RankerKind::kGuided: return "model_guided";
  }
  return "?";
}

RankerKind ParseRankerKind(std::string_view name) {
  for (auto k : {RankerKind::kRandom, RankerKind::kBruteForce, RankerKind::kLookup,
                 RankerKind::kGuided}) {
    if (ToString(k) == name) return k;
  }
  throw Error(ErrorCode::kParse, "unknown ranking algorithm " + std::string(name));
}

RankedEdges RankRandom(std::span<const TransformationEdge> edges, std::size_t k, Rng& rng) {
  if (edges.empty()) throw Error(ErrorCode::kEmptyEdgeSet, "nothing to rank");
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::vector<std::size_t> idx(edges.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(k, edges.size());
  // Partial Fisher-Yates: the first `take` slots are a uniform sample.
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(idx[i], idx[i + UniformIndex(rng, idx.size() - i)]);
  }
  RankedEdges out;
  out.sorted = false;
  for (std::size_t i = 0; i < take; ++i) out.entries.push_back({edges[idx[i]], 0.0, {}, {}, {}});
  return out;
}

RankedEdges RankBruteforce(const InputGraph& graph, const InputState& state,
                           const BudgetLedger& ledger, std::span<const TransformationEdge> edges,
                           const VertexEvaluator& evaluator, const SampleContext& ctx) {
  if (edges.empty()) throw Error(ErrorCode::kEmptyEdgeSet, "nothing to rank");
  RankedEdges out;
  std::vector<std::vector<double>> features;
  for (const auto& edge : edges) {
    try {
      auto next = graph.TryApplyEdge(state, ledger, edge);
      if (!next) {
        out.unusable.push_back(edge);
        continue;
      }
      features.push_back(evaluator.Features(next->state));
      out.entries.push_back({edge, 0.0, std::move(next->state), std::move(next->ledger), {}});
    } catch (const Error&) {
      out.unusable.push_back(edge);
    }
  }
  auto scores = evaluator.EvaluateFeatures(features, ctx);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.entries[i].estimated_score = scores[i].value;
    out.entries[i].score = scores[i];
  }
  SortDescending(out.entries);
  return out;
}

// ---------------------------------------------------------------------------

void EdgeWeightTable::Observe(const EdgeKey& key, double score) {
  auto& e = entries_[key];
  e.count += 1;
  e.mean += (score - e.mean) / static_cast<double>(e.count);
  observations_ += 1;
  global_mean_ += (score - global_mean_) / static_cast<double>(observations_);
}

std::optional<EdgeWeightTable::Entry> EdgeWeightTable::Find(const EdgeKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double EdgeWeightTable::GlobalMean() const { return global_mean_; }

std::string EdgeWeightTable::Serialize() const {
  json j;
  j["format"] = "advgraph-lookup";
  j["version"] = kTableVersion;
  j["observations"] = observations_;
  j["global_mean"] = global_mean_;
  json rows = json::array();
  for (const auto& [k, e] : entries_) {
    json r = KeyJson(k);
    r["mean"] = e.mean;
    r["count"] = e.count;
    rows.push_back(std::move(r));
  }
  j["entries"] = std::move(rows);
  return j.dump(1);
}

EdgeWeightTable EdgeWeightTable::Parse(const std::string& text) {
  try {
    json j = json::parse(text);
    CheckHeader(j, "advgraph-lookup", kTableVersion);
    EdgeWeightTable t;
    t.observations_ = j.at("observations").get<std::size_t>();
    t.global_mean_ = j.at("global_mean").get<double>();
    for (const auto& r : j.at("entries")) {
      Entry e{r.at("mean").get<double>(), r.at("count").get<std::size_t>()};
      if (e.count == 0) throw Error(ErrorCode::kParse, "lookup entry with zero observations");
      t.entries_[KeyFrom(r)] = e;
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("lookup table: ") + e.what());
  }
}

EdgeWeightTable TrainLookupTable(const InputGraph& graph, std::span<const InputState> samples,
                                 std::span<const SampleContext> contexts,
                                 const VertexEvaluator& evaluator,
                                 std::vector<EdgeObservation>* log) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "no training samples");
  if (contexts.size() != samples.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one context per sample");
  }
  EdgeWeightTable table;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    BudgetLedger ledger(samples[i]);
    auto edges = graph.EnumerateEdges(samples[i], ledger);
    if (edges.empty()) continue;
    auto ranked = RankBruteforce(graph, samples[i], ledger, edges, evaluator, contexts[i]);
    for (const auto& e : ranked.entries) {
      table.Observe(KeyOf(e.edge), e.estimated_score);
      if (log) log->push_back({i, e.edge, e.estimated_score});
    }
  }
  return table;
}

RankedEdges RankLookup(std::span<const TransformationEdge> edges, const EdgeWeightTable& table,
                       std::optional<double> default_weight) {
  const double fallback = default_weight.value_or(table.GlobalMean());
  RankedEdges out;
  for (const auto& edge : edges) {
    auto hit = table.Find(KeyOf(edge));
    out.entries.push_back({edge, hit ? hit->mean : fallback, {}, {}, {}});
  }
  SortDescending(out.entries);
  return out;
}

// ---------------------------------------------------------------------------

SourceMix MixingSchedule::At(std::size_t episode, std::size_t episodes) const {
  if (episode + 1 >= episodes) {
    return episodes <= 1 ? start : end;
  }
  const double t = static_cast<double>(episode) / static_cast<double>(episodes - 1);
  if (t == 0.0) return start;
  auto lerp = [t](double a, double b) { return a + (b - a) * t; };
  return SourceMix{lerp(start.ideal, end.ideal), lerp(start.policy, end.policy),
                   lerp(start.random, end.random)};
}

void Validate(const MixingSchedule& schedule) {
  for (const auto* m : {&schedule.start, &schedule.end}) {
    if (m->ideal < 0 || m->policy < 0 || m->random < 0 ||
        std::abs(m->ideal + m->policy + m->random - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "mixing probabilities must be >= 0 and sum to 1");
    }
  }
  if (schedule.end.policy < schedule.start.policy) {
    throw Error(ErrorCode::kInvalidArgument, "policy share must not decrease over training");
  }
}

std::vector<double> GuidedFeatures(const InputState& state, std::size_t feature_dim) {
  if (feature_dim == 0) throw Error(ErrorCode::kInvalidArgument, "feature_dim must be >= 1");
  std::vector<std::string> tokens;
  Tokens(state, "", tokens);
  std::vector<double> phi(feature_dim + 1, 0.0);
  const double w = tokens.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(tokens.size()));
  for (const auto& t : tokens) phi[Fnv1a(t) % feature_dim] += w;
  phi[feature_dim] = 1.0;
  return phi;
}

double TdUpdate(std::vector<double>& weights, std::span<const double> phi, double reward,
                double next_max, bool terminal, double learning_rate, double gamma) {
  if (weights.size() != phi.size()) {
    throw Error(ErrorCode::kFeatureMapMismatch, "weights and features differ in width");
  }
  double q = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) q += weights[i] * phi[i];
  const double target = reward + (terminal ? 0.0 : gamma * next_max);
  const double delta = target - q;
  for (std::size_t i = 0; i < phi.size(); ++i) weights[i] += learning_rate * delta * phi[i];
  return delta;
}

std::vector<double>& GuidedPolicy::MutableWeights(const EdgeKey& key) {
  auto it = weights_.find(key);
  if (it == weights_.end()) {
    it = weights_.emplace(key, std::vector<double>(params_.feature_dim + 1, 0.0)).first;
  }
  return it->second;
}

double GuidedPolicy::Value(std::span<const double> phi, const TransformationEdge& edge) const {
  if (phi.size() != params_.feature_dim + 1) {
    throw Error(ErrorCode::kFeatureMapMismatch,
                "state features have width " + std::to_string(phi.size()) + ", policy expects " +
                    std::to_string(params_.feature_dim + 1));
  }
  auto it = weights_.find(KeyOf(edge));
  if (it == weights_.end()) return 0.0;
  if (it->second.size() != phi.size()) {
    throw Error(ErrorCode::kFeatureMapMismatch, "stored weights have the wrong width");
  }
  double q = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) q += it->second[i] * phi[i];
  return q;
}

std::string GuidedPolicy::Serialize() const {
  json j;
  j["format"] = "advgraph-guided";
  j["version"] = kPolicyVersion;
  j["feature_map"] = "hashed_tokens";
  j["feature_dim"] = params_.feature_dim;
  j["gamma"] = params_.gamma;
  j["learning_rate"] = params_.learning_rate;
  j["blend"] = params_.blend;
  j["horizon"] = params_.horizon;
  j["episodes"] = params_.episodes;
  j["seed"] = params_.seed;
  j["schedule"] = json{{"start", MixJson(params_.schedule.start)},
                       {"end", MixJson(params_.schedule.end)}};
  json rows = json::array();
  for (const auto& [k, w] : weights_) {
    json r = KeyJson(k);
    r["weights"] = w;
    rows.push_back(std::move(r));
  }
  j["weights"] = std::move(rows);
  return j.dump(1);
}

GuidedPolicy GuidedPolicy::Parse(const std::string& text) {
  try {
    json j = json::parse(text);
    CheckHeader(j, "advgraph-guided", kPolicyVersion);
    if (j.at("feature_map") != "hashed_tokens") {
      throw Error(ErrorCode::kFeatureMapMismatch, "unknown feature map");
    }
    GuidedParams p;
    p.feature_dim = j.at("feature_dim").get<std::size_t>();
    p.gamma = j.at("gamma").get<double>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.blend = j.at("blend").get<double>();
    p.horizon = j.at("horizon").get<std::size_t>();
    p.episodes = j.at("episodes").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.schedule.start = MixFrom(j.at("schedule").at("start"));
    p.schedule.end = MixFrom(j.at("schedule").at("end"));
    GuidedPolicy policy(p);
    for (const auto& r : j.at("weights")) {
      auto w = r.at("weights").get<std::vector<double>>();
      if (w.size() != p.feature_dim + 1) {
        throw Error(ErrorCode::kFeatureMapMismatch, "stored weights have the wrong width");
      }
      policy.weights_[KeyFrom(r)] = std::move(w);
    }
    return policy;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("guided policy: ") + e.what());
  }
}

GuidedPolicy TrainGuidedPolicy(const InputGraph& graph, std::span<const InputState> samples,
                               std::span<const SampleContext> contexts,
                               const VertexEvaluator& evaluator, const GuidedParams& params) {
  if (params.episodes == 0) throw Error(ErrorCode::kInvalidArgument, "episodes must be >= 1");
  if (params.horizon == 0) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "no training samples");
  if (contexts.size() != samples.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one context per sample");
  }
  Validate(params.schedule);
  GuidedPolicy policy(params);
  Rng rng(params.seed);

  auto best_edge = [&](std::span<const double> phi, const std::vector<TransformationEdge>& edges) {
    std::size_t best = 0;
    double best_q = -INFINITY;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      double q = policy.Value(phi, edges[i]);
      if (q > best_q) {
        best_q = q;
        best = i;
      }
    }
    return std::pair{best, best_q};
  };

  for (std::size_t ep = 0; ep < params.episodes; ++ep) {
    const SourceMix mix = params.schedule.At(ep, params.episodes);
    for (std::size_t si = 0; si < samples.size(); ++si) {
      const auto& ctx = contexts[si];
      // Ideal sequence: a random walk from the sample.
      std::vector<TransformationEdge> ideal;
      {
        InputState s = samples[si];
        BudgetLedger l(samples[si]);
        for (std::size_t t = 0; t < params.horizon; ++t) {
          auto succ = graph.Successors(s, l);
          if (succ.empty()) break;
          auto& pick = succ[UniformIndex(rng, succ.size())];
          ideal.push_back(pick.edge);
          s = std::move(pick.state);
          l = std::move(pick.ledger);
        }
      }
      InputState state = samples[si];
      BudgetLedger ledger(samples[si]);
      double score = evaluator.Evaluate(state, ctx).value;
      auto edges = graph.EnumerateEdges(state, ledger);
      for (std::size_t t = 0; t < params.horizon && !edges.empty(); ++t) {
        auto phi = GuidedFeatures(state, params.feature_dim);
        const double u = UniformReal(rng);
        std::size_t choice = 0;
        bool chosen = false;
        if (u < mix.ideal && t < ideal.size()) {
          auto it = std::find(edges.begin(), edges.end(), ideal[t]);
          if (it != edges.end()) {
            choice = static_cast<std::size_t>(it - edges.begin());
            chosen = true;
          }
        } else if (u < mix.ideal + mix.policy) {
          choice = best_edge(phi, edges).first;
          chosen = true;
        }
        if (!chosen) choice = UniformIndex(rng, edges.size());
        const TransformationEdge edge = edges[choice];

        auto next = graph.ApplyEdge(state, ledger, edge);
        VertexScore ns = evaluator.Evaluate(next.state, ctx);
        const double match = t < ideal.size() && ideal[t] == edge ? 1.0 : 0.0;
        const double reward = (1.0 - params.blend) * (ns.value - score) + params.blend * match;

        state = std::move(next.state);
        ledger = std::move(next.ledger);
        score = ns.value;
        edges = graph.EnumerateEdges(state, ledger);
        const bool terminal = ns.is_adversarial || edges.empty() || t + 1 == params.horizon;
        double next_max = 0.0;
        if (!terminal) {
          next_max = best_edge(GuidedFeatures(state, params.feature_dim), edges).second;
        }
        auto& w = policy.MutableWeights(KeyOf(edge));
        TdUpdate(w, phi, reward, next_max, terminal, params.learning_rate, params.gamma);
        for (double v : w) {
          if (!std::isfinite(v)) {
            throw Error(ErrorCode::kDivergence, "guided policy weights became non-finite");
          }
        }
        if (ns.is_adversarial) break;
      }
    }
  }
  return policy;
}

RankedEdges RankGuided(const InputState& state, std::span<const TransformationEdge> edges,
                       const GuidedPolicy& policy) {
  auto phi = GuidedFeatures(state, policy.params().feature_dim);
  RankedEdges out;
  for (const auto& edge : edges) out.entries.push_back({edge, policy.Value(phi, edge), {}, {}, {}});
  SortDescending(out.entries);
  return out;
}

}  // namespace advgraph
