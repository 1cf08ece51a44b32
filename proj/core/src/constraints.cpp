#include "advgraph/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "advgraph/error.hpp"

namespace advgraph {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Absolute slack on bound comparisons so that e.g. 10 * (1 + 0.3) is still
// inside a 30% bound after rounding.
bool WithinBound(double magnitude, double bound) {
  return magnitude <= bound * (1.0 + 1e-9) + 1e-12;
}

// Scalar used by range / monotonic checks: numeric value, bool as 0/1, or
// text length.
std::optional<double> Scalar(const InputState& s) {
  switch (s.kind()) {
    case InputState::Kind::kInt:
    case InputState::Kind::kFloat:
      return s.numeric();
    case InputState::Kind::kBool:
      return s.as_bool() ? 1.0 : 0.0;
    case InputState::Kind::kText:
      return static_cast<double>(s.as_text().size());
    default:
      return std::nullopt;
  }
}

bool IsFraction(double f) { return std::isfinite(f) && f > 0.0 && f <= 1.0; }

bool LpOk(const InputState& proposed, const InputState& original, const LpNormBound& c) {
  auto a = NumericLeaves(proposed);
  auto b = NumericLeaves(original);
  if (a.size() != b.size()) return false;
  return WithinBound(LpDistance(a, b, c.p), c.epsilon);
}

std::optional<std::size_t> TextDistance(const InputState& a, const InputState& b) {
  if (a.kind() != InputState::Kind::kText || b.kind() != InputState::Kind::kText) {
    return std::nullopt;
  }
  return Levenshtein(a.as_text(), b.as_text());
}

std::string Fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string_view KindName(const ConstraintSpec& c) {
  return std::visit(
      Overloaded{
          [](const MaxTotalActions&) { return std::string_view("max_total_actions"); },
          [](const MaxActionsPerType&) { return std::string_view("max_actions_per_type"); },
          [](const MaxDeleteFraction&) { return std::string_view("max_delete_fraction"); },
          [](const RelativeValueBound&) { return std::string_view("relative_value_bound"); },
          [](const RelativeMaxBound&) { return std::string_view("relative_max_bound"); },
          [](const AbsoluteRange&) { return std::string_view("absolute_range"); },
          [](const Monotonic&) { return std::string_view("monotonic"); },
          [](const EditDistanceCap&) { return std::string_view("edit_distance_cap"); },
          [](const LpNormBound&) { return std::string_view("lp_norm_bound"); },
      },
      c);
}

std::string Describe(const ConstraintSpec& c) {
  std::string head(KindName(c));
  return head + std::visit(
                    Overloaded{
                        [](const MaxTotalActions& k) { return "(" + std::to_string(k.n) + ")"; },
                        [](const MaxActionsPerType& k) {
                          std::string s = "(";
                          for (const auto& [a, n] : k.caps) {
                            if (s.size() > 1) s += ",";
                            s += a + "=" + std::to_string(n);
                          }
                          return s + ")";
                        },
                        [](const MaxDeleteFraction& k) { return "(" + Fmt(k.ratio) + ")"; },
                        [](const RelativeValueBound& k) { return "(" + Fmt(k.fraction) + ")"; },
                        [](const RelativeMaxBound& k) {
                          return "(" + Fmt(k.fraction) + " of " + Fmt(k.maximum) + ")";
                        },
                        [](const AbsoluteRange& k) {
                          return "[" + Fmt(k.lo) + "," + Fmt(k.hi) + "]";
                        },
                        [](const Monotonic& k) {
                          return std::string(k.direction == Direction::kIncrease
                                                 ? "(increase)"
                                                 : "(decrease)");
                        },
                        [](const EditDistanceCap& k) { return "(" + std::to_string(k.n) + ")"; },
                        [](const LpNormBound& k) {
                          return "(p=" + Fmt(k.p) + ",eps=" + Fmt(k.epsilon) + ")";
                        },
                    },
                    c);
}

void Validate(const ConstraintSpec& c) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument, Describe(c) + ": " + why);
  };
  std::visit(Overloaded{
                 [](const MaxTotalActions&) {},
                 [](const MaxActionsPerType&) {},
                 [](const Monotonic&) {},
                 [](const EditDistanceCap&) {},
                 [&](const MaxDeleteFraction& k) {
                   if (!IsFraction(k.ratio)) fail("ratio must be in (0, 1]");
                 },
                 [&](const RelativeValueBound& k) {
                   if (!IsFraction(k.fraction)) fail("fraction must be in (0, 1]");
                 },
                 [&](const RelativeMaxBound& k) {
                   if (!IsFraction(k.fraction)) fail("fraction must be in (0, 1]");
                   if (!std::isfinite(k.maximum) || k.maximum <= 0.0) {
                     fail("maximum must be finite and positive");
                   }
                 },
                 [&](const AbsoluteRange& k) {
                   if (!std::isfinite(k.lo) || !std::isfinite(k.hi)) fail("bounds must be finite");
                   if (k.lo > k.hi) fail("lo > hi");
                 },
                 [&](const LpNormBound& k) {
                   if (std::isnan(k.p) || k.p < 1.0) fail("p must be >= 1 or inf");
                   if (!std::isfinite(k.epsilon) || k.epsilon <= 0.0) {
                     fail("epsilon must be finite and positive");
                   }
                 },
             },
             c);
}

const TransformerUsage& BudgetLedger::UsageOf(const std::string& transformer_id) const {
  static const TransformerUsage kEmpty;
  auto it = usage_.find(transformer_id);
  return it == usage_.end() ? kEmpty : it->second;
}

void BudgetLedger::Record(const TransformationEdge& edge, bool is_deletion) {
  auto& u = usage_[edge.transformer_id];
  ++u.total;
  ++u.per_action[edge.action_id];
  if (is_deletion) ++u.deletions;
  ++total_;
}

void BudgetLedger::SetUsage(const std::string& transformer_id, TransformerUsage usage) {
  usage_[transformer_id] = std::move(usage);
  total_ = 0;
  for (const auto& [id, u] : usage_) total_ += u.total;
}

bool Admits(const EdgeProposal& proposal, const TransformerUsage& usage,
            std::span<const ConstraintSpec> constraints) {
  const auto& edge = proposal.edge;
  for (const auto& c : constraints) {
    bool ok = std::visit(
        Overloaded{
            [&](const MaxTotalActions& k) { return usage.total + 1 <= k.n; },
            [&](const MaxActionsPerType& k) {
              auto cap = k.caps.find(edge.action_id);
              if (cap == k.caps.end()) return true;
              auto used = usage.per_action.find(edge.action_id);
              std::size_t n = used == usage.per_action.end() ? 0 : used->second;
              return n + 1 <= cap->second;
            },
            [&](const MaxDeleteFraction& k) {
              if (!proposal.is_deletion) return true;
              auto len = Scalar(proposal.original);
              if (!len) return true;
              return WithinBound(static_cast<double>(usage.deletions + 1), k.ratio * *len);
            },
            [&](const RelativeValueBound& k) {
              if (!proposal.current.is_numeric() || !proposal.proposed.is_numeric()) return true;
              double cur = proposal.current.numeric();
              double delta = std::abs(proposal.proposed.numeric() - cur);
              return WithinBound(delta, k.fraction * std::abs(cur));
            },
            [&](const RelativeMaxBound& k) {
              if (!proposal.original.is_numeric() || !proposal.proposed.is_numeric()) return true;
              double delta =
                  std::abs(proposal.proposed.numeric() - proposal.original.numeric());
              return WithinBound(delta, k.fraction * k.maximum);
            },
            [&](const AbsoluteRange& k) {
              auto v = Scalar(proposal.proposed);
              return !v || (*v >= k.lo && *v <= k.hi);
            },
            [&](const Monotonic& k) {
              auto before = Scalar(proposal.current);
              auto after = Scalar(proposal.proposed);
              if (!before || !after) return true;
              return k.direction == Direction::kIncrease ? *after >= *before
                                                         : *after <= *before;
            },
            [&](const EditDistanceCap& k) {
              auto d = TextDistance(proposal.proposed, proposal.original);
              return !d || *d <= k.n;
            },
            [&](const LpNormBound& k) { return LpOk(proposal.proposed, proposal.original, k); },
        },
        c);
    if (!ok) return false;
  }
  return true;
}

std::vector<Violation> CheckFinal(const InputState& state, const InputState& original,
                                  std::span<const ConstraintSpec> constraints,
                                  const TransformerUsage* usage) {
  std::vector<Violation> out;
  auto flag = [&](const ConstraintSpec& c, std::string detail) {
    out.push_back(Violation{Describe(c), std::move(detail)});
  };
  const bool changed = !(state == original);
  for (const auto& c : constraints) {
    std::visit(
        Overloaded{
            [&](const MaxTotalActions& k) {
              if (usage) {
                if (usage->total > k.n) flag(c, std::to_string(usage->total) + " actions used");
                return;
              }
              // Every action moves a string by at most one edit and any other
              // value by at most one change.
              if (auto d = TextDistance(state, original)) {
                if (*d > k.n) flag(c, "edit distance " + std::to_string(*d));
              } else if (changed && k.n == 0) {
                flag(c, "value changed with zero budget");
              }
            },
            [&](const MaxActionsPerType& k) {
              if (!usage) return;
              for (const auto& [action, cap] : k.caps) {
                auto it = usage->per_action.find(action);
                if (it != usage->per_action.end() && it->second > cap) {
                  flag(c, action + " used " + std::to_string(it->second) + " times");
                }
              }
            },
            [&](const MaxDeleteFraction& k) {
              auto before = Scalar(original);
              auto after = Scalar(state);
              if (!before || !after) return;
              double allowed = k.ratio * *before;
              if (usage && !WithinBound(static_cast<double>(usage->deletions), allowed)) {
                flag(c, std::to_string(usage->deletions) + " deletions");
              }
              // Net shrinkage is a lower bound on the number of deletions.
              if (!WithinBound(*before - *after, allowed)) {
                flag(c, "length shrank by " + Fmt(*before - *after));
              }
            },
            [&](const RelativeValueBound& k) {
              if (!state.is_numeric() || !original.is_numeric()) return;
              double a = state.numeric();
              double o = original.numeric();
              std::size_t steps = usage ? usage->total : (changed ? 1 : 0);
              if (steps == 0) {
                if (changed) flag(c, "value changed without a recorded step");
                return;
              }
              // Each step keeps |x| within [(1-f), (1+f)] of the previous
              // magnitude and never crosses zero (f <= 1).
              double hi = std::abs(o) * std::pow(1.0 + k.fraction, static_cast<double>(steps));
              double lo = std::abs(o) * std::pow(1.0 - k.fraction, static_cast<double>(steps));
              if (!WithinBound(std::abs(a), hi) || std::abs(a) < lo * (1.0 - 1e-9) - 1e-12 ||
                  (a * o < 0.0)) {
                flag(c, "value " + Fmt(a) + " unreachable from " + Fmt(o) + " in " +
                            std::to_string(steps) + " steps");
              }
            },
            [&](const RelativeMaxBound& k) {
              if (!state.is_numeric() || !original.is_numeric()) return;
              double delta = std::abs(state.numeric() - original.numeric());
              if (!WithinBound(delta, k.fraction * k.maximum)) {
                flag(c, "moved by " + Fmt(delta));
              }
            },
            [&](const AbsoluteRange& k) {
              auto v = Scalar(state);
              if (v && (*v < k.lo || *v > k.hi)) flag(c, "value " + Fmt(*v));
            },
            [&](const Monotonic& k) {
              auto before = Scalar(original);
              auto after = Scalar(state);
              if (!before || !after) return;
              bool ok = k.direction == Direction::kIncrease ? *after >= *before
                                                            : *after <= *before;
              if (!ok) flag(c, Fmt(*before) + " -> " + Fmt(*after));
            },
            [&](const EditDistanceCap& k) {
              auto d = TextDistance(state, original);
              if (d && *d > k.n) flag(c, "edit distance " + std::to_string(*d));
            },
            [&](const LpNormBound& k) {
              if (!LpOk(state, original, k)) flag(c, "norm bound exceeded");
            },
        },
        c);
  }
  return out;
}

std::size_t Levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({prev[j] + 1, row[j - 1] + 1, sub});
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

double LpDistance(std::span<const double> a, std::span<const double> b, double p) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "lp distance over vectors of unequal length");
  }
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(acc, 1.0 / p);
}

DependencyFunction SumDependency(std::string name, std::vector<std::size_t> reads,
                                 std::size_t write) {
  DependencyFunction d;
  d.name = std::move(name);
  d.reads = reads;
  d.writes = {write};
  d.fn = [reads, write](const InputState& s) {
    double total = 0.0;
    for (auto r : reads) total += s.field(r).numeric();
    const auto& target = s.field(write);
    if (target.kind() == InputState::Kind::kInt) {
      return s.WithField(write, InputState::Int(static_cast<std::int64_t>(std::llround(total))));
    }
    if (target.kind() == InputState::Kind::kFloat) {
      return s.WithField(write, InputState::Float(total));
    }
    throw Error(ErrorCode::kTypeMismatch, "sum dependency writes a non-numeric field");
  };
  return d;
}

DependencyFunction CopyDependency(std::string name, std::size_t read, std::size_t write) {
  DependencyFunction d;
  d.name = std::move(name);
  d.reads = {read};
  d.writes = {write};
  d.fn = [read, write](const InputState& s) { return s.WithField(write, s.field(read)); };
  return d;
}

InputState ApplyDependencies(const InputState& state,
                             std::span<const DependencyFunction> deps) {
  if (deps.empty()) return state;
  InputState current = state;
  const std::size_t arity = current.arity();
  for (const auto& dep : deps) {
    for (auto i : dep.reads) {
      if (i >= arity) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    dep.name + " reads field " + std::to_string(i));
      }
    }
    for (auto i : dep.writes) {
      if (i >= arity) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    dep.name + " writes field " + std::to_string(i));
      }
    }
    InputState next = dep.fn(current);
    if (next.kind() != InputState::Kind::kVector || next.arity() != arity) {
      throw Error(ErrorCode::kConstraintViolation, dep.name + " changed the state's arity");
    }
    for (std::size_t i = 0; i < arity; ++i) {
      bool declared = std::find(dep.writes.begin(), dep.writes.end(), i) != dep.writes.end();
      if (!declared && !(next.field(i) == current.field(i))) {
        throw Error(ErrorCode::kConstraintViolation,
                    dep.name + " wrote undeclared field " + std::to_string(i));
      }
    }
    current = std::move(next);
  }
  return current;
}

DependencyRegistry::DependencyRegistry() {
  factories_["sum"] = [](const std::string& name, const std::vector<std::size_t>& reads,
                         const std::vector<std::size_t>& writes) {
    if (reads.empty() || writes.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument, "sum dependency needs reads and one write");
    }
    return SumDependency(name, reads, writes[0]);
  };
  factories_["copy"] = [](const std::string& name, const std::vector<std::size_t>& reads,
                          const std::vector<std::size_t>& writes) {
    if (reads.size() != 1 || writes.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument, "copy dependency needs one read and one write");
    }
    return CopyDependency(name, reads[0], writes[0]);
  };
}

DependencyRegistry& DependencyRegistry::Global() {
  static DependencyRegistry registry;
  return registry;
}

void DependencyRegistry::Register(const std::string& kind, DependencyFactory factory) {
  std::lock_guard lock(mu_);
  if (!factories_.emplace(kind, std::move(factory)).second) {
    throw Error(ErrorCode::kDuplicateName, "dependency kind " + kind);
  }
}

bool DependencyRegistry::Contains(const std::string& kind) const {
  std::lock_guard lock(mu_);
  return factories_.count(kind) > 0;
}

DependencyFunction DependencyRegistry::Make(const std::string& kind, const std::string& name,
                                            const std::vector<std::size_t>& reads,
                                            const std::vector<std::size_t>& writes) const {
  DependencyFactory factory;
  {
    std::lock_guard lock(mu_);
    auto it = factories_.find(kind);
    if (it == factories_.end()) {
      throw Error(ErrorCode::kUnresolvedHook, "dependency kind " + kind);
    }
    factory = it->second;
  }
  return factory(name, reads, writes);
}

}  // namespace advgraph
