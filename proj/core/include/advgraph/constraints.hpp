#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "advgraph/edge.hpp"
#include "advgraph/input_state.hpp"

namespace advgraph {

enum class Direction { kIncrease, kDecrease };

struct MaxTotalActions {
  std::size_t n = 0;
  bool operator==(const MaxTotalActions&) const = default;
};
struct MaxActionsPerType {
  std::map<std::string, std::size_t> caps;
  bool operator==(const MaxActionsPerType&) const = default;
};
// Deleted characters, counted against the ORIGINAL length.
struct MaxDeleteFraction {
  double ratio = 0.5;
  bool operator==(const MaxDeleteFraction&) const = default;
};
// |new - current| <= fraction * |current|, judged per edge.
struct RelativeValueBound {
  double fraction = 0.3;
  bool operator==(const RelativeValueBound&) const = default;
};
// |new - original| <= fraction * maximum.
struct RelativeMaxBound {
  double fraction = 0.3;
  double maximum = 1.0;
  bool operator==(const RelativeMaxBound&) const = default;
};
// Numeric value, or text length, stays inside [lo, hi].
struct AbsoluteRange {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const AbsoluteRange&) const = default;
};
// Numeric value, or text length, never moves against `direction`.
struct Monotonic {
  Direction direction = Direction::kIncrease;
  bool operator==(const Monotonic&) const = default;
};
struct EditDistanceCap {
  std::size_t n = 0;
  bool operator==(const EditDistanceCap&) const = default;
};
// ||numeric(new) - numeric(original)||_p <= epsilon; p may be +infinity.
struct LpNormBound {
  double p = 2.0;
  double epsilon = 0.0;
  bool operator==(const LpNormBound&) const = default;
};

using ConstraintSpec =
    std::variant<MaxTotalActions, MaxActionsPerType, MaxDeleteFraction,
                 RelativeValueBound, RelativeMaxBound, AbsoluteRange, Monotonic,
                 EditDistanceCap, LpNormBound>;

std::string_view KindName(const ConstraintSpec& c);
std::string Describe(const ConstraintSpec& c);

// Throws Error(kInvalidArgument) for non-finite parameters, fractions outside
// (0, 1], non-positive epsilon, or an inverted range.
void Validate(const ConstraintSpec& c);

// Per-transformer counters along one exploration path.
struct TransformerUsage {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_action;
  std::size_t deletions = 0;

  bool operator==(const TransformerUsage&) const = default;
};

class BudgetLedger {
 public:
  BudgetLedger() : original_(std::make_shared<const InputState>()) {}
  explicit BudgetLedger(InputState original)
      : original_(std::make_shared<const InputState>(std::move(original))) {}

  const InputState& original() const { return *original_; }
  std::size_t total_actions_used() const { return total_; }
  const std::map<std::string, TransformerUsage>& usage() const { return usage_; }
  const TransformerUsage& UsageOf(const std::string& transformer_id) const;

  // `is_deletion` marks edges that remove one element of the original.
  void Record(const TransformationEdge& edge, bool is_deletion);
  // Overwrites one transformer's counters (e.g. to resume a recorded path).
  void SetUsage(const std::string& transformer_id, TransformerUsage usage);

  bool operator==(const BudgetLedger& other) const {
    return total_ == other.total_ && usage_ == other.usage_ &&
           *original_ == *other.original_;
  }

 private:
  std::shared_ptr<const InputState> original_;
  std::size_t total_ = 0;
  std::map<std::string, TransformerUsage> usage_;
};

// One candidate edge judged against the constraints of the transformer it
// belongs to. States are that transformer's value (text core for strings).
struct EdgeProposal {
  const TransformationEdge& edge;
  const InputState& current;
  const InputState& proposed;
  const InputState& original;
  bool is_deletion = false;
};

bool Admits(const EdgeProposal& proposal, const TransformerUsage& usage,
            std::span<const ConstraintSpec> constraints);

struct Violation {
  std::string constraint;
  std::string detail;
  bool operator==(const Violation&) const = default;
};

// Re-validates a finished value against its original. Budget-style kinds are
// checked only when `usage` is given; without it they fall back to the
// conditions implied by the final value alone.
std::vector<Violation> CheckFinal(const InputState& state, const InputState& original,
                                  std::span<const ConstraintSpec> constraints,
                                  const TransformerUsage* usage = nullptr);

std::size_t Levenshtein(std::string_view a, std::string_view b);

// p-norm of the element-wise difference; p = +inf gives the max-norm.
double LpDistance(std::span<const double> a, std::span<const double> b, double p);

struct DependencyFunction {
  std::string name;
  std::vector<std::size_t> reads;
  std::vector<std::size_t> writes;
  std::function<InputState(const InputState&)> fn;
};

// writes[0] = sum of reads; result keeps the written field's numeric kind.
DependencyFunction SumDependency(std::string name, std::vector<std::size_t> reads,
                                 std::size_t write);
// Copies reads[0] into writes[0].
DependencyFunction CopyDependency(std::string name, std::size_t read, std::size_t write);

// Runs `deps` in declared order. Throws kIndexOutOfRange for indices beyond
// the state's arity and kConstraintViolation when a function changes a field
// it did not declare.
InputState ApplyDependencies(const InputState& state,
                             std::span<const DependencyFunction> deps);

using DependencyFactory = std::function<DependencyFunction(
    const std::string& name, const std::vector<std::size_t>& reads,
    const std::vector<std::size_t>& writes)>;

// Named dependency kinds usable from configuration. "sum" and "copy" are
// pre-registered.
class DependencyRegistry {
 public:
  static DependencyRegistry& Global();

  void Register(const std::string& kind, DependencyFactory factory);
  bool Contains(const std::string& kind) const;
  DependencyFunction Make(const std::string& kind, const std::string& name,
                          const std::vector<std::size_t>& reads,
                          const std::vector<std::size_t>& writes) const;

 private:
  DependencyRegistry();
  mutable std::mutex mu_;
  std::map<std::string, DependencyFactory> factories_;
};

}  // namespace advgraph
