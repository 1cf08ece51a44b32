#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace advgraph {

struct Categorical {
  std::string label;
  auto operator<=>(const Categorical&) const = default;
};

struct OneHot {
  std::size_t index = 0;
  std::size_t size = 0;
  auto operator<=>(const OneHot&) const = default;
};

struct Text {
  std::string value;
  auto operator<=>(const Text&) const = default;
};

// One vertex of the exploration graph: an input object or feature vector.
// Values are immutable in practice; every edit goes through a `With*`
// helper that returns a new state.
class InputState {
 public:
  enum class Kind { kInt, kFloat, kBool, kCategorical, kOneHot, kText, kVector };

  using Vector = std::vector<InputState>;
  using Value =
      std::variant<std::int64_t, double, bool, Categorical, OneHot, Text, Vector>;

  InputState() : value_(std::int64_t{0}) {}

  static InputState Int(std::int64_t v) { return InputState(Value(v)); }
  static InputState Float(double v) { return InputState(Value(v)); }
  static InputState Bool(bool v) { return InputState(Value(v)); }
  static InputState Cat(std::string label) {
    return InputState(Value(Categorical{std::move(label)}));
  }
  static InputState OneHotOf(std::size_t index, std::size_t size) {
    return InputState(Value(OneHot{index, size}));
  }
  static InputState TextOf(std::string s) {
    return InputState(Value(Text{std::move(s)}));
  }
  static InputState VectorOf(Vector fields) {
    return InputState(Value(std::move(fields)));
  }

  Kind kind() const { return static_cast<Kind>(value_.index()); }
  const Value& value() const { return value_; }

  std::int64_t as_int() const;
  double as_float() const;
  bool as_bool() const;
  const Categorical& as_categorical() const;
  const OneHot& as_onehot() const;
  const std::string& as_text() const;
  const Vector& as_vector() const;

  bool is_numeric() const {
    return kind() == Kind::kInt || kind() == Kind::kFloat;
  }
  // Int or Float widened to double.
  double numeric() const;

  std::size_t arity() const { return as_vector().size(); }
  const InputState& field(std::size_t i) const;
  InputState WithField(std::size_t i, InputState replacement) const;

  bool operator==(const InputState&) const = default;

 private:
  explicit InputState(Value v) : value_(std::move(v)) {}

  Value value_;
};

std::string_view KindName(InputState::Kind kind);

// Canonical single-line rendering. Structurally equal states render
// identically, so the string doubles as a dedup / ordering key.
std::string ToString(const InputState& state);

// Numeric leaves in depth-first order (Int, Float, Bool as 0/1). Non-numeric
// leaves are skipped.
std::vector<double> NumericLeaves(const InputState& state);

}  // namespace advgraph
