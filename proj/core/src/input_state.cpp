#include "advgraph/input_state.hpp"

#include <charconv>

#include "advgraph/error.hpp"

namespace advgraph {
namespace {

template <typename T>
const T& Expect(const InputState::Value& v, InputState::Kind want) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw Error(ErrorCode::kTypeMismatch,
              "expected " + std::string(KindName(want)) + " state, got " +
                  std::string(KindName(static_cast<InputState::Kind>(v.index()))));
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void Render(const InputState& s, std::string& out) {
  using K = InputState::Kind;
  switch (s.kind()) {
    case K::kInt:
      out += "i:" + std::to_string(s.as_int());
      break;
    case K::kFloat:
      out += "f:" + FormatDouble(s.as_float());
      break;
    case K::kBool:
      out += s.as_bool() ? "b:1" : "b:0";
      break;
    case K::kCategorical:
      out += "c:" + s.as_categorical().label;
      break;
    case K::kOneHot:
      out += "h:" + std::to_string(s.as_onehot().index) + "/" +
             std::to_string(s.as_onehot().size);
      break;
    case K::kText:
      out += "t:\"" + s.as_text() + "\"";
      break;
    case K::kVector: {
      out += "[";
      bool first = true;
      for (const auto& f : s.as_vector()) {
        if (!first) out += ",";
        first = false;
        Render(f, out);
      }
      out += "]";
      break;
    }
  }
}

void CollectNumeric(const InputState& s, std::vector<double>& out) {
  using K = InputState::Kind;
  switch (s.kind()) {
    case K::kInt:
    case K::kFloat:
      out.push_back(s.numeric());
      break;
    case K::kBool:
      out.push_back(s.as_bool() ? 1.0 : 0.0);
      break;
    case K::kVector:
      for (const auto& f : s.as_vector()) CollectNumeric(f, out);
      break;
    default:
      break;
  }
}

}  // namespace

std::int64_t InputState::as_int() const {
  return Expect<std::int64_t>(value_, Kind::kInt);
}
double InputState::as_float() const { return Expect<double>(value_, Kind::kFloat); }
bool InputState::as_bool() const { return Expect<bool>(value_, Kind::kBool); }
const Categorical& InputState::as_categorical() const {
  return Expect<Categorical>(value_, Kind::kCategorical);
}
const OneHot& InputState::as_onehot() const {
  return Expect<OneHot>(value_, Kind::kOneHot);
}
const std::string& InputState::as_text() const {
  return Expect<Text>(value_, Kind::kText).value;
}
const InputState::Vector& InputState::as_vector() const {
  return Expect<Vector>(value_, Kind::kVector);
}

double InputState::numeric() const {
  if (kind() == Kind::kInt) return static_cast<double>(as_int());
  return as_float();
}

const InputState& InputState::field(std::size_t i) const {
  const auto& v = as_vector();
  if (i >= v.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "field " + std::to_string(i) + " of arity " + std::to_string(v.size()));
  }
  return v[i];
}

InputState InputState::WithField(std::size_t i, InputState replacement) const {
  Vector copy = as_vector();
  if (i >= copy.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "field " + std::to_string(i) + " of arity " + std::to_string(copy.size()));
  }
  copy[i] = std::move(replacement);
  return VectorOf(std::move(copy));
}

std::string_view KindName(InputState::Kind kind) {
  switch (kind) {
    case InputState::Kind::kInt: return "int";
    case InputState::Kind::kFloat: return "float";
    case InputState::Kind::kBool: return "bool";
    case InputState::Kind::kCategorical: return "categorical";
    case InputState::Kind::kOneHot: return "onehot";
    case InputState::Kind::kText: return "text";
    case InputState::Kind::kVector: return "vector";
  }
  return "?";
}

std::string ToString(const InputState& state) {
  std::string out;
  Render(state, out);
  return out;
}

std::vector<double> NumericLeaves(const InputState& state) {
  std::vector<double> out;
  CollectNumeric(state, out);
  return out;
}

}  // namespace advgraph
