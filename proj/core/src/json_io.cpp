#include "json_io.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "advgraph/error.hpp"

namespace advgraph::detail {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void OnlyKeys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw Error(ErrorCode::kParse, where + ": unknown key '" + k + "'");
  }
}

// JSON has no infinity; "inf" stands in for it.
json Real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double RealFrom(const json& j) {
  if (j.is_string()) {
    if (j == "inf") return std::numeric_limits<double>::infinity();
    if (j == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

}  // namespace

json ToJson(const InputState& s) {
  switch (s.kind()) {
    case InputState::Kind::kInt: return json{{"int", s.as_int()}};
    case InputState::Kind::kFloat: return json{{"float", s.as_float()}};
    case InputState::Kind::kBool: return json{{"bool", s.as_bool()}};
    case InputState::Kind::kCategorical: return json{{"cat", s.as_categorical().label}};
    case InputState::Kind::kOneHot:
      return json{{"onehot", json::array({s.as_onehot().index, s.as_onehot().size})}};
    case InputState::Kind::kText: return json{{"text", s.as_text()}};
    case InputState::Kind::kVector: {
      json arr = json::array();
      for (const auto& f : s.as_vector()) arr.push_back(ToJson(f));
      return json{{"vector", std::move(arr)}};
    }
  }
  return {};
}

InputState StateFrom(const json& j) {
  if (!j.is_object() || j.size() != 1) throw Error(ErrorCode::kParse, "state must be a tagged object");
  const auto it = j.begin();
  const std::string tag = it.key();
  const json& v = it.value();
  if (tag == "int") return InputState::Int(v.get<std::int64_t>());
  if (tag == "float") return InputState::Float(v.get<double>());
  if (tag == "bool") return InputState::Bool(v.get<bool>());
  if (tag == "cat") return InputState::Cat(v.get<std::string>());
  if (tag == "onehot") return InputState::OneHotOf(v.at(0).get<std::size_t>(), v.at(1).get<std::size_t>());
  if (tag == "text") return InputState::TextOf(v.get<std::string>());
  if (tag == "vector") {
    InputState::Vector fields;
    for (const auto& f : v) fields.push_back(StateFrom(f));
    return InputState::VectorOf(std::move(fields));
  }
  throw Error(ErrorCode::kParse, "unknown state tag '" + tag + "'");
}

json ToJson(const TransformationEdge& e) {
  json p = std::visit(
      Overloaded{
          [](const NoParam&) { return json{{"kind", "none"}}; },
          [](const LabelParam& p) { return json{{"kind", "label"}, {"label", p.label}}; },
          [](const IndexParam& p) { return json{{"kind", "index"}, {"index", p.index}}; },
          [](const CharParam& p) {
            return json{{"kind", "char"}, {"position", p.position}, {"symbol", std::string(1, p.symbol)}};
          },
          [](const PositionParam& p) { return json{{"kind", "position"}, {"position", p.position}}; },
          [](const StepParam& p) {
            return json{{"kind", "step"}, {"step_id", p.step_id}, {"amount", p.amount},
                        {"relative", p.relative}};
          },
          [](const CustomParam& p) { return json{{"kind", "custom"}, {"payload", p.payload}}; },
      },
      e.parameter);
  return json{{"transformer", e.transformer_id}, {"action", e.action_id}, {"param", std::move(p)}};
}

TransformationEdge EdgeFrom(const json& j) {
  TransformationEdge e;
  e.transformer_id = j.at("transformer").get<std::string>();
  e.action_id = j.at("action").get<std::string>();
  const auto& p = j.at("param");
  const auto kind = p.at("kind").get<std::string>();
  if (kind == "none") {
    e.parameter = NoParam{};
  } else if (kind == "label") {
    e.parameter = LabelParam{p.at("label").get<std::string>()};
  } else if (kind == "index") {
    e.parameter = IndexParam{p.at("index").get<std::size_t>()};
  } else if (kind == "char") {
    auto sym = p.at("symbol").get<std::string>();
    if (sym.size() != 1) throw Error(ErrorCode::kParse, "char parameter needs one symbol");
    e.parameter = CharParam{p.at("position").get<std::size_t>(), sym[0]};
  } else if (kind == "position") {
    e.parameter = PositionParam{p.at("position").get<std::size_t>()};
  } else if (kind == "step") {
    e.parameter = StepParam{p.at("step_id").get<std::size_t>(), p.at("amount").get<double>(),
                            p.at("relative").get<bool>()};
  } else if (kind == "custom") {
    e.parameter = CustomParam{p.at("payload").get<std::string>()};
  } else {
    throw Error(ErrorCode::kParse, "unknown edge parameter kind '" + kind + "'");
  }
  return e;
}

json ToJson(const ConstraintSpec& c) {
  json j{{"type", std::string(KindName(c))}};
  std::visit(Overloaded{
                 [&](const MaxTotalActions& k) { j["n"] = k.n; },
                 [&](const MaxActionsPerType& k) { j["caps"] = k.caps; },
                 [&](const MaxDeleteFraction& k) { j["ratio"] = k.ratio; },
                 [&](const RelativeValueBound& k) { j["fraction"] = k.fraction; },
                 [&](const RelativeMaxBound& k) {
                   j["fraction"] = k.fraction;
                   j["maximum"] = k.maximum;
                 },
                 [&](const AbsoluteRange& k) {
                   j["lo"] = Real(k.lo);
                   j["hi"] = Real(k.hi);
                 },
                 [&](const Monotonic& k) {
                   j["direction"] = k.direction == Direction::kIncrease ? "increase" : "decrease";
                 },
                 [&](const EditDistanceCap& k) { j["n"] = k.n; },
                 [&](const LpNormBound& k) {
                   j["p"] = Real(k.p);
                   j["epsilon"] = k.epsilon;
                 },
             },
             c);
  return j;
}

ConstraintSpec ConstraintFrom(const json& j, const std::string& where) {
  try {
    const auto type = j.at("type").get<std::string>();
    ConstraintSpec c;
    if (type == "max_total_actions") {
      OnlyKeys(j, {"type", "n"}, where);
      c = MaxTotalActions{j.at("n").get<std::size_t>()};
    } else if (type == "max_actions_per_type") {
      OnlyKeys(j, {"type", "caps"}, where);
      c = MaxActionsPerType{j.at("caps").get<std::map<std::string, std::size_t>>()};
    } else if (type == "max_delete_fraction") {
      OnlyKeys(j, {"type", "ratio"}, where);
      c = MaxDeleteFraction{j.at("ratio").get<double>()};
    } else if (type == "relative_value_bound") {
      OnlyKeys(j, {"type", "fraction"}, where);
      c = RelativeValueBound{j.at("fraction").get<double>()};
    } else if (type == "relative_max_bound") {
      OnlyKeys(j, {"type", "fraction", "maximum"}, where);
      c = RelativeMaxBound{j.at("fraction").get<double>(), j.at("maximum").get<double>()};
    } else if (type == "absolute_range") {
      OnlyKeys(j, {"type", "lo", "hi"}, where);
      c = AbsoluteRange{RealFrom(j.at("lo")), RealFrom(j.at("hi"))};
    } else if (type == "monotonic") {
      OnlyKeys(j, {"type", "direction"}, where);
      const auto d = j.at("direction").get<std::string>();
      if (d != "increase" && d != "decrease") {
        throw Error(ErrorCode::kParse, where + ": direction must be increase or decrease");
      }
      c = Monotonic{d == "increase" ? Direction::kIncrease : Direction::kDecrease};
    } else if (type == "edit_distance_cap") {
      OnlyKeys(j, {"type", "n"}, where);
      c = EditDistanceCap{j.at("n").get<std::size_t>()};
    } else if (type == "lp_norm_bound") {
      OnlyKeys(j, {"type", "p", "epsilon"}, where);
      c = LpNormBound{RealFrom(j.at("p")), j.at("epsilon").get<double>()};
    } else {
      throw Error(ErrorCode::kParse, where + ": unknown constraint type '" + type + "'");
    }
    try {
      Validate(c);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, where + ": " + e.what());
  }
}

json ParseDocument(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kParse, source + ":" + std::to_string(line) + ":" +
                                       std::to_string(col) + ": " + e.what());
  }
}

}  // namespace advgraph::detail
