#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <variant>

namespace advgraph {

// Action payloads. Each built-in action uses exactly one of these.
struct NoParam {
  auto operator<=>(const NoParam&) const = default;
};
struct LabelParam {  // categorical swap target
  std::string label;
  auto operator<=>(const LabelParam&) const = default;
};
struct IndexParam {  // one-hot swap target
  std::size_t index = 0;
  auto operator<=>(const IndexParam&) const = default;
};
struct CharParam {  // string insert / substitute
  std::size_t position = 0;
  char symbol = 0;
  auto operator<=>(const CharParam&) const = default;
};
struct PositionParam {  // string delete
  std::size_t position = 0;
  auto operator<=>(const PositionParam&) const = default;
};
struct StepParam {  // numeric step: `amount` is absolute, or a fraction of the
                    // current value when `relative` is set
  std::size_t step_id = 0;
  double amount = 0.0;
  bool relative = false;
  auto operator<=>(const StepParam&) const = default;
};
struct CustomParam {
  std::string payload;
  auto operator<=>(const CustomParam&) const = default;
};

using EdgeParameter = std::variant<NoParam, LabelParam, IndexParam, CharParam,
                                   PositionParam, StepParam, CustomParam>;

struct TransformationEdge {
  std::string transformer_id;
  std::string action_id;
  EdgeParameter parameter;

  bool operator==(const TransformationEdge&) const = default;
};

// Identity of an edge across vertices. Positions are dropped so string edges
// generalise; everything else keys exactly.
struct EdgeKey {
  std::string transformer_id;
  std::string action_id;
  std::string bucket;

  auto operator<=>(const EdgeKey&) const = default;
};

EdgeKey KeyOf(const TransformationEdge& edge);

std::string ToString(const EdgeParameter& parameter);
std::string ToString(const TransformationEdge& edge);
std::string ToString(const EdgeKey& key);

}  // namespace advgraph
