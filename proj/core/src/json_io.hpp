#pragma once

// JSON forms shared by the records and config code. Private to the library.

#include <nlohmann/json.hpp>

#include "advgraph/constraints.hpp"
#include "advgraph/edge.hpp"
#include "advgraph/input_state.hpp"

namespace advgraph::detail {

using json = nlohmann::ordered_json;

json ToJson(const InputState& state);
InputState StateFrom(const json& j);

json ToJson(const TransformationEdge& edge);
TransformationEdge EdgeFrom(const json& j);

json ToJson(const ConstraintSpec& c);
ConstraintSpec ConstraintFrom(const json& j, const std::string& where);

// Parses `text`; kParse carries the line and column of a syntax error.
json ParseDocument(std::string_view text, const std::string& source);

}  // namespace advgraph::detail
