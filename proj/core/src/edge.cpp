#include "advgraph/edge.hpp"

#include <charconv>

namespace advgraph {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

EdgeKey KeyOf(const TransformationEdge& edge) {
  std::string bucket = std::visit(
      Overloaded{
          [](const NoParam&) { return std::string(); },
          [](const LabelParam& p) { return p.label; },
          [](const IndexParam& p) { return std::to_string(p.index); },
          [](const CharParam& p) { return std::string(1, p.symbol); },
          [](const PositionParam&) { return std::string(); },
          [](const StepParam& p) { return "step" + std::to_string(p.step_id); },
          [](const CustomParam& p) { return p.payload; },
      },
      edge.parameter);
  return EdgeKey{edge.transformer_id, edge.action_id, std::move(bucket)};
}

std::string ToString(const EdgeParameter& parameter) {
  return std::visit(
      Overloaded{
          [](const NoParam&) { return std::string("-"); },
          [](const LabelParam& p) { return "label=" + p.label; },
          [](const IndexParam& p) { return "index=" + std::to_string(p.index); },
          [](const CharParam& p) {
            return "pos=" + std::to_string(p.position) + ",char=" +
                   std::string(1, p.symbol);
          },
          [](const PositionParam& p) { return "pos=" + std::to_string(p.position); },
          [](const StepParam& p) {
            return "step=" + std::to_string(p.step_id) + "," +
                   (p.relative ? "rel=" : "abs=") + FormatDouble(p.amount);
          },
          [](const CustomParam& p) { return "payload=" + p.payload; },
      },
      parameter);
}

std::string ToString(const TransformationEdge& edge) {
  return edge.transformer_id + "/" + edge.action_id + "(" +
         ToString(edge.parameter) + ")";
}

std::string ToString(const EdgeKey& key) {
  return key.transformer_id + "/" + key.action_id + "[" + key.bucket + "]";
}

}  // namespace advgraph
