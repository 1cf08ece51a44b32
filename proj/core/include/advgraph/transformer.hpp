#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "advgraph/constraints.hpp"
#include "advgraph/edge.hpp"
#include "advgraph/input_state.hpp"

namespace advgraph {

enum class TransformerType { kNumeric, kBoolean, kCategorical, kOneHot, kString, kCustom };

std::string_view ToString(TransformerType type);
TransformerType ParseTransformerType(std::string_view name);  // kUnknownTransformerType

inline constexpr std::string_view kDefaultCharset = "abcdefghijklmnopqrstuvwxyz0123456789";

// Arguments of one action ("subtransformer"). Which fields matter depends on
// the owning transformer type.
struct SubtransformerArgs {
  std::string action;
  std::string charset;                 // string insert / substitute
  std::vector<double> relative_steps;  // numeric step
  std::vector<double> absolute_steps;  // numeric step
  std::map<std::string, std::string> options;  // free-form, custom actions

  bool operator==(const SubtransformerArgs&) const = default;
};

struct TransformerSpec {
  std::string name;  // transformer id carried by every edge
  TransformerType type = TransformerType::kNumeric;
  std::string custom_type;           // registered plugin name for kCustom
  std::optional<std::size_t> field;  // slot inside a Vector state
  std::vector<SubtransformerArgs> subtransformer_args;  // declaration order
  std::vector<std::string> vocabulary;                  // categorical labels
  std::size_t onehot_size = 0;
  std::vector<ConstraintSpec> input_constraints;
  std::string input_processor_name;

  bool operator==(const TransformerSpec&) const = default;
};

// Default relative step set for numeric transformers: +-1%, +-5%, +-10%, +-30%.
std::vector<double> DefaultRelativeSteps();

// ---------------------------------------------------------------------------
// Input processors

struct ProcessorSplit {
  InputState core;
  std::string context;
};

struct InputProcessor {
  std::function<ProcessorSplit(const InputState&)> pre;
  std::function<InputState(const InputState& core, const std::string& context)> post;
};

enum class ProcessorPhase { kPre, kPost };

// Named pre/post hooks. "tld_split" (domain name -> label + ".tld") is
// pre-registered.
class ProcessorRegistry {
 public:
  static ProcessorRegistry& Global();

  void Register(const std::string& name, InputProcessor processor);
  bool Contains(const std::string& name) const;
  const InputProcessor& Get(const std::string& name) const;  // kUnknownProcessor

 private:
  ProcessorRegistry();
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const InputProcessor>> processors_;
};

ProcessorSplit RunPreProcessor(const std::string& name, const InputState& raw,
                               const ProcessorRegistry& registry = ProcessorRegistry::Global());
InputState RunPostProcessor(const std::string& name, const InputState& core,
                            const std::string& context,
                            const ProcessorRegistry& registry = ProcessorRegistry::Global());

// ---------------------------------------------------------------------------
// Transformer implementations

// Enumerates raw (unfiltered) action parameters and applies them. Must be
// deterministic and must not mutate its inputs.
class Transformer {
 public:
  virtual ~Transformer() = default;

  virtual bool Accepts(const InputState& value) const = 0;
  virtual std::vector<EdgeParameter> Candidates(const InputState& value,
                                                const SubtransformerArgs& action) const = 0;
  virtual InputState Apply(const InputState& value, const SubtransformerArgs& action,
                           const EdgeParameter& parameter) const = 0;
  virtual bool IsDeletion(const SubtransformerArgs& /*action*/) const { return false; }
  // Actions this implementation understands; empty means "any".
  virtual std::vector<std::string> KnownActions() const = 0;
};

struct CustomTransformerDef {
  std::vector<std::string> actions;
  std::function<std::vector<EdgeParameter>(const InputState&, const std::string& action)>
      enumerate;
  std::function<InputState(const InputState&, const std::string& action,
                           const EdgeParameter&)>
      apply;
  std::function<bool(const InputState&)> accepts;  // optional, default: any
  std::set<std::string> deletion_actions;
};

class TransformerRegistry {
 public:
  static TransformerRegistry& Global();
  TransformerRegistry() = default;

  // kDuplicateName when `name` is taken.
  void Register(const std::string& name, CustomTransformerDef def);
  bool Contains(const std::string& name) const;
  std::shared_ptr<const Transformer> Get(const std::string& name) const;  // kUnresolvedHook

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Transformer>> custom_;
};

void RegisterCustomTransformer(const std::string& name, CustomTransformerDef def,
                               TransformerRegistry& registry = TransformerRegistry::Global());

// Interface-only stand-in for PE header rewriting: six named actions, each
// a no-op on Text states. Registered under "binary_header".
CustomTransformerDef BinaryHeaderDemoTransformer();

// Builds the implementation for a spec. kCustom resolves through `registry`.
std::shared_ptr<const Transformer> MakeTransformer(
    const TransformerSpec& spec,
    const TransformerRegistry& registry = TransformerRegistry::Global());

// Checks a spec on its own: known type, actions valid for the type, every
// per-action cap names a declared action, constraints well-formed.
void ValidateSpec(const TransformerSpec& spec,
                  const TransformerRegistry& registry = TransformerRegistry::Global(),
                  const ProcessorRegistry& processors = ProcessorRegistry::Global());

// ---------------------------------------------------------------------------
// The assembled graph

struct Successor {
  TransformationEdge edge;
  InputState state;
  BudgetLedger ledger;
};

// All transformers of one configuration plus dependencies and global
// constraints. Immutable after construction; safe to share across threads.
class InputGraph {
 public:
  InputGraph(std::vector<TransformerSpec> specs,
             std::vector<DependencyFunction> dependencies = {},
             std::vector<ConstraintSpec> global_constraints = {},
             const TransformerRegistry& registry = TransformerRegistry::Global(),
             const ProcessorRegistry& processors = ProcessorRegistry::Global());

  const std::vector<TransformerSpec>& specs() const { return specs_; }
  const std::vector<DependencyFunction>& dependencies() const { return dependencies_; }
  const std::vector<ConstraintSpec>& global_constraints() const { return global_; }

  // Admissible edges out of `state`, ordered by transformer declaration,
  // then action declaration, then parameter enumeration order.
  std::vector<TransformationEdge> EnumerateEdges(const InputState& state,
                                                 const BudgetLedger& ledger) const;

  // Same order as EnumerateEdges, with the resulting vertex attached.
  std::vector<Successor> Successors(const InputState& state, const BudgetLedger& ledger) const;

  // Applies one edge (processor, dependencies) and re-checks it. Throws
  // kUnknownAction for an edge naming an unknown transformer/action and
  // kConstraintViolation when the edge is not admissible.
  Successor ApplyEdge(const InputState& state, const BudgetLedger& ledger,
                      const TransformationEdge& edge) const;

  // nullopt instead of kConstraintViolation.
  std::optional<Successor> TryApplyEdge(const InputState& state, const BudgetLedger& ledger,
                                        const TransformationEdge& edge) const;

  // Every transformer's constraints against the original, plus the global
  // constraints on the whole state. `ledger` enables budget-kind checks.
  std::vector<Violation> CheckFinal(const InputState& state, const InputState& original,
                                    const BudgetLedger* ledger = nullptr) const;

  // Replays `edges` from `original`; throws like ApplyEdge on the first
  // inadmissible step.
  Successor Replay(const InputState& original,
                   const std::vector<TransformationEdge>& edges) const;

 private:
  struct Bound {
    TransformerSpec spec;
    std::shared_ptr<const Transformer> impl;
    const InputProcessor* processor = nullptr;
  };

  const Bound& Find(const std::string& transformer_id) const;
  const SubtransformerArgs& FindAction(const Bound& b, const std::string& action) const;
  const InputState& Slot(const Bound& b, const InputState& state) const;
  InputState WithSlot(const Bound& b, const InputState& state, InputState value) const;
  InputState Core(const Bound& b, const InputState& slot) const;
  std::optional<Successor> Evaluate(const Bound& b, const SubtransformerArgs& action,
                                    const InputState& state, const BudgetLedger& ledger,
                                    TransformationEdge edge) const;
  void Enumerate(const InputState& state, const BudgetLedger& ledger,
                 const std::function<void(Successor&&)>& sink) const;

  std::vector<TransformerSpec> specs_;
  std::vector<Bound> bound_;
  std::vector<DependencyFunction> dependencies_;
  std::vector<ConstraintSpec> global_;
};

// Single-transformer convenience: admissible edges of `spec` at `state`,
// with `usage` as the budget already spent. `original` defaults to `state`.
std::vector<TransformationEdge> EnumerateEdges(
    const InputState& state, const TransformerSpec& spec, const TransformerUsage& usage,
    const std::optional<InputState>& original = std::nullopt);

// Single-transformer convenience: applies `edge` and returns the new state.
InputState ApplyEdge(const InputState& state, const TransformationEdge& edge,
                     const TransformerSpec& spec);

}  // namespace advgraph
