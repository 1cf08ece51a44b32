#include "advgraph/transformer.hpp"

#include <algorithm>
#include <cmath>

#include "advgraph/error.hpp"

namespace advgraph {
namespace {

[[noreturn]] void BadParameter(const SubtransformerArgs& action, const EdgeParameter& p) {
  throw Error(ErrorCode::kUnknownAction,
              "parameter " + ToString(p) + " does not fit action " + action.action);
}

double NumericStepResult(const InputState& value, const StepParam& step) {
  double cur = value.numeric();
  double next = step.relative ? cur + step.amount * std::abs(cur) : cur + step.amount;
  if (value.kind() == InputState::Kind::kInt) next = std::round(next);
  return next;
}

InputState NumericLike(const InputState& like, double v) {
  if (like.kind() == InputState::Kind::kInt) {
    return InputState::Int(static_cast<std::int64_t>(v));
  }
  return InputState::Float(v);
}

class NumericTransformer final : public Transformer {
 public:
  bool Accepts(const InputState& v) const override { return v.is_numeric(); }

  std::vector<EdgeParameter> Candidates(const InputState& value,
                                        const SubtransformerArgs& action) const override {
    std::vector<EdgeParameter> out;
    const auto rel = action.relative_steps.empty() && action.absolute_steps.empty()
                         ? DefaultRelativeSteps()
                         : action.relative_steps;
    std::size_t id = 0;
    auto push = [&](double amount, bool relative) {
      StepParam p{id++, amount, relative};
      double next = NumericStepResult(value, p);
      if (std::isfinite(next) && next != value.numeric()) out.emplace_back(p);
    };
    for (double a : rel) push(a, true);
    for (double a : action.absolute_steps) push(a, false);
    return out;
  }

  InputState Apply(const InputState& value, const SubtransformerArgs& action,
                   const EdgeParameter& parameter) const override {
    const auto* step = std::get_if<StepParam>(&parameter);
    if (!step) BadParameter(action, parameter);
    return NumericLike(value, NumericStepResult(value, *step));
  }

  std::vector<std::string> KnownActions() const override { return {"step"}; }
};

class BooleanTransformer final : public Transformer {
 public:
  bool Accepts(const InputState& v) const override {
    return v.kind() == InputState::Kind::kBool;
  }
  std::vector<EdgeParameter> Candidates(const InputState&,
                                        const SubtransformerArgs&) const override {
    return {NoParam{}};
  }
  InputState Apply(const InputState& value, const SubtransformerArgs& action,
                   const EdgeParameter& parameter) const override {
    if (!std::holds_alternative<NoParam>(parameter)) BadParameter(action, parameter);
    return InputState::Bool(!value.as_bool());
  }
  std::vector<std::string> KnownActions() const override { return {"flip"}; }
};

class CategoricalTransformer final : public Transformer {
 public:
  explicit CategoricalTransformer(std::vector<std::string> vocabulary)
      : vocabulary_(std::move(vocabulary)) {}

  bool Accepts(const InputState& v) const override {
    return v.kind() == InputState::Kind::kCategorical;
  }

  std::vector<EdgeParameter> Candidates(const InputState& value,
                                        const SubtransformerArgs&) const override {
    if (vocabulary_.size() < 2) {
      throw Error(ErrorCode::kEmptyVocabulary, "categorical vocabulary needs >= 2 labels");
    }
    const auto& label = value.as_categorical().label;
    CheckMember(label);
    std::vector<EdgeParameter> out;
    for (const auto& l : vocabulary_) {
      if (l != label) out.emplace_back(LabelParam{l});
    }
    return out;
  }

  InputState Apply(const InputState& value, const SubtransformerArgs& action,
                   const EdgeParameter& parameter) const override {
    const auto* p = std::get_if<LabelParam>(&parameter);
    if (!p) BadParameter(action, parameter);
    CheckMember(value.as_categorical().label);
    CheckMember(p->label);
    return InputState::Cat(p->label);
  }

  std::vector<std::string> KnownActions() const override { return {"swap"}; }

 private:
  void CheckMember(const std::string& label) const {
    if (std::find(vocabulary_.begin(), vocabulary_.end(), label) == vocabulary_.end()) {
      throw Error(ErrorCode::kMalformedInput, "label '" + label + "' not in vocabulary");
    }
  }

  std::vector<std::string> vocabulary_;
};

class OneHotTransformer final : public Transformer {
 public:
  explicit OneHotTransformer(std::size_t size) : size_(size) {}

  bool Accepts(const InputState& v) const override {
    return v.kind() == InputState::Kind::kOneHot &&
           (size_ == 0 || v.as_onehot().size == size_);
  }

  std::vector<EdgeParameter> Candidates(const InputState& value,
                                        const SubtransformerArgs&) const override {
    const auto& h = value.as_onehot();
    if (h.size < 2) throw Error(ErrorCode::kEmptyVocabulary, "one-hot needs >= 2 slots");
    if (h.index >= h.size) throw Error(ErrorCode::kMalformedInput, "one-hot index out of range");
    std::vector<EdgeParameter> out;
    for (std::size_t i = 0; i < h.size; ++i) {
      if (i != h.index) out.emplace_back(IndexParam{i});
    }
    return out;
  }

  InputState Apply(const InputState& value, const SubtransformerArgs& action,
                   const EdgeParameter& parameter) const override {
    const auto* p = std::get_if<IndexParam>(&parameter);
    const auto& h = value.as_onehot();
    if (!p || p->index >= h.size) BadParameter(action, parameter);
    return InputState::OneHotOf(p->index, h.size);
  }

  std::vector<std::string> KnownActions() const override { return {"swap"}; }

 private:
  std::size_t size_;
};

class StringTransformer final : public Transformer {
 public:
  bool Accepts(const InputState& v) const override {
    return v.kind() == InputState::Kind::kText;
  }

  std::vector<EdgeParameter> Candidates(const InputState& value,
                                        const SubtransformerArgs& action) const override {
    const std::string& s = value.as_text();
    const std::string_view charset = CharsetOf(action);
    std::vector<EdgeParameter> out;
    if (action.action == "insert") {
      for (std::size_t pos = 0; pos <= s.size(); ++pos) {
        for (char c : charset) out.emplace_back(CharParam{pos, c});
      }
    } else if (action.action == "substitute") {
      for (std::size_t pos = 0; pos < s.size(); ++pos) {
        for (char c : charset) {
          if (c != s[pos]) out.emplace_back(CharParam{pos, c});
        }
      }
    } else if (action.action == "delete") {
      for (std::size_t pos = 0; pos < s.size(); ++pos) out.emplace_back(PositionParam{pos});
    } else {
      throw Error(ErrorCode::kUnknownAction, "string action " + action.action);
    }
    return out;
  }

  InputState Apply(const InputState& value, const SubtransformerArgs& action,
                   const EdgeParameter& parameter) const override {
    std::string s = value.as_text();
    const std::string_view charset = CharsetOf(action);
    if (action.action == "insert" || action.action == "substitute") {
      const auto* p = std::get_if<CharParam>(&parameter);
      if (!p || charset.find(p->symbol) == std::string_view::npos) {
        BadParameter(action, parameter);
      }
      if (action.action == "insert") {
        if (p->position > s.size()) BadParameter(action, parameter);
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(p->position), p->symbol);
      } else {
        if (p->position >= s.size()) BadParameter(action, parameter);
        s[p->position] = p->symbol;
      }
    } else if (action.action == "delete") {
      const auto* p = std::get_if<PositionParam>(&parameter);
      if (!p || p->position >= s.size()) BadParameter(action, parameter);
      s.erase(s.begin() + static_cast<std::ptrdiff_t>(p->position));
    } else {
      throw Error(ErrorCode::kUnknownAction, "string action " + action.action);
    }
    return InputState::TextOf(std::move(s));
  }

  bool IsDeletion(const SubtransformerArgs& action) const override {
    return action.action == "delete";
  }

  std::vector<std::string> KnownActions() const override {
    return {"insert", "substitute", "delete"};
  }

 private:
  static std::string_view CharsetOf(const SubtransformerArgs& action) {
    return action.charset.empty() ? kDefaultCharset : std::string_view(action.charset);
  }
};

class CustomTransformer final : public Transformer {
 public:
  explicit CustomTransformer(CustomTransformerDef def) : def_(std::move(def)) {}

  bool Accepts(const InputState& v) const override {
    return !def_.accepts || def_.accepts(v);
  }
  std::vector<EdgeParameter> Candidates(const InputState& value,
                                        const SubtransformerArgs& action) const override {
    return def_.enumerate(value, action.action);
  }
  InputState Apply(const InputState& value, const SubtransformerArgs& action,
                   const EdgeParameter& parameter) const override {
    return def_.apply(value, action.action, parameter);
  }
  bool IsDeletion(const SubtransformerArgs& action) const override {
    return def_.deletion_actions.count(action.action) > 0;
  }
  std::vector<std::string> KnownActions() const override { return def_.actions; }

 private:
  CustomTransformerDef def_;
};

TransformerUsage Aggregate(const BudgetLedger& ledger) {
  TransformerUsage u;
  u.total = ledger.total_actions_used();
  for (const auto& [id, t] : ledger.usage()) {
    u.deletions += t.deletions;
    for (const auto& [a, n] : t.per_action) u.per_action[a] += n;
  }
  return u;
}

}  // namespace

std::string_view ToString(TransformerType type) {
  switch (type) {
    case TransformerType::kNumeric: return "numeric";
    case TransformerType::kBoolean: return "boolean";
    case TransformerType::kCategorical: return "categorical";
    case TransformerType::kOneHot: return "onehot";
    case TransformerType::kString: return "string";
    case TransformerType::kCustom: return "custom";
  }
  return "?";
}

TransformerType ParseTransformerType(std::string_view name) {
  for (auto t : {TransformerType::kNumeric, TransformerType::kBoolean,
                 TransformerType::kCategorical, TransformerType::kOneHot,
                 TransformerType::kString, TransformerType::kCustom}) {
    if (ToString(t) == name) return t;
  }
  throw Error(ErrorCode::kUnknownTransformerType, std::string(name));
}

std::vector<double> DefaultRelativeSteps() {
  return {0.01, -0.01, 0.05, -0.05, 0.10, -0.10, 0.30, -0.30};
}

// ---------------------------------------------------------------------------

ProcessorRegistry::ProcessorRegistry() {
  InputProcessor tld;
  tld.pre = [](const InputState& raw) {
    if (raw.kind() != InputState::Kind::kText) {
      throw Error(ErrorCode::kMalformedInput, "tld_split expects text");
    }
    const std::string& s = raw.as_text();
    auto dot = s.rfind('.');
    if (dot == std::string::npos || dot == 0) {
      throw Error(ErrorCode::kMalformedInput, "no top-level domain in '" + s + "'");
    }
    return ProcessorSplit{InputState::TextOf(s.substr(0, dot)), s.substr(dot)};
  };
  tld.post = [](const InputState& core, const std::string& context) {
    return InputState::TextOf(core.as_text() + context);
  };
  processors_["tld_split"] = std::make_shared<const InputProcessor>(std::move(tld));
}

ProcessorRegistry& ProcessorRegistry::Global() {
  static ProcessorRegistry registry;
  return registry;
}

void ProcessorRegistry::Register(const std::string& name, InputProcessor processor) {
  std::lock_guard lock(mu_);
  if (processors_.count(name)) throw Error(ErrorCode::kDuplicateName, "processor " + name);
  processors_[name] = std::make_shared<const InputProcessor>(std::move(processor));
}

bool ProcessorRegistry::Contains(const std::string& name) const {
  std::lock_guard lock(mu_);
  return processors_.count(name) > 0;
}

const InputProcessor& ProcessorRegistry::Get(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = processors_.find(name);
  if (it == processors_.end()) throw Error(ErrorCode::kUnknownProcessor, name);
  return *it->second;
}

ProcessorSplit RunPreProcessor(const std::string& name, const InputState& raw,
                               const ProcessorRegistry& registry) {
  return registry.Get(name).pre(raw);
}

InputState RunPostProcessor(const std::string& name, const InputState& core,
                            const std::string& context, const ProcessorRegistry& registry) {
  return registry.Get(name).post(core, context);
}

// ---------------------------------------------------------------------------

TransformerRegistry& TransformerRegistry::Global() {
  static TransformerRegistry registry;
  static std::once_flag demo;
  std::call_once(demo, [] {
    registry.Register("binary_header", BinaryHeaderDemoTransformer());
  });
  return registry;
}

void TransformerRegistry::Register(const std::string& name, CustomTransformerDef def) {
  if (!def.enumerate || !def.apply) {
    throw Error(ErrorCode::kInvalidArgument, "custom transformer " + name +
                                                 " needs an enumerator and an applier");
  }
  std::lock_guard lock(mu_);
  if (custom_.count(name)) throw Error(ErrorCode::kDuplicateName, "transformer " + name);
  custom_[name] = std::make_shared<const CustomTransformer>(std::move(def));
}

bool TransformerRegistry::Contains(const std::string& name) const {
  std::lock_guard lock(mu_);
  return custom_.count(name) > 0;
}

std::shared_ptr<const Transformer> TransformerRegistry::Get(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = custom_.find(name);
  if (it == custom_.end()) throw Error(ErrorCode::kUnresolvedHook, "transformer " + name);
  return it->second;
}

void RegisterCustomTransformer(const std::string& name, CustomTransformerDef def,
                               TransformerRegistry& registry) {
  registry.Register(name, std::move(def));
}

CustomTransformerDef BinaryHeaderDemoTransformer() {
  CustomTransformerDef def;
  def.actions = {"pack",       "add_section", "rename_section",
                 "add_import", "strip_debug", "append_header"};
  def.accepts = [](const InputState& v) { return v.kind() == InputState::Kind::kText; };
  def.enumerate = [](const InputState&, const std::string& action) {
    return std::vector<EdgeParameter>{CustomParam{action}};
  };
  def.apply = [](const InputState& v, const std::string&, const EdgeParameter&) { return v; };
  return def;
}

std::shared_ptr<const Transformer> MakeTransformer(const TransformerSpec& spec,
                                                   const TransformerRegistry& registry) {
  switch (spec.type) {
    case TransformerType::kNumeric: return std::make_shared<NumericTransformer>();
    case TransformerType::kBoolean: return std::make_shared<BooleanTransformer>();
    case TransformerType::kCategorical:
      return std::make_shared<CategoricalTransformer>(spec.vocabulary);
    case TransformerType::kOneHot: return std::make_shared<OneHotTransformer>(spec.onehot_size);
    case TransformerType::kString: return std::make_shared<StringTransformer>();
    case TransformerType::kCustom: return registry.Get(spec.custom_type);
  }
  throw Error(ErrorCode::kUnknownTransformerType, spec.name);
}

void ValidateSpec(const TransformerSpec& spec, const TransformerRegistry& registry,
                  const ProcessorRegistry& processors) {
  if (spec.name.empty()) throw Error(ErrorCode::kInvalidArgument, "transformer without a name");
  auto impl = MakeTransformer(spec, registry);
  if (spec.subtransformer_args.empty()) {
    throw Error(ErrorCode::kInvalidArgument, spec.name + " declares no subtransformer_args");
  }
  const auto known = impl->KnownActions();
  std::set<std::string> declared;
  for (const auto& a : spec.subtransformer_args) {
    if (!known.empty() && std::find(known.begin(), known.end(), a.action) == known.end()) {
      throw Error(ErrorCode::kUnknownAction, spec.name + " has no action " + a.action);
    }
    if (!declared.insert(a.action).second) {
      throw Error(ErrorCode::kInvalidArgument, spec.name + " declares " + a.action + " twice");
    }
    for (double s : a.relative_steps) {
      if (!std::isfinite(s) || s == 0.0) {
        throw Error(ErrorCode::kInvalidArgument, spec.name + ": bad relative step");
      }
    }
    for (double s : a.absolute_steps) {
      if (!std::isfinite(s) || s == 0.0) {
        throw Error(ErrorCode::kInvalidArgument, spec.name + ": bad absolute step");
      }
    }
  }
  if (spec.type == TransformerType::kCategorical && spec.vocabulary.size() < 2) {
    throw Error(ErrorCode::kEmptyVocabulary, spec.name);
  }
  for (const auto& c : spec.input_constraints) {
    Validate(c);
    if (const auto* caps = std::get_if<MaxActionsPerType>(&c)) {
      for (const auto& [action, n] : caps->caps) {
        if (!declared.count(action)) {
          throw Error(ErrorCode::kInvalidArgument,
                      spec.name + ": constraint names undeclared action " + action);
        }
      }
    }
  }
  if (!spec.input_processor_name.empty() &&
      !processors.Contains(spec.input_processor_name)) {
    throw Error(ErrorCode::kUnknownProcessor, spec.input_processor_name);
  }
}

// ---------------------------------------------------------------------------

InputGraph::InputGraph(std::vector<TransformerSpec> specs,
                       std::vector<DependencyFunction> dependencies,
                       std::vector<ConstraintSpec> global_constraints,
                       const TransformerRegistry& registry,
                       const ProcessorRegistry& processors)
    : specs_(std::move(specs)),
      dependencies_(std::move(dependencies)),
      global_(std::move(global_constraints)) {
  std::set<std::string> names;
  for (const auto& spec : specs_) {
    ValidateSpec(spec, registry, processors);
    if (!names.insert(spec.name).second) {
      throw Error(ErrorCode::kDuplicateName, "transformer id " + spec.name);
    }
    Bound b{spec, MakeTransformer(spec, registry), nullptr};
    if (!spec.input_processor_name.empty()) {
      b.processor = &processors.Get(spec.input_processor_name);
    }
    bound_.push_back(std::move(b));
  }
  for (const auto& c : global_) Validate(c);
}

const InputGraph::Bound& InputGraph::Find(const std::string& transformer_id) const {
  for (const auto& b : bound_) {
    if (b.spec.name == transformer_id) return b;
  }
  throw Error(ErrorCode::kUnknownAction, "no transformer " + transformer_id);
}

const SubtransformerArgs& InputGraph::FindAction(const Bound& b,
                                                 const std::string& action) const {
  for (const auto& a : b.spec.subtransformer_args) {
    if (a.action == action) return a;
  }
  throw Error(ErrorCode::kUnknownAction, b.spec.name + " has no action " + action);
}

const InputState& InputGraph::Slot(const Bound& b, const InputState& state) const {
  if (b.spec.field) {
    if (state.kind() != InputState::Kind::kVector) {
      throw Error(ErrorCode::kTypeMismatch, b.spec.name + " addresses a field of a non-vector");
    }
    return state.field(*b.spec.field);
  }
  return state;
}

InputState InputGraph::WithSlot(const Bound& b, const InputState& state, InputState value) const {
  if (b.spec.field) return state.WithField(*b.spec.field, std::move(value));
  return value;
}

InputState InputGraph::Core(const Bound& b, const InputState& slot) const {
  return b.processor ? b.processor->pre(slot).core : slot;
}

std::optional<Successor> InputGraph::Evaluate(const Bound& b, const SubtransformerArgs& action,
                                              const InputState& state,
                                              const BudgetLedger& ledger,
                                              TransformationEdge edge) const {
  const InputState& slot = Slot(b, state);
  InputState core;
  InputState next_slot;
  if (b.processor) {
    auto split = b.processor->pre(slot);
    core = std::move(split.core);
    next_slot = b.processor->post(b.impl->Apply(core, action, edge.parameter), split.context);
  } else {
    core = slot;
    next_slot = b.impl->Apply(slot, action, edge.parameter);
  }
  InputState next = WithSlot(b, state, std::move(next_slot));
  if (!dependencies_.empty() && next.kind() == InputState::Kind::kVector) {
    next = ApplyDependencies(next, dependencies_);
  }

  const bool deletion = b.impl->IsDeletion(action);
  const InputState proposed_core = Core(b, Slot(b, next));
  const InputState original_core = Core(b, Slot(b, ledger.original()));
  EdgeProposal proposal{edge, core, proposed_core, original_core, deletion};
  if (!Admits(proposal, ledger.UsageOf(b.spec.name), b.spec.input_constraints)) {
    return std::nullopt;
  }
  if (!global_.empty()) {
    EdgeProposal whole{edge, state, next, ledger.original(), deletion};
    if (!Admits(whole, Aggregate(ledger), global_)) return std::nullopt;
  }
  // Fields rewritten by dependencies must still satisfy their own
  // transformer's constraints.
  if (!dependencies_.empty() && next.kind() == InputState::Kind::kVector) {
    for (const auto& other : bound_) {
      if (&other == &b || !other.spec.field) continue;
      const auto& before = Slot(other, state);
      const auto& after = Slot(other, next);
      if (before == after) continue;
      auto usage = ledger.UsageOf(other.spec.name);
      if (!advgraph::CheckFinal(Core(other, after), Core(other, Slot(other, ledger.original())),
                                other.spec.input_constraints, &usage)
               .empty()) {
        return std::nullopt;
      }
    }
  }
  BudgetLedger next_ledger = ledger;
  next_ledger.Record(edge, deletion);
  return Successor{std::move(edge), std::move(next), std::move(next_ledger)};
}

void InputGraph::Enumerate(const InputState& state, const BudgetLedger& ledger,
                           const std::function<void(Successor&&)>& sink) const {
  for (const auto& b : bound_) {
    const InputState& slot = Slot(b, state);
    InputState core = Core(b, slot);
    if (!b.impl->Accepts(core)) {
      throw Error(ErrorCode::kTypeMismatch,
                  b.spec.name + " (" + std::string(ToString(b.spec.type)) + ") cannot edit a " +
                      std::string(KindName(core.kind())) + " value");
    }
    for (const auto& action : b.spec.subtransformer_args) {
      for (auto& param : b.impl->Candidates(core, action)) {
        TransformationEdge edge{b.spec.name, action.action, std::move(param)};
        if (auto s = Evaluate(b, action, state, ledger, std::move(edge))) sink(std::move(*s));
      }
    }
  }
}

std::vector<TransformationEdge> InputGraph::EnumerateEdges(const InputState& state,
                                                           const BudgetLedger& ledger) const {
  std::vector<TransformationEdge> out;
  Enumerate(state, ledger, [&](Successor&& s) { out.push_back(std::move(s.edge)); });
  return out;
}

std::vector<Successor> InputGraph::Successors(const InputState& state,
                                              const BudgetLedger& ledger) const {
  std::vector<Successor> out;
  Enumerate(state, ledger, [&](Successor&& s) { out.push_back(std::move(s)); });
  return out;
}

std::optional<Successor> InputGraph::TryApplyEdge(const InputState& state,
                                                  const BudgetLedger& ledger,
                                                  const TransformationEdge& edge) const {
  const Bound& b = Find(edge.transformer_id);
  const SubtransformerArgs& action = FindAction(b, edge.action_id);
  InputState core = Core(b, Slot(b, state));
  if (!b.impl->Accepts(core)) {
    throw Error(ErrorCode::kTypeMismatch, b.spec.name + " cannot edit this value");
  }
  return Evaluate(b, action, state, ledger, edge);
}

Successor InputGraph::ApplyEdge(const InputState& state, const BudgetLedger& ledger,
                                const TransformationEdge& edge) const {
  auto s = TryApplyEdge(state, ledger, edge);
  if (!s) {
    throw Error(ErrorCode::kConstraintViolation, ToString(edge) + " is not admissible");
  }
  return std::move(*s);
}

std::vector<Violation> InputGraph::CheckFinal(const InputState& state,
                                              const InputState& original,
                                              const BudgetLedger* ledger) const {
  std::vector<Violation> out;
  for (const auto& b : bound_) {
    const TransformerUsage* usage = ledger ? &ledger->UsageOf(b.spec.name) : nullptr;
    auto v = advgraph::CheckFinal(Core(b, Slot(b, state)), Core(b, Slot(b, original)),
                                  b.spec.input_constraints, usage);
    for (auto& x : v) {
      x.constraint = b.spec.name + ":" + x.constraint;
      out.push_back(std::move(x));
    }
  }
  if (!global_.empty()) {
    std::optional<TransformerUsage> usage;
    if (ledger) usage = Aggregate(*ledger);
    auto v = advgraph::CheckFinal(state, original, global_, usage ? &*usage : nullptr);
    for (auto& x : v) {
      x.constraint = "global:" + x.constraint;
      out.push_back(std::move(x));
    }
  }
  return out;
}

Successor InputGraph::Replay(const InputState& original,
                             const std::vector<TransformationEdge>& edges) const {
  Successor cur{TransformationEdge{}, original, BudgetLedger(original)};
  for (const auto& e : edges) cur = ApplyEdge(cur.state, cur.ledger, e);
  return cur;
}

std::vector<TransformationEdge> EnumerateEdges(const InputState& state,
                                               const TransformerSpec& spec,
                                               const TransformerUsage& usage,
                                               const std::optional<InputState>& original) {
  InputGraph graph({spec});
  BudgetLedger ledger(original.value_or(state));
  ledger.SetUsage(spec.name, usage);
  return graph.EnumerateEdges(state, ledger);
}

InputState ApplyEdge(const InputState& state, const TransformationEdge& edge,
                     const TransformerSpec& spec) {
  InputGraph graph({spec});
  return graph.ApplyEdge(state, BudgetLedger(state), edge).state;
}

}  // namespace advgraph
