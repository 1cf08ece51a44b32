#include <gtest/gtest.h>

#include <algorithm>

#include "advgraph/error.hpp"
#include "advgraph/transformer.hpp"
#include "test_util.hpp"

namespace advgraph {
namespace {

using testing::StringSpec;

TransformerSpec Single(TransformerType type, std::string action) {
  TransformerSpec t;
  t.name = "t";
  t.type = type;
  t.subtransformer_args = {SubtransformerArgs{std::move(action), {}, {}, {}, {}}};
  return t;
}

TEST(Enumerate, CategoricalSwapToTheOnlyOtherLabel) {
  auto spec = Single(TransformerType::kCategorical, "swap");
  spec.vocabulary = {"Chrome", "Safari"};
  auto edges = EnumerateEdges(InputState::Cat("Chrome"), spec, {});
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].action_id, "swap");
  EXPECT_EQ(std::get<LabelParam>(edges[0].parameter).label, "Safari");
}

TEST(Enumerate, SubstituteReachesLfjz) {
  TransformerSpec spec = StringSpec();
  spec.subtransformer_args = {SubtransformerArgs{"substitute", "abcdefghijklmnopqrstuvwxyz", {}, {}, {}}};
  auto edges = EnumerateEdges(InputState::TextOf("lfjx"), spec, {});
  TransformationEdge want{"s", "substitute", CharParam{3, 'z'}};
  ASSERT_NE(std::find(edges.begin(), edges.end(), want), edges.end());
  EXPECT_EQ(ApplyEdge(InputState::TextOf("lfjx"), want, spec), InputState::TextOf("lfjz"));
  // 4 positions x 25 other letters.
  EXPECT_EQ(edges.size(), 100u);
}

TEST(Enumerate, BoolHasOneFlip) {
  auto spec = Single(TransformerType::kBoolean, "flip");
  auto edges = EnumerateEdges(InputState::Bool(true), spec, {});
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(ApplyEdge(InputState::Bool(true), edges[0], spec), InputState::Bool(false));
}

TEST(Enumerate, TypeMismatchAndEmptyVocabulary) {
  auto spec = Single(TransformerType::kCategorical, "swap");
  spec.vocabulary = {"A", "B"};
  try {
    EnumerateEdges(InputState::Float(1.0), spec, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTypeMismatch);
  }
  spec.vocabulary = {"A"};
  try {
    EnumerateEdges(InputState::Cat("A"), spec, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyVocabulary);
  }
}

TEST(Enumerate, NumericDefaultStepsAreTheDiscretizedSet) {
  auto spec = Single(TransformerType::kNumeric, "step");
  auto edges = EnumerateEdges(InputState::Float(10.0), spec, {});
  ASSERT_EQ(edges.size(), DefaultRelativeSteps().size());
  std::vector<double> got;
  for (const auto& e : edges) got.push_back(ApplyEdge(InputState::Float(10.0), e, spec).as_float());
  std::vector<double> want{10.1, 9.9, 10.5, 9.5, 11.0, 9.0, 13.0, 7.0};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Enumerate, OrderFollowsActionsThenPositionsThenCharset) {
  TransformerSpec spec = StringSpec("s", "ab");
  auto edges = EnumerateEdges(InputState::TextOf("a"), spec, {});
  std::vector<std::string> got;
  for (const auto& e : edges) got.push_back(ToString(e));
  // insert(0,a) insert(0,b) insert(1,a) insert(1,b) substitute(0,b) delete(0)
  ASSERT_EQ(got.size(), 6u);
  EXPECT_EQ(edges[0], (TransformationEdge{"s", "insert", CharParam{0, 'a'}}));
  EXPECT_EQ(edges[3], (TransformationEdge{"s", "insert", CharParam{1, 'b'}}));
  EXPECT_EQ(edges[4], (TransformationEdge{"s", "substitute", CharParam{0, 'b'}}));
  EXPECT_EQ(edges[5], (TransformationEdge{"s", "delete", PositionParam{0}}));
}

TEST(Apply, Examples) {
  TransformerSpec s = StringSpec();
  EXPECT_EQ(ApplyEdge(InputState::TextOf("lfjx"), {"s", "delete", PositionParam{2}}, s),
            InputState::TextOf("lfx"));

  auto num = Single(TransformerType::kNumeric, "step");
  num.subtransformer_args[0].relative_steps = {0.3};
  num.input_constraints = {RelativeValueBound{0.3}};
  auto edges = EnumerateEdges(InputState::Float(10.0), num, {});
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_NEAR(ApplyEdge(InputState::Float(10.0), edges[0], num).as_float(), 13.0, 1e-12);

  auto oh = Single(TransformerType::kOneHot, "swap");
  EXPECT_EQ(ApplyEdge(InputState::OneHotOf(2, 7), {"t", "swap", IndexParam{5}}, oh),
            InputState::OneHotOf(5, 7));
}

TEST(Apply, UnknownActionAndInadmissibleEdge) {
  TransformerSpec s = StringSpec();
  try {
    ApplyEdge(InputState::TextOf("ab"), {"s", "reverse", NoParam{}}, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownAction);
  }
  s.input_constraints = {MaxDeleteFraction{0.5}};
  // Deleting one of two characters is fine; the graph refuses a second one.
  InputGraph g({s});
  auto first = g.ApplyEdge(InputState::TextOf("ab"), BudgetLedger(InputState::TextOf("ab")),
                           {"s", "delete", PositionParam{0}});
  try {
    g.ApplyEdge(first.state, first.ledger, {"s", "delete", PositionParam{0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstraintViolation);
  }
}

TEST(Processor, TldSplitPrePostAndRoundTrip) {
  auto split = RunPreProcessor("tld_split", InputState::TextOf("lfjx.com"));
  EXPECT_EQ(split.core, InputState::TextOf("lfjx"));
  EXPECT_EQ(split.context, ".com");
  EXPECT_EQ(RunPostProcessor("tld_split", InputState::TextOf("lfjz"), ".com"),
            InputState::TextOf("lfjz.com"));
  auto rt = RunPreProcessor("tld_split", InputState::TextOf("abc.org"));
  EXPECT_EQ(RunPostProcessor("tld_split", rt.core, rt.context), InputState::TextOf("abc.org"));
  try {
    RunPreProcessor("nope", InputState::TextOf("a.com"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownProcessor);
  }
}

TEST(Processor, GraphEdgesNeverTouchTheTld) {
  TransformerSpec s = StringSpec();
  s.input_processor_name = "tld_split";
  InputGraph g({s});
  const auto x = InputState::TextOf("lfjx.com");
  for (const auto& succ : g.Successors(x, BudgetLedger(x))) {
    const auto& t = succ.state.as_text();
    ASSERT_GE(t.size(), 4u);
    EXPECT_EQ(t.substr(t.size() - 4), ".com") << t;
  }
}

TEST(Custom, RegisterEnumerateAndDuplicate) {
  TransformerRegistry reg;
  RegisterCustomTransformer("binary_header", BinaryHeaderDemoTransformer(), reg);
  EXPECT_TRUE(reg.Contains("binary_header"));
  TransformerSpec spec;
  spec.name = "bin";
  spec.type = TransformerType::kCustom;
  spec.custom_type = "binary_header";
  for (const auto& a : BinaryHeaderDemoTransformer().actions) {
    spec.subtransformer_args.push_back(SubtransformerArgs{a, {}, {}, {}, {}});
  }
  EXPECT_EQ(spec.subtransformer_args.size(), 6u);
  InputGraph g({spec}, {}, {}, reg);
  const auto x = InputState::TextOf("MZ");
  EXPECT_FALSE(g.EnumerateEdges(x, BudgetLedger(x)).empty());
  try {
    RegisterCustomTransformer("binary_header", BinaryHeaderDemoTransformer(), reg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateName);
  }
}

TEST(Custom, UserTransformerBehavesLikeABuiltin) {
  TransformerRegistry reg;
  CustomTransformerDef def;
  def.actions = {"double"};
  def.accepts = [](const InputState& v) { return v.kind() == InputState::Kind::kInt; };
  def.enumerate = [](const InputState&, const std::string&) {
    return std::vector<EdgeParameter>{NoParam{}};
  };
  def.apply = [](const InputState& v, const std::string&, const EdgeParameter&) {
    return InputState::Int(v.as_int() * 2);
  };
  RegisterCustomTransformer("doubler", def, reg);
  TransformerSpec spec;
  spec.name = "d";
  spec.type = TransformerType::kCustom;
  spec.custom_type = "doubler";
  spec.subtransformer_args = {SubtransformerArgs{"double", {}, {}, {}, {}}};
  spec.input_constraints = {MaxTotalActions{2}};
  InputGraph g({spec}, {}, {}, reg);
  auto s = g.Replay(InputState::Int(3), {{"d", "double", NoParam{}}, {"d", "double", NoParam{}}});
  EXPECT_EQ(s.state, InputState::Int(12));
  EXPECT_TRUE(g.EnumerateEdges(s.state, s.ledger).empty());
}

// Properties over small random states.

TEST(Property, DeterminismPurityClosureSoundness) {
  Rng rng(11);
  auto str = StringSpec("s", "abc");
  str.input_constraints = {MaxDeleteFraction{0.5}, EditDistanceCap{2}};
  auto cat = testing::CategoricalField("c", 1, {"x", "y", "z"});
  auto num = Single(TransformerType::kNumeric, "step");
  num.name = "n";
  num.field = 2;
  num.input_constraints = {RelativeMaxBound{0.3, 10.0}};
  auto b = Single(TransformerType::kBoolean, "flip");
  b.name = "b";
  b.field = 3;
  str.field = 0;
  InputGraph g({str, cat, num, b}, {}, {MaxTotalActions{3}});

  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    for (std::size_t i = 0, n = UniformIndex(rng, 5); i < n; ++i) text += "abc"[UniformIndex(rng, 3)];
    const auto x = InputState::VectorOf({InputState::TextOf(text), InputState::Cat(std::string(1, "xyz"[UniformIndex(rng, 3)])),
                                         InputState::Float(static_cast<double>(UniformIndex(rng, 10))),
                                         InputState::Bool(UniformIndex(rng, 2) == 1)});
    const auto copy = x;
    // Walk a few random steps, checking every edge on the way.
    auto state = x;
    BudgetLedger ledger(x);
    for (int step = 0; step < 3; ++step) {
      auto edges = g.EnumerateEdges(state, ledger);
      ASSERT_EQ(edges, g.EnumerateEdges(state, ledger));
      if (edges.empty()) break;
      for (const auto& e : edges) {
        auto s1 = g.ApplyEdge(state, ledger, e);  // soundness: never throws
        auto s2 = g.ApplyEdge(state, ledger, e);
        ASSERT_EQ(s1.state, s2.state);
        const auto& f = s1.state.as_vector();
        ASSERT_EQ(f.size(), 4u);
        for (char c : f[0].as_text()) ASSERT_NE(std::string("abc").find(c), std::string::npos);
        const auto& label = f[1].as_categorical().label;
        ASSERT_TRUE(label == "x" || label == "y" || label == "z");
        ASSERT_TRUE(g.CheckFinal(s1.state, x, &s1.ledger).empty());
      }
      auto next = g.ApplyEdge(state, ledger, edges[UniformIndex(rng, edges.size())]);
      state = next.state;
      ledger = next.ledger;
    }
    ASSERT_EQ(x, copy);
  }
}

}  // namespace
}  // namespace advgraph
