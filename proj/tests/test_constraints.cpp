#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>

#include "advgraph/constraints.hpp"
#include "advgraph/error.hpp"
#include "advgraph/random.hpp"
#include "advgraph/transformer.hpp"
#include "test_util.hpp"

namespace advgraph {
namespace {

bool AdmitsOne(const InputState& current, const InputState& proposed, const TransformerUsage& u,
               std::vector<ConstraintSpec> cs, bool deletion = false,
               std::optional<InputState> original = std::nullopt) {
  TransformationEdge e{"t", deletion ? "delete" : "insert", NoParam{}};
  const InputState& orig = original ? *original : current;
  return Admits(EdgeProposal{e, current, proposed, orig, deletion}, u, cs);
}

TEST(Admits, BudgetOfThreeIsExhausted) {
  TransformerUsage u;
  u.total = 3;
  EXPECT_FALSE(AdmitsOne(InputState::TextOf("ab"), InputState::TextOf("abc"), u, {MaxTotalActions{3}}));
  u.total = 2;
  EXPECT_TRUE(AdmitsOne(InputState::TextOf("ab"), InputState::TextOf("abc"), u, {MaxTotalActions{3}}));
}

TEST(Admits, RelativeValueBoundIsAgainstCurrent) {
  const std::vector<ConstraintSpec> c{RelativeValueBound{0.3}};
  EXPECT_FALSE(AdmitsOne(InputState::Float(10.0), InputState::Float(14.0), {}, c));
  EXPECT_TRUE(AdmitsOne(InputState::Float(10.0), InputState::Float(13.0), {}, c));
  EXPECT_TRUE(AdmitsOne(InputState::Float(10.0), InputState::Float(7.0), {}, c));
  EXPECT_FALSE(AdmitsOne(InputState::Float(10.0), InputState::Float(6.9), {}, c));
}

TEST(Admits, MonotonicLengthRejectsDelete) {
  const std::vector<ConstraintSpec> c{Monotonic{Direction::kIncrease}};
  EXPECT_FALSE(AdmitsOne(InputState::TextOf("abc"), InputState::TextOf("ab"), {}, c, true));
  EXPECT_TRUE(AdmitsOne(InputState::TextOf("abc"), InputState::TextOf("abcd"), {}, c));
}

TEST(Admits, PerActionCapsAndDeleteFraction) {
  TransformerUsage u;
  u.per_action["insert"] = 2;
  EXPECT_FALSE(AdmitsOne(InputState::TextOf("a"), InputState::TextOf("ab"), u,
                         {MaxActionsPerType{{{"insert", 2}}}}));
  EXPECT_TRUE(AdmitsOne(InputState::TextOf("a"), InputState::TextOf("ab"), u,
                        {MaxActionsPerType{{{"delete", 2}}}}));
  // Half of the original four characters may go.
  TransformerUsage d;
  d.deletions = 2;
  EXPECT_FALSE(AdmitsOne(InputState::TextOf("ab"), InputState::TextOf("a"), d, {MaxDeleteFraction{0.5}},
                         true, InputState::TextOf("abcd")));
  d.deletions = 1;
  EXPECT_TRUE(AdmitsOne(InputState::TextOf("abc"), InputState::TextOf("ab"), d, {MaxDeleteFraction{0.5}},
                        true, InputState::TextOf("abcd")));
}

TEST(Admits, MonotoneInBudgets) {
  Rng rng(5);
  const std::vector<ConstraintSpec> c{MaxTotalActions{4}, MaxActionsPerType{{{"insert", 2}}},
                                      MaxDeleteFraction{0.5}};
  for (int i = 0; i < 500; ++i) {
    TransformerUsage u;
    u.total = UniformIndex(rng, 6);
    u.per_action["insert"] = UniformIndex(rng, 4);
    u.deletions = UniformIndex(rng, 4);
    const bool del = UniformIndex(rng, 2) == 1;
    const auto orig = InputState::TextOf("abcdef");
    if (AdmitsOne(InputState::TextOf("abc"), InputState::TextOf("ab"), u, c, del, orig)) continue;
    TransformerUsage more = u;
    switch (UniformIndex(rng, 3)) {
      case 0: ++more.total; break;
      case 1: ++more.per_action["insert"]; break;
      default: ++more.deletions;
    }
    EXPECT_FALSE(AdmitsOne(InputState::TextOf("abc"), InputState::TextOf("ab"), more, c, del, orig));
  }
}

TEST(Dependencies, SumIdentityAndFixedPoint) {
  std::vector<DependencyFunction> deps{SumDependency("sum", {0, 1}, 2)};
  auto v = [](double a, double b, double c) {
    return InputState::VectorOf({InputState::Float(a), InputState::Float(b), InputState::Float(c)});
  };
  EXPECT_EQ(ApplyDependencies(v(1, 2, 0), deps), v(1, 2, 3));
  EXPECT_EQ(ApplyDependencies(v(5, 5, 10), deps), v(5, 5, 10));
  EXPECT_EQ(ApplyDependencies(v(1, 2, 0), {}), v(1, 2, 0));
  const auto once = ApplyDependencies(v(4, -1, 7), deps);
  EXPECT_EQ(ApplyDependencies(once, deps), once);
}

TEST(Dependencies, DeclaredOrderIsExecutionOrder) {
  auto v = [](double a, double b, double c) {
    return InputState::VectorOf({InputState::Float(a), InputState::Float(b), InputState::Float(c)});
  };
  auto sum = SumDependency("sum", {0, 1}, 2);
  auto copy = CopyDependency("copy", 2, 0);
  std::vector<DependencyFunction> ab{sum, copy};
  std::vector<DependencyFunction> ba{copy, sum};
  EXPECT_EQ(ApplyDependencies(v(1, 2, 0), ab), v(3, 2, 3));
  EXPECT_EQ(ApplyDependencies(v(1, 2, 0), ba), v(0, 2, 2));
}

TEST(Dependencies, IndexOutOfRangeAndUndeclaredWrites) {
  auto two = InputState::VectorOf({InputState::Float(1), InputState::Float(2)});
  std::vector<DependencyFunction> bad{SumDependency("sum", {0, 1}, 2)};
  try {
    ApplyDependencies(two, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
  }
  DependencyFunction sneaky{"sneaky", {0}, {1}, [](const InputState& s) {
                              return s.WithField(0, InputState::Float(9));
                            }};
  try {
    ApplyDependencies(two, std::vector<DependencyFunction>{sneaky});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstraintViolation);
  }
}

TEST(Dependencies, RunAfterEveryEdge) {
  TransformerSpec a;
  a.name = "a";
  a.type = TransformerType::kNumeric;
  a.field = 0;
  a.subtransformer_args = {SubtransformerArgs{"step", {}, {}, {1.0}, {}}};
  InputGraph g({a}, {SumDependency("sum", {0, 1}, 2)});
  const auto x = InputState::VectorOf({InputState::Float(1), InputState::Float(2), InputState::Float(3)});
  auto s = g.ApplyEdge(x, BudgetLedger(x), g.EnumerateEdges(x, BudgetLedger(x)).front());
  EXPECT_EQ(s.state, InputState::VectorOf({InputState::Float(2), InputState::Float(2), InputState::Float(4)}));
}

std::size_t RecursiveLevenshtein(const std::string& a, const std::string& b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::string ta = a.substr(1), tb = b.substr(1);
  if (a[0] == b[0]) return RecursiveLevenshtein(ta, tb);
  return 1 + std::min({RecursiveLevenshtein(ta, b), RecursiveLevenshtein(a, tb),
                       RecursiveLevenshtein(ta, tb)});
}

TEST(CheckFinal, Examples) {
  const auto x = InputState::TextOf("abcde");
  EXPECT_TRUE(CheckFinal(x, x, std::vector<ConstraintSpec>{EditDistanceCap{3}, MaxDeleteFraction{0.5}}).empty());
  const auto far = InputState::TextOf("vwxyz");
  ASSERT_EQ(RecursiveLevenshtein("abcde", "vwxyz"), 5u);
  auto v = CheckFinal(far, x, std::vector<ConstraintSpec>{EditDistanceCap{3}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].constraint, "edit_distance_cap(3)");

  const auto base = InputState::VectorOf({InputState::Float(1.0), InputState::Float(2.0)});
  const auto moved = InputState::VectorOf({InputState::Float(1.05), InputState::Float(1.96)});
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(CheckFinal(moved, base, std::vector<ConstraintSpec>{LpNormBound{inf, 0.1}}).empty());
  EXPECT_EQ(CheckFinal(moved, base, std::vector<ConstraintSpec>{LpNormBound{inf, 0.04}}).size(), 1u);
}

TEST(Levenshtein, MatchesRecursiveOracle) {
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    std::string a, b;
    for (std::size_t k = 0, n = UniformIndex(rng, 7); k < n; ++k) a += "abc"[UniformIndex(rng, 3)];
    for (std::size_t k = 0, n = UniformIndex(rng, 7); k < n; ++k) b += "abc"[UniformIndex(rng, 3)];
    ASSERT_EQ(Levenshtein(a, b), RecursiveLevenshtein(a, b)) << a << " / " << b;
  }
}

TEST(LpDistance, KnownValues) {
  std::vector<double> a{0, 0}, b{3, 4};
  EXPECT_DOUBLE_EQ(LpDistance(a, b, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(LpDistance(a, b, 1.0), 7.0);
  EXPECT_DOUBLE_EQ(LpDistance(a, b, std::numeric_limits<double>::infinity()), 4.0);
}

TEST(Validate, RejectsMalformedConstraints) {
  for (ConstraintSpec c : std::vector<ConstraintSpec>{
           RelativeValueBound{0.0}, RelativeValueBound{1.5}, MaxDeleteFraction{std::nan("")},
           LpNormBound{2.0, 0.0}, AbsoluteRange{3.0, 1.0}, RelativeMaxBound{0.3, -1.0}}) {
    try {
      Validate(c);
      ADD_FAILURE() << Describe(c);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    }
  }
  Validate(MaxTotalActions{0});
}

}  // namespace
}  // namespace advgraph
