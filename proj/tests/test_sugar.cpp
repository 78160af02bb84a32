#include <gtest/gtest.h>

#include "test_support.hpp"
#include "weldmill/expr_utils.hpp"
#include "weldmill/linearity.hpp"
#include "weldmill/parser.hpp"
#include "weldmill/printer.hpp"
#include "weldmill/sugar.hpp"
#include "weldmill/typecheck.hpp"

using namespace weldmill;

namespace {

ExprPtr expandTyped(const std::string& src, TypeEnv env = {}) {
  ExprPtr e = parse(src);
  if (e->kind == ExprKind::Lambda) {
    for (const auto& p : e->params) env.vars[p.name] = p.type;
    e = e->kids[0];
  }
  ExprPtr typed = inferTypes(expandSugar(e), env);
  checkLinearity(typed);
  return typed;
}

TypeEnv vecEnv() {
  TypeEnv env;
  env.vars["v"] = parseType("vec[i64]");
  return env;
}

}  // namespace

TEST(Sugar, MapBecomesVecBuilderLoop) {
  auto e = expandSugar(parse("map(v, x => x + 1)"));
  EXPECT_EQ(countNodes(e, ExprKind::Sugar), 0);
  EXPECT_EQ(print(canonicalizeNames(e)),
            print(canonicalizeNames(parse("result(for(v, vecbuilder[?], (b, i, x) => merge(b, (x + 1))))"))));
}

TEST(Sugar, FilterKeepsMatchingElements) {
  auto e = expandSugar(parse("filter(v, x => x > 2)"));
  EXPECT_TRUE(alphaEquivalent(e, parse("result(for(v, vecbuilder[?], (b, i, x) => if(x > 2, merge(b, x), b)))")));
}

TEST(Sugar, ReduceWithMergeOperatorUsesMerger) {
  auto e = expandSugar(parse("reduce(v, 0, (a, b) => a + b)"));
  EXPECT_TRUE(alphaEquivalent(e, parse("result(for(v, merger[?,+], (b, i, x) => merge(b, x)))")));
  auto swapped = expandSugar(parse("reduce(v, 0, (a, b) => b * a)"));
  EXPECT_EQ(countNodes(swapped, ExprKind::Merge), 2);  // the initial 0 is not the * identity
}

TEST(Sugar, ReduceWithArbitraryFunctionIterates) {
  auto e = expandSugar(parse("reduce(v, 0, (a, b) => a * 2 + b)"));
  EXPECT_EQ(countNodes(e, ExprKind::Iterate), 1);
  EXPECT_EQ(countNodes(e, ExprKind::For), 0);
  EXPECT_EQ(expandTyped("reduce(v, 0, (a, b) => a * 2 + b)", vecEnv())->type, IrType::i64());
}

TEST(Sugar, MapAndReduceTypes) {
  auto t = expandTyped(readProgram("map_and_reduce.weld"));
  EXPECT_EQ(t->type.str(), "{vec[i64], i64}");
}

TEST(Sugar, FilterSumTypes) {
  auto t = expandTyped(readProgram("filter_sum.weld"));
  EXPECT_EQ(t->type, IrType::i64());
  EXPECT_EQ(countNodes(t, ExprKind::For), 2);
}

TEST(Sugar, ZipBuildsMultiIterLoop) {
  TypeEnv env = vecEnv();
  env.vars["w"] = parseType("vec[f64]");
  auto t = expandTyped("zip(v, w)", env);
  EXPECT_EQ(t->type.str(), "vec[{i64, f64}]");
  EXPECT_THROW(expandSugar(parse("zip(v)")), ExpandError);
}

TEST(Sugar, GroupByAndFlatMap) {
  EXPECT_EQ(expandTyped("groupby(v, x => x % 3, x => x * 10)", vecEnv())->type.str(), "dict[i64,vec[i64]]");
  EXPECT_EQ(expandTyped("flatmap(v, x => [x, x])", vecEnv())->type.str(), "vec[i64]");
}

TEST(Sugar, NestedSugarExpandsInsideOut) {
  auto t = expandTyped("reduce(map(filter(v, x => x > 0), x => x * x), 0, (a, b) => a + b)", vecEnv());
  EXPECT_EQ(t->type, IrType::i64());
  EXPECT_EQ(countNodes(t, ExprKind::Sugar), 0);
}

TEST(Sugar, ArityErrors) {
  try {
    expandSugar(parse("map(v)"));
    FAIL();
  } catch (const ExpandError& err) {
    EXPECT_EQ(err.code(), "ArityError");
  }
  EXPECT_THROW(expandSugar(parse("reduce(v, 0)")), ExpandError);
  EXPECT_THROW(expandSugar(parse("groupby(v, x => x)")), ExpandError);
}

TEST(Sugar, ExpansionIsIdempotent) {
  auto once = expandSugar(parse(readProgram("map_and_reduce.weld")));
  auto twice = expandSugar(once);
  EXPECT_TRUE(structurallyEqual(once, twice));
}

TEST(Sugar, FreshNamesAvoidCapture) {
  // The user's function mentions names the expansion would like to use.
  auto t = expandTyped("b := 10; i := 20; map(v, x => x + b + i)", vecEnv());
  EXPECT_EQ(t->type.str(), "vec[i64]");
  EXPECT_TRUE(freeVariables(t).count("v"));
  EXPECT_EQ(freeVariables(t).size(), 1u);
}

TEST(Sugar, UnexpandedSugarIsATypeError) { EXPECT_THROW(inferTypes(parse("map(v, x => x)"), vecEnv()), TypeError); }

TEST(Sugar, RecognizesMergeLambdas) {
  EXPECT_EQ(recognizeMergeLambda(parse("(a, b) => a + b")), BinOp::Add);
  EXPECT_EQ(recognizeMergeLambda(parse("(a, b) => max(b, a)")), BinOp::Max);
  EXPECT_FALSE(recognizeMergeLambda(parse("(a, b) => a - b")));
  EXPECT_FALSE(recognizeMergeLambda(parse("(a, b) => a + a")));
}
