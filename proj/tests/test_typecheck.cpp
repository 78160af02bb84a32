#include <gtest/gtest.h>

#include "test_support.hpp"
#include "weldmill/expr_utils.hpp"
#include "weldmill/linearity.hpp"
#include "weldmill/parser.hpp"
#include "weldmill/printer.hpp"
#include "weldmill/typecheck.hpp"

using namespace weldmill;

namespace {

IrType typeOf(const std::string& src, TypeEnv env = {}) { return inferTypes(parse(src), env)->type; }

TypeEnv envOf(std::initializer_list<std::pair<const char*, const char*>> vars) {
  TypeEnv env;
  for (auto& [n, t] : vars) env.vars[n] = parseType(t);
  return env;
}

LinearityKind linearityKindOf(const std::string& src, TypeEnv env = {}) {
  auto typed = inferTypes(parse(src), env);
  try {
    checkLinearity(typed);
  } catch (const LinearityError& err) {
    return err.kind();
  }
  ADD_FAILURE() << "no linearity error for " << src;
  return LinearityKind::ConsumedTwice;
}

// Programs written as a top-level lambda: the parameters become the environment.
ExprPtr typedProgram(const std::string& src) {
  ExprPtr e = parse(src);
  TypeEnv env;
  if (e->kind == ExprKind::Lambda) {
    for (const auto& p : e->params) env.vars[p.name] = p.type;
    e = e->kids[0];
  }
  return inferTypes(e, env);
}

}  // namespace

TEST(Infer, TwoBuildersType) {
  auto t = typeOf(readProgram("two_builders.weld"));
  EXPECT_EQ(t.str(), "{vec[i64], i64}");
}

TEST(Infer, BuilderBasicsTypes) {
  EXPECT_EQ(typeOf(readProgram("merge_twice.weld")).str(), "vec[i64]");
  EXPECT_EQ(typeOf(readProgram("for_increment.weld")).str(), "vec[i64]");
  EXPECT_EQ(typeOf(readProgram("zip_conditional.weld")).str(), "vec[i64]");
}

TEST(Infer, MergeValueMismatch) {
  try {
    typeOf("merge(vecbuilder[i32], 1.0)");
    FAIL() << "expected TypeError";
  } catch (const TypeError& err) {
    EXPECT_EQ(err.left(), "f64");
    EXPECT_EQ(err.right(), "i32");
  }
}

TEST(Infer, MergerLoop) {
  auto env = envOf({{"v0", "vec[i64]"}});
  auto loop = inferTypes(parse("for(v0, merger[i64,+], (b,i,x) => merge(b,x))"), env);
  EXPECT_EQ(loop->type.str(), "merger[i64,+]");
  EXPECT_EQ(typeOf("result(for(v0, merger[i64,+], (b,i,x) => merge(b,x)))", env), IrType::i64());
}

TEST(Infer, LambdaParametersAreFilled) {
  auto env = envOf({{"v", "vec[f64]"}});
  auto e = inferTypes(parse("result(for(v, vecbuilder[?], (b, i, x) => merge(b, x * 2.0)))"), env);
  EXPECT_EQ(print(e), "result(for(v, vecbuilder[f64], (b: vecbuilder[f64], i: i64, x: f64) => merge(b, (x * 2.0))))");
}

TEST(Infer, BuilderResultTable) {
  auto env = envOf({{"v", "vec[{i32, i64}]"}});
  EXPECT_EQ(typeOf("result(for(v, dictmerger[i32,i64,+], (b,i,x) => merge(b, x)))", env).str(), "dict[i32,i64]");
  EXPECT_EQ(typeOf("result(for(v, groupbuilder[i32,i64], (b,i,x) => merge(b, x)))", env).str(),
            "dict[i32,vec[i64]]");
  EXPECT_EQ(typeOf("result(for(v, vecmerger[i64,+]([0, 0]), (b,i,x) => merge(b, {i64(x.0), x.1})))", env).str(),
            "vec[i64]");
}

TEST(Infer, StructMergerFoldsComponentwise) {
  auto env = envOf({{"v", "vec[{i64, f64}]"}});
  EXPECT_EQ(typeOf("result(for(v, merger[{i64, f64},+], (b,i,x) => merge(b, x)))", env).str(), "{i64, f64}");
}

TEST(Infer, Errors) {
  EXPECT_THROW(typeOf("y + 1"), TypeError);
  EXPECT_THROW(typeOf("1 + 1.0"), TypeError);
  EXPECT_THROW(typeOf("{1, 2}.2"), TypeError);
  EXPECT_THROW(typeOf("if(1, 2, 3)"), TypeError);
  EXPECT_THROW(typeOf("merger[bool,+]"), TypeError);
  EXPECT_THROW(typeOf("bitselect(true, vecbuilder[i64], vecbuilder[i64])"), TypeError);
  EXPECT_THROW(typeOf("map([1], (x) => x)"), TypeError);
  EXPECT_THROW(typeOf("result(vecbuilder[?])"), TypeError);
  EXPECT_THROW(typeOf("for([1], 5, (b, i, x) => b)"), TypeError);
  EXPECT_THROW(typeOf("sqrt(4)"), TypeError);
}

TEST(Infer, IterateAndSort) {
  EXPECT_EQ(typeOf("iterate(1, (x) => {x * 2, x * 2 < 100})"), IrType::i64());
  EXPECT_EQ(typeOf("sort([3, 1, 2], (x) => x)").str(), "vec[i64]");
  EXPECT_THROW(typeOf("sort([[1]], (x) => x)"), TypeError);
}

TEST(Infer, SimdForms) {
  auto env = envOf({{"v", "vec[i64]"}});
  auto t = typeOf("result(for(simditer(v), merger[i64,+], (b, i, x) => merge(b, bitselect(x > broadcast(5), x, broadcast(0)))))",
                  env);
  EXPECT_EQ(t, IrType::i64());
}

TEST(Infer, Deterministic) {
  auto src = readProgram("two_builders.weld");
  EXPECT_EQ(print(inferTypes(parse(src), {})), print(inferTypes(parse(src), {})));
}

TEST(Infer, Externs) {
  TypeEnv env;
  env.externs["twice"] = parseType("(i64) => i64");
  EXPECT_EQ(typeOf("call(twice, 4)", env), IrType::i64());
  EXPECT_THROW(typeOf("call(nope, 4)", env), TypeError);
}

TEST(Linearity, ConsumedTwiceFixture) {
  EXPECT_EQ(linearityKindOf(readProgram("linearity/consumed_twice.weld")), LinearityKind::ConsumedTwice);
}

TEST(Linearity, UnconsumedPathFixture) {
  auto typed = typedProgram(readProgram("linearity/unconsumed_path.weld"));
  try {
    checkLinearity(typed);
    FAIL();
  } catch (const LinearityError& err) {
    EXPECT_EQ(err.kind(), LinearityKind::UnconsumedOnPath);
    EXPECT_EQ(err.variable(), "b");
  }
}

TEST(Linearity, LoopBodyEscapeFixture) {
  auto typed = typedProgram(readProgram("linearity/loop_body_escape.weld"));
  try {
    checkLinearity(typed);
    FAIL();
  } catch (const LinearityError& err) {
    EXPECT_EQ(err.kind(), LinearityKind::LoopBodyEscape);
    EXPECT_STREQ(linearityKindName(err.kind()), "loop-body-escape");
  }
}

TEST(Linearity, CorpusPasses) {
  for (const char* f : {"merge_twice.weld", "for_increment.weld", "zip_conditional.weld", "two_builders.weld",
                        "filter_sum_fused.weld"})
    EXPECT_NO_THROW(checkLinearity(typedProgram(readProgram(f)))) << f;
}

TEST(Linearity, MoreCases) {
  auto env = envOf({{"v", "vec[i64]"}});
  EXPECT_EQ(linearityKindOf("b := merger[i64,+]; 5", env), LinearityKind::UnconsumedOnPath);
  EXPECT_EQ(linearityKindOf("b := vecbuilder[i64]; result(for(v, b, (c, i, x) => merge(b, x)))", env),
            LinearityKind::LoopBodyEscape);
  EXPECT_EQ(linearityKindOf("b := vecbuilder[i64]; f := (x) => merge(b, x); result(f(1))", env),
            LinearityKind::ConsumedTwice);
  EXPECT_EQ(linearityKindOf("b := vecbuilder[i64]; c := merge(b, 1); result(merge(b, 2))", env),
            LinearityKind::ConsumedTwice);
  EXPECT_EQ(linearityKindOf("bs := {vecbuilder[i64], merger[i64,+]}; result({merge(bs.0, 1), merge(bs.0, 2)})", env),
            LinearityKind::ConsumedTwice);
  // Re-packing distinct components of a structure is fine.
  EXPECT_NO_THROW(checkLinearity(inferTypes(
      parse("bs := {vecbuilder[i64], merger[i64,+]}; result({merge(bs.0, 1), merge(bs.1, 2)})"), env)));
  // Directly applied lambdas may consume outer builders.
  EXPECT_NO_THROW(checkLinearity(inferTypes(parse("b := vecbuilder[i64]; result(((x) => merge(b, x))(3))"), env)));
  // Nested loops pass the outer builder through the inner loop.
  EXPECT_NO_THROW(checkLinearity(inferTypes(
      parse("result(for(v, vecbuilder[i64], (b, i, x) => for(v, b, (c, j, y) => merge(c, x * y))))"), env)));
}
