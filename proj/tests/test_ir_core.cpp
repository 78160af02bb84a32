#include <gtest/gtest.h>

#include "weldmill/expr_utils.hpp"
#include "weldmill/parser.hpp"
#include "weldmill/printer.hpp"

using namespace weldmill;

namespace {

std::set<std::string> fv(const char* src) { return freeVariables(parse(src)); }

}  // namespace

TEST(TypeEquals, IdenticalVectors) {
  EXPECT_TRUE(typeEquals(IrType::vec(IrType::i32()), IrType::vec(IrType::i32())));
}

TEST(TypeEquals, MergerOpDistinguishes) {
  auto a = IrType::builder(BuilderKind::merger(IrType::i64(), BinOp::Add));
  auto b = IrType::builder(BuilderKind::merger(IrType::i64(), BinOp::Mul));
  EXPECT_FALSE(typeEquals(a, b));
  EXPECT_EQ(a.str(), "merger[i64,+]");
}

TEST(TypeEquals, Structures) {
  auto a = IrType::structure({IrType::i32(), IrType::vec(IrType::f64())});
  auto b = IrType::structure({IrType::i32(), IrType::vec(IrType::f64())});
  EXPECT_TRUE(typeEquals(a, b));
  EXPECT_TRUE(typeEquals(b, a));
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_FALSE(typeEquals(a, IrType::structure({IrType::i32()})));
}

TEST(TypeEquals, FunctionReturnMatters) {
  auto f = IrType::function({IrType::i64()}, IrType::i64());
  auto g = IrType::function({IrType::i64()}, IrType::f64());
  EXPECT_FALSE(typeEquals(f, g));
  EXPECT_EQ(f.str(), "(i64) => i64");
}

TEST(TypeEquals, ResultTypesFollowBuilderTable) {
  auto i = IrType::i64();
  EXPECT_EQ(BuilderKind::vecBuilder(i).resultType(), IrType::vec(i));
  EXPECT_EQ(BuilderKind::merger(i, BinOp::Add).resultType(), i);
  EXPECT_EQ(BuilderKind::dictMerger(i, i, BinOp::Add).resultType(), IrType::dict(i, i));
  EXPECT_EQ(BuilderKind::vecMerger(i, BinOp::Add).resultType(), IrType::vec(i));
  EXPECT_EQ(BuilderKind::groupBuilder(i, i).resultType(), IrType::dict(i, IrType::vec(i)));
  EXPECT_EQ(BuilderKind::vecMerger(i, BinOp::Add).mergeInput(), IrType::structure({i, i}));
}

TEST(FreeVariables, Binary) { EXPECT_EQ(fv("x + 1"), (std::set<std::string>{"x"})); }

TEST(FreeVariables, LetBinds) { EXPECT_EQ(fv("x := 2; x + y"), (std::set<std::string>{"y"})); }

TEST(FreeVariables, LambdaBinds) { EXPECT_EQ(fv("(b, i, x) => merge(b, x + c)"), (std::set<std::string>{"c"})); }

TEST(FreeVariables, LetValueSeesOuterName) {
  EXPECT_EQ(fv("x := x + 1; x"), (std::set<std::string>{"x"}));
}

TEST(Substitute, Simple) {
  auto r = substitute(parse("x + 1"), {{"x", parse("2")}});
  EXPECT_EQ(print(r), "(2 + 1)");
}

TEST(Substitute, RenamesCapturingBinder) {
  auto r = substitute(parse("x := 5; x + y"), {{"y", parse("x")}});
  EXPECT_EQ(print(r), "x0 := 5; (x0 + x)");
  EXPECT_EQ(freeVariables(r), (std::set<std::string>{"x"}));
}

TEST(Substitute, IntoLen) {
  auto r = substitute(parse("len(v)"), {{"v", parse("[1, 2]")}});
  EXPECT_EQ(print(r), "len([1, 2])");
}

TEST(Substitute, ShadowedNameUntouched) {
  auto r = substitute(parse("(x) => x + y"), {{"x", parse("7")}});
  EXPECT_EQ(print(r), "(x) => (x + y)");
}

TEST(Substitute, FreeVariableLaw) {
  // fv(e[x := c]) = (fv(e) \ {x}) U fv(c) when x occurs free in e.
  const char* bodies[] = {"x + y", "z := x; z * w", "(a) => a + x", "if(x > q, x, r)"};
  const char* repls[] = {"u + 1", "y", "a * b"};
  for (const char* b : bodies) {
    for (const char* c : repls) {
      auto e = parse(b);
      auto rep = parse(c);
      auto lhs = freeVariables(substitute(e, {{"x", rep}}));
      auto rhs = freeVariables(e);
      rhs.erase("x");
      auto fc = freeVariables(rep);
      rhs.insert(fc.begin(), fc.end());
      EXPECT_EQ(lhs, rhs) << b << " with x := " << c;
    }
  }
}

TEST(WellFormed, ForArity) {
  auto v = ir::ident("v");
  auto bad = ir::lambda({{"b", {}}, {"x", {}}}, ir::ident("b"));
  EXPECT_THROW(ir::forLoop({{v, nullptr, nullptr, nullptr}}, ir::newBuilder(BuilderKind::vecBuilder(IrType::i64())), bad),
               std::logic_error);
}

TEST(WellFormed, RangedIterNeedsAllBounds) {
  Expr e;
  e.kind = ExprKind::For;
  e.iters = {{IterKind::Scalar, true}};
  e.kids = {ir::ident("b"), ir::ident("f"), ir::ident("v")};
  EXPECT_THROW(ir::make(e), std::logic_error);
}

TEST(Alpha, EquivalentModuloNames) {
  EXPECT_TRUE(alphaEquivalent(parse("(a, b) => a + b"), parse("(x, y) => x + y")));
  EXPECT_FALSE(alphaEquivalent(parse("(a, b) => a + b"), parse("(x, y) => y + x")));
  EXPECT_TRUE(alphaEquivalent(parse("t := 1; t"), parse("s := 1; s")));
}

TEST(NameGen, Deterministic) {
  NameGen g({"x0", "x"});
  EXPECT_EQ(g.fresh("x"), "x1");
  EXPECT_EQ(g.fresh("x7"), "x2");
  EXPECT_EQ(g.fresh("y"), "y0");
}
