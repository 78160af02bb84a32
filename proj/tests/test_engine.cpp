#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "run_support.hpp"
#include "test_support.hpp"

using namespace weldmill;
using namespace testing_support;

namespace {

std::string errorCode(const std::string& src, const Inputs& in = {}, const EngineConfig& cfg = {}) {
  try {
    run(src, in, cfg);
  } catch (const EvalError& err) {
    return err.code();
  }
  return "none";
}

Inputs bigVector(std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> xs(static_cast<std::size_t>(n));
  for (auto& x : xs) x = static_cast<std::int64_t>(rng() % 2000001) - 1000000;
  Inputs in;
  in.add("v", "vec[i64]", i64s(xs));
  return in;
}

}  // namespace

TEST(Engine, BuilderBasics) {
  EXPECT_EQ(show(readProgram("merge_twice.weld")), "[5, 6]");
  EXPECT_EQ(show(readProgram("for_increment.weld")), "[2, 3, 4]");
  EXPECT_EQ(show(readProgram("zip_conditional.weld")), "[7, 9]");
}

TEST(Engine, TwoBuildersAndMapReduce) {
  EXPECT_EQ(show(readProgram("two_builders.weld")), "{[2, 3, 4], 6}");
  EXPECT_EQ(show(readProgram("map_and_reduce.weld")), "{[2, 3, 4], 6}");
}

TEST(Engine, FilterSumPrograms) {
  Inputs in;
  in.add("v0", "vec[i64]", i64s({600000, 400000, 700000}));
  EXPECT_EQ(show(readProgram("filter_sum.weld"), in), "1300000");
  EXPECT_EQ(show(readProgram("filter_sum_fused.weld"), in), "1300000");
}

TEST(Engine, Builtins) {
  EXPECT_EQ(show("sort([3, 1, 2], (x) => x)"), "[1, 2, 3]");
  EXPECT_EQ(show("sort([3, 1, 2], (x) => -(x))"), "[3, 2, 1]");
  // Stable: equal keys keep input order.
  EXPECT_EQ(show("sort([{1, 9}, {0, 8}, {1, 7}], (x) => x.0)"), "[{0, 8}, {1, 9}, {1, 7}]");
  EXPECT_EQ(show("tovec(result(merge(merge(dictmerger[i64,i64,+], {2, 20}), {1, 10})))"), "[{1, 10}, {2, 20}]");
  EXPECT_EQ(show("iterate(1, (x) => {x * 2, x * 2 < 100})"), "128");
  EXPECT_EQ(show("lookup([10, 20, 30], 1)"), "20");
  EXPECT_EQ(show("len([10, 20, 30])"), "3");
  EXPECT_EQ(show("d := result(merge(dictmerger[i32,f64,+], {7si32, 1.5})); lookup(d, 7si32)"), "1.5");
  EXPECT_EQ(show("sort([2.0, 0.0 / 0.0, -1.0], (x) => x)"), "[-1, 2, nan]");
  EXPECT_EQ(show("{min(1.0, 0.0 / 0.0), max(1.0, 0.0 / 0.0)}"), "{1, nan}");
}

TEST(Engine, BuilderSemantics) {
  EXPECT_EQ(show("result(merge(merge(merger[i64,+], 5), 6))"), "11");
  EXPECT_EQ(show("result(merge(merge(dictmerger[i32,i64,+], {7si32, 1L}), {7si32, 1L}))"), "{7: 2}");
  EXPECT_EQ(show("result(merge(vecmerger[i64,+]([0, 0, 0]), {1, 10}))"), "[0, 10, 0]");
  EXPECT_EQ(show("result(for([5, 6, 7, 8], groupbuilder[i64,i64], (b, i, x) => merge(b, {x % 2, x})))"),
            "{0: [6, 8], 1: [5, 7]}");
  EXPECT_EQ(show("result(merger[i64,min])"), "9223372036854775807");
  EXPECT_EQ(show("result(for([3, 1, 2], merger[f64,max], (b, i, x) => merge(b, f64(x))))"), "3");
  EXPECT_EQ(show("result(for([{1, 2.0}, {3, 4.0}], merger[{i64, f64},+], (b, i, x) => merge(b, x)))"), "{4, 6}");
}

TEST(Engine, ResultTwiceIsUseAfterResult) {
  auto tracker = std::make_shared<MemoryTracker>(1 << 20);
  BuilderEnv env{tracker, 1, MergeStrategy::Local};
  auto b = newBuilderState(BuilderKind::merger(IrType::i64(), BinOp::Add), env, nullptr);
  WorkerCtx w;
  b->merge(std::int64_t{3}, w);
  EXPECT_EQ(std::get<std::int64_t>(b->result(w)), 3);
  try {
    b->result(w);
    FAIL();
  } catch (const EvalError& err) {
    EXPECT_EQ(err.code(), "UseAfterResult");
  }
  EXPECT_THROW(b->merge(std::int64_t{1}, w), EvalError);
}

TEST(Engine, EmptyInputsLeaveBuildersUnchanged) {
  Inputs in;
  in.add("v", "vec[i64]", i64s({}));
  EXPECT_EQ(show("result(for(v, merger[i64,+], (b, i, x) => merge(b, x)))", in), "0");
  EXPECT_EQ(show("result(for(v, vecbuilder[i64], (b, i, x) => merge(b, x)))", in), "[]");
}

TEST(Engine, RangedIterators) {
  Inputs in;
  in.add("v", "vec[i64]", i64s({0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(show("result(for(iter(v, 1, 6, 2), vecbuilder[i64], (b, i, x) => merge(b, x)))", in), "[1, 3, 5]");
  EXPECT_EQ(show("result(for(iter(v, 0, 7, 3), vecbuilder[i64], (b, i, x) => merge(b, i)))", in), "[0, 1, 2]");
  EXPECT_EQ(errorCode("result(for(iter(v, 0, 9, 1), vecbuilder[i64], (b, i, x) => merge(b, x)))", in),
            "IndexOutOfBounds");
  EXPECT_EQ(errorCode("result(for(iter(v, 0, 7, 0), vecbuilder[i64], (b, i, x) => merge(b, x)))", in),
            "IndexOutOfBounds");
}

TEST(Engine, SimdAndFringeMatchScalar) {
  for (std::int64_t n : {0, 1, 3, 4, 5, 11, 16, 10003}) {
    std::vector<std::int64_t> xs(static_cast<std::size_t>(n));
    std::iota(xs.begin(), xs.end(), -5);
    Inputs in;
    in.add("v", "vec[i64]", i64s(xs));
    std::int64_t sum = 0;
    for (auto x : xs) sum += x > 3 ? x : 0;
    auto vec = show(
        "result(for(fringeiter(v), for(simditer(v), merger[i64,+], (b, i, x) => merge(b, bitselect(x > "
        "broadcast(3), x, broadcast(0)))), (b, i, x) => if(x > 3, merge(b, x), b)))",
        in);
    EXPECT_EQ(vec, std::to_string(sum)) << n;
    auto mapped = show(
        "result(for(fringeiter(v), for(simditer(v), vecbuilder[i64], (b, i, x) => merge(b, x * broadcast(2))), "
        "(b, i, x) => merge(b, x * 2)))",
        in);
    auto scalar = show("result(for(v, vecbuilder[i64], (b, i, x) => merge(b, x * 2)))", in);
    EXPECT_EQ(mapped, scalar) << n;
  }
}

TEST(Engine, ErrorCodes) {
  EXPECT_EQ(errorCode("1 / 0"), "DivideByZero");
  EXPECT_EQ(errorCode("5 % 0"), "DivideByZero");
  EXPECT_EQ(errorCode("lookup([1, 2], 2)"), "IndexOutOfBounds");
  EXPECT_EQ(errorCode("lookup([1, 2], -1)"), "IndexOutOfBounds");
  EXPECT_EQ(errorCode("lookup(result(merge(dictmerger[i64,i64,+], {1, 1})), 2)"), "KeyNotFound");
  EXPECT_EQ(errorCode("result(for({[1, 2], [1]}, vecbuilder[{i64, i64}], (b, i, x) => merge(b, x)))"),
            "ZipLengthMismatch");
  EXPECT_EQ(errorCode("result(merge(vecmerger[i64,+]([0]), {3, 1}))"), "IndexOutOfBounds");
  EngineConfig limited;
  limited.maxIterations = 10;
  EXPECT_EQ(errorCode("iterate(1, (x) => {x + 1, true})", {}, limited), "IterationLimit");
  Inputs in;
  in.types.externs["twice"] = parseType("(i64) => i64");
  EXPECT_EQ(errorCode("call(twice, 4)", in), "ExternCallUnknown");
}

TEST(Engine, WrappingAndFloatSemantics) {
  EXPECT_EQ(show("9223372036854775807 + 1"), "-9223372036854775808");
  EXPECT_EQ(show("-9223372036854775808 / -1"), "-9223372036854775808");
  EXPECT_EQ(show("-7 / 2"), "-3");
  EXPECT_EQ(show("-7 % 2"), "-1");
  EXPECT_EQ(show("1.0 / 0.0"), "inf");
  EXPECT_EQ(show("i64(2.9)"), "2");
  EXPECT_EQ(show("i32(-2.9)"), "-2");
  EXPECT_EQ(show("f32(1) + 0.5f"), "1.5");
}

TEST(Engine, ExternCalls) {
  ExternRegistry reg;
  reg["twice"] = {parseType("(i64) => i64"), [](const std::vector<Value>& a) -> Value { return asI64(a[0]) * 2; }};
  Inputs in;
  in.types.externs["twice"] = reg["twice"].type;
  EngineConfig cfg;
  cfg.externs = &reg;
  EXPECT_EQ(show("call(twice, 21)", in, cfg), "42");
}

TEST(Engine, ClosuresCaptureByValue) {
  EXPECT_EQ(show("k := 10; f := (x) => x + k; k2 := 1; {f(1), f(k2)}"), "{11, 11}");
  EXPECT_EQ(show("a := 1; g := (x) => (y) => x + y + a; h := g(2); h(3)"), "6");
  Inputs in;
  in.add("v", "vec[i64]", i64s({1, 2, 3}));
  EXPECT_EQ(show("s := 100; result(for(v, vecbuilder[i64], (b, i, x) => merge(b, x + s + i)))", in),
            "[101, 103, 105]");
}

TEST(Engine, NestedLoops) {
  Inputs in;
  in.add("v", "vec[i64]", i64s({1, 2, 3}));
  EXPECT_EQ(show("result(for(v, vecbuilder[i64], (b, i, x) => for(v, b, (c, j, y) => merge(c, x * 10 + y))))", in),
            "[11, 12, 13, 21, 22, 23, 31, 32, 33]");
  EXPECT_EQ(show("flatmap(v, (x) => [x, -(x)])", in), "[1, -1, 2, -2, 3, -3]");
  EXPECT_EQ(show("map(v, (x) => result(for(v, merger[i64,+], (b, i, y) => merge(b, x * y))))", in), "[6, 12, 18]");
}

TEST(Engine, SugarPreservesSemantics) {
  Inputs in;
  in.add("v", "vec[i64]", i64s({4, -2, 9, 0, 7}));
  EXPECT_EQ(show("map(v, (x) => x * 3)", in), "[12, -6, 27, 0, 21]");
  EXPECT_EQ(show("filter(v, (x) => x > 0)", in), "[4, 9, 7]");
  EXPECT_EQ(show("reduce(v, 0, (a, b) => a + b)", in), "18");
  EXPECT_EQ(show("reduce(v, 5, (a, b) => a + b)", in), "23");
  EXPECT_EQ(show("reduce(v, 1, (a, b) => a * 2 + b)", in), "123");
  EXPECT_EQ(show("reduce(v, 0, (a, b) => max(a, b))", in), "9");
  EXPECT_EQ(show("zip(v, map(v, (x) => x + 1))", in), "[{4, 5}, {-2, -1}, {9, 10}, {0, 1}, {7, 8}]");
  EXPECT_EQ(show("tovec(groupby(v, (x) => x % 2, (x) => x))", in), "[{0, [4, -2, 0]}, {1, [9, 7]}]");
}

TEST(Engine, GroupByOrderMatchesSequentialOracle) {
  Inputs in = bigVector(50000, 3);
  const auto& xs = asVec(in.values["v"]).elems;
  std::map<std::int64_t, std::vector<std::int64_t>> oracle;
  for (const auto& x : xs) oracle[asI64(x) % 7].push_back(asI64(x));
  std::string want = "{";
  bool first = true;
  for (auto& [k, g] : oracle) {
    want += (first ? "" : ", ") + std::to_string(k) + ": [";
    for (std::size_t i = 0; i < g.size(); ++i) want += (i ? ", " : "") + std::to_string(g[i]);
    want += "]";
    first = false;
  }
  want += "}";
  for (int t : {1, 2, 8}) EXPECT_EQ(show("groupby(v, (x) => x % 7, (x) => x)", in, withThreads(t)), want) << t;
}

TEST(Engine, ParallelDeterminism) {
  Inputs in = bigVector(200000, 11);
  const char* progs[] = {
      "result(for(v, merger[i64,+], (b, i, x) => merge(b, x)))",
      "filter(v, (x) => x % 3 == 0)",
      "map(v, (x) => x * 2 + i64(1))",
      "tovec(result(for(v, dictmerger[i64,i64,+], (b, i, x) => merge(b, {x % 101, 1}))))",
      "result(for(v, vecmerger[i64,+]([0, 0, 0, 0, 0]), (b, i, x) => merge(b, {(x % 5 + 5) % 5, x})))",
      "result(for(v, {vecbuilder[i64], merger[i64,max]}, (bs, i, x) => {if(x > 0, merge(bs.0, x), bs.0), "
      "merge(bs.1, x)}))",
      "result(for(iter(v, 0, len(v), 3), vecbuilder[i64], (b, i, x) => for([x, x + 1], b, (c, j, y) => merge(c, y))))",
  };
  for (const char* p : progs) {
    std::string base = show(p, in);
    for (int t : {1, 2, 4, 8})
      for (auto s : {MergeStrategy::Local, MergeStrategy::Shared, MergeStrategy::Global})
        EXPECT_EQ(show(p, in, withThreads(t, s)), base) << p << " threads=" << t << " " << strategyName(s);
  }
}

TEST(Engine, FloatMergerWithinTolerance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = d(rng);
  Inputs in;
  in.add("v", "vec[f64]", f64s(xs));
  const char* p = "result(for(v, merger[f64,+], (b, i, x) => merge(b, x * x)))";
  Value base = run(p, in).value;
  for (int t : {2, 8})
    for (auto s : {MergeStrategy::Local, MergeStrategy::Shared, MergeStrategy::Global})
      EXPECT_TRUE(valuesClose(run(p, in, withThreads(t, s)).value, base, 1e-5));
}

TEST(Engine, MillionElementSumSplitsIntoTasks) {
  Inputs in = bigVector(1000000, 1);
  const char* p = "result(for(v, merger[i64,+], (b, i, x) => merge(b, x)))";
  auto one = run(p, in, withThreads(1));
  auto eight = run(p, in, withThreads(8));
  EXPECT_EQ(one.stats.tasksCreated, 1u);
  EXPECT_GT(eight.stats.tasksCreated, 1u);
  std::int64_t oracle = 0;
  for (const auto& x : asVec(in.values["v"]).elems) oracle += asI64(x);
  EXPECT_EQ(asI64(one.value), oracle);
  EXPECT_EQ(asI64(eight.value), oracle);
}

TEST(Engine, SplitsEvenWithSmallGrain) {
  Inputs in = bigVector(5000, 2);
  EngineConfig cfg = withThreads(4);
  cfg.grainSize = 1;
  const char* p = "filter(v, (x) => x > 0)";
  EXPECT_EQ(show(p, in, cfg), show(p, in));
}

TEST(Engine, Counters) {
  Inputs in = bigVector(1000, 4);
  auto fused = run("result(for(v, merger[i64,+], (b, i, x) => if(x > 0, merge(b, x), b)))", in);
  EXPECT_EQ(fused.stats.traversals, 1u);
  EXPECT_EQ(fused.stats.intermediateAllocations, 0u);
  auto chained = run("reduce(filter(v, (x) => x > 0), 0, (x, y) => x + y)", in);
  EXPECT_EQ(chained.stats.traversals, 2u);
  EXPECT_EQ(chained.stats.intermediateAllocations, 1u);
  EXPECT_EQ(asI64(fused.value), asI64(chained.value));
  auto mapped = run("map(v, (x) => x + 1)", in);
  EXPECT_EQ(mapped.stats.vectorAllocations, 1u);
  EXPECT_EQ(mapped.stats.intermediateAllocations, 0u);
}

TEST(Engine, SizeHintAvoidsReallocation) {
  Inputs in = bigVector(100000, 6);
  auto hinted = run("result(for(v, vecbuilder[i64](len(v)), (b, i, x) => merge(b, x)))", in);
  EXPECT_EQ(hinted.stats.reallocations, 0u);
  auto plain = run("result(for(v, vecbuilder[i64], (b, i, x) => merge(b, x)))", in);
  EXPECT_GT(plain.stats.reallocations, 0u);
  auto hintedParallel = run("result(for(v, vecbuilder[i64](len(v)), (b, i, x) => merge(b, x)))", in, withThreads(4));
  EXPECT_EQ(hintedParallel.stats.reallocations, 0u);
  EXPECT_TRUE(valuesIdentical(hinted.value, plain.value));
}

TEST(Engine, NodeEvaluationCounts) {
  EngineConfig cfg;
  cfg.countNodes = true;
  Inputs in;
  in.add("v", "vec[f64]", f64s({1, 4, 9}));
  auto out = run("map(v, (x) => sqrt(x) + sqrt(x))", in, cfg);
  EXPECT_EQ(out.stats.evaluationsOf("sqrt"), 6u);
  EXPECT_EQ(out.stats.evaluationsOf("for"), 1u);
}

TEST(Engine, MemoryLimitAndRelease) {
  Inputs in = bigVector(10000, 8);
  EngineConfig cfg;
  cfg.memoryLimit = 50000;
  EXPECT_EQ(errorCode("map(v, (x) => x + 1)", in, cfg), "MemoryLimitExceeded");
  EXPECT_EQ(errorCode("map(v, (x) => x + 1)", in, [] {
              EngineConfig c = withThreads(4);
              c.memoryLimit = 50000;
              return c;
            }()),
            "MemoryLimitExceeded");
  cfg.memoryLimit = 1 << 20;
  auto sum = run("reduce(map(v, (x) => x + 1), 0, (a, b) => a + b)", in, cfg);
  EXPECT_LE(sum.stats.peakBytes, cfg.memoryLimit);
  EXPECT_GT(sum.stats.peakBytes, 10000 * 8);
  EXPECT_EQ(sum.memory->live(), 0);
  auto mapped = run("map(filter(v, (x) => x > 0), (x) => {x, 1.5})", in, cfg);
  EXPECT_EQ(mapped.memory->live(), 8 + static_cast<std::int64_t>(asVec(mapped.value).elems.size()) * 16);
  mapped.value = Value{};
  EXPECT_EQ(mapped.memory->live(), 0);
}

TEST(Engine, EvaluationCounterCountsCalls) {
  auto before = evaluationCount();
  run("1 + 1");
  run("2 + 2");
  EXPECT_EQ(evaluationCount() - before, 2u);
}
