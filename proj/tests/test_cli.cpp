#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"
#include "weldmill/expr_utils.hpp"
#include "weldmill/parser.hpp"
#include "weldmill/printer.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("weldmill_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) {
    fs::path p = dir / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

  Outcome cli(const std::string& args) {
    std::string cmd = std::string("'") + WELDMILL_CLI + "' " + args + " >'" + (dir / "out").string() + "' 2>'" +
                      (dir / "err").string() + "'";
    int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(dir / "out"), slurp(dir / "err")};
  }

  static std::string program(const std::string& name) {
    return std::string("'") + WELDMILL_PROGRAMS_DIR + "/" + name + "'";
  }
};

std::string canonical(const std::string& text) {
  using namespace weldmill;
  return print(canonicalizeNames(eraseAnnotations(parse(text))));
}

const char* kFilterSum = "(v0: vec[i64]) => reduce(filter(v0, (x) => x > 500000), 0, (x, y) => x + y)";

}  // namespace

TEST_F(Cli, RunPrintsTheResultAsJson) {
  auto r = cli("run " + program("filter_sum_fused.weld") + " --inputs " + program("filter_sum_inputs.json"));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "1300000\n");
  auto l4 = cli("run " + program("two_builders.weld"));
  EXPECT_EQ(l4.out, "[[2,3,4],6]\n");
}

TEST_F(Cli, OutputIsIdenticalAcrossThreadsStrategiesAndLevels) {
  std::string inputs = "[{\"name\": \"v\", \"type\": \"vec[i64]\", \"value\": [";
  for (int i = 0; i < 5000; ++i) inputs += (i ? "," : "") + std::to_string((i * 7919) % 10007 - 5000);
  inputs += "]}]";
  auto m = write("m.json", inputs);
  auto p = write("p.weld",
                 "(v: vec[i64]) => {reduce(filter(v, (x) => x > 0), 0, (a, b) => a + b),"
                 " map(v, (x) => x * 3 + 1),"
                 " tovec(result(for(v, dictmerger[i64,i64,+], (d, i, x) => merge(d, {x % 7, x}))))}");
  auto base = cli("run '" + p.string() + "' --inputs '" + m.string() + "' --threads 1 -O3");
  ASSERT_EQ(base.status, 0) << base.err;
  for (const std::string flags : {"--threads 8 --no-opt", "--threads 4 --strategy shared", "--threads 4 --strategy global",
                                  "-O0", "--no-fuse", "--no-inline", "--no-size-analysis", "--no-predicate",
                                  "--no-vectorize", "--no-cse", "--threads 2 --no-fuse --no-vectorize"}) {
    auto r = cli("run '" + p.string() + "' --inputs '" + m.string() + "' " + flags);
    EXPECT_EQ(r.status, 0) << flags << ": " << r.err;
    EXPECT_EQ(r.out, base.out) << flags;
  }
}

TEST_F(Cli, ManifestMustMatchTheProgramVariables) {
  auto p = write("p.weld", kFilterSum);
  auto missing = cli("run '" + p.string() + "'");
  EXPECT_EQ(missing.status, 2);
  EXPECT_NE(missing.err.find("'v0'"), std::string::npos) << missing.err;

  auto extra = write("extra.json",
                     R"([{"name":"v0","type":"vec[i64]","value":[1]},{"name":"w","type":"i64","value":1}])");
  auto e = cli("run '" + p.string() + "' --inputs '" + extra.string() + "'");
  EXPECT_EQ(e.status, 2);
  EXPECT_NE(e.err.find("'w'"), std::string::npos) << e.err;

  auto wrong = write("wrong.json", R"([{"name":"v0","type":"vec[i32]","value":[1]}])");
  EXPECT_EQ(cli("run '" + p.string() + "' --inputs '" + wrong.string() + "'").status, 2);

  auto badValue = write("bad.json", R"([{"name":"v0","type":"vec[i64]","value":[1.5]}])");
  EXPECT_EQ(cli("run '" + p.string() + "' --inputs '" + badValue.string() + "'").status, 2);

  // Free variables count as inputs when there is no parameter list.
  auto free = write("free.weld", "len(xs) + k");
  auto partial = write("partial.json", R"([{"name":"xs","type":"vec[f64]","value":[1.0, 2.0]}])");
  auto r = cli("run '" + free.string() + "' --inputs '" + partial.string() + "'");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("'k'"), std::string::npos) << r.err;
}

TEST_F(Cli, BinaryInputsAndOutputs) {
  // vec[i64] [600000, 400000, 700000] in boundary layout.
  std::string bytes;
  auto put = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>(v >> (8 * i)));
  };
  put(3);
  put(600000);
  put(400000);
  put(700000);
  write("v0.bin", bytes);
  auto m = write("m.json", R"({"inputs": [{"name": "v0", "type": "vec[i64]", "file": "v0.bin"}]})");
  auto p = write("p.weld", kFilterSum);
  auto r = cli("run '" + p.string() + "' --inputs '" + m.string() + "' --out '" + (dir / "r.bin").string() + "'");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "1300000\n");
  std::string want;
  for (int i = 0; i < 8; ++i) want.push_back(static_cast<char>(std::uint64_t{1300000} >> (8 * i)));
  EXPECT_EQ(slurp(dir / "r.bin"), want);

  write("short.bin", bytes.substr(0, 20));
  auto bad = write("bad.json", R"([{"name": "v0", "type": "vec[i64]", "file": "short.bin"}])");
  EXPECT_EQ(cli("run '" + p.string() + "' --inputs '" + bad.string() + "'").status, 2);
}

TEST_F(Cli, StatsShowOneTraversalWhenFused) {
  auto p = write("p.weld", kFilterSum);
  auto m = write("m.json", R"([{"name":"v0","type":"vec[i64]","value":[600000,400000,700000]}])");
  auto fused = cli("run '" + p.string() + "' --inputs '" + m.string() + "' --stats");
  EXPECT_NE(fused.out.find("traversals: 1\n"), std::string::npos) << fused.out;
  EXPECT_NE(fused.out.find("intermediate_allocations: 0\n"), std::string::npos) << fused.out;
  auto unfused = cli("run '" + p.string() + "' --inputs '" + m.string() + "' --stats --no-fuse");
  EXPECT_NE(unfused.out.find("traversals: 2\n"), std::string::npos) << unfused.out;
  EXPECT_NE(unfused.out.find("intermediate_allocations: 1\n"), std::string::npos) << unfused.out;
  EXPECT_EQ(fused.out.substr(0, fused.out.find('\n')), "1300000");
}

TEST_F(Cli, StagedErrorsExitOneWithJson) {
  auto div = write("div.weld", "10 / (3 - 3)");
  auto r = cli("run '" + div.string() + "'");
  EXPECT_EQ(r.status, 1);
  auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j.at("stage"), "eval");
  EXPECT_EQ(j.at("code"), "DivideByZero");

  auto dict = write("dict.weld", "result(for([1, 2], dictmerger[i64,i64,+], (d, i, x) => merge(d, {x, x})))");
  auto d = cli("run '" + dict.string() + "'");
  EXPECT_EQ(d.status, 1);
  EXPECT_EQ(nlohmann::json::parse(d.err).at("code"), "EvaluateUnsupportedResultType");

  std::string ones = "[{\"name\":\"v\",\"type\":\"vec[i64]\",\"value\":[1";
  for (int i = 1; i < 2000; ++i) ones += ",1";
  auto inputs = write("ones.json", ones + "]}]");
  auto big = write("big.weld", "map(v, (x) => x + 1)");
  auto m = cli("run '" + big.string() + "' --inputs '" + inputs.string() + "' --memory-limit 4096");
  EXPECT_EQ(m.status, 1);
  EXPECT_EQ(nlohmann::json::parse(m.err).at("code"), "MemoryLimitExceeded");
}

TEST_F(Cli, CheckPrintsTypesAndDiagnostics) {
  auto l4 = cli("check " + program("two_builders.weld"));
  EXPECT_EQ(l4.status, 0) << l4.err;
  EXPECT_EQ(l4.out, "{vec[i64], i64}\n");

  auto lin = cli("check " + program("linearity/consumed_twice.weld"));
  EXPECT_EQ(lin.status, 1);
  auto j = nlohmann::json::parse(lin.err);
  EXPECT_EQ(j.at("stage"), "linearity");
  EXPECT_EQ(j.at("code"), "consumed-twice");
  EXPECT_EQ(j.at("span").size(), 2u);

  auto syntax = write("s.weld", "map(v, (x) => x +)");
  auto s = cli("check '" + syntax.string() + "'");
  EXPECT_EQ(s.status, 1);
  EXPECT_EQ(nlohmann::json::parse(s.err).at("stage"), "parse");

  auto typed = write("t.weld", "(v: vec[f64]) => reduce(v, 0.0, (a, b) => a + b)");
  EXPECT_EQ(cli("check '" + typed.string() + "'").out, "f64\n");
}

TEST_F(Cli, OptFusesFilterSum) {
  auto r = cli("opt " + program("filter_sum.weld") + " --no-predicate --no-vectorize --no-size-analysis");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(canonical(r.out), canonical(slurp(std::string(WELDMILL_PROGRAMS_DIR) + "/filter_sum_fused.weld")));

  auto unfused = cli("opt " + program("filter_sum.weld") + " --no-fuse --no-vectorize");
  weldmill::ExprPtr e = weldmill::parse(unfused.out);
  EXPECT_EQ(weldmill::countNodes(e, weldmill::ExprKind::For), 2);
}

TEST_F(Cli, OptReportsPassesAndReachesAFixpoint) {
  auto first = cli("opt " + program("filter_sum.weld") + " --dump-passes");
  ASSERT_EQ(first.status, 0) << first.err;
  EXPECT_NE(first.err.find("pass=fuse rewrites=1 loops_before=2 loops_after=1"), std::string::npos) << first.err;
  auto again = write("again.weld", first.out);
  auto second = cli("opt '" + again.string() + "' --dump-passes");
  ASSERT_EQ(second.status, 0) << second.err;
  int lines = 0;
  std::istringstream in(second.err);
  for (std::string line; std::getline(in, line); ++lines)
    EXPECT_NE(line.find("rewrites=0 "), std::string::npos) << line;
  EXPECT_EQ(lines, 7);
  EXPECT_EQ(second.out, first.out);
}

TEST_F(Cli, OptimizedProgramsRunLikeTheOriginal) {
  auto m = write("m.json", R"([{"name":"v0","type":"vec[i64]","value":[5,600000,-3,400000,700000,12]}])");
  auto base = cli("run " + program("filter_sum.weld") + " --inputs '" + m.string() + "' -O0");
  for (const std::string flags : {"", "--no-fuse", "--no-vectorize", "--no-predicate --no-cse", "-O0"}) {
    auto o = cli("opt " + program("filter_sum.weld") + " " + flags);
    ASSERT_EQ(o.status, 0) << o.err;
    auto p = write("o.weld", o.out);
    auto r = cli("run '" + p.string() + "' --inputs '" + m.string() + "' -O0");
    EXPECT_EQ(r.out, base.out) << flags;
  }
}

TEST_F(Cli, FmtIsIdempotent) {
  for (const auto& entry : fs::recursive_directory_iterator(WELDMILL_PROGRAMS_DIR)) {
    if (entry.path().extension() != ".weld") continue;
    auto once = cli("fmt '" + entry.path().string() + "'");
    ASSERT_EQ(once.status, 0) << entry.path() << once.err;
    auto p = write("f.weld", once.out);
    auto twice = cli("fmt '" + p.string() + "'");
    EXPECT_EQ(twice.out, once.out) << entry.path();
    EXPECT_TRUE(weldmill::alphaEquivalent(weldmill::parse(once.out), weldmill::parse(slurp(entry.path()))))
        << entry.path();
  }
  auto junk = write("junk.weld", "for(((");
  EXPECT_EQ(cli("fmt '" + junk.string() + "'").status, 1);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").status, 2);
  EXPECT_EQ(cli("frobnicate x").status, 2);
  EXPECT_EQ(cli("run " + program("two_builders.weld") + " --strategy fastest").status, 2);
  EXPECT_EQ(cli("run " + program("two_builders.weld") + " --threads 0").status, 2);
  EXPECT_EQ(cli("run " + program("two_builders.weld") + " -O2").status, 2);
  EXPECT_EQ(cli("run '" + (dir / "absent.weld").string() + "'").status, 2);
  EXPECT_EQ(cli("run " + program("two_builders.weld") + " --inputs '" + write("j.json", "{").string() + "'").status, 2);
  EXPECT_EQ(cli("--help").status, 0);
}
