#pragma once

// Type-directed generator of random well-typed programs over the inputs
//   a: vec[i64], b: vec[f64] (same length), k: i64, z: f64.
// Programs cover every builder kind and the sugar operators, never divide by
// zero or index out of bounds, and compare floats only when the compared
// values are computed element by element (so reassociated float sums cannot
// flip a branch).

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "weldmill/parser.hpp"
#include "weldmill/typecheck.hpp"
#include "weldmill/value.hpp"

namespace progen {

enum class Ty { I, F, B, VI, VF };

struct Var {
  std::string text;
  Ty type;
  bool exact;  // floats: not derived from a reduction
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed, int maxDepth = 6) : rng_(seed), maxDepth_(maxDepth) {}

  static constexpr const char* kHeader = "(a: vec[i64], b: vec[f64], k: i64, z: f64) => ";

  std::string program() {
    fresh_ = 0;
    scope_ = {{"a", Ty::VI, true}, {"b", Ty::VF, true}, {"k", Ty::I, true}, {"z", Ty::F, true}};
    std::string body;
    switch (pick(4)) {
      case 0: {
        std::vector<std::string> parts;
        int n = 2 + pick(2);
        for (int i = 0; i < n; ++i) parts.push_back(any(1));
        body = "{" + join(parts) + "}";
        break;
      }
      case 1: {
        std::string w = name("w");
        std::string v = vi(1);
        scope_.push_back({w, Ty::VI, true});
        body = w + " := " + v + "; " + any(1);
        break;
      }
      default:
        body = any(0);
    }
    return kHeader + body;
  }

  // Bindings for the four inputs.
  std::map<std::string, weldmill::Value> inputs() {
    std::size_t n = static_cast<std::size_t>(pick(48));
    std::vector<weldmill::Value> as, bs;
    std::uniform_real_distribution<double> real(-10.0, 10.0);
    for (std::size_t i = 0; i < n; ++i) {
      as.emplace_back(static_cast<std::int64_t>(pick(101)) - 50);
      bs.emplace_back(real(rng_));
    }
    return {{"a", weldmill::makeVec(std::move(as))},
            {"b", weldmill::makeVec(std::move(bs))},
            {"k", static_cast<std::int64_t>(pick(41)) - 20},
            {"z", real(rng_) / 2.0}};
  }

  static weldmill::TypeEnv inputTypes() {
    weldmill::TypeEnv env;
    env.vars["a"] = weldmill::parseType("vec[i64]");
    env.vars["b"] = weldmill::parseType("vec[f64]");
    env.vars["k"] = weldmill::IrType::i64();
    env.vars["z"] = weldmill::IrType::f64();
    return env;
  }

 private:
  std::mt19937_64 rng_;
  int maxDepth_;
  int fresh_ = 0;
  std::vector<Var> scope_;

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool leaf(int d) { return d >= maxDepth_ || pick(10) < 2 + d; }
  std::string name(const char* base) { return base + std::to_string(fresh_++); }

  static std::string join(const std::vector<std::string>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
    return s;
  }

  // Runs `f` with extra variables in scope.
  template <typename F>
  std::string with(std::vector<Var> vars, F&& f) {
    std::size_t mark = scope_.size();
    for (auto& v : vars) scope_.push_back(std::move(v));
    std::string s = f();
    scope_.resize(mark);
    return s;
  }

  const Var* var(Ty t, bool exactOnly = false) {
    std::vector<const Var*> c;
    for (const auto& v : scope_)
      if (v.type == t && (!exactOnly || v.exact)) c.push_back(&v);
    return c.empty() ? nullptr : c[static_cast<std::size_t>(pick(static_cast<int>(c.size())))];
  }

  std::string any(int d) {
    switch (pick(5)) {
      case 0: return i(d);
      case 1: return f(d, false);
      case 2: return bo(d);
      case 3: return vi(d);
      default: return vf(d);
    }
  }

  std::string intLit() { return std::to_string(pick(41) - 20); }

  std::string floatLit() {
    static const char* lits[] = {"0.5", "1.5", "-2.25", "3.0", "0.125", "-0.75", "10.0"};
    return lits[pick(7)];
  }

  // Loop over a random vector; `body` receives the element and index names.
  template <typename F>
  std::string loopOver(int d, const std::string& init, F&& body) {
    std::string bn = name("b"), in = name("i"), xn = name("x");
    bool overFloats = pick(3) == 0;
    std::string src = overFloats ? vf(d + 1) : vi(d + 1);
    Var x{xn, overFloats ? Ty::F : Ty::I, true};
    std::string inner = with({x, {in, Ty::I, true}}, [&] { return body(bn); });
    return "for(" + src + ", " + init + ", (" + bn + ", " + in + ", " + xn + ") => " + inner + ")";
  }

  std::string i(int d) {
    if (leaf(d)) {
      switch (pick(4)) {
        case 0: return intLit();
        case 1: return "len(a)";
        default:
          if (const Var* v = var(Ty::I)) return v->text;
          return intLit();
      }
    }
    int n = d + 1;
    switch (pick(16)) {
      case 0: {
        static const char* ops[] = {"+", "-", "*"};
        return "(" + i(n) + " " + ops[pick(3)] + " " + i(n) + ")";
      }
      case 1: return std::string(pick(2) ? "min(" : "max(") + i(n) + ", " + i(n) + ")";
      case 2: return "(" + i(n) + (pick(2) ? " / " : " % ") + "(" + i(n) + " % 5 + 7))";
      case 3: return "(if (" + bo(n) + ") " + i(n) + " else " + i(n) + ")";
      case 4: {
        static const char* reducers[][2] = {{"0", "+"}, {"1", "*"}};
        int r = pick(2);
        std::string p = name("p"), q = name("q");
        return "reduce(" + vi(n) + ", " + reducers[r][0] + ", (" + p + ", " + q + ") => " + p + " " + reducers[r][1] +
               " " + q + ")";
      }
      case 5: {
        static const char* ops[] = {"+", "*", "min", "max"};
        std::string op = ops[pick(4)];
        return "result(" + loopOver(d, "merger[i64," + op + "]", [&](const std::string& b) {
                 return "merge(" + b + ", " + i(n) + ")";
               }) + ")";
      }
      case 6:
        return "result(" + loopOver(d, "merger[i64,+]", [&](const std::string& b) {
                 return "if (" + bo(n) + ") merge(" + b + ", " + i(n) + ") else " + b;
               }) + ")";
      case 7: {
        std::string w = name("w");
        std::string v = vi(n);
        return with({{w, Ty::VI, true}}, [&] {
          return "(" + w + " := " + v + "; if (len(" + w + ") > 0) lookup(" + w + ", ((" + i(n) + " % len(" + w +
                 ")) + len(" + w + ")) % len(" + w + ")) else " + i(n) + ")";
        });
      }
      case 8: return "i64(" + f(n, true) + ")";
      case 9: return "len(" + (pick(2) ? vi(n) : vf(n)) + ")";
      case 10: {
        std::string s = name("s");
        std::string init = i(n);
        return with({{s + ".0", Ty::I, true}}, [&] {
          return "iterate({" + init + ", 0}, (" + s + ") => {{" + i(n) + ", " + s + ".1 + 1}, " + s + ".1 < " +
                 std::to_string(1 + pick(4)) + "}).0";
        });
      }
      case 11: {
        static const char* ops[] = {"+", "*", "min", "max"};
        std::string e = name("e"), p = name("p"), q = name("q");
        std::string dict = "tovec(result(" + loopOver(d, std::string("dictmerger[i64,i64,") + ops[pick(4)] + "]",
                                                      [&](const std::string& b) {
                                                        return "merge(" + b + ", {" + i(n) + " % 5, " + i(n) + "})";
                                                      }) +
                           "))";
        return "reduce(map(" + dict + ", (" + e + ") => " + e + ".0 * 7 + " + e + ".1), 0, (" + p + ", " + q +
               ") => " + p + " + " + q + ")";
      }
      case 12:
        return "result(" + loopOver(d, "{vecbuilder[i64], merger[i64,+]}", [&](const std::string& b) {
                 return "{merge(" + b + ".0, " + i(n) + "), merge(" + b + ".1, " + i(n) + ")}";
               }) + ").1";
      case 13: return "(" + i(n) + " + k)";
      case 14: {
        std::string w = name("w");
        std::string v = vi(n);
        return with({{w, Ty::VI, true}}, [&] { return "(" + w + " := " + v + "; " + i(n) + ")"; });
      }
      default: return "-(" + i(n) + ")";
    }
  }

  std::string f(int d, bool exact) {
    if (leaf(d)) {
      switch (pick(3)) {
        case 0: return floatLit();
        case 1: return "f64(" + i(maxDepth_) + ")";
        default:
          if (const Var* v = var(Ty::F, exact)) return v->text;
          return floatLit();
      }
    }
    int n = d + 1;
    switch (pick(exact ? 8 : 11)) {
      case 0: {
        static const char* ops[] = {"+", "-", "*"};
        return "(" + f(n, exact) + " " + ops[pick(3)] + " " + f(n, exact) + ")";
      }
      case 1: return std::string(pick(2) ? "min(" : "max(") + f(n, exact) + ", " + f(n, exact) + ")";
      case 2: return "(" + f(n, exact) + " / (abs(" + f(n, exact) + ") + 1.0))";
      case 3: return "sqrt(abs(" + f(n, exact) + "))";
      case 4: return "log(abs(" + f(n, exact) + ") + 1.0)";
      case 5: return "(if (" + bo(n) + ") " + f(n, exact) + " else " + f(n, exact) + ")";
      case 6: return "f64(" + i(n) + ")";
      case 7: return "(" + f(n, exact) + " * z)";
      case 8: {
        std::string p = name("p"), q = name("q");
        return "reduce(" + vf(n) + ", 0.0, (" + p + ", " + q + ") => " + p + " + " + q + ")";
      }
      case 9: {
        static const char* ops[] = {"+", "min", "max"};
        std::string op = ops[pick(3)];
        return "result(" + loopOver(d, "merger[f64," + op + "]", [&](const std::string& b) {
                 return "merge(" + b + ", " + f(n, true) + ")";
               }) + ")";
      }
      default:
        return "result(" + loopOver(d, "merger[f64,+]", [&](const std::string& b) {
                 return "if (" + bo(n) + ") merge(" + b + ", " + f(n, true) + ") else " + b;
               }) + ")";
    }
  }

  std::string bo(int d) {
    if (leaf(d)) {
      switch (pick(3)) {
        case 0: return pick(2) ? "true" : "false";
        case 1: return "(" + i(maxDepth_) + " > " + intLit() + ")";
        default: return "(" + i(maxDepth_) + " % 2 == 0)";
      }
    }
    int n = d + 1;
    switch (pick(5)) {
      case 0: {
        static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
        return "(" + i(n) + " " + ops[pick(6)] + " " + i(n) + ")";
      }
      case 1: return "(" + f(n, true) + (pick(2) ? " < " : " >= ") + f(n, true) + ")";
      case 2: return "(" + bo(n) + " && " + bo(n) + ")";
      case 3: return "(" + bo(n) + " || " + bo(n) + ")";
      default: return "(" + i(n) + " % 3 == 0)";
    }
  }

  std::string lambda1(Ty paramType, const std::function<std::string(void)>& body) {
    std::string x = name("x");
    return with({{x, paramType, true}}, [&] { return "(" + x + ") => " + body(); });
  }

  std::string vi(int d) {
    if (leaf(d)) {
      if (pick(4) == 0) {
        std::vector<std::string> xs;
        int n = 1 + pick(4);
        for (int j = 0; j < n; ++j) xs.push_back(intLit());
        return "[" + join(xs) + "]";
      }
      const Var* v = var(Ty::VI);
      return v ? v->text : "a";
    }
    int n = d + 1;
    switch (pick(14)) {
      case 0: return "map(" + vi(n) + ", " + lambda1(Ty::I, [&] { return i(n); }) + ")";
      case 1: return "map(" + vf(n) + ", " + lambda1(Ty::F, [&] { return i(n); }) + ")";
      case 2: return "filter(" + vi(n) + ", " + lambda1(Ty::I, [&] { return bo(n); }) + ")";
      case 3:
        return "flatmap(" + vi(n) + ", " + lambda1(Ty::I, [&] { return "[" + i(n) + ", " + i(n) + "]"; }) + ")";
      case 4: {
        static const char* keys[] = {"X", "-(X)", "X * 3 + 1"};
        std::string x = name("x");
        std::string key = keys[pick(3)];
        key.replace(key.find('X'), 1, x);
        return "sort(" + vi(n) + ", (" + x + ") => " + key + ")";
      }
      case 5:
        return "result(" + loopOver(d, "vecbuilder[i64]", [&](const std::string& b) {
                 return "merge(" + b + ", " + i(n) + ")";
               }) + ")";
      case 6:
        return "result(" + loopOver(d, "vecbuilder[i64]", [&](const std::string& b) {
                 return "if (" + bo(n) + ") merge(" + b + ", " + i(n) + ") else " + b;
               }) + ")";
      case 7: {
        std::string op = pick(2) ? "+" : "max";
        return "result(" + loopOver(d, "vecmerger[i64," + op + "]([0, 0, 0, 0])", [&](const std::string& b) {
                 return "merge(" + b + ", {((" + i(n) + " % 4) + 4) % 4, " + i(n) + "})";
               }) + ")";
      }
      case 8: {
        std::string e = name("e");
        std::string grouped;
        if (pick(2)) {
          std::string x = name("x");
          std::string src = vi(n);
          grouped = with({{x, Ty::I, true}}, [&] {
            return "groupby(" + src + ", (" + x + ") => " + x + " % 3, (" + x + ") => " + i(n) + ")";
          });
        } else {
          grouped = "result(" + loopOver(d, "groupbuilder[i64,i64]", [&](const std::string& b) {
                      return "merge(" + b + ", {" + i(n) + " % 3, " + i(n) + "})";
                    }) + ")";
        }
        return "map(tovec(" + grouped + "), (" + e + ") => " + e + ".0 * 100 + len(" + e + ".1) + lookup(" + e +
               ".1, 0))";
      }
      case 9: {
        std::string w = name("w"), bn = name("b"), in = name("i"), xn = name("x");
        std::string v = vi(n);
        std::string stride = std::to_string(1 + pick(3));
        return with({{w, Ty::VI, true}}, [&] {
          std::string body = with({{xn, Ty::I, true}, {in, Ty::I, true}}, [&] { return i(n); });
          return "(" + w + " := " + v + "; result(for(iter(" + w + ", 0, len(" + w + "), " + stride +
                 "), vecbuilder[i64], (" + bn + ", " + in + ", " + xn + ") => merge(" + bn + ", " + body + "))))";
        });
      }
      case 10: {
        std::string p = name("p");
        return with({{p + ".0", Ty::I, true}, {p + ".1", Ty::F, true}},
                    [&] { return "map(zip(a, b), (" + p + ") => " + i(n) + ")"; });
      }
      case 11: {
        std::string w = name("w"), p = name("p");
        std::string v = vi(n);
        return with({{w, Ty::VI, true}}, [&] {
          std::string inner = "map(" + w + ", " + lambda1(Ty::I, [&] { return i(n); }) + ")";
          return "(" + w + " := " + v + "; map(zip(" + w + ", " + inner + "), (" + p + ") => " + p + ".0 - " + p +
                 ".1))";
        });
      }
      case 12:
        return "result(" + loopOver(d, "{vecbuilder[i64], merger[i64,+]}", [&](const std::string& b) {
                 return "{merge(" + b + ".0, " + i(n) + "), merge(" + b + ".1, " + i(n) + ")}";
               }) + ").0";
      default: {
        std::string w = name("w");
        std::string v = vi(n);
        return with({{w, Ty::VI, true}}, [&] { return "(" + w + " := " + v + "; " + vi(n) + ")"; });
      }
    }
  }

  std::string vf(int d) {
    if (leaf(d)) {
      const Var* v = var(Ty::VF);
      return v ? v->text : "b";
    }
    int n = d + 1;
    switch (pick(7)) {
      case 0: return "map(" + vi(n) + ", " + lambda1(Ty::I, [&] { return f(n, true); }) + ")";
      case 1: return "map(" + vf(n) + ", " + lambda1(Ty::F, [&] { return f(n, true); }) + ")";
      case 2: return "filter(" + vf(n) + ", " + lambda1(Ty::F, [&] { return bo(n); }) + ")";
      case 3: {
        std::string x = name("x");
        return "sort(" + vf(n) + ", (" + x + ") => " + x + ")";
      }
      case 4:
        return "result(" + loopOver(d, "vecbuilder[f64]", [&](const std::string& b) {
                 return "merge(" + b + ", " + f(n, true) + ")";
               }) + ")";
      case 5:
        return "result(" + loopOver(d, "vecbuilder[f64]", [&](const std::string& b) {
                 return "if (" + bo(n) + ") merge(" + b + ", " + f(n, true) + ") else " + b;
               }) + ")";
      default: {
        std::string w = name("w");
        std::string v = vf(n);
        return with({{w, Ty::VF, true}}, [&] { return "(" + w + " := " + v + "; " + vf(n) + ")"; });
      }
    }
  }
};

}  // namespace progen
