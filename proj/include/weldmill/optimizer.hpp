#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "weldmill/linearity.hpp"
#include "weldmill/passes/cse.hpp"
#include "weldmill/passes/fusion.hpp"
#include "weldmill/passes/inline.hpp"
#include "weldmill/passes/predicate.hpp"
#include "weldmill/passes/size_analysis.hpp"
#include "weldmill/passes/vectorize.hpp"

namespace weldmill {

struct OptLevel {
  bool inlining = true;
  bool fuse = true;
  bool sizeAnalysis = true;
  bool predicate = true;
  bool vectorize = true;
  bool cse = true;

  static OptLevel none() { return {false, false, false, false, false, false}; }
  static OptLevel all() { return {}; }

  // Enables or disables a pass by its report name; false for unknown names.
  bool set(const std::string& pass, bool on) {
    if (pass == "inline") inlining = on;
    else if (pass == "fuse") fuse = on;
    else if (pass == "size-analysis") sizeAnalysis = on;
    else if (pass == "predicate") predicate = on;
    else if (pass == "vectorize") vectorize = on;
    else if (pass == "cse") cse = on;
    else return false;
    return true;
  }
};

// Pass names in pipeline order. "tile" is an inert slot.
inline const std::vector<std::string>& passNames() {
  static const std::vector<std::string> names = {"inline",   "fuse",      "size-analysis", "tile",
                                                 "predicate", "vectorize", "cse"};
  return names;
}

struct PassReport {
  std::string pass;
  int rewrites = 0;
  int loopsBefore = 0;
  int loopsAfter = 0;
  std::vector<std::string> sizes;
  int vectorized = 0;

  // One line: `pass=fuse rewrites=1 loops_before=2 loops_after=1 sizes=[] vectorized=0`.
  std::string line() const {
    std::ostringstream os;
    os << "pass=" << pass << " rewrites=" << rewrites << " loops_before=" << loopsBefore
       << " loops_after=" << loopsAfter << " sizes=[";
    for (std::size_t i = 0; i < sizes.size(); ++i) os << (i ? "; " : "") << sizes[i];
    os << "] vectorized=" << vectorized;
    return os.str();
  }
};

inline std::string reportText(const std::vector<PassReport>& reports) {
  std::string out;
  for (const auto& r : reports) out += r.line() + "\n";
  return out;
}

struct OptimizeResult {
  ExprPtr program;
  std::vector<PassReport> reports;
};

// Runs the enabled passes in the fixed order. Input must be typed and
// linear; so is every pass output. Only enabled passes (and the tiling slot)
// produce reports.
inline OptimizeResult optimize(const ExprPtr& typed, const TypeEnv& env, const OptLevel& level,
                               int budget = passes::kDefaultRewriteBudget) {
  OptimizeResult out;
  ExprPtr e = typed;
  auto run = [&](const std::string& name, bool enabled, const auto& body) {
    if (!enabled) return;
    PassReport rep;
    rep.pass = name;
    rep.loopsBefore = passes::forLoopCount(e);
    passes::PassContext ctx(name, e, env, budget);
    ExprPtr next = body(ctx, rep);
    try {
      next = inferTypes(next, env);
      checkLinearity(next);
    } catch (const Error& err) {
      throw OptimizeError("PassProducedInvalidProgram", "pass '" + name + "' produced an invalid program: " + err.what());
    }
    e = next;
    rep.rewrites = ctx.rewrites();
    rep.loopsAfter = passes::forLoopCount(e);
    out.reports.push_back(std::move(rep));
  };
  run("inline", level.inlining, [&](passes::PassContext& ctx, PassReport&) { return passes::inlinePass(ctx, e); });
  run("fuse", level.fuse, [&](passes::PassContext& ctx, PassReport&) { return passes::fusePass(ctx, e); });
  run("size-analysis", level.sizeAnalysis, [&](passes::PassContext& ctx, PassReport& rep) {
    return passes::sizeAnalysisPass(ctx, e, rep.sizes);
  });
  run("tile", true, [&](passes::PassContext&, PassReport&) { return e; });
  run("predicate", level.predicate,
      [&](passes::PassContext& ctx, PassReport&) { return passes::predicatePass(ctx, e); });
  run("vectorize", level.vectorize, [&](passes::PassContext& ctx, PassReport& rep) {
    return passes::vectorizePass(ctx, e, rep.vectorized);
  });
  run("cse", level.cse, [&](passes::PassContext& ctx, PassReport&) { return passes::csePass(ctx, e); });
  out.program = e;
  return out;
}

}  // namespace weldmill
