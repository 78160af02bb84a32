#pragma once

#include <map>
#include <string>
#include <vector>

#include "weldmill/engine.hpp"
#include "weldmill/linearity.hpp"
#include "weldmill/optimizer.hpp"
#include "weldmill/parser.hpp"
#include "weldmill/sugar.hpp"
#include "weldmill/typecheck.hpp"

namespace weldmill {

struct PipelineOptions {
  EngineConfig engine;
  OptLevel level = OptLevel::all();
  int rewriteBudget = passes::kDefaultRewriteBudget;
};

// A program body with its parameters. Program files may wrap the body in a
// lambda whose parameters name the inputs.
struct ProgramUnit {
  ExprPtr body;
  std::vector<Param> params;
};

inline ProgramUnit splitParams(const ExprPtr& parsed) {
  if (parsed->kind == ExprKind::Lambda) return {parsed->kids[0], parsed->params};
  return {parsed, {}};
}

// Re-attaches parameters removed by splitParams.
inline ExprPtr joinParams(const ExprPtr& body, const std::vector<Param>& params) {
  if (params.empty()) return body;
  return ir::lambda(params, body, body->span);
}

struct CheckedProgram {
  ExprPtr typed;
  TypeEnv env;
};

// Expands sugar, infers types and checks linearity. Annotated parameters
// extend `env`.
inline CheckedProgram checkProgram(const ProgramUnit& unit, TypeEnv env = {}) {
  for (const auto& p : unit.params)
    if (p.type.valid() && !p.type.hasUnknowns()) env.vars[p.name] = p.type;
  ExprPtr typed = inferTypes(expandSugar(unit.body), env);
  checkLinearity(typed);
  return {typed, env};
}

struct RunOutput {
  Value value;
  IrType type;
  EvalStats stats;
  ExprPtr optimized;
  std::vector<PassReport> reports;
};

// Every stage after parsing. Failures surface as the Error of their stage.
inline RunOutput runProgram(const ProgramUnit& unit, const TypeEnv& env, const std::map<std::string, Value>& inputs,
                            const PipelineOptions& opts = {}) {
  CheckedProgram checked = checkProgram(unit, env);
  OptimizeResult opt = optimize(checked.typed, checked.env, opts.level, opts.rewriteBudget);
  EvalOutput out = evaluate(opt.program, inputs, opts.engine);
  return {std::move(out.value), opt.program->type, std::move(out.stats), opt.program, std::move(opt.reports)};
}

}  // namespace weldmill
