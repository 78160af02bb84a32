#pragma once

#include "weldmill/passes/pass_util.hpp"

namespace weldmill::passes {

// Beta-reduces direct lambda applications into Lets, then substitutes Lets
// bound to literals or identifiers, single-use Lets whose use is evaluated
// unconditionally, and drops unused Lets of safe values.
inline ExprPtr inlinePass(PassContext& ctx, const ExprPtr& input) {
  ExprPtr e = ctx.uniquify(input);
  auto step = [&](const ExprPtr& x) -> ExprPtr {
    if (x->kind == ExprKind::Apply) {
      const ExprPtr& fn = x->kids[0];
      if (fn->kind != ExprKind::Lambda || fn->params.size() + 1 != x->kids.size()) return nullptr;
      ExprPtr body = fn->kids[0];
      for (std::size_t i = fn->params.size(); i-- > 0;) body = ir::let(fn->params[i].name, x->kids[i + 1], body, x->span);
      ctx.bump();
      return body;
    }
    if (x->kind != ExprKind::Let) return nullptr;
    const ExprPtr& value = x->kids[0];
    const ExprPtr& body = x->kids[1];
    int uses = countFree(body, x->name);
    if (uses == 0 && (isSafe(value) || value->kind == ExprKind::Lambda)) {
      ctx.bump();
      return body;
    }
    bool substituteIt = isTrivial(value);
    if (value->kind == ExprKind::Lambda) substituteIt = uses == 1;
    else if (!substituteIt) substituteIt = singleUnconditionalUse(body, x->name);
    if (!substituteIt) return nullptr;
    ctx.bump();
    return substitute(body, {{x->name, value}}, ctx.names());
  };
  return sweepToFixpoint(ctx, e, [&](const ExprPtr& x) { return rewriteBottomUp(x, step); });
}

}  // namespace weldmill::passes
