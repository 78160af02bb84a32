#pragma once

#include "weldmill/parser.hpp"
#include "weldmill/passes/pass_util.hpp"

namespace weldmill::passes {

namespace detail {

// A builder named by a parameter or a projection of one.
inline bool isBuilderPath(const ExprPtr& e) {
  if (e->kind == ExprKind::Ident) return true;
  return e->kind == ExprKind::GetField && isBuilderPath(e->kids[0]);
}

inline ExprPtr mergerIdentity(const IrType& builder) {
  if (!builder.valid() || !builder.isBuilder()) return nullptr;
  const BuilderKind& k = builder.builderKind();
  if (k.tag != BuilderTag::Merger || !k.a.isScalar()) return nullptr;
  return ir::lit(mergeIdentity(k.a.scalarKind(), k.op));
}

// if(c, merge(b, x), b) and its mirror, with b a merger and x safe.
inline ExprPtr predicateMerge(const ExprPtr& e) {
  for (int side = 1; side <= 2; ++side) {
    const ExprPtr& m = e->kids[side];
    const ExprPtr& other = e->kids[3 - side];
    if (m->kind != ExprKind::Merge) continue;
    const ExprPtr& b = m->kids[0];
    if (!isBuilderPath(b) || !structurallyEqual(b, other) || !isSafe(m->kids[1])) continue;
    ExprPtr id = mergerIdentity(b->type);
    if (!id) continue;
    ExprPtr sel = side == 1 ? ir::bitSelect(e->kids[0], m->kids[1], id, e->span)
                            : ir::bitSelect(e->kids[0], id, m->kids[1], e->span);
    return ir::merge(b, sel, e->span);
  }
  return nullptr;
}

}  // namespace detail

// Replaces conditional merger updates and conditionals over safe scalar arms
// with selects.
inline ExprPtr predicatePass(PassContext& ctx, const ExprPtr& input) {
  auto step = [&](const ExprPtr& e) -> ExprPtr {
    if (e->kind != ExprKind::If) return nullptr;
    if (ExprPtr r = detail::predicateMerge(e)) {
      ctx.bump();
      return r;
    }
    if (!e->type.valid() || !e->type.isScalar()) return nullptr;
    if (!isSafe(e->kids[1]) || !isSafe(e->kids[2])) return nullptr;
    ctx.bump();
    return ir::bitSelect(e->kids[0], e->kids[1], e->kids[2], e->span);
  };
  return sweepToFixpoint(ctx, input, [&](const ExprPtr& x) { return rewriteBottomUp(x, step); });
}

}  // namespace weldmill::passes
