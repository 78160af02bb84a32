#pragma once

#include "weldmill/passes/pass_util.hpp"

namespace weldmill::passes {

namespace detail {

// Translates the body of a scalar loop into its lane-parallel form, or fails.
class Vectorizer {
 public:
  Vectorizer(std::string builder, std::string elem) : b_(std::move(builder)), x_(std::move(elem)) {}

  // Builder expressions: parameter projections, merges, structures and Lets
  // of scalar values.
  ExprPtr builderExpr(const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::Ident:
      case ExprKind::GetField:
        return rootsAtBuilder(e) ? e : nullptr;
      case ExprKind::Merge: {
        const IrType& t = e->kids[0]->type;
        if (!t.valid() || !t.isBuilder()) return nullptr;
        const BuilderKind& k = t.builderKind();
        if (k.tag != BuilderTag::Merger && k.tag != BuilderTag::VecBuilder) return nullptr;
        if (!k.a.isScalar() || !isNumeric(k.a.scalarKind())) return nullptr;
        ExprPtr target = builderExpr(e->kids[0]);
        ExprPtr value = target ? lanes(e->kids[1]) : nullptr;
        if (!value) return nullptr;
        return ir::merge(target, value, e->span);
      }
      case ExprKind::MakeStruct: {
        std::vector<ExprPtr> kids;
        for (const auto& k : e->kids) {
          kids.push_back(builderExpr(k));
          if (!kids.back()) return nullptr;
        }
        return ir::makeStruct(std::move(kids), e->span);
      }
      case ExprKind::Let: {
        const IrType& t = e->kids[0]->type;
        if (!t.valid() || !t.isScalar() || e->name == b_ || e->name == x_) return nullptr;
        ExprPtr value = lanes(e->kids[0]);
        if (!value) return nullptr;
        locals_.insert(e->name);
        ExprPtr body = builderExpr(e->kids[1]);
        if (!body) return nullptr;
        return ir::let(e->name, value, body, e->span);
      }
      default:
        return nullptr;
    }
  }

 private:
  std::string b_, x_;
  std::set<std::string> locals_;

  bool rootsAtBuilder(const ExprPtr& e) const {
    if (e->kind == ExprKind::Ident) return e->name == b_;
    return e->kind == ExprKind::GetField && rootsAtBuilder(e->kids[0]);
  }

  bool varies(const ExprPtr& e) const {
    auto fv = freeVariables(e);
    if (fv.count(x_) || fv.count(b_)) return true;
    for (const auto& l : locals_)
      if (fv.count(l)) return true;
    return false;
  }

  // Scalar expression → lane expression.
  ExprPtr lanes(const ExprPtr& e) {
    const IrType& t = e->type;
    if (!t.valid() || !t.isScalar()) return nullptr;
    if (!varies(e)) {
      if (!isNumeric(t.scalarKind()) || !isSafe(e)) return nullptr;
      return ir::broadcast(e, e->span);
    }
    switch (e->kind) {
      case ExprKind::Ident:
        return e;
      case ExprKind::Binary:
      case ExprKind::Unary:
      case ExprKind::BitSelect: {
        std::vector<ExprPtr> kids;
        for (const auto& k : e->kids) {
          kids.push_back(lanes(k));
          if (!kids.back()) return nullptr;
        }
        return withKids(*e, std::move(kids));
      }
      default:
        return nullptr;
    }
  }
};

}  // namespace detail

// Splits straight-line loops merging scalars into mergers or vecbuilders
// into a simd loop over whole lane groups followed by a scalar loop over the
// remaining elements, both threading the same builders.
inline ExprPtr vectorizePass(PassContext& ctx, const ExprPtr& input, int& vectorized) {
  auto step = [&](const ExprPtr& f) -> ExprPtr {
    if (f->kind != ExprKind::For || f->iters.size() != 1) return nullptr;
    if (f->iters[0].kind != IterKind::Scalar || f->iters[0].ranged) return nullptr;
    const ExprPtr& lam = f->forFunc();
    if (!isLoopLambda(lam) || !f->type.valid()) return nullptr;
    const IrType& vt = f->iterData(0)->type;
    if (!vt.valid() || !vt.isVec() || !vt.elem().isScalar() || !isNumeric(vt.elem().scalarKind())) return nullptr;
    if (isFree(lam->kids[0], lam->params[1].name)) return nullptr;
    detail::Vectorizer vec(lam->params[0].name, lam->params[2].name);
    ExprPtr simdBody = vec.builderExpr(lam->kids[0]);
    if (!simdBody) return nullptr;

    ExprPtr data = f->iterData(0);
    std::string bound;
    if (data->kind != ExprKind::Ident) {
      bound = ctx.fresh("v");
      data = ir::ident(bound);
    }
    std::vector<Param> params = lam->params;
    params[2].type = IrType();
    ExprPtr simdLoop = ir::forLoop({ir::Iter{data, nullptr, nullptr, nullptr, IterKind::Simd}}, f->forInit(), ir::lambda(params, simdBody));
    ExprPtr scalarLoop = ir::forLoop({ir::Iter{data, nullptr, nullptr, nullptr, IterKind::Fringe}}, simdLoop, lam, f->span);
    ctx.bump();
    ++vectorized;
    return bound.empty() ? scalarLoop : ir::let(bound, f->iterData(0), scalarLoop, f->span);
  };
  ExprPtr out = rewriteBottomUp(ctx.uniquify(input), step);
  return ctx.retype(out);
}

}  // namespace weldmill::passes
