#pragma once

#include <optional>

#include "weldmill/passes/pass_util.hpp"
#include "weldmill/printer.hpp"

namespace weldmill::passes {

namespace detail {

// Projection path from loop builder `b` to the leaf builder that builder
// expression `e` denotes, e.g. merge(b.1, x) denotes [1].
inline std::optional<std::vector<int>> leafPath(const ExprPtr& e, const std::string& b) {
  switch (e->kind) {
    case ExprKind::Ident:
      if (e->name != b) return std::nullopt;
      return std::vector<int>{};
    case ExprKind::GetField: {
      auto p = leafPath(e->kids[0], b);
      if (p) p->push_back(e->index);
      return p;
    }
    case ExprKind::Merge:
      return leafPath(e->kids[0], b);
    default:
      return std::nullopt;
  }
}

// Merges into the leaf at `path` of loop builder `b` that evaluating `e`
// performs on every control path, or -1 when paths differ or `e` is opaque.
inline int leafMerges(const ExprPtr& e, const std::string& b, const std::vector<int>& path) {
  switch (e->kind) {
    case ExprKind::Ident:
    case ExprKind::GetField:
      return leafPath(e, b) ? 0 : -1;
    case ExprKind::MakeStruct: {
      int total = 0;
      for (const auto& k : e->kids) {
        int n = leafMerges(k, b, path);
        if (n < 0) return -1;
        total += n;
      }
      return total;
    }
    case ExprKind::Merge: {
      auto leaf = leafPath(e, b);
      int inner = leafMerges(e->kids[0], b, path);
      if (!leaf || inner < 0) return -1;
      return inner + (*leaf == path ? 1 : 0);
    }
    case ExprKind::If: {
      int a = leafMerges(e->kids[1], b, path);
      int c = leafMerges(e->kids[2], b, path);
      return a == c ? a : -1;
    }
    case ExprKind::Let:
      if (hasBuilderType(e->kids[0]) || e->name == b) return -1;
      return leafMerges(e->kids[1], b, path);
    default:
      return -1;
  }
}

// Iteration count of the first iterator of `f` as an expression, when it can
// be recomputed cheaply and without failing.
inline ExprPtr iterationCount(const Expr& f) {
  const ExprPtr& data = f.iterData(0);
  if (!f.iters[0].ranged) {
    if (data->kind != ExprKind::Ident) return nullptr;
    return ir::len(data);
  }
  const ExprPtr& start = f.iterStart(0);
  const ExprPtr& end = f.iterEnd(0);
  const ExprPtr& stride = f.iterStride(0);
  if (!isSafe(start) || !isSafe(end) || stride->kind != ExprKind::Literal) return nullptr;
  auto* s = std::get_if<std::int64_t>(&stride->lit);
  if (!s || *s <= 0) return nullptr;
  bool zeroStart = start->kind == ExprKind::Literal && std::get_if<std::int64_t>(&start->lit) &&
                   std::get<std::int64_t>(start->lit) == 0;
  ExprPtr span = zeroStart ? end : ir::binary(BinOp::Sub, end, start);
  if (*s == 1) return span;
  return ir::binary(BinOp::Div, ir::binary(BinOp::Add, span, ir::i64(*s - 1)), stride);
}

}  // namespace detail

// Attaches an iteration-count size hint to fresh vecbuilders that a loop
// merges into exactly once per iteration.
inline ExprPtr sizeAnalysisPass(PassContext& ctx, const ExprPtr& input, std::vector<std::string>& sizes) {
  auto step = [&](const ExprPtr& f) -> ExprPtr {
    if (f->kind != ExprKind::For || !isLoopLambda(f->forFunc())) return nullptr;
    for (const auto& m : f->iters)
      if (m.kind != IterKind::Scalar) return nullptr;
    const ExprPtr& lam = f->forFunc();
    const std::string& b = lam->params[0].name;
    ExprPtr count;
    std::function<ExprPtr(const ExprPtr&, std::vector<int>)> annotate = [&](const ExprPtr& init,
                                                                             std::vector<int> path) -> ExprPtr {
      if (init->kind == ExprKind::MakeStruct) {
        std::vector<ExprPtr> kids;
        bool changed = false;
        for (std::size_t i = 0; i < init->kids.size(); ++i) {
          std::vector<int> p = path;
          p.push_back(static_cast<int>(i));
          kids.push_back(annotate(init->kids[i], p));
          changed |= kids.back() != init->kids[i];
        }
        return changed ? withKids(*init, std::move(kids)) : init;
      }
      if (init->kind != ExprKind::NewBuilder || init->builder.tag != BuilderTag::VecBuilder || !init->kids.empty())
        return init;
      if (detail::leafMerges(lam->kids[0], b, path) != 1) return init;
      if (!count) count = detail::iterationCount(*f);
      if (!count) return init;
      ctx.bump();
      sizes.push_back(print(count));
      return ir::newBuilder(init->builder, count, init->span);
    };
    ExprPtr init = annotate(f->forInit(), {});
    if (init == f->forInit()) return nullptr;
    return withLoop(*f, init, lam);
  };
  ExprPtr out = rewriteBottomUp(input, step);
  return out == input ? input : ctx.retype(out);
}

}  // namespace weldmill::passes
