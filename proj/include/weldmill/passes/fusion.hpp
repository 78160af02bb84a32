#pragma once

#include <optional>

#include "weldmill/passes/pass_util.hpp"

namespace weldmill::passes {

namespace detail {

inline bool plainIters(const Expr& f) {
  for (const auto& m : f.iters)
    if (m.kind != IterKind::Scalar) return false;
  return true;
}

// result(for(...)) over scalar iterators with a three-parameter body.
inline bool isLoopResult(const ExprPtr& r) {
  if (r->kind != ExprKind::Result || r->kids[0]->kind != ExprKind::For) return false;
  const Expr& f = *r->kids[0];
  return plainIters(f) && isLoopLambda(f.forFunc());
}

// A loop producing a fresh vecbuilder's contents: result(for(..., vecbuilder, ...)).
inline bool isVectorProducer(const ExprPtr& r) {
  if (!isLoopResult(r)) return false;
  const ExprPtr& init = r->kids[0]->forInit();
  return init->kind == ExprKind::NewBuilder && init->builder.tag == BuilderTag::VecBuilder;
}

// A consumer position: single, unranged, scalar iterator.
inline bool isSimpleConsumer(const Expr& f) {
  return f.iters.size() == 1 && f.iters[0].kind == IterKind::Scalar && !f.iters[0].ranged && isLoopLambda(f.forFunc());
}

// Rewrites a producer body so that each merge into its builder runs the
// consumer body on the merged element instead.
class Composer {
 public:
  Composer(PassContext& ctx, const ExprPtr& producer, const ExprPtr& consumer)
      : ctx_(ctx),
        b1_(producer->params[0].name),
        i1_(producer->params[1].name),
        b2_(consumer->params[0].name),
        i2_(consumer->params[1].name),
        x2_(consumer->params[2].name),
        body2_(consumer->kids[0]) {}

  // nullptr when the body is not a merge tree. `merges` is the number of
  // merges on every path, or -1 when paths differ.
  ExprPtr compose(const ExprPtr& t, int& merges) {
    switch (t->kind) {
      case ExprKind::Ident:
        if (t->name != b1_) return nullptr;
        merges = 0;
        return ir::ident(b2_, t->span);
      case ExprKind::Merge: {
        const ExprPtr& b = t->kids[0];
        if (b->kind != ExprKind::Ident || b->name != b1_ || isFree(t->kids[1], b1_)) return nullptr;
        merges = 1;
        return instantiate(t->kids[1]);
      }
      case ExprKind::If: {
        if (isFree(t->kids[0], b1_)) return nullptr;
        int mt = 0, mf = 0;
        ExprPtr a = compose(t->kids[1], mt);
        if (!a) return nullptr;
        ExprPtr c = compose(t->kids[2], mf);
        if (!c) return nullptr;
        merges = mt == mf ? mt : -1;
        return ir::ifThen(t->kids[0], a, c, t->span);
      }
      case ExprKind::Let: {
        if (t->name == b1_ || isFree(t->kids[0], b1_)) return nullptr;
        ExprPtr body = compose(t->kids[1], merges);
        if (!body) return nullptr;
        return ir::let(t->name, t->kids[0], body, t->span);
      }
      default:
        return nullptr;
    }
  }

 private:
  PassContext& ctx_;
  std::string b1_, i1_, b2_, i2_, x2_;
  ExprPtr body2_;

  ExprPtr instantiate(const ExprPtr& v) {
    Bindings idx;
    if (i2_ != i1_) idx[i2_] = ir::ident(i1_);
    if (isTrivial(v) || singleUnconditionalUse(body2_, x2_)) {
      Bindings all = idx;
      all[x2_] = v;
      return substitute(body2_, all, ctx_.names());
    }
    ExprPtr body = idx.empty() ? body2_ : substitute(body2_, idx, ctx_.names());
    return ir::let(x2_, v, body, v->span);
  }
};

inline ExprPtr fuseVerticalAt(PassContext& ctx, const ExprPtr& c) {
  if (c->kind != ExprKind::For || !isSimpleConsumer(*c)) return nullptr;
  const ExprPtr& data = c->iterData(0);
  if (!isVectorProducer(data)) return nullptr;
  const ExprPtr& p = data->kids[0];
  const ExprPtr& f1 = p->forFunc();
  const ExprPtr& f2 = c->forFunc();
  Composer comp(ctx, f1, f2);
  int merges = 0;
  ExprPtr body = comp.compose(f1->kids[0], merges);
  if (!body) return nullptr;
  // The consumer's index is the producer's only when every iteration emits one element.
  if (merges != 1 && isFree(f2->kids[0], f2->params[1].name)) return nullptr;
  ExprPtr func = ir::lambda({f2->params[0], f1->params[1], f1->params[2]}, body, f2->span);
  ctx.bump();
  return withLoop(*p, c->forInit(), func);
}

// `x := result(for(.., vecbuilder, ..)); ... for(x, ..) ...` with that For the
// single, unconditional use of x: moves the producer into the For.
inline ExprPtr sinkProducerAt(PassContext& ctx, const ExprPtr& l) {
  if (l->kind != ExprKind::Let || !isVectorProducer(l->kids[0])) return nullptr;
  const ExprPtr& body = l->kids[1];
  if (!singleUnconditionalUse(body, l->name)) return nullptr;
  bool consumed = false;
  visit(body, [&](const ExprPtr& x) {
    if (x->kind == ExprKind::Lambda) return false;
    if (x->kind == ExprKind::For && isSimpleConsumer(*x) && x->iterData(0)->kind == ExprKind::Ident &&
        x->iterData(0)->name == l->name)
      consumed = true;
    return !consumed;
  });
  if (!consumed) return nullptr;
  ctx.bump();
  return substitute(body, {{l->name, l->kids[0]}}, ctx.names());
}

struct Candidate {
  ExprPtr node;
  std::set<std::string> crossed;  // Let binders between the search root and the node
};

// Loop results evaluated whenever `x` is, not below a lambda. Let bodies are
// entered only when `crossLets`.
inline void collectCandidates(const ExprPtr& x, bool crossLets, std::set<std::string>& crossed,
                              std::vector<Candidate>& out) {
  if (isLoopResult(x)) {
    out.push_back({x, crossed});
    return;
  }
  if (x->kind == ExprKind::Lambda) return;
  for (std::size_t i = 0; i < x->kids.size(); ++i) {
    if (conditionalKid(*x, i)) continue;
    if (x->kind == ExprKind::Let && i == 1) {
      if (!crossLets) continue;
      bool added = crossed.insert(x->name).second;
      collectCandidates(x->kids[i], crossLets, crossed, out);
      if (added) crossed.erase(x->name);
      continue;
    }
    collectCandidates(x->kids[i], crossLets, crossed, out);
  }
}

// One loop computing both loops' builders as a structure.
inline ExprPtr mergeLoops(PassContext& ctx, const Expr& f1, const Expr& f2) {
  const ExprPtr& l1 = f1.forFunc();
  const ExprPtr& l2 = f2.forFunc();
  std::string bs = ctx.fresh("bs");
  ExprPtr t1 = substitute(l1->kids[0], {{l1->params[0].name, ir::getField(ir::ident(bs), 0)}}, ctx.names());
  Bindings b2 = {{l2->params[0].name, ir::getField(ir::ident(bs), 1)}};
  if (l2->params[1].name != l1->params[1].name) b2[l2->params[1].name] = ir::ident(l1->params[1].name);
  if (l2->params[2].name != l1->params[2].name) b2[l2->params[2].name] = ir::ident(l1->params[2].name);
  ExprPtr t2 = substitute(l2->kids[0], b2, ctx.names());
  ExprPtr func = ir::lambda({Param{bs, {}}, l1->params[1], l1->params[2]}, ir::makeStruct({t1, t2}), l1->span);
  return withLoop(f1, ir::makeStruct({f1.forInit(), f2.forInit()}), func);
}

// Two loop results over the same iterators below different operands of `n`.
inline ExprPtr fuseOperandsAt(PassContext& ctx, const ExprPtr& n) {
  if (n->kind == ExprKind::Lambda || n->kind == ExprKind::Let) return nullptr;
  std::vector<std::pair<std::size_t, Candidate>> cands;
  for (std::size_t i = 0; i < n->kids.size(); ++i) {
    if (conditionalKid(*n, i)) continue;
    std::set<std::string> crossed;
    std::vector<Candidate> found;
    collectCandidates(n->kids[i], false, crossed, found);
    for (auto& c : found) cands.emplace_back(i, std::move(c));
  }
  for (std::size_t a = 0; a < cands.size(); ++a) {
    for (std::size_t b = a + 1; b < cands.size(); ++b) {
      if (cands[a].first == cands[b].first) continue;
      const ExprPtr& r1 = cands[a].second.node;
      const ExprPtr& r2 = cands[b].second.node;
      if (!sameIterSpec(*r1->kids[0], *r2->kids[0])) continue;
      ExprPtr fused = ir::result(mergeLoops(ctx, *r1->kids[0], *r2->kids[0]));
      ctx.bump();
      if (n->kind == ExprKind::MakeStruct && n->kids.size() == 2 && n->kids[0] == r1 && n->kids[1] == r2) return fused;
      std::string t = ctx.fresh("t");
      ExprPtr body = replaceNode(n, r1.get(), ir::getField(ir::ident(t), 0));
      body = replaceNode(body, r2.get(), ir::getField(ir::ident(t), 1));
      return ir::let(t, fused, body, n->span);
    }
  }
  return nullptr;
}

// `t := result(for(I, ..)); body` with another loop over I in body whose
// inputs are all bound before t.
inline ExprPtr fuseIntoLetAt(PassContext& ctx, const ExprPtr& l) {
  if (l->kind != ExprKind::Let || !isLoopResult(l->kids[0])) return nullptr;
  const ExprPtr& r1 = l->kids[0];
  std::set<std::string> crossed;
  std::vector<Candidate> found;
  collectCandidates(l->kids[1], true, crossed, found);
  for (const auto& c : found) {
    if (!sameIterSpec(*r1->kids[0], *c.node->kids[0])) continue;
    auto fv = freeVariables(c.node);
    bool blocked = fv.count(l->name) != 0;
    for (const auto& n : c.crossed) blocked |= fv.count(n) != 0;
    if (blocked) continue;
    ExprPtr fused = ir::result(mergeLoops(ctx, *r1->kids[0], *c.node->kids[0]));
    std::string hole = ctx.fresh("hole");
    ExprPtr body = replaceNode(l->kids[1], c.node.get(), ir::ident(hole));
    body = substitute(body,
                      {{l->name, ir::getField(ir::ident(l->name), 0)}, {hole, ir::getField(ir::ident(l->name), 1)}},
                      ctx.names());
    ctx.bump();
    return ir::let(l->name, fused, body, l->span);
  }
  return nullptr;
}

}  // namespace detail

// Vertical fusion of vecbuilder producers into their consumers, then
// horizontal fusion of loops over the same iterators, to a fixpoint.
inline ExprPtr fusePass(PassContext& ctx, const ExprPtr& input) {
  ExprPtr e = input;
  for (;;) {
    e = ctx.uniquify(e);
    ExprPtr next = rewriteBottomUp(e, [&](const ExprPtr& x) -> ExprPtr {
      if (ExprPtr r = detail::fuseVerticalAt(ctx, x)) return r;
      return detail::sinkProducerAt(ctx, x);
    });
    if (next != e) {
      e = next;
      continue;
    }
    next = rewriteBottomUp(e, [&](const ExprPtr& x) -> ExprPtr {
      if (ExprPtr r = detail::fuseIntoLetAt(ctx, x)) return r;
      return detail::fuseOperandsAt(ctx, x);
    });
    if (next == e) return e;
    e = next;
  }
}

}  // namespace weldmill::passes
