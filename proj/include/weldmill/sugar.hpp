#pragma once

#include <optional>
#include <string>
#include <vector>

#include "weldmill/expr_utils.hpp"
#include "weldmill/parser.hpp"

namespace weldmill {

// Rewrites map/filter/flatmap/reduce/zip/groupby into loops and builders.
// The result contains core operators only. Throws ExpandError on malformed calls.
ExprPtr expandSugar(const ExprPtr& e);

// Operator `f` folds with when it is `(a, b) => a op b` (either operand order)
// for a merge op.
std::optional<BinOp> recognizeMergeLambda(const ExprPtr& f);

namespace detail {

class SugarExpander {
 public:
  explicit SugarExpander(const ExprPtr& root) : gen_(allNames(root)) {}

  ExprPtr expand(const ExprPtr& e) {
    return rewriteBottomUp(e, [this](const ExprPtr& x) -> ExprPtr {
      if (x->kind != ExprKind::Sugar) return nullptr;
      return one(*x);
    });
  }

 private:
  NameGen gen_;

  // Applies a function value to arguments, beta-reducing lambda literals.
  ExprPtr call(const ExprPtr& f, std::vector<ExprPtr> args) {
    if (f->kind == ExprKind::Lambda && f->params.size() == args.size()) {
      Bindings b;
      for (std::size_t i = 0; i < args.size(); ++i) b[f->params[i].name] = args[i];
      return substitute(f->kids[0], b, gen_);
    }
    return ir::apply(f, std::move(args), f->span);
  }

  static ExprPtr hole(BuilderTag tag, BinOp op = BinOp::Add) {
    BuilderKind k;
    k.tag = tag;
    k.a = IrType::hole();
    if (builderIsKeyed(tag)) k.b = IrType::hole();
    k.op = op;
    return ir::newBuilder(k);
  }

  struct LoopNames {
    std::string b, i, x;
  };
  LoopNames names() { return {gen_.fresh("b"), gen_.fresh("i"), gen_.fresh("x")}; }

  static std::vector<Param> params(const LoopNames& n) { return {{n.b, {}}, {n.i, {}}, {n.x, {}}}; }

  void arity(const Expr& e, std::size_t want) {
    if (e.kids.size() != want)
      throw ExpandError(std::string(sugarName(e.sugar)) + " takes " + std::to_string(want) + " arguments, got " +
                            std::to_string(e.kids.size()),
                        e.span);
  }

  ExprPtr one(const Expr& e) {
    Span sp = e.span;
    switch (e.sugar) {
      case SugarOp::Map: {
        arity(e, 2);
        auto n = names();
        ExprPtr body = ir::merge(ir::ident(n.b), call(e.kids[1], {ir::ident(n.x)}));
        return ir::result(
            ir::forLoop({{e.kids[0]}}, hole(BuilderTag::VecBuilder), ir::lambda(params(n), body), sp), sp);
      }
      case SugarOp::Filter: {
        arity(e, 2);
        auto n = names();
        ExprPtr body = ir::ifThen(call(e.kids[1], {ir::ident(n.x)}), ir::merge(ir::ident(n.b), ir::ident(n.x)),
                                  ir::ident(n.b));
        return ir::result(
            ir::forLoop({{e.kids[0]}}, hole(BuilderTag::VecBuilder), ir::lambda(params(n), body), sp), sp);
      }
      case SugarOp::FlatMap: {
        arity(e, 2);
        auto outer = names();
        auto inner = names();
        ExprPtr innerLoop = ir::forLoop({{call(e.kids[1], {ir::ident(outer.x)})}}, ir::ident(outer.b),
                                        ir::lambda(params(inner), ir::merge(ir::ident(inner.b), ir::ident(inner.x))));
        return ir::result(
            ir::forLoop({{e.kids[0]}}, hole(BuilderTag::VecBuilder), ir::lambda(params(outer), innerLoop), sp), sp);
      }
      case SugarOp::Zip: {
        if (e.kids.size() < 2)
          throw ExpandError("zip takes at least 2 arguments, got " + std::to_string(e.kids.size()), sp);
        std::vector<ir::Iter> iters;
        for (const auto& k : e.kids) iters.push_back({k});
        auto n = names();
        return ir::result(ir::forLoop(std::move(iters), hole(BuilderTag::VecBuilder),
                                      ir::lambda(params(n), ir::merge(ir::ident(n.b), ir::ident(n.x))), sp),
                          sp);
      }
      case SugarOp::GroupBy: {
        arity(e, 3);
        auto n = names();
        ExprPtr pair = ir::makeStruct({call(e.kids[1], {ir::ident(n.x)}), call(e.kids[2], {ir::ident(n.x)})});
        return ir::result(ir::forLoop({{e.kids[0]}}, hole(BuilderTag::GroupBuilder),
                                      ir::lambda(params(n), ir::merge(ir::ident(n.b), pair)), sp),
                          sp);
      }
      case SugarOp::Reduce: {
        arity(e, 3);
        const ExprPtr& v = e.kids[0];
        const ExprPtr& id = e.kids[1];
        const ExprPtr& f = e.kids[2];
        if (auto op = recognizeMergeLambda(f)) {
          auto n = names();
          ExprPtr init = hole(BuilderTag::Merger, *op);
          bool isIdentity = id->kind == ExprKind::Literal &&
                            literalEquals(id->lit, mergeIdentity(literalKind(id->lit), *op));
          if (!isIdentity) init = ir::merge(init, id);
          return ir::result(
              ir::forLoop({{v}}, init, ir::lambda(params(n), ir::merge(ir::ident(n.b), ir::ident(n.x))), sp), sp);
        }
        return sequentialReduce(v, id, f, sp);
      }
    }
    throw ExpandError("unknown sugar operator", sp);
  }

  // reduce with an arbitrary function folds left to right with iterate:
  //   vs := v; iterate({id, 0}, (s) => if(s.1 < len(vs),
  //       {{f(s.0, lookup(vs, s.1)), s.1 + 1}, s.1 + 1 < len(vs)}, {s, false})).0
  ExprPtr sequentialReduce(const ExprPtr& v, const ExprPtr& id, const ExprPtr& f, Span sp) {
    std::string vs = gen_.fresh("vs");
    std::string s = gen_.fresh("s");
    auto S = [&] { return ir::ident(s); };
    auto V = [&] { return ir::ident(vs); };
    ExprPtr idx = ir::getField(S(), 1);
    ExprPtr next = ir::binary(BinOp::Add, idx, ir::i64(1));
    ExprPtr step = call(f, {ir::getField(S(), 0), ir::lookup(V(), idx)});
    ExprPtr advance =
        ir::makeStruct({ir::makeStruct({step, next}), ir::binary(BinOp::Lt, next, ir::len(V()))});
    ExprPtr stop = ir::makeStruct({S(), ir::boolean(false)});
    ExprPtr body = ir::ifThen(ir::binary(BinOp::Lt, idx, ir::len(V())), advance, stop);
    ExprPtr loop = ir::iterate(ir::makeStruct({id, ir::i64(0)}), ir::lambda({{s, {}}}, body));
    return ir::let(vs, v, ir::getField(loop, 0, sp), sp);
  }
};

}  // namespace detail

inline std::optional<BinOp> recognizeMergeLambda(const ExprPtr& f) {
  if (f->kind != ExprKind::Lambda || f->params.size() != 2) return std::nullopt;
  const ExprPtr& body = f->kids[0];
  if (body->kind != ExprKind::Binary || !isMergeOp(body->binop)) return std::nullopt;
  const ExprPtr& l = body->kids[0];
  const ExprPtr& r = body->kids[1];
  if (l->kind != ExprKind::Ident || r->kind != ExprKind::Ident) return std::nullopt;
  const std::string& a = f->params[0].name;
  const std::string& b = f->params[1].name;
  if (a == b) return std::nullopt;
  if ((l->name == a && r->name == b) || (l->name == b && r->name == a)) return body->binop;
  return std::nullopt;
}

inline ExprPtr expandSugar(const ExprPtr& e) {
  detail::SugarExpander x(e);
  return x.expand(e);
}

}  // namespace weldmill
