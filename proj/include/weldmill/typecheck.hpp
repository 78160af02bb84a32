#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "weldmill/expr.hpp"

namespace weldmill {

// Bindings for a program's free variables and for extern functions
// (`call(name, ...)`), the latter as Function types.
struct TypeEnv {
  std::map<std::string, IrType> vars;
  std::map<std::string, IrType> externs;
};

// Annotates every node with its type, fills lambda parameter types and
// resolves `?` holes in builder kinds. Throws TypeError.
ExprPtr inferTypes(const ExprPtr& e, const TypeEnv& env);

namespace detail {

class Inference {
 public:
  explicit Inference(const TypeEnv& env) : env_(env) {}

  ExprPtr run(const ExprPtr& e) {
    ExprPtr typed = infer(e, {});
    solveDeferred(true);
    return finalize(typed);
  }

 private:
  struct Pending {
    Span span;
    std::function<bool()> step;
  };

  const TypeEnv& env_;
  std::vector<IrType> binding_;
  std::vector<std::pair<std::string, IrType>> scope_;
  std::vector<Pending> deferred_;

  IrType fresh() {
    binding_.emplace_back();
    return IrType::var(static_cast<int>(binding_.size() - 1));
  }

  // Follows variable bindings at the top level only.
  IrType shallow(IrType t) const {
    while (t.isVar() && binding_[t.varId()].valid()) t = binding_[t.varId()];
    return t;
  }

  IrType resolve(const IrType& t0) const {
    IrType t = shallow(t0);
    switch (t.tag()) {
      case TypeTag::Vec: return IrType::vec(resolve(t.elem()));
      case TypeTag::Struct: {
        std::vector<IrType> f;
        for (const auto& x : t.fields()) f.push_back(resolve(x));
        return IrType::structure(std::move(f));
      }
      case TypeTag::Dict: return IrType::dict(resolve(t.key()), resolve(t.value()));
      case TypeTag::Builder: {
        BuilderKind k = t.builderKind();
        k.a = resolve(k.a);
        if (k.b.valid()) k.b = resolve(k.b);
        return IrType::builder(k);
      }
      case TypeTag::Function: {
        std::vector<IrType> ps;
        for (const auto& x : t.params()) ps.push_back(resolve(x));
        return IrType::function(std::move(ps), resolve(t.ret()));
      }
      default: return t;
    }
  }

  // Replaces `?` holes with fresh variables.
  IrType instantiate(const IrType& t) {
    if (!t.valid()) return fresh();
    switch (t.tag()) {
      case TypeTag::Hole: return fresh();
      case TypeTag::Vec: return IrType::vec(instantiate(t.elem()));
      case TypeTag::Struct: {
        std::vector<IrType> f;
        for (const auto& x : t.fields()) f.push_back(instantiate(x));
        return IrType::structure(std::move(f));
      }
      case TypeTag::Dict: return IrType::dict(instantiate(t.key()), instantiate(t.value()));
      case TypeTag::Builder: return IrType::builder(instantiateKind(t.builderKind()));
      case TypeTag::Function: {
        std::vector<IrType> ps;
        for (const auto& x : t.params()) ps.push_back(instantiate(x));
        return IrType::function(std::move(ps), instantiate(t.ret()));
      }
      default: return t;
    }
  }

  BuilderKind instantiateKind(BuilderKind k) {
    k.a = instantiate(k.a);
    if (builderIsKeyed(k.tag)) k.b = instantiate(k.b);
    return k;
  }

  bool occurs(int id, const IrType& t0) const {
    IrType t = shallow(t0);
    if (t.isVar()) return t.varId() == id;
    if (t.isBuilder()) {
      const auto& k = t.builderKind();
      return occurs(id, k.a) || (k.b.valid() && occurs(id, k.b));
    }
    if (t.isFunction()) {
      for (const auto& p : t.params())
        if (occurs(id, p)) return true;
      return occurs(id, t.ret());
    }
    if (t.isVec() || t.isStruct() || t.isDict()) {
      for (const auto& f : t.fields())
        if (occurs(id, f)) return true;
    }
    return false;
  }

  [[noreturn]] void mismatch(const IrType& a, const IrType& b, Span span, const std::string& what) const {
    std::string l = resolve(a).str(), r = resolve(b).str();
    throw TypeError(what + ": " + l + " vs " + r, span, l, r);
  }

  void unify(const IrType& a0, const IrType& b0, Span span, const char* what = "type mismatch") {
    IrType a = shallow(a0), b = shallow(b0);
    if (a.isVar() && b.isVar() && a.varId() == b.varId()) return;
    if (a.isVar()) {
      if (occurs(a.varId(), b)) mismatch(a, b, span, "recursive type");
      binding_[a.varId()] = b;
      return;
    }
    if (b.isVar()) {
      unify(b, a, span, what);
      return;
    }
    if (a.tag() != b.tag()) mismatch(a0, b0, span, what);
    switch (a.tag()) {
      case TypeTag::Scalar:
      case TypeTag::Simd:
        if (a.scalarKind() != b.scalarKind()) mismatch(a0, b0, span, what);
        return;
      case TypeTag::Vec: unify(a.elem(), b.elem(), span, what); return;
      case TypeTag::Struct:
        if (a.fields().size() != b.fields().size()) mismatch(a0, b0, span, what);
        for (std::size_t i = 0; i < a.fields().size(); ++i) unify(a.fields()[i], b.fields()[i], span, what);
        return;
      case TypeTag::Dict:
        unify(a.key(), b.key(), span, what);
        unify(a.value(), b.value(), span, what);
        return;
      case TypeTag::Builder: {
        const auto& x = a.builderKind();
        const auto& y = b.builderKind();
        if (x.tag != y.tag || (builderHasOp(x.tag) && x.op != y.op)) mismatch(a0, b0, span, what);
        unify(x.a, y.a, span, what);
        if (builderIsKeyed(x.tag)) unify(x.b, y.b, span, what);
        return;
      }
      case TypeTag::Function:
        if (a.params().size() != b.params().size()) mismatch(a0, b0, span, what);
        for (std::size_t i = 0; i < a.params().size(); ++i) unify(a.params()[i], b.params()[i], span, what);
        unify(a.ret(), b.ret(), span, what);
        return;
      default: return;
    }
  }

  // Runs `step` now, or later once the types it inspects are known.
  void later(Span span, std::function<bool()> step) {
    if (!step()) deferred_.push_back({span, std::move(step)});
  }

  void solveDeferred(bool final) {
    bool progress = true;
    while (progress && !deferred_.empty()) {
      progress = false;
      std::vector<Pending> pending;
      pending.swap(deferred_);
      for (auto& p : pending) {
        if (p.step()) progress = true;
        else deferred_.push_back(std::move(p));
      }
    }
    if (final && !deferred_.empty())
      throw TypeError("cannot infer a type here; add an annotation", deferred_.front().span);
  }

  ExprPtr typed(const Expr& e, std::vector<ExprPtr> kids, IrType t) {
    Expr c = e;
    c.kids = std::move(kids);
    c.type = std::move(t);
    return std::make_shared<const Expr>(std::move(c));
  }

  IrType lookupVar(const std::string& name, Span span) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == name) return it->second;
    auto g = env_.vars.find(name);
    if (g != env_.vars.end()) return g->second;
    throw TypeError("unbound name '" + name + "'", span);
  }

  static bool isNumericScalarOrSimd(const IrType& t) {
    return (t.isScalar() && isNumeric(t.scalarKind())) || (t.isSimd() && isNumeric(t.scalarKind()));
  }

  ExprPtr infer(const ExprPtr& e, const IrType& hint) {
    const Span sp = e->span;
    switch (e->kind) {
      case ExprKind::Literal: return typed(*e, {}, IrType::scalar(literalKind(e->lit)));
      case ExprKind::Ident: return typed(*e, {}, lookupVar(e->name, sp));
      case ExprKind::Let: {
        ExprPtr v = infer(e->kids[0], {});
        scope_.emplace_back(e->name, v->type);
        ExprPtr b = infer(e->kids[1], hint);
        scope_.pop_back();
        IrType t = b->type;
        return typed(*e, {v, b}, t);
      }
      case ExprKind::Lambda: return lambda(e, hint);
      case ExprKind::Apply: {
        std::vector<ExprPtr> args;
        std::vector<IrType> argTypes;
        for (std::size_t i = 1; i < e->kids.size(); ++i) {
          args.push_back(infer(e->kids[i], {}));
          argTypes.push_back(args.back()->type);
        }
        IrType ret = fresh();
        IrType want = IrType::function(argTypes, ret);
        ExprPtr fn = infer(e->kids[0], want);
        unify(fn->type, want, sp, "application");
        std::vector<ExprPtr> kids{fn};
        kids.insert(kids.end(), args.begin(), args.end());
        return typed(*e, std::move(kids), ret);
      }
      case ExprKind::Binary: return binaryOp(e);
      case ExprKind::Unary: return unaryOp(e);
      case ExprKind::If: {
        ExprPtr c = infer(e->kids[0], {});
        unify(c->type, IrType::boolean(), e->kids[0]->span, "if condition");
        ExprPtr t = infer(e->kids[1], hint);
        ExprPtr f = infer(e->kids[2], hint.valid() ? hint : t->type);
        unify(t->type, f->type, sp, "if branches differ");
        IrType ty = t->type;
        return typed(*e, {c, t, f}, ty);
      }
      case ExprKind::BitSelect: {
        ExprPtr c = infer(e->kids[0], {});
        ExprPtr t = infer(e->kids[1], {});
        ExprPtr f = infer(e->kids[2], {});
        unify(t->type, f->type, sp, "bitselect branches differ");
        IrType ct = c->type, tt = t->type;
        later(sp, [this, ct, tt, sp] {
          IrType a = resolve(tt), c0 = shallow(ct);
          if (a.hasUnknowns() || c0.isVar()) return false;
          if (a.containsBuilder() || a.is(TypeTag::Function))
            throw TypeError("bitselect evaluates both arms; builder or function arms are not allowed", sp,
                            a.str());
          if (a.isSimd()) unify(c0, IrType::simd(ScalarKind::Bool), sp, "bitselect mask");
          else unify(c0, IrType::boolean(), sp, "bitselect condition");
          return true;
        });
        return typed(*e, {c, t, f}, tt);
      }
      case ExprKind::Iterate: {
        ExprPtr init = infer(e->kids[0], {});
        IrType t = init->type;
        IrType want = IrType::function({t}, IrType::structure({t, IrType::boolean()}));
        ExprPtr upd = infer(e->kids[1], want);
        unify(upd->type, want, e->kids[1]->span, "iterate update must be T => {T, bool}");
        return typed(*e, {init, upd}, t);
      }
      case ExprKind::Lookup: {
        ExprPtr c = infer(e->kids[0], {});
        ExprPtr k = infer(e->kids[1], {});
        IrType r = fresh(), ct = c->type, kt = k->type;
        later(sp, [this, ct, kt, r, sp] {
          IrType c0 = shallow(ct);
          if (c0.isVar()) return false;
          if (c0.isVec()) {
            unify(kt, IrType::i64(), sp, "vector index");
            unify(r, c0.elem(), sp);
          } else if (c0.isDict()) {
            unify(kt, c0.key(), sp, "dictionary key");
            unify(r, c0.value(), sp);
          } else {
            throw TypeError("lookup needs a vector or dictionary, got " + resolve(c0).str(), sp, resolve(c0).str());
          }
          return true;
        });
        return typed(*e, {c, k}, r);
      }
      case ExprKind::GetField: {
        ExprPtr s = infer(e->kids[0], {});
        IrType r = fresh(), st = s->type;
        int idx = e->index;
        later(sp, [this, st, r, idx, sp] {
          IrType s0 = shallow(st);
          if (s0.isVar()) return false;
          if (!s0.isStruct())
            throw TypeError("field access on non-structure " + resolve(s0).str(), sp, resolve(s0).str());
          if (idx >= static_cast<int>(s0.fields().size()))
            throw TypeError("field ." + std::to_string(idx) + " out of range for " + resolve(s0).str(), sp,
                            resolve(s0).str());
          unify(r, s0.fields()[idx], sp);
          return true;
        });
        return typed(*e, {s}, r);
      }
      case ExprKind::Len: {
        ExprPtr v = infer(e->kids[0], {});
        IrType vt = v->type;
        later(sp, [this, vt, sp] {
          IrType v0 = shallow(vt);
          if (v0.isVar()) return false;
          if (!v0.isVec() && !v0.isDict())
            throw TypeError("len needs a vector or dictionary, got " + resolve(v0).str(), sp, resolve(v0).str());
          return true;
        });
        return typed(*e, {v}, IrType::i64());
      }
      case ExprKind::Sort: {
        ExprPtr v = infer(e->kids[0], {});
        IrType t = fresh();
        unify(v->type, IrType::vec(t), e->kids[0]->span, "sort input");
        IrType key = fresh();
        IrType want = IrType::function({t}, key);
        ExprPtr f = infer(e->kids[1], want);
        unify(f->type, want, e->kids[1]->span, "sort key function");
        later(sp, [this, key, sp] {
          IrType k = resolve(key);
          if (k.hasUnknowns()) return false;
          if (!isHashableKey(k)) throw TypeError("sort key must be a scalar or structure of scalars", sp, k.str());
          return true;
        });
        IrType vt = v->type;
        return typed(*e, {v, f}, vt);
      }
      case ExprKind::ToVec: {
        ExprPtr d = infer(e->kids[0], {});
        IrType k = fresh(), v = fresh();
        unify(d->type, IrType::dict(k, v), sp, "tovec input");
        return typed(*e, {d}, IrType::vec(IrType::structure({k, v})));
      }
      case ExprKind::MakeStruct: {
        std::vector<ExprPtr> kids;
        std::vector<IrType> fs;
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
          IrType h;
          if (hint.valid()) {
            IrType h0 = shallow(hint);
            if (h0.isStruct() && h0.fields().size() == e->kids.size()) h = h0.fields()[i];
          }
          kids.push_back(infer(e->kids[i], h));
          fs.push_back(kids.back()->type);
        }
        return typed(*e, std::move(kids), IrType::structure(std::move(fs)));
      }
      case ExprKind::MakeVector: {
        std::vector<ExprPtr> kids;
        IrType t = fresh();
        for (const auto& k : e->kids) {
          kids.push_back(infer(k, {}));
          unify(t, kids.back()->type, k->span, "vector elements differ");
        }
        later(sp, [this, t, sp] {
          IrType r = resolve(t);
          if (r.hasUnknowns()) return false;
          if (r.containsBuilder() || r.is(TypeTag::Function) || r.isSimd())
            throw TypeError("vector elements cannot be builders, functions or simd values", sp, r.str());
          return true;
        });
        return typed(*e, std::move(kids), IrType::vec(t));
      }
      case ExprKind::NewBuilder: {
        BuilderKind k = instantiateKind(e->builder);
        std::vector<ExprPtr> kids;
        if (!e->kids.empty()) {
          kids.push_back(infer(e->kids[0], {}));
          if (k.tag == BuilderTag::VecMerger)
            unify(kids[0]->type, IrType::vec(k.a), e->kids[0]->span, "vecmerger initial vector");
          else
            unify(kids[0]->type, IrType::i64(), e->kids[0]->span, "vecbuilder size hint");
        }
        IrType t = IrType::builder(k);
        if (hint.valid()) {
          IrType h = shallow(hint);
          if (h.isBuilder() && h.builderKind().tag == k.tag) unify(t, h, sp, "builder");
        }
        return typed(*e, std::move(kids), t);
      }
      case ExprKind::Merge: {
        ExprPtr b = infer(e->kids[0], hint);
        ExprPtr v = infer(e->kids[1], {});
        IrType bt = b->type, vt = v->type;
        later(sp, [this, bt, vt, sp] {
          IrType b0 = shallow(bt);
          if (b0.isVar()) return false;
          if (!b0.isBuilder())
            throw TypeError("merge target must be a builder, got " + resolve(b0).str(), sp, resolve(b0).str());
          const BuilderKind& k = b0.builderKind();
          IrType v0 = shallow(vt);
          if (v0.isSimd() && (k.tag == BuilderTag::Merger || k.tag == BuilderTag::VecBuilder)) {
            unify(k.a, IrType::scalar(v0.scalarKind()), sp, "simd merge");
            return true;
          }
          unify(vt, k.mergeInput(), sp, "merge value does not match builder");
          return true;
        });
        return typed(*e, {b, v}, bt);
      }
      case ExprKind::Result: {
        ExprPtr b = infer(e->kids[0], {});
        IrType r = fresh(), bt = b->type;
        later(sp, [this, bt, r, sp] {
          IrType b0 = resolve(bt);
          if (b0.isVar()) return false;
          if (!b0.isBuilderBearing())
            throw TypeError("result needs a builder or a structure of builders, got " + b0.str(), sp, b0.str());
          if (b0.hasUnknowns()) {
            // Structure of builders with partially unknown kinds: rebuild lazily.
            std::function<IrType(const IrType&)> go = [&](const IrType& t) -> IrType {
              IrType s = shallow(t);
              if (s.isBuilder()) return s.builderKind().resultType();
              std::vector<IrType> f;
              for (const auto& x : s.fields()) f.push_back(go(x));
              return IrType::structure(std::move(f));
            };
            unify(r, go(bt), sp);
            return true;
          }
          unify(r, resultTypeOf(b0), sp);
          return true;
        });
        return typed(*e, {b}, r);
      }
      case ExprKind::For: return forLoop(e);
      case ExprKind::ExternCall: {
        auto it = env_.externs.find(e->name);
        if (it == env_.externs.end()) throw TypeError("unknown extern function '" + e->name + "'", sp);
        const IrType& sig = it->second;
        if (!sig.isFunction() || sig.params().size() != e->kids.size())
          throw TypeError("extern '" + e->name + "' called with " + std::to_string(e->kids.size()) + " arguments",
                          sp, sig.str());
        std::vector<ExprPtr> kids;
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
          kids.push_back(infer(e->kids[i], {}));
          unify(kids.back()->type, sig.params()[i], e->kids[i]->span, "extern argument");
        }
        return typed(*e, std::move(kids), sig.ret());
      }
      case ExprKind::Broadcast: {
        ExprPtr x = infer(e->kids[0], {});
        IrType t = resolve(x->type);
        if (!t.isScalar() || !isNumeric(t.scalarKind()))
          throw TypeError("broadcast needs a known numeric scalar, got " + t.str(), sp, t.str());
        return typed(*e, {x}, IrType::simd(t.scalarKind()));
      }
      case ExprKind::Cast: {
        ExprPtr x = infer(e->kids[0], {});
        IrType xt = x->type;
        later(sp, [this, xt, sp] {
          IrType t = shallow(xt);
          if (t.isVar()) return false;
          if (!t.isScalar()) throw TypeError("cast needs a scalar, got " + resolve(t).str(), sp, resolve(t).str());
          return true;
        });
        return typed(*e, {x}, IrType::scalar(e->castTo));
      }
      case ExprKind::Sugar:
        throw TypeError(std::string("'") + sugarName(e->sugar) + "' must be expanded before type inference", sp);
    }
    throw TypeError("unknown expression", sp);
  }

  ExprPtr lambda(const ExprPtr& e, const IrType& hint) {
    IrType h = hint.valid() ? shallow(hint) : IrType();
    std::vector<IrType> ps;
    for (std::size_t i = 0; i < e->params.size(); ++i) {
      IrType t = instantiate(e->params[i].type);
      if (h.isFunction() && h.params().size() == e->params.size()) unify(t, h.params()[i], e->span, "parameter");
      ps.push_back(t);
    }
    std::size_t mark = scope_.size();
    for (std::size_t i = 0; i < e->params.size(); ++i) scope_.emplace_back(e->params[i].name, ps[i]);
    IrType retHint = h.isFunction() ? h.ret() : IrType();
    ExprPtr body = infer(e->kids[0], retHint);
    scope_.resize(mark);
    Expr c = *e;
    for (std::size_t i = 0; i < ps.size(); ++i) c.params[i].type = ps[i];
    c.kids = {body};
    c.type = IrType::function(ps, body->type);
    return std::make_shared<const Expr>(std::move(c));
  }

  ExprPtr forLoop(const ExprPtr& e) {
    const Span sp = e->span;
    std::vector<ExprPtr> kids(e->kids.size());
    std::vector<IrType> elems;
    for (std::size_t i = 0; i < e->iters.size(); ++i) {
      std::size_t off = e->iterOffset(i);
      ExprPtr d = infer(e->kids[off], {});
      IrType t = fresh();
      unify(d->type, IrType::vec(t), e->kids[off]->span, "for iterates over a vector");
      kids[off] = d;
      if (e->iters[i].ranged) {
        for (std::size_t j = 1; j <= 3; ++j) {
          kids[off + j] = infer(e->kids[off + j], {});
          unify(kids[off + j]->type, IrType::i64(), e->kids[off + j]->span, "iterator bound");
        }
      }
      if (e->iters[i].kind == IterKind::Simd) {
        IrType r = resolve(t);
        if (!r.isScalar() || !isNumeric(r.scalarKind()))
          throw TypeError("simditer needs a vector of known numeric scalars", e->kids[off]->span, r.str());
        elems.push_back(IrType::simd(r.scalarKind()));
      } else {
        elems.push_back(t);
      }
    }
    IrType elem = elems.size() == 1 ? elems[0] : IrType::structure(elems);
    ExprPtr init = infer(e->kids[0], {});
    IrType bt = init->type;
    IrType want = IrType::function({bt, IrType::i64(), elem}, bt);
    ExprPtr func = infer(e->kids[1], want);
    unify(func->type, want, e->kids[1]->span, "for-loop function must be (builders, i64, element) => builders");
    kids[0] = init;
    kids[1] = func;
    later(sp, [this, bt, sp] {
      IrType b = resolve(bt);
      if (b.isVar()) return false;
      if (!b.isBuilderBearing())
        throw TypeError("for-loop state must be a builder or a structure of builders, got " + b.str(), sp, b.str());
      return true;
    });
    return typed(*e, std::move(kids), bt);
  }

  ExprPtr binaryOp(const ExprPtr& e) {
    const Span sp = e->span;
    ExprPtr l = infer(e->kids[0], {});
    ExprPtr r = infer(e->kids[1], {});
    unify(l->type, r->type, sp, std::string("operands of '").append(binOpSymbol(e->binop)).append("' differ").c_str());
    IrType lt = l->type;
    BinOp op = e->binop;
    IrType out = (isArithmetic(op) || isBitwise(op) || isLogical(op)) ? lt : fresh();
    later(sp, [this, lt, out, op, sp] {
      IrType t = shallow(lt);
      if (t.isVar()) return false;
      bool simd = t.isSimd();
      if (!t.isScalar() && !simd)
        throw TypeError(std::string("operator '") + binOpSymbol(op) + "' needs scalars, got " + resolve(t).str(), sp,
                        resolve(t).str());
      ScalarKind k = t.scalarKind();
      bool ok = true;
      if (isArithmetic(op)) ok = isNumeric(k);
      else if (isLogical(op)) ok = k == ScalarKind::Bool;
      else if (isBitwise(op)) ok = k == ScalarKind::Bool || isIntegral(k);
      else if (isComparison(op)) ok = op == BinOp::Eq || op == BinOp::Ne || isNumeric(k);
      if (!ok)
        throw TypeError(std::string("operator '") + binOpSymbol(op) + "' does not apply to " + t.str(), sp, t.str());
      if (isComparison(op)) unify(out, simd ? IrType::simd(ScalarKind::Bool) : IrType::boolean(), sp);
      return true;
    });
    return typed(*e, {l, r}, out);
  }

  ExprPtr unaryOp(const ExprPtr& e) {
    const Span sp = e->span;
    ExprPtr x = infer(e->kids[0], {});
    IrType xt = x->type;
    UnaryOp op = e->unop;
    later(sp, [this, xt, op, sp] {
      IrType t = shallow(xt);
      if (t.isVar()) return false;
      if (!t.isScalar() && !t.isSimd())
        throw TypeError(std::string("'") + unaryOpName(op) + "' needs a scalar, got " + resolve(t).str(), sp,
                        resolve(t).str());
      ScalarKind k = t.scalarKind();
      bool ok = true;
      switch (op) {
        case UnaryOp::Neg:
        case UnaryOp::Abs: ok = isNumeric(k); break;
        case UnaryOp::Not: ok = k == ScalarKind::Bool; break;
        default: ok = isFloating(k); break;
      }
      if (!ok) throw TypeError(std::string("'") + unaryOpName(op) + "' does not apply to " + t.str(), sp, t.str());
      return true;
    });
    return typed(*e, {x}, xt);
  }

  void validateKind(const BuilderKind& k, Span sp) const {
    auto bad = [&](const std::string& why) {
      throw TypeError("invalid builder " + k.str() + ": " + why, sp, k.str());
    };
    auto plain = [](const IrType& t) { return !t.containsBuilder() && !t.is(TypeTag::Function) && !t.isSimd(); };
    if (!plain(k.a) || (k.b.valid() && !plain(k.b))) bad("element types must be plain data");
    switch (k.tag) {
      case BuilderTag::VecBuilder: break;
      case BuilderTag::Merger:
      case BuilderTag::VecMerger:
        if (!admitsMergeOp(k.a, k.op)) bad("element type does not admit the merge operator");
        break;
      case BuilderTag::DictMerger:
        if (!isHashableKey(k.a)) bad("key must be a scalar or structure of scalars");
        if (!admitsMergeOp(k.b, k.op)) bad("value type does not admit the merge operator");
        break;
      case BuilderTag::GroupBuilder:
        if (!isHashableKey(k.a)) bad("key must be a scalar or structure of scalars");
        break;
    }
  }

  void validateTypeBuilders(const IrType& t, Span sp) const {
    if (t.isBuilder()) {
      validateKind(t.builderKind(), sp);
      return;
    }
    if (t.isVec() || t.isStruct() || t.isDict())
      for (const auto& f : t.fields()) validateTypeBuilders(f, sp);
    if (t.isFunction()) {
      for (const auto& p : t.params()) validateTypeBuilders(p, sp);
      validateTypeBuilders(t.ret(), sp);
    }
  }

  ExprPtr finalize(const ExprPtr& e) {
    Expr c = *e;
    c.type = resolve(e->type);
    if (c.type.hasUnknowns()) throw TypeError("cannot infer a type here; add an annotation", e->span, c.type.str());
    validateTypeBuilders(c.type, e->span);
    if (c.kind == ExprKind::Lambda)
      for (auto& p : c.params) p.type = resolve(p.type);
    if (c.kind == ExprKind::NewBuilder) c.builder = c.type.builderKind();
    for (auto& k : c.kids) k = finalize(k);
    return std::make_shared<const Expr>(std::move(c));
  }
};

}  // namespace detail

inline ExprPtr inferTypes(const ExprPtr& e, const TypeEnv& env) {
  detail::Inference inf(env);
  return inf.run(e);
}

}  // namespace weldmill
