#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "weldmill/error.hpp"
#include "weldmill/expr.hpp"
#include "weldmill/expr_utils.hpp"
#include "weldmill/typecheck.hpp"

namespace weldmill::passes {

inline constexpr int kDefaultRewriteBudget = 10000;

// State shared by the sweeps of one pass.
class PassContext {
 public:
  PassContext(std::string pass, const ExprPtr& e, const TypeEnv& env, int budget)
      : pass_(std::move(pass)), env_(env), budget_(budget), gen_(allNames(e)) {
    for (const auto& [name, type] : env.vars) gen_.reserve(name);
  }

  const std::string& pass() const { return pass_; }
  int rewrites() const { return rewrites_; }

  void bump() {
    if (++rewrites_ > budget_)
      throw OptimizeError("RewriteBudgetExhausted",
                          "pass '" + pass_ + "' exceeded its rewrite budget of " + std::to_string(budget_));
  }

  std::string fresh(const std::string& base) { return gen_.fresh(base); }
  NameGen& names() { return gen_; }
  ExprPtr retype(const ExprPtr& e) const { return inferTypes(e, env_); }
  // Renames binders that shadow or repeat another name, then retypes.
  ExprPtr uniquify(const ExprPtr& e) {
    std::set<std::string> seen = freeVariables(e);
    std::map<std::string, std::string> scope;
    ExprPtr out = weldmill::detail::renameBinders(e, scope, [&](const std::string& n) {
      return seen.insert(n).second ? n : gen_.fresh(n);
    });
    return retype(out);
  }

 private:
  std::string pass_;
  TypeEnv env_;
  int budget_;
  int rewrites_ = 0;
  NameGen gen_;
};

inline bool isTrivial(const ExprPtr& e) { return e->kind == ExprKind::Literal || e->kind == ExprKind::Ident; }

inline bool hasBuilderType(const ExprPtr& e) { return e->type.valid() && e->type.containsBuilder(); }

// True when evaluating `e` can neither fail nor touch a builder, so it may be
// evaluated speculatively or dropped.
inline bool isSafe(const ExprPtr& e) {
  if (hasBuilderType(e)) return false;
  switch (e->kind) {
    case ExprKind::Literal:
    case ExprKind::Ident:
    case ExprKind::GetField:
    case ExprKind::Unary:
    case ExprKind::Len:
    case ExprKind::MakeStruct:
    case ExprKind::Broadcast:
    case ExprKind::BitSelect:
    case ExprKind::If:
    case ExprKind::Cast:
      break;
    case ExprKind::Binary:
      if (e->binop == BinOp::Div || e->binop == BinOp::Mod) {
        const ExprPtr& d = e->kids[1];
        if (d->kind != ExprKind::Literal) return false;
        bool zero = std::visit([](auto v) { return v == decltype(v){}; }, d->lit);
        if (zero) return false;
      }
      break;
    default:
      return false;
  }
  for (const auto& k : e->kids)
    if (!isSafe(k)) return false;
  return true;
}

// Whether child `i` of `e` is evaluated only on some executions of `e`.
inline bool conditionalKid(const Expr& e, std::size_t i) {
  if (e.kind == ExprKind::If) return i >= 1;
  if (e.kind == ExprKind::Binary && isLogical(e.binop)) return i == 1;
  return e.kind == ExprKind::Lambda;
}

// True when `name` occurs free in `e` exactly once, at a position evaluated
// exactly when `e` is (not under a lambda or a branch).
inline bool singleUnconditionalUse(const ExprPtr& e, const std::string& name) {
  int total = 0;
  bool clean = true;
  std::function<void(const ExprPtr&, bool)> walk = [&](const ExprPtr& x, bool guarded) {
    if (x->kind == ExprKind::Ident) {
      if (x->name == name) {
        ++total;
        clean = clean && !guarded;
      }
      return;
    }
    for (std::size_t i = 0; i < x->kids.size(); ++i) {
      bool shadowed = false;
      for (const auto& b : boundInChild(*x, i)) shadowed |= b == name;
      if (shadowed) continue;
      walk(x->kids[i], guarded || conditionalKid(*x, i));
    }
  };
  walk(e, false);
  return total == 1 && clean;
}

inline int forLoopCount(const ExprPtr& e) { return countNodes(e, ExprKind::For); }

// Replaces the node identical (by pointer) to `target`.
inline ExprPtr replaceNode(const ExprPtr& root, const Expr* target, const ExprPtr& repl) {
  if (root.get() == target) return repl;
  std::vector<ExprPtr> kids;
  bool changed = false;
  for (const auto& k : root->kids) {
    kids.push_back(replaceNode(k, target, repl));
    changed |= kids.back() != k;
  }
  return changed ? withKids(*root, std::move(kids)) : root;
}

// Rebuilds a Lambda with a new body, keeping its parameters.
inline ExprPtr withBody(const ExprPtr& lam, ExprPtr body) { return withKids(*lam, {std::move(body)}); }

inline bool isLoopLambda(const ExprPtr& f) { return f->kind == ExprKind::Lambda && f->params.size() == 3; }

// The iterator children and metadata of two For nodes agree.
inline bool sameIterSpec(const Expr& a, const Expr& b) {
  if (a.iters.size() != b.iters.size()) return false;
  for (std::size_t i = 0; i < a.iters.size(); ++i)
    if (a.iters[i].kind != b.iters[i].kind || a.iters[i].ranged != b.iters[i].ranged) return false;
  if (a.kids.size() != b.kids.size()) return false;
  for (std::size_t i = 2; i < a.kids.size(); ++i)
    if (!structurallyEqual(a.kids[i], b.kids[i])) return false;
  return true;
}

// A copy of For node `f` with new init and function.
inline ExprPtr withLoop(const Expr& f, ExprPtr init, ExprPtr func) {
  std::vector<ExprPtr> kids = f.kids;
  kids[0] = std::move(init);
  kids[1] = std::move(func);
  return withKids(f, std::move(kids));
}

// Sweeps `fn` over `e` until it stops changing, retyping between sweeps.
inline ExprPtr sweepToFixpoint(PassContext& ctx, ExprPtr e, const std::function<ExprPtr(const ExprPtr&)>& sweep) {
  for (;;) {
    ExprPtr next = sweep(e);
    if (next == e) return e;
    e = ctx.retype(next);
  }
}

}  // namespace weldmill::passes
