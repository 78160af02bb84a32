#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "weldmill/expr.hpp"

namespace weldmill {

// Fresh-name source. Names are `base` with its trailing digits stripped plus a
// counter, skipping anything already reserved, so output depends only on the
// order of calls.
class NameGen {
 public:
  NameGen() = default;
  explicit NameGen(std::set<std::string> reserved) : used_(std::move(reserved)) {}

  void reserve(const std::string& name) { used_.insert(name); }
  bool taken(const std::string& name) const { return used_.count(name) != 0; }

  std::string fresh(const std::string& base) {
    std::string stem = base;
    while (!stem.empty() && stem.back() >= '0' && stem.back() <= '9') stem.pop_back();
    if (stem.empty()) stem = "t";
    for (;;) {
      std::string cand = stem + std::to_string(counters_[stem]++);
      if (used_.insert(cand).second) return cand;
    }
  }

 private:
  std::set<std::string> used_;
  std::map<std::string, int> counters_;
};

// Names bound by node `e` over child `i` (Let binds in its body, Lambda in its body).
inline std::vector<std::string> boundInChild(const Expr& e, std::size_t i) {
  if (e.kind == ExprKind::Let && i == 1) return {e.name};
  if (e.kind == ExprKind::Lambda) {
    std::vector<std::string> out;
    for (const auto& p : e.params) out.push_back(p.name);
    return out;
  }
  return {};
}

namespace detail {
inline void freeVars(const ExprPtr& e, std::multiset<std::string>& bound, std::set<std::string>& out) {
  if (e->kind == ExprKind::Ident) {
    if (!bound.count(e->name)) out.insert(e->name);
    return;
  }
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    auto names = boundInChild(*e, i);
    for (const auto& n : names) bound.insert(n);
    freeVars(e->kids[i], bound, out);
    for (const auto& n : names) bound.erase(bound.find(n));
  }
}
}  // namespace detail

inline std::set<std::string> freeVariables(const ExprPtr& e) {
  std::multiset<std::string> bound;
  std::set<std::string> out;
  detail::freeVars(e, bound, out);
  return out;
}

inline bool isFree(const ExprPtr& e, const std::string& name) { return freeVariables(e).count(name) != 0; }

// Every identifier and binder name appearing anywhere in `e`.
inline void collectNames(const ExprPtr& e, std::set<std::string>& out) {
  if (e->kind == ExprKind::Ident || e->kind == ExprKind::Let) out.insert(e->name);
  for (const auto& p : e->params) out.insert(p.name);
  for (const auto& k : e->kids) collectNames(k, out);
}

inline std::set<std::string> allNames(const ExprPtr& e) {
  std::set<std::string> out;
  collectNames(e, out);
  return out;
}

// Number of free occurrences of `name` in `e`.
inline int countFree(const ExprPtr& e, const std::string& name) {
  if (e->kind == ExprKind::Ident) return e->name == name ? 1 : 0;
  int n = 0;
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    auto b = boundInChild(*e, i);
    if (std::find(b.begin(), b.end(), name) != b.end()) continue;
    n += countFree(e->kids[i], name);
  }
  return n;
}

using Bindings = std::map<std::string, ExprPtr>;

namespace detail {
inline ExprPtr subst(const ExprPtr& e, const Bindings& b, const std::set<std::string>& replFree,
                     NameGen& gen) {
  if (b.empty()) return e;
  if (e->kind == ExprKind::Ident) {
    auto it = b.find(e->name);
    return it == b.end() ? e : it->second;
  }
  if (e->kind == ExprKind::Let) {
    ExprPtr value = subst(e->kids[0], b, replFree, gen);
    Bindings inner = b;
    inner.erase(e->name);
    std::string name = e->name;
    if (!inner.empty() && replFree.count(name)) {
      name = gen.fresh(name);
      inner[e->name] = ir::ident(name);
    }
    ExprPtr body = subst(e->kids[1], inner, replFree, gen);
    if (value == e->kids[0] && body == e->kids[1] && name == e->name) return e;
    Expr c = *e;
    c.name = name;
    c.kids = {value, body};
    c.type = IrType();
    return ir::make(std::move(c));
  }
  if (e->kind == ExprKind::Lambda) {
    Bindings inner = b;
    for (const auto& p : e->params) inner.erase(p.name);
    std::vector<Param> params = e->params;
    if (!inner.empty()) {
      for (auto& p : params) {
        if (replFree.count(p.name)) {
          std::string fresh = gen.fresh(p.name);
          inner[p.name] = ir::ident(fresh);
          p.name = fresh;
        }
      }
    }
    ExprPtr body = subst(e->kids[0], inner, replFree, gen);
    bool renamed = false;
    for (std::size_t i = 0; i < params.size(); ++i) renamed |= params[i].name != e->params[i].name;
    if (body == e->kids[0] && !renamed) return e;
    Expr c = *e;
    c.params = std::move(params);
    c.kids = {body};
    c.type = IrType();
    return ir::make(std::move(c));
  }
  std::vector<ExprPtr> kids;
  kids.reserve(e->kids.size());
  bool changed = false;
  for (const auto& k : e->kids) {
    kids.push_back(subst(k, b, replFree, gen));
    changed |= kids.back() != k;
  }
  return changed ? withKids(*e, std::move(kids)) : e;
}
}  // namespace detail

// Capture-avoiding simultaneous substitution of free identifiers. Binders
// that would capture a free variable of a replacement are renamed with names
// drawn from `gen` (which should reserve every name already in use).
inline ExprPtr substitute(const ExprPtr& e, const Bindings& bindings, NameGen& gen) {
  std::set<std::string> replFree;
  for (const auto& [name, repl] : bindings) {
    auto fv = freeVariables(repl);
    replFree.insert(fv.begin(), fv.end());
  }
  return detail::subst(e, bindings, replFree, gen);
}

inline ExprPtr substitute(const ExprPtr& e, const Bindings& bindings) {
  std::set<std::string> used = allNames(e);
  for (const auto& [name, repl] : bindings) {
    used.insert(name);
    collectNames(repl, used);
  }
  NameGen gen(std::move(used));
  return substitute(e, bindings, gen);
}

// Bottom-up rewrite: children first, then `fn` on the rebuilt node. `fn`
// returns nullptr to keep the node.
inline ExprPtr rewriteBottomUp(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn) {
  std::vector<ExprPtr> kids;
  kids.reserve(e->kids.size());
  bool changed = false;
  for (const auto& k : e->kids) {
    kids.push_back(rewriteBottomUp(k, fn));
    changed |= kids.back() != k;
  }
  ExprPtr node = changed ? withKids(*e, std::move(kids)) : e;
  ExprPtr r = fn(node);
  return r ? r : node;
}

// Pre-order visit; return false from `fn` to skip a subtree.
inline void visit(const ExprPtr& e, const std::function<bool(const ExprPtr&)>& fn) {
  if (!fn(e)) return;
  for (const auto& k : e->kids) visit(k, fn);
}

inline int countNodes(const ExprPtr& e, ExprKind kind) {
  int n = 0;
  visit(e, [&](const ExprPtr& x) {
    if (x->kind == kind) ++n;
    return true;
  });
  return n;
}

namespace detail {
inline ExprPtr renameBinders(const ExprPtr& e, std::map<std::string, std::string>& scope,
                             const std::function<std::string(const std::string&)>& freshName) {
  switch (e->kind) {
    case ExprKind::Ident: {
      auto it = scope.find(e->name);
      if (it == scope.end() || it->second == e->name) return e;
      Expr c = *e;
      c.name = it->second;
      c.type = IrType();
      return ir::make(std::move(c));
    }
    case ExprKind::Let: {
      ExprPtr value = renameBinders(e->kids[0], scope, freshName);
      std::string nn = freshName(e->name);
      auto saved = scope.find(e->name) == scope.end() ? std::optional<std::string>{}
                                                       : std::optional<std::string>{scope[e->name]};
      scope[e->name] = nn;
      ExprPtr body = renameBinders(e->kids[1], scope, freshName);
      if (saved) scope[e->name] = *saved; else scope.erase(e->name);
      Expr c = *e;
      c.name = nn;
      c.kids = {value, body};
      c.type = IrType();
      return ir::make(std::move(c));
    }
    case ExprKind::Lambda: {
      std::vector<std::pair<std::string, std::optional<std::string>>> saved;
      std::vector<Param> params = e->params;
      for (auto& p : params) {
        auto it = scope.find(p.name);
        saved.emplace_back(p.name, it == scope.end() ? std::optional<std::string>{}
                                                     : std::optional<std::string>{it->second});
        std::string nn = freshName(p.name);
        scope[p.name] = nn;
        p.name = nn;
      }
      ExprPtr body = renameBinders(e->kids[0], scope, freshName);
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        if (it->second) scope[it->first] = *it->second; else scope.erase(it->first);
      }
      Expr c = *e;
      c.params = std::move(params);
      c.kids = {body};
      c.type = IrType();
      return ir::make(std::move(c));
    }
    default: {
      std::vector<ExprPtr> kids;
      bool changed = false;
      for (const auto& k : e->kids) {
        kids.push_back(renameBinders(k, scope, freshName));
        changed |= kids.back() != k;
      }
      return changed ? withKids(*e, std::move(kids)) : e;
    }
  }
}
}  // namespace detail

// Gives every binder in `e` a distinct name not clashing with free variables.
inline ExprPtr uniquifyBinders(const ExprPtr& e, NameGen& gen) {
  for (const auto& n : freeVariables(e)) gen.reserve(n);
  std::map<std::string, std::string> scope;
  return detail::renameBinders(e, scope, [&](const std::string& n) { return gen.fresh(n); });
}

// Renames binders to `_0`, `_1`, ... in pre-order so that alpha-equivalent
// trees become structurally equal.
inline ExprPtr canonicalizeNames(const ExprPtr& e) {
  int counter = 0;
  std::map<std::string, std::string> scope;
  return detail::renameBinders(e, scope, [&](const std::string&) { return "_" + std::to_string(counter++); });
}

inline bool alphaEquivalent(const ExprPtr& a, const ExprPtr& b) {
  return structurallyEqual(canonicalizeNames(a), canonicalizeNames(b));
}

// Lambda parameter types are erased as well; used when comparing against
// unannotated source text.
inline ExprPtr eraseAnnotations(const ExprPtr& e) {
  return rewriteBottomUp(e, [](const ExprPtr& x) -> ExprPtr {
    if (x->kind != ExprKind::Lambda) return nullptr;
    bool any = false;
    for (const auto& p : x->params) any |= p.type.valid();
    if (!any) return nullptr;
    Expr c = *x;
    for (auto& p : c.params) p.type = IrType();
    c.type = IrType();
    return ir::make(std::move(c));
  });
}

}  // namespace weldmill
