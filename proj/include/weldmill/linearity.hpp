#pragma once

#include <map>
#include <string>
#include <vector>

#include "weldmill/expr.hpp"

namespace weldmill {

// Verifies that every builder value is consumed exactly once on each control
// path and that for-loop bodies return builders derived from their builder
// parameter. Requires a typed tree. Throws LinearityError.
void checkLinearity(const ExprPtr& e);

namespace detail {

class Linearity {
 public:
  void run(const ExprPtr& e) { analyze(e); }

 private:
  struct Binder {
    std::string name;
    int id;
    IrType type;
  };
  struct Use {
    std::string name;
    Span span;
  };
  // Key: binder id and field path of one builder leaf.
  using Uses = std::map<std::string, Use>;

  std::vector<Binder> scope_;
  int nextId_ = 0;

  static std::string key(int id, const std::vector<int>& path) {
    std::string k = std::to_string(id);
    for (int p : path) k += "." + std::to_string(p);
    return k;
  }

  static void leaves(const IrType& t, std::vector<int>& path, std::vector<std::vector<int>>& out) {
    if (!t.valid()) return;
    if (t.isBuilder()) {
      out.push_back(path);
      return;
    }
    if (t.isStruct()) {
      for (std::size_t i = 0; i < t.fields().size(); ++i) {
        path.push_back(static_cast<int>(i));
        leaves(t.fields()[i], path, out);
        path.pop_back();
      }
    }
  }

  static std::vector<std::vector<int>> leavesOf(const IrType& t, std::vector<int> prefix = {}) {
    std::vector<std::vector<int>> out;
    leaves(t, prefix, out);
    return out;
  }

  const Binder* find(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->name == name) return &*it;
    return nullptr;
  }

  static std::string displayName(const std::string& name, const std::vector<int>& path) {
    std::string s = name;
    for (int p : path) s += "." + std::to_string(p);
    return s;
  }

  Uses occurrence(const Binder& b, const std::vector<int>& path, const IrType& t, Span span) {
    Uses u;
    for (auto& leaf : leavesOf(t, path)) u[key(b.id, leaf)] = {displayName(b.name, leaf), span};
    return u;
  }

  static void joinInto(Uses& a, const Uses& b) {
    for (const auto& [k, use] : b) {
      auto it = a.find(k);
      if (it != a.end())
        throw LinearityError(LinearityKind::ConsumedTwice, use.name,
                             "builder '" + use.name + "' is consumed more than once", use.span);
      a.emplace(k, use);
    }
  }

  void requireConsumed(const Binder& b, Uses& body, Span span, const char* what) {
    for (auto& leaf : leavesOf(b.type)) {
      auto it = body.find(key(b.id, leaf));
      std::string n = displayName(b.name, leaf);
      if (it == body.end())
        throw LinearityError(LinearityKind::UnconsumedOnPath, n,
                             std::string("builder '") + n + "' " + what + " is never consumed", span);
      body.erase(it);
    }
  }

  Uses analyze(const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::Ident: {
        const Binder* b = find(e->name);
        if (!b || !e->type.containsBuilder()) return {};
        return occurrence(*b, {}, b->type, e->span);
      }
      case ExprKind::GetField: {
        std::vector<int> path;
        const Expr* cur = e.get();
        while (cur->kind == ExprKind::GetField) {
          path.insert(path.begin(), cur->index);
          cur = cur->kids[0].get();
        }
        if (cur->kind == ExprKind::Ident) {
          const Binder* b = find(cur->name);
          if (!b || !e->type.containsBuilder()) return {};
          return occurrence(*b, path, e->type, e->span);
        }
        return analyze(e->kids[0]);
      }
      case ExprKind::Let: {
        Uses u = analyze(e->kids[0]);
        scope_.push_back({e->name, nextId_++, e->kids[0]->type});
        Uses body = analyze(e->kids[1]);
        Binder b = scope_.back();
        scope_.pop_back();
        joinInto(u, body);
        requireConsumed(b, u, e->span, "bound here");
        return u;
      }
      case ExprKind::Lambda: return lambda(e, false);
      case ExprKind::Apply: {
        Uses u = e->kids[0]->kind == ExprKind::Lambda ? lambda(e->kids[0], true) : analyze(e->kids[0]);
        for (std::size_t i = 1; i < e->kids.size(); ++i) joinInto(u, analyze(e->kids[i]));
        return u;
      }
      case ExprKind::If: {
        Uses c = analyze(e->kids[0]);
        Uses t = analyze(e->kids[1]);
        Uses f = analyze(e->kids[2]);
        auto differ = [&](const Uses& x, const Uses& y, Span span) {
          for (const auto& [k, use] : x)
            if (!y.count(k))
              throw LinearityError(LinearityKind::UnconsumedOnPath, use.name,
                                   "builder '" + use.name + "' is consumed on one branch of an if but not the other",
                                   span);
        };
        differ(t, f, e->kids[2]->span);
        differ(f, t, e->kids[1]->span);
        joinInto(c, t);
        return c;
      }
      case ExprKind::For: {
        const ExprPtr& func = e->forFunc();
        if (func->kind == ExprKind::Lambda) checkDerived(func);
        Uses u;
        for (std::size_t i = 2; i < e->kids.size(); ++i) joinInto(u, analyze(e->kids[i]));
        joinInto(u, analyze(e->forInit()));
        joinInto(u, analyze(func));
        return u;
      }
      default: {
        Uses u;
        for (const auto& k : e->kids) joinInto(u, analyze(k));
        return u;
      }
    }
  }

  Uses lambda(const ExprPtr& e, bool directlyApplied) {
    std::size_t mark = scope_.size();
    for (const auto& p : e->params) scope_.push_back({p.name, nextId_++, p.type});
    Uses body = analyze(e->kids[0]);
    for (std::size_t i = mark; i < scope_.size(); ++i) requireConsumed(scope_[i], body, e->span, "passed as a parameter");
    scope_.resize(mark);
    if (!directlyApplied && !body.empty()) {
      const Use& use = body.begin()->second;
      throw LinearityError(LinearityKind::ConsumedTwice, use.name,
                           "builder '" + use.name + "' is captured by a function that may run more than once",
                           use.span);
    }
    return body;
  }

  // Loop bodies must return a value derived from their builder parameter.
  void checkDerived(const ExprPtr& func) {
    std::vector<std::pair<std::string, bool>> env;
    for (std::size_t i = 0; i < func->params.size(); ++i) env.emplace_back(func->params[i].name, i == 0);
    if (!derived(func->kids[0], env)) {
      std::string name = func->params.empty() ? "?" : func->params[0].name;
      throw LinearityError(LinearityKind::LoopBodyEscape, name,
                           "loop body returns a builder that is not derived from '" + name + "'",
                           func->kids[0]->span);
    }
  }

  static bool derived(const ExprPtr& e, std::vector<std::pair<std::string, bool>>& env) {
    switch (e->kind) {
      case ExprKind::Ident:
        for (auto it = env.rbegin(); it != env.rend(); ++it)
          if (it->first == e->name) return it->second;
        return false;
      case ExprKind::GetField: return derived(e->kids[0], env);
      case ExprKind::Merge: return derived(e->kids[0], env);
      case ExprKind::For: return derived(e->forInit(), env);
      case ExprKind::MakeStruct:
        for (const auto& k : e->kids)
          if (k->type.containsBuilder() && !derived(k, env)) return false;
        return true;
      case ExprKind::If: return derived(e->kids[1], env) && derived(e->kids[2], env);
      case ExprKind::Let: {
        env.emplace_back(e->name, derived(e->kids[0], env));
        bool r = derived(e->kids[1], env);
        env.pop_back();
        return r;
      }
      case ExprKind::Apply: {
        const ExprPtr& fn = e->kids[0];
        if (fn->kind == ExprKind::Lambda) {
          std::size_t mark = env.size();
          for (std::size_t i = 0; i < fn->params.size() && i + 1 < e->kids.size(); ++i)
            env.emplace_back(fn->params[i].name, derived(e->kids[i + 1], env));
          bool r = derived(fn->kids[0], env);
          env.resize(mark);
          return r;
        }
        for (std::size_t i = 1; i < e->kids.size(); ++i)
          if (e->kids[i]->type.containsBuilder() && derived(e->kids[i], env)) return true;
        return false;
      }
      default: return false;
    }
  }
};

}  // namespace detail

inline void checkLinearity(const ExprPtr& e) {
  detail::Linearity l;
  l.run(e);
}

}  // namespace weldmill
