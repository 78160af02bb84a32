#pragma once

#include <unordered_map>

#include "weldmill/passes/pass_util.hpp"

namespace weldmill::passes {

namespace detail {

// Subexpressions worth sharing: pure, builder-free, closure-free and not a
// plain name, literal or projection of a name.
inline bool shareable(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Literal:
    case ExprKind::Ident:
    case ExprKind::Lambda:
    case ExprKind::NewBuilder:
      return false;
    case ExprKind::GetField:
    case ExprKind::Broadcast:
      if (isTrivial(e->kids[0])) return false;
      break;
    default:
      break;
  }
  if (!e->type.valid() || e->type.containsBuilder() || e->type.isFunction() || e->type.hasUnknowns()) return false;
  bool ok = true;
  visit(e, [&](const ExprPtr& x) {
    if (x->kind == ExprKind::ExternCall || x->kind == ExprKind::Lambda || hasBuilderType(x)) ok = false;
    return ok;
  });
  return ok;
}

struct Occurrence {
  ExprPtr node;
  std::vector<std::size_t> path;
  const Expr* scope;
  int size;
};

inline int treeSize(const ExprPtr& e) {
  int n = 1;
  for (const auto& k : e->kids) n += treeSize(k);
  return n;
}

inline void collectOccurrences(const ExprPtr& e, std::vector<std::size_t>& path, const Expr* scope,
                               std::vector<Occurrence>& out) {
  if (shareable(e)) out.push_back({e, path, scope, treeSize(e)});
  const Expr* inner = e->kind == ExprKind::Lambda ? e.get() : scope;
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    path.push_back(i);
    collectOccurrences(e->kids[i], path, inner, out);
    path.pop_back();
  }
}

inline const ExprPtr& nodeAt(const ExprPtr& root, const std::vector<std::size_t>& path, std::size_t depth) {
  const ExprPtr* x = &root;
  for (std::size_t i = 0; i < depth; ++i) x = &(*x)->kids[path[i]];
  return *x;
}

// Whether the step from depth `from` down `path` crosses a branch.
inline bool guardedBelow(const ExprPtr& root, const std::vector<std::size_t>& path, std::size_t from) {
  const ExprPtr* x = &nodeAt(root, path, from);
  for (std::size_t i = from; i < path.size(); ++i) {
    if (conditionalKid(**x, path[i])) return true;
    x = &(*x)->kids[path[i]];
  }
  return false;
}

inline ExprPtr replaceAtPath(const ExprPtr& root, const std::vector<std::size_t>& path, std::size_t depth,
                             const ExprPtr& repl) {
  if (depth == path.size()) return repl;
  std::vector<ExprPtr> kids = root->kids;
  kids[path[depth]] = replaceAtPath(kids[path[depth]], path, depth + 1, repl);
  return withKids(*root, std::move(kids));
}

// Shares one group of repeated subexpressions, largest first. Returns
// nullptr when nothing qualifies.
inline ExprPtr shareOnce(PassContext& ctx, const ExprPtr& root) {
  std::vector<Occurrence> occ;
  std::vector<std::size_t> path;
  collectOccurrences(root, path, nullptr, occ);
  std::unordered_map<std::size_t, std::vector<std::size_t>> byHash;
  for (std::size_t i = 0; i < occ.size(); ++i) byHash[structuralHash(occ[i].node)].push_back(i);

  std::vector<std::vector<std::size_t>> groups;
  std::vector<bool> taken(occ.size(), false);
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (taken[i]) continue;
    std::vector<std::size_t> g{i};
    for (std::size_t j : byHash[structuralHash(occ[i].node)]) {
      if (j <= i || taken[j] || occ[j].scope != occ[i].scope) continue;
      if (!structurallyEqual(occ[i].node, occ[j].node)) continue;
      g.push_back(j);
      taken[j] = true;
    }
    if (g.size() >= 2) groups.push_back(std::move(g));
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [&](const auto& a, const auto& b) { return occ[a[0]].size > occ[b[0]].size; });

  for (const auto& g : groups) {
    // Nearest common ancestor of the occurrences.
    std::size_t depth = occ[g[0]].path.size();
    for (std::size_t k : g) {
      const auto& p = occ[k].path;
      std::size_t d = 0;
      while (d < depth && d < p.size() && p[d] == occ[g[0]].path[d]) ++d;
      depth = d;
    }
    // An occurrence nested in another would make the common ancestor one of them.
    bool nested = false;
    for (std::size_t k : g) nested |= occ[k].path.size() == depth;
    if (nested) continue;
    bool anyUnguarded = false;
    for (std::size_t k : g) anyUnguarded |= !guardedBelow(root, occ[k].path, depth);
    if (!anyUnguarded && !isSafe(occ[g[0]].node)) continue;

    const ExprPtr& anchor = nodeAt(root, occ[g[0]].path, depth);
    std::string t = ctx.fresh("cse");
    ExprPtr body = anchor;
    for (std::size_t k : g) {
      std::vector<std::size_t> rel(occ[k].path.begin() + static_cast<std::ptrdiff_t>(depth), occ[k].path.end());
      body = replaceAtPath(body, rel, 0, ir::ident(t));
    }
    ctx.bump();
    std::vector<std::size_t> prefix(occ[g[0]].path.begin(), occ[g[0]].path.begin() + static_cast<std::ptrdiff_t>(depth));
    return replaceAtPath(root, prefix, 0, ir::let(t, occ[g[0]].node, body));
  }
  return nullptr;
}

}  // namespace detail

// Binds repeated pure subexpressions of one scope to a single Let placed at
// their nearest common ancestor.
inline ExprPtr csePass(PassContext& ctx, const ExprPtr& input) {
  ExprPtr e = ctx.uniquify(input);
  while (ExprPtr next = detail::shareOnce(ctx, e)) e = ctx.retype(next);
  return e;
}

}  // namespace weldmill::passes
