#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "weldmill/error.hpp"
#include "weldmill/types.hpp"

namespace weldmill {

enum class ExprKind : std::uint8_t {
  Literal,
  Ident,
  Let,
  Lambda,
  Apply,
  Binary,
  Unary,
  If,
  BitSelect,
  Iterate,
  Lookup,
  GetField,
  Len,
  Sort,
  ToVec,
  MakeStruct,
  MakeVector,
  NewBuilder,
  Merge,
  Result,
  For,
  ExternCall,
  Broadcast,
  Cast,
  Sugar,
};

enum class IterKind : std::uint8_t { Scalar, Simd, Fringe };

enum class SugarOp : std::uint8_t { Map, Filter, FlatMap, Reduce, Zip, GroupBy };

inline const char* sugarName(SugarOp op) {
  switch (op) {
    case SugarOp::Map: return "map";
    case SugarOp::Filter: return "filter";
    case SugarOp::FlatMap: return "flatmap";
    case SugarOp::Reduce: return "reduce";
    case SugarOp::Zip: return "zip";
    case SugarOp::GroupBy: return "groupby";
  }
  return "?";
}

using Literal = std::variant<bool, std::int32_t, std::int64_t, float, double>;

inline ScalarKind literalKind(const Literal& l) { return static_cast<ScalarKind>(l.index()); }

// Bitwise equality so that NaN and signed zeros compare the way they print.
inline bool literalEquals(const Literal& a, const Literal& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b);
        return std::memcmp(&x, &y, sizeof(T)) == 0;
      },
      a);
}

struct Param {
  std::string name;
  IrType type;  // empty when not annotated
};

// Per-iterator metadata of a For node. When `ranged`, the iterator's data is
// followed by start, end and stride children.
struct IterMeta {
  IterKind kind = IterKind::Scalar;
  bool ranged = false;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// One IR node. Children live in `kids` for every kind so generic traversals
// never need per-kind knowledge; the per-kind layout is:
//
//   Let        [value, body]               name
//   Lambda     [body]                      params
//   Apply      [fn, args...]
//   Binary     [lhs, rhs]                  binop
//   Unary      [operand]                   unop
//   If         [cond, then, else]
//   BitSelect  [cond, then, else]
//   Iterate    [init, update]
//   Lookup     [collection, key]
//   GetField   [struct]                    index
//   Len/ToVec/Result/Broadcast/Cast [operand]
//   Sort       [vec, keyfn]
//   MakeStruct/MakeVector [elems...]
//   NewBuilder [] or [arg]                 builder (arg: vecmerger init or vecbuilder size hint)
//   Merge      [builder, value]
//   For        [init, func, iter data (+ start, end, stride)...]   iters
//   ExternCall [args...]                   name
//   Sugar      [args...]                   sugar
struct Expr {
  ExprKind kind = ExprKind::Literal;
  std::vector<ExprPtr> kids;
  std::string name;
  std::vector<Param> params;
  Literal lit = std::int64_t{0};
  BinOp binop = BinOp::Add;
  UnaryOp unop = UnaryOp::Neg;
  ScalarKind castTo = ScalarKind::I64;
  int index = 0;
  BuilderKind builder;
  SugarOp sugar = SugarOp::Map;
  std::vector<IterMeta> iters;

  // Filled by the type checker.
  IrType type;
  Span span;
  // Frame slot assigned by the engine's resolver (binders and identifiers).
  int slot = -1;

  const ExprPtr& kid(std::size_t i) const { return kids.at(i); }

  // For-node helpers.
  const ExprPtr& forInit() const { return kids.at(0); }
  const ExprPtr& forFunc() const { return kids.at(1); }
  std::size_t iterOffset(std::size_t iter) const {
    std::size_t off = 2;
    for (std::size_t i = 0; i < iter; ++i) off += iters[i].ranged ? 4 : 1;
    return off;
  }
  const ExprPtr& iterData(std::size_t i) const { return kids.at(iterOffset(i)); }
  const ExprPtr& iterStart(std::size_t i) const { return kids.at(iterOffset(i) + 1); }
  const ExprPtr& iterEnd(std::size_t i) const { return kids.at(iterOffset(i) + 2); }
  const ExprPtr& iterStride(std::size_t i) const { return kids.at(iterOffset(i) + 3); }
};

// Checks the per-kind arity rules; throws std::logic_error on violation.
void checkWellFormed(const Expr& e);

// A copy of `e` with different children (same kind and attributes, no type).
ExprPtr withKids(const Expr& e, std::vector<ExprPtr> kids);
ExprPtr withType(const Expr& e, IrType type);

// Structural, span-blind and type-blind equality.
bool structurallyEqual(const ExprPtr& a, const ExprPtr& b);
std::size_t structuralHash(const ExprPtr& e);

struct ExprStructuralHash {
  std::size_t operator()(const ExprPtr& e) const { return structuralHash(e); }
};
struct ExprStructuralEq {
  bool operator()(const ExprPtr& a, const ExprPtr& b) const { return structurallyEqual(a, b); }
};

// Constructors. Each returns a well-formed node.
namespace ir {

inline ExprPtr make(Expr e) {
  checkWellFormed(e);
  return std::make_shared<const Expr>(std::move(e));
}

inline ExprPtr lit(Literal v, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Literal;
  e.lit = v;
  e.span = span;
  return make(std::move(e));
}
inline ExprPtr i64(std::int64_t v) { return lit(Literal{v}); }
inline ExprPtr i32(std::int32_t v) { return lit(Literal{v}); }
inline ExprPtr f64(double v) { return lit(Literal{v}); }
inline ExprPtr f32(float v) { return lit(Literal{v}); }
inline ExprPtr boolean(bool v) { return lit(Literal{v}); }

inline ExprPtr ident(std::string name, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Ident;
  e.name = std::move(name);
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr let(std::string name, ExprPtr value, ExprPtr body, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Let;
  e.name = std::move(name);
  e.kids = {std::move(value), std::move(body)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr lambda(std::vector<Param> params, ExprPtr body, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Lambda;
  e.params = std::move(params);
  e.kids = {std::move(body)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr apply(ExprPtr fn, std::vector<ExprPtr> args, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Apply;
  e.kids.push_back(std::move(fn));
  for (auto& a : args) e.kids.push_back(std::move(a));
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.binop = op;
  e.kids = {std::move(l), std::move(r)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr unary(UnaryOp op, ExprPtr x, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.unop = op;
  e.kids = {std::move(x)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr ifThen(ExprPtr c, ExprPtr t, ExprPtr f, Span span = {}) {
  Expr e;
  e.kind = ExprKind::If;
  e.kids = {std::move(c), std::move(t), std::move(f)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr bitSelect(ExprPtr c, ExprPtr t, ExprPtr f, Span span = {}) {
  Expr e;
  e.kind = ExprKind::BitSelect;
  e.kids = {std::move(c), std::move(t), std::move(f)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr iterate(ExprPtr init, ExprPtr update, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Iterate;
  e.kids = {std::move(init), std::move(update)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr lookup(ExprPtr coll, ExprPtr key, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Lookup;
  e.kids = {std::move(coll), std::move(key)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr getField(ExprPtr s, int index, Span span = {}) {
  Expr e;
  e.kind = ExprKind::GetField;
  e.index = index;
  e.kids = {std::move(s)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr unaryKind(ExprKind k, ExprPtr x, Span span = {}) {
  Expr e;
  e.kind = k;
  e.kids = {std::move(x)};
  e.span = span;
  return make(std::move(e));
}
inline ExprPtr len(ExprPtr x, Span span = {}) { return unaryKind(ExprKind::Len, std::move(x), span); }
inline ExprPtr toVec(ExprPtr x, Span span = {}) { return unaryKind(ExprKind::ToVec, std::move(x), span); }
inline ExprPtr result(ExprPtr x, Span span = {}) { return unaryKind(ExprKind::Result, std::move(x), span); }
inline ExprPtr broadcast(ExprPtr x, Span span = {}) {
  return unaryKind(ExprKind::Broadcast, std::move(x), span);
}

inline ExprPtr cast(ScalarKind to, ExprPtr x, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Cast;
  e.castTo = to;
  e.kids = {std::move(x)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr sort(ExprPtr v, ExprPtr keyFn, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Sort;
  e.kids = {std::move(v), std::move(keyFn)};
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr makeStruct(std::vector<ExprPtr> fields, Span span = {}) {
  Expr e;
  e.kind = ExprKind::MakeStruct;
  e.kids = std::move(fields);
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr makeVector(std::vector<ExprPtr> elems, Span span = {}) {
  Expr e;
  e.kind = ExprKind::MakeVector;
  e.kids = std::move(elems);
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr newBuilder(BuilderKind kind, ExprPtr arg = nullptr, Span span = {}) {
  Expr e;
  e.kind = ExprKind::NewBuilder;
  e.builder = std::move(kind);
  if (arg) e.kids.push_back(std::move(arg));
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr merge(ExprPtr b, ExprPtr v, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Merge;
  e.kids = {std::move(b), std::move(v)};
  e.span = span;
  return make(std::move(e));
}

struct Iter {
  ExprPtr data{};
  ExprPtr start{}, end{}, stride{};
  IterKind kind = IterKind::Scalar;
};

inline ExprPtr forLoop(std::vector<Iter> iters, ExprPtr init, ExprPtr func, Span span = {}) {
  Expr e;
  e.kind = ExprKind::For;
  e.kids = {std::move(init), std::move(func)};
  for (auto& it : iters) {
    bool ranged = it.start != nullptr;
    e.iters.push_back({it.kind, ranged});
    e.kids.push_back(std::move(it.data));
    if (ranged) {
      e.kids.push_back(std::move(it.start));
      e.kids.push_back(std::move(it.end));
      e.kids.push_back(std::move(it.stride));
    }
  }
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr externCall(std::string name, std::vector<ExprPtr> args, Span span = {}) {
  Expr e;
  e.kind = ExprKind::ExternCall;
  e.name = std::move(name);
  e.kids = std::move(args);
  e.span = span;
  return make(std::move(e));
}

inline ExprPtr sugar(SugarOp op, std::vector<ExprPtr> args, Span span = {}) {
  Expr e;
  e.kind = ExprKind::Sugar;
  e.sugar = op;
  e.kids = std::move(args);
  e.span = span;
  return make(std::move(e));
}

}  // namespace ir

// Iterators of a For node in constructor form.
inline std::vector<ir::Iter> forIters(const Expr& e) {
  std::vector<ir::Iter> out;
  for (std::size_t i = 0; i < e.iters.size(); ++i) {
    ir::Iter it;
    it.kind = e.iters[i].kind;
    it.data = e.iterData(i);
    if (e.iters[i].ranged) {
      it.start = e.iterStart(i);
      it.end = e.iterEnd(i);
      it.stride = e.iterStride(i);
    }
    out.push_back(std::move(it));
  }
  return out;
}

// ---------------------------------------------------------------------------

inline void checkWellFormed(const Expr& e) {
  auto need = [&](std::size_t n) {
    if (e.kids.size() != n)
      throw std::logic_error("malformed expression: wrong child count");
  };
  for (const auto& k : e.kids)
    if (!k) throw std::logic_error("malformed expression: null child");
  switch (e.kind) {
    case ExprKind::Literal:
    case ExprKind::Ident: need(0); break;
    case ExprKind::Let:
    case ExprKind::Binary:
    case ExprKind::Iterate:
    case ExprKind::Lookup:
    case ExprKind::Sort:
    case ExprKind::Merge: need(2); break;
    case ExprKind::Lambda:
    case ExprKind::Unary:
    case ExprKind::GetField:
    case ExprKind::Len:
    case ExprKind::ToVec:
    case ExprKind::Result:
    case ExprKind::Broadcast:
    case ExprKind::Cast: need(1); break;
    case ExprKind::If:
    case ExprKind::BitSelect: need(3); break;
    case ExprKind::Apply:
      if (e.kids.empty()) throw std::logic_error("malformed expression: apply without function");
      break;
    case ExprKind::MakeStruct:
    case ExprKind::MakeVector:
      if (e.kids.empty()) throw std::logic_error("malformed expression: empty literal");
      break;
    case ExprKind::NewBuilder:
      if (e.kids.size() > 1) throw std::logic_error("malformed expression: builder argument count");
      if (e.builder.tag == BuilderTag::VecMerger && e.kids.size() != 1)
        throw std::logic_error("malformed expression: vecmerger needs an initial vector");
      if (e.builder.tag != BuilderTag::VecMerger && e.builder.tag != BuilderTag::VecBuilder &&
          !e.kids.empty())
        throw std::logic_error("malformed expression: builder takes no argument");
      break;
    case ExprKind::For: {
      if (e.iters.empty()) throw std::logic_error("malformed expression: for without iterators");
      std::size_t n = 2;
      for (const auto& m : e.iters) n += m.ranged ? 4 : 1;
      need(n);
      if (e.kids[1]->kind == ExprKind::Lambda && e.kids[1]->params.size() != 3)
        throw std::logic_error("malformed expression: for function must take (builders, index, elem)");
      break;
    }
    case ExprKind::ExternCall:
    case ExprKind::Sugar: break;
  }
  if (e.kind == ExprKind::GetField && e.index < 0)
    throw std::logic_error("malformed expression: negative field index");
}

inline ExprPtr withKids(const Expr& e, std::vector<ExprPtr> kids) {
  Expr c = e;
  c.kids = std::move(kids);
  c.type = IrType();
  c.slot = -1;
  return ir::make(std::move(c));
}

inline ExprPtr withType(const Expr& e, IrType type) {
  Expr c = e;
  c.type = std::move(type);
  return std::make_shared<const Expr>(std::move(c));
}

namespace detail {
inline bool sameAttributes(const Expr& x, const Expr& y) {
  if (x.kind != y.kind || x.kids.size() != y.kids.size()) return false;
  switch (x.kind) {
    case ExprKind::Literal: return literalEquals(x.lit, y.lit);
    case ExprKind::Ident:
    case ExprKind::Let:
    case ExprKind::ExternCall: return x.name == y.name;
    case ExprKind::Lambda:
      if (x.params.size() != y.params.size()) return false;
      for (std::size_t i = 0; i < x.params.size(); ++i) {
        if (x.params[i].name != y.params[i].name) return false;
        if (x.params[i].type != y.params[i].type) return false;
      }
      return true;
    case ExprKind::Binary: return x.binop == y.binop;
    case ExprKind::Unary: return x.unop == y.unop;
    case ExprKind::GetField: return x.index == y.index;
    case ExprKind::Cast: return x.castTo == y.castTo;
    case ExprKind::NewBuilder: return x.builder == y.builder;
    case ExprKind::Sugar: return x.sugar == y.sugar;
    case ExprKind::For:
      if (x.iters.size() != y.iters.size()) return false;
      for (std::size_t i = 0; i < x.iters.size(); ++i)
        if (x.iters[i].kind != y.iters[i].kind || x.iters[i].ranged != y.iters[i].ranged) return false;
      return true;
    default: return true;
  }
}
}  // namespace detail

inline bool structurallyEqual(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (!detail::sameAttributes(*a, *b)) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!structurallyEqual(a->kids[i], b->kids[i])) return false;
  return true;
}

inline std::size_t structuralHash(const ExprPtr& e) {
  std::size_t h = static_cast<std::size_t>(e->kind) * 0x100000001b3ULL;
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  switch (e->kind) {
    case ExprKind::Literal:
      mix(e->lit.index());
      std::visit(
          [&](const auto& x) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, &x, sizeof(x));
            mix(std::hash<std::uint64_t>{}(bits));
          },
          e->lit);
      break;
    case ExprKind::Ident:
    case ExprKind::Let:
    case ExprKind::ExternCall: mix(std::hash<std::string>{}(e->name)); break;
    case ExprKind::Lambda:
      for (const auto& p : e->params) mix(std::hash<std::string>{}(p.name));
      break;
    case ExprKind::Binary: mix(static_cast<std::size_t>(e->binop)); break;
    case ExprKind::Unary: mix(static_cast<std::size_t>(e->unop)); break;
    case ExprKind::GetField: mix(static_cast<std::size_t>(e->index)); break;
    case ExprKind::Cast: mix(static_cast<std::size_t>(e->castTo)); break;
    case ExprKind::NewBuilder: mix(IrType::builder(e->builder).hash()); break;
    case ExprKind::Sugar: mix(static_cast<std::size_t>(e->sugar)); break;
    case ExprKind::For:
      for (const auto& m : e->iters) mix(static_cast<std::size_t>(m.kind) * 2 + (m.ranged ? 1 : 0));
      break;
    default: break;
  }
  for (const auto& k : e->kids) mix(structuralHash(k));
  return h;
}

}  // namespace weldmill
