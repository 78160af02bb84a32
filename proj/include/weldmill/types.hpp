#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace weldmill {

// Lane count of every SIMD type in the IR.
inline constexpr int kSimdWidth = 4;

enum class ScalarKind : std::uint8_t { Bool, I32, I64, F32, F64 };

inline const char* scalarName(ScalarKind k) {
  switch (k) {
    case ScalarKind::Bool: return "bool";
    case ScalarKind::I32: return "i32";
    case ScalarKind::I64: return "i64";
    case ScalarKind::F32: return "f32";
    case ScalarKind::F64: return "f64";
  }
  return "?";
}

inline bool isIntegral(ScalarKind k) { return k == ScalarKind::I32 || k == ScalarKind::I64; }
inline bool isFloating(ScalarKind k) { return k == ScalarKind::F32 || k == ScalarKind::F64; }
inline bool isNumeric(ScalarKind k) { return k != ScalarKind::Bool; }

// Size of a scalar in the boundary byte format.
inline std::size_t scalarBytes(ScalarKind k) {
  switch (k) {
    case ScalarKind::Bool: return 1;
    case ScalarKind::I32:
    case ScalarKind::F32: return 4;
    case ScalarKind::I64:
    case ScalarKind::F64: return 8;
  }
  return 0;
}

enum class BinOp : std::uint8_t {
  Add, Sub, Mul, Div, Mod,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or, BitAnd, BitOr,
  Min, Max,
};

inline const char* binOpSymbol(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::BitAnd: return "&";
    case BinOp::BitOr: return "|";
    case BinOp::Min: return "min";
    case BinOp::Max: return "max";
  }
  return "?";
}

inline bool isComparison(BinOp op) {
  return op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt || op == BinOp::Le ||
         op == BinOp::Gt || op == BinOp::Ge;
}
inline bool isArithmetic(BinOp op) {
  return op == BinOp::Add || op == BinOp::Sub || op == BinOp::Mul || op == BinOp::Div ||
         op == BinOp::Mod || op == BinOp::Min || op == BinOp::Max;
}
inline bool isLogical(BinOp op) { return op == BinOp::And || op == BinOp::Or; }
inline bool isBitwise(BinOp op) { return op == BinOp::BitAnd || op == BinOp::BitOr; }

// Ops a merger-style builder may fold with: commutative and associative.
inline bool isMergeOp(BinOp op) {
  return op == BinOp::Add || op == BinOp::Mul || op == BinOp::Min || op == BinOp::Max;
}

enum class UnaryOp : std::uint8_t { Neg, Not, Sqrt, Exp, Log, Abs };

inline const char* unaryOpName(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Not: return "!";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

enum class BuilderTag : std::uint8_t { VecBuilder, Merger, DictMerger, VecMerger, GroupBuilder };

inline const char* builderName(BuilderTag t) {
  switch (t) {
    case BuilderTag::VecBuilder: return "vecbuilder";
    case BuilderTag::Merger: return "merger";
    case BuilderTag::DictMerger: return "dictmerger";
    case BuilderTag::VecMerger: return "vecmerger";
    case BuilderTag::GroupBuilder: return "groupbuilder";
  }
  return "?";
}

inline bool builderHasOp(BuilderTag t) {
  return t == BuilderTag::Merger || t == BuilderTag::DictMerger || t == BuilderTag::VecMerger;
}
inline bool builderIsKeyed(BuilderTag t) {
  return t == BuilderTag::DictMerger || t == BuilderTag::GroupBuilder;
}

enum class TypeTag : std::uint8_t { Scalar, Simd, Vec, Struct, Dict, Builder, Function, Var, Hole };

class IrType;
struct BuilderKind;

namespace detail {
struct TypeNode;
}

// Immutable, shared IR type. A default-constructed IrType means "no type".
//
// Var types only exist inside the type checker; Hole is the `?` placeholder
// accepted by the parser in builder type arguments and lambda annotations.
class IrType {
 public:
  IrType() = default;

  static IrType scalar(ScalarKind k);
  static IrType boolean() { return scalar(ScalarKind::Bool); }
  static IrType i32() { return scalar(ScalarKind::I32); }
  static IrType i64() { return scalar(ScalarKind::I64); }
  static IrType f32() { return scalar(ScalarKind::F32); }
  static IrType f64() { return scalar(ScalarKind::F64); }
  static IrType simd(ScalarKind k);
  static IrType vec(IrType elem);
  static IrType structure(std::vector<IrType> fields);
  static IrType dict(IrType key, IrType value);
  static IrType builder(const BuilderKind& kind);
  static IrType function(std::vector<IrType> params, IrType ret);
  static IrType var(int id);
  static IrType hole();

  explicit operator bool() const { return node_ != nullptr; }
  bool valid() const { return node_ != nullptr; }

  TypeTag tag() const;
  bool is(TypeTag t) const { return node_ && tag() == t; }
  bool isScalar() const { return is(TypeTag::Scalar); }
  bool isScalar(ScalarKind k) const { return isScalar() && scalarKind() == k; }
  bool isSimd() const { return is(TypeTag::Simd); }
  bool isVec() const { return is(TypeTag::Vec); }
  bool isStruct() const { return is(TypeTag::Struct); }
  bool isDict() const { return is(TypeTag::Dict); }
  bool isBuilder() const { return is(TypeTag::Builder); }
  bool isFunction() const { return is(TypeTag::Function); }
  bool isVar() const { return is(TypeTag::Var); }
  bool isHole() const { return is(TypeTag::Hole); }

  // Scalar and Simd.
  ScalarKind scalarKind() const;
  // Vec element.
  const IrType& elem() const;
  // Struct fields.
  const std::vector<IrType>& fields() const;
  // Dict key/value.
  const IrType& key() const;
  const IrType& value() const;
  // Builder.
  const BuilderKind& builderKind() const;
  // Function.
  const std::vector<IrType>& params() const;
  const IrType& ret() const;
  // Var.
  int varId() const;

  // Builder, or a structure whose leaves are all builders.
  bool isBuilderBearing() const;
  // Contains a builder anywhere (used by linearity).
  bool containsBuilder() const;
  // Contains a Var or Hole anywhere.
  bool hasUnknowns() const;

  std::string str() const;
  std::size_t hash() const;

  friend bool operator==(const IrType& a, const IrType& b);
  friend bool operator!=(const IrType& a, const IrType& b) { return !(a == b); }

 private:
  explicit IrType(std::shared_ptr<const detail::TypeNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::TypeNode> node_;
};

// Builder kind. `a` is the element (VecBuilder/Merger/VecMerger) or the key
// (DictMerger/GroupBuilder); `b` is the value type of keyed builders.
struct BuilderKind {
  BuilderTag tag = BuilderTag::VecBuilder;
  IrType a;
  IrType b;
  BinOp op = BinOp::Add;

  static BuilderKind vecBuilder(IrType elem) { return {BuilderTag::VecBuilder, std::move(elem), {}, BinOp::Add}; }
  static BuilderKind merger(IrType elem, BinOp op) { return {BuilderTag::Merger, std::move(elem), {}, op}; }
  static BuilderKind dictMerger(IrType k, IrType v, BinOp op) {
    return {BuilderTag::DictMerger, std::move(k), std::move(v), op};
  }
  static BuilderKind vecMerger(IrType elem, BinOp op) { return {BuilderTag::VecMerger, std::move(elem), {}, op}; }
  static BuilderKind groupBuilder(IrType k, IrType v) {
    return {BuilderTag::GroupBuilder, std::move(k), std::move(v), BinOp::Add};
  }

  // Type accepted by merge(): T, T, {K,V}, {i64,T}, {K,V}.
  IrType mergeInput() const;
  // Type produced by result(): vec[T], T, dict[K,V], vec[T], dict[K,vec[V]].
  IrType resultType() const;

  std::string str() const;

  friend bool operator==(const BuilderKind& x, const BuilderKind& y) {
    return x.tag == y.tag && x.a == y.a && x.b == y.b && (!builderHasOp(x.tag) || x.op == y.op);
  }
};

namespace detail {
struct TypeNode {
  TypeTag tag = TypeTag::Scalar;
  ScalarKind scalar = ScalarKind::I64;
  int var = 0;
  std::vector<IrType> kids;
  BuilderKind builder{};
  IrType ret{};  // Function only; kids hold the parameters.
};
}  // namespace detail

// Structural equality; reflexive, symmetric and transitive.
inline bool typeEquals(const IrType& a, const IrType& b) { return a == b; }

// ---------------------------------------------------------------------------

inline IrType IrType::scalar(ScalarKind k) {
  static const std::shared_ptr<const detail::TypeNode> cache[5] = {
      std::make_shared<detail::TypeNode>(detail::TypeNode{TypeTag::Scalar, ScalarKind::Bool, 0, {}, {}}),
      std::make_shared<detail::TypeNode>(detail::TypeNode{TypeTag::Scalar, ScalarKind::I32, 0, {}, {}}),
      std::make_shared<detail::TypeNode>(detail::TypeNode{TypeTag::Scalar, ScalarKind::I64, 0, {}, {}}),
      std::make_shared<detail::TypeNode>(detail::TypeNode{TypeTag::Scalar, ScalarKind::F32, 0, {}, {}}),
      std::make_shared<detail::TypeNode>(detail::TypeNode{TypeTag::Scalar, ScalarKind::F64, 0, {}, {}}),
  };
  return IrType(cache[static_cast<int>(k)]);
}

inline IrType IrType::simd(ScalarKind k) {
  auto n = std::make_shared<detail::TypeNode>();
  n->tag = TypeTag::Simd;
  n->scalar = k;
  return IrType(std::move(n));
}

inline IrType IrType::vec(IrType elem) {
  auto n = std::make_shared<detail::TypeNode>();
  n->tag = TypeTag::Vec;
  n->kids = {std::move(elem)};
  return IrType(std::move(n));
}

inline IrType IrType::structure(std::vector<IrType> fields) {
  auto n = std::make_shared<detail::TypeNode>();
  n->tag = TypeTag::Struct;
  n->kids = std::move(fields);
  return IrType(std::move(n));
}

inline IrType IrType::dict(IrType key, IrType value) {
  auto n = std::make_shared<detail::TypeNode>();
  n->tag = TypeTag::Dict;
  n->kids = {std::move(key), std::move(value)};
  return IrType(std::move(n));
}

inline IrType IrType::builder(const BuilderKind& kind) {
  auto n = std::make_shared<detail::TypeNode>();
  n->tag = TypeTag::Builder;
  n->builder = kind;
  return IrType(std::move(n));
}

inline IrType IrType::function(std::vector<IrType> params, IrType ret) {
  auto n = std::make_shared<detail::TypeNode>();
  n->tag = TypeTag::Function;
  n->kids = std::move(params);
  n->ret = std::move(ret);
  return IrType(std::move(n));
}

inline IrType IrType::var(int id) {
  auto n = std::make_shared<detail::TypeNode>();
  n->tag = TypeTag::Var;
  n->var = id;
  return IrType(std::move(n));
}

inline IrType IrType::hole() {
  static const auto h = std::make_shared<detail::TypeNode>(detail::TypeNode{TypeTag::Hole, ScalarKind::I64, 0, {}, {}});
  return IrType(h);
}

inline TypeTag IrType::tag() const { return node_->tag; }
inline ScalarKind IrType::scalarKind() const { return node_->scalar; }
inline const IrType& IrType::elem() const { return node_->kids.at(0); }
inline const std::vector<IrType>& IrType::fields() const { return node_->kids; }
inline const IrType& IrType::key() const { return node_->kids.at(0); }
inline const IrType& IrType::value() const { return node_->kids.at(1); }
inline const BuilderKind& IrType::builderKind() const { return node_->builder; }
inline const std::vector<IrType>& IrType::params() const { return node_->kids; }
inline const IrType& IrType::ret() const { return node_->ret; }
inline int IrType::varId() const { return node_->var; }

inline bool IrType::isBuilderBearing() const {
  if (!node_) return false;
  if (isBuilder()) return true;
  if (!isStruct() || fields().empty()) return false;
  for (const auto& f : fields())
    if (!f.isBuilderBearing()) return false;
  return true;
}

inline bool IrType::containsBuilder() const {
  if (!node_) return false;
  if (isBuilder()) return true;
  for (const auto& k : node_->kids)
    if (k.containsBuilder()) return true;
  return node_->ret.containsBuilder();
}

inline bool IrType::hasUnknowns() const {
  if (!node_) return false;
  if (isVar() || isHole()) return true;
  if (isBuilder()) return node_->builder.a.hasUnknowns() || node_->builder.b.hasUnknowns();
  for (const auto& k : node_->kids)
    if (k.hasUnknowns()) return true;
  return node_->ret.hasUnknowns();
}

inline bool operator==(const IrType& a, const IrType& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.tag != y.tag) return false;
  switch (x.tag) {
    case TypeTag::Scalar:
    case TypeTag::Simd: return x.scalar == y.scalar;
    case TypeTag::Var: return x.var == y.var;
    case TypeTag::Hole: return true;
    case TypeTag::Builder: return x.builder == y.builder;
    case TypeTag::Function: return x.kids == y.kids && x.ret == y.ret;
    default: return x.kids == y.kids;
  }
}

inline std::size_t IrType::hash() const {
  if (!node_) return 0;
  std::size_t h = static_cast<std::size_t>(node_->tag) * 1000003u;
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  switch (node_->tag) {
    case TypeTag::Scalar:
    case TypeTag::Simd: mix(static_cast<std::size_t>(node_->scalar)); break;
    case TypeTag::Var: mix(static_cast<std::size_t>(node_->var)); break;
    case TypeTag::Builder:
      mix(static_cast<std::size_t>(node_->builder.tag));
      mix(node_->builder.a.hash());
      mix(node_->builder.b.hash());
      if (builderHasOp(node_->builder.tag)) mix(static_cast<std::size_t>(node_->builder.op));
      break;
    case TypeTag::Function:
      for (const auto& k : node_->kids) mix(k.hash());
      mix(node_->ret.hash());
      break;
    default:
      for (const auto& k : node_->kids) mix(k.hash());
  }
  return h;
}

inline std::string IrType::str() const {
  if (!node_) return "<none>";
  switch (node_->tag) {
    case TypeTag::Scalar: return scalarName(node_->scalar);
    case TypeTag::Simd: return std::string("simd[") + scalarName(node_->scalar) + "]";
    case TypeTag::Vec: return "vec[" + elem().str() + "]";
    case TypeTag::Struct: {
      std::string s = "{";
      for (std::size_t i = 0; i < node_->kids.size(); ++i) {
        if (i) s += ", ";
        s += node_->kids[i].str();
      }
      return s + "}";
    }
    case TypeTag::Dict: return "dict[" + key().str() + "," + value().str() + "]";
    case TypeTag::Builder: return node_->builder.str();
    case TypeTag::Function: {
      std::string s = "(";
      for (std::size_t i = 0; i < node_->kids.size(); ++i) {
        if (i) s += ", ";
        s += node_->kids[i].str();
      }
      return s + ") => " + ret().str();
    }
    case TypeTag::Var: return "?" + std::to_string(node_->var);
    case TypeTag::Hole: return "?";
  }
  return "?";
}

inline IrType BuilderKind::mergeInput() const {
  switch (tag) {
    case BuilderTag::VecBuilder:
    case BuilderTag::Merger: return a;
    case BuilderTag::DictMerger:
    case BuilderTag::GroupBuilder: return IrType::structure({a, b});
    case BuilderTag::VecMerger: return IrType::structure({IrType::i64(), a});
  }
  return {};
}

inline IrType BuilderKind::resultType() const {
  switch (tag) {
    case BuilderTag::VecBuilder: return IrType::vec(a);
    case BuilderTag::Merger: return a;
    case BuilderTag::DictMerger: return IrType::dict(a, b);
    case BuilderTag::VecMerger: return IrType::vec(a);
    case BuilderTag::GroupBuilder: return IrType::dict(a, IrType::vec(b));
  }
  return {};
}

inline std::string BuilderKind::str() const {
  std::string s = builderName(tag);
  s += "[";
  s += a.valid() ? a.str() : "?";
  if (builderIsKeyed(tag)) {
    s += ",";
    s += b.valid() ? b.str() : "?";
  }
  if (builderHasOp(tag)) {
    s += ",";
    s += binOpSymbol(op);
  }
  return s + "]";
}

// Result type of result() applied to a builder or a structure of builders.
inline IrType resultTypeOf(const IrType& builders) {
  if (builders.isBuilder()) return builders.builderKind().resultType();
  std::vector<IrType> out;
  for (const auto& f : builders.fields()) out.push_back(resultTypeOf(f));
  return IrType::structure(std::move(out));
}

// Dictionary keys: scalars or structures of scalars.
inline bool isHashableKey(const IrType& t) {
  if (t.isScalar()) return true;
  if (!t.isStruct()) return false;
  for (const auto& f : t.fields())
    if (!f.isScalar()) return false;
  return true;
}

// Element types a merge op can fold: numeric scalars, or structures of them
// (folded component-wise).
inline bool admitsMergeOp(const IrType& t, BinOp op) {
  if (!isMergeOp(op)) return false;
  if (t.isScalar()) return isNumeric(t.scalarKind());
  if (!t.isStruct()) return false;
  for (const auto& f : t.fields())
    if (!admitsMergeOp(f, op)) return false;
  return true;
}

struct IrTypeHash {
  std::size_t operator()(const IrType& t) const { return t.hash(); }
};

}  // namespace weldmill
