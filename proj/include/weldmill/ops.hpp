#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <type_traits>

#include "weldmill/parser.hpp"
#include "weldmill/value.hpp"

namespace weldmill {

// Binary and unary operators over runtime values. Integer arithmetic wraps;
// integer division or modulo by zero raises DivideByZero; floats follow IEEE.
// Simd operands apply lane-wise; structures fold component-wise (merge ops).
Value applyBinary(BinOp op, const Value& a, const Value& b);
Value applyUnary(UnaryOp op, const Value& a);
Value castValue(ScalarKind to, const Value& a);
Value identityValue(const IrType& t, BinOp op);

namespace detail {

template <class T>
T wrapAdd(T a, T b) {
  using U = std::make_unsigned_t<T>;
  return static_cast<T>(static_cast<U>(a) + static_cast<U>(b));
}
template <class T>
T wrapSub(T a, T b) {
  using U = std::make_unsigned_t<T>;
  return static_cast<T>(static_cast<U>(a) - static_cast<U>(b));
}
template <class T>
T wrapMul(T a, T b) {
  using U = std::make_unsigned_t<T>;
  return static_cast<T>(static_cast<U>(a) * static_cast<U>(b));
}

[[noreturn]] inline void divideByZero() { throw EvalError("DivideByZero", "integer division by zero"); }

template <class T>
Value intBinary(BinOp op, T a, T b) {
  switch (op) {
    case BinOp::Add: return wrapAdd(a, b);
    case BinOp::Sub: return wrapSub(a, b);
    case BinOp::Mul: return wrapMul(a, b);
    case BinOp::Div:
      if (b == 0) divideByZero();
      if (b == -1) return wrapSub(T(0), a);
      return static_cast<T>(a / b);
    case BinOp::Mod:
      if (b == 0) divideByZero();
      if (b == -1) return T(0);
      return static_cast<T>(a % b);
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    case BinOp::BitAnd: return static_cast<T>(a & b);
    case BinOp::BitOr: return static_cast<T>(a | b);
    case BinOp::Min: return a <= b ? a : b;
    case BinOp::Max: return a >= b ? a : b;
    default: break;
  }
  throw EvalError("TypeMismatch", std::string("operator ") + binOpSymbol(op) + " on integers");
}

template <class T>
Value floatBinary(BinOp op, T a, T b) {
  switch (op) {
    case BinOp::Add: return static_cast<T>(a + b);
    case BinOp::Sub: return static_cast<T>(a - b);
    case BinOp::Mul: return static_cast<T>(a * b);
    case BinOp::Div: return static_cast<T>(a / b);
    case BinOp::Mod: return static_cast<T>(std::fmod(a, b));
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    // NaN orders above every number.
    case BinOp::Min: return compareFloat(a, b) <= 0 ? a : b;
    case BinOp::Max: return compareFloat(a, b) >= 0 ? a : b;
    default: break;
  }
  throw EvalError("TypeMismatch", std::string("operator ") + binOpSymbol(op) + " on floats");
}

inline Value boolBinary(BinOp op, bool a, bool b) {
  switch (op) {
    case BinOp::And:
    case BinOp::BitAnd:
    case BinOp::Min: return a && b;
    case BinOp::Or:
    case BinOp::BitOr:
    case BinOp::Max: return a || b;
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return !a && b;
    case BinOp::Le: return !a || b;
    case BinOp::Gt: return a && !b;
    case BinOp::Ge: return a || !b;
    default: break;
  }
  throw EvalError("TypeMismatch", std::string("operator ") + binOpSymbol(op) + " on bool");
}

template <class T>
Value intUnary(UnaryOp op, T a) {
  switch (op) {
    case UnaryOp::Neg: return wrapSub(T(0), a);
    case UnaryOp::Abs: return a < 0 ? wrapSub(T(0), a) : a;
    default: break;
  }
  throw EvalError("TypeMismatch", std::string("operator ") + unaryOpName(op) + " on integers");
}

template <class T>
Value floatUnary(UnaryOp op, T a) {
  switch (op) {
    case UnaryOp::Neg: return static_cast<T>(-a);
    case UnaryOp::Abs: return static_cast<T>(std::fabs(a));
    case UnaryOp::Sqrt: return static_cast<T>(std::sqrt(a));
    case UnaryOp::Exp: return static_cast<T>(std::exp(a));
    case UnaryOp::Log: return static_cast<T>(std::log(a));
    default: break;
  }
  throw EvalError("TypeMismatch", std::string("operator ") + unaryOpName(op) + " on floats");
}

template <class To>
To castScalar(const Value& a) {
  return std::visit(
      [](const auto& x) -> To {
        using From = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<From, bool> || std::is_integral_v<From>) {
          if constexpr (std::is_same_v<To, bool>) return x != 0;
          else return static_cast<To>(x);
        } else if constexpr (std::is_floating_point_v<From>) {
          if constexpr (std::is_same_v<To, bool>) return x != 0;
          else if constexpr (std::is_floating_point_v<To>) return static_cast<To>(x);
          else {
            // Truncate toward zero, saturating; NaN becomes 0.
            if (std::isnan(x)) return To(0);
            if (x <= static_cast<From>(std::numeric_limits<To>::min())) return std::numeric_limits<To>::min();
            if (x >= static_cast<From>(std::numeric_limits<To>::max())) return std::numeric_limits<To>::max();
            return static_cast<To>(x);
          }
        } else {
          throw EvalError("TypeMismatch", "cast of a non-scalar value");
        }
      },
      a);
}

}  // namespace detail

inline Value applyBinary(BinOp op, const Value& a, const Value& b) {
  switch (a.index()) {
    case 1:
      if (b.index() == 1) return detail::boolBinary(op, std::get<bool>(a), std::get<bool>(b));
      break;
    case 2:
      if (b.index() == 2) return detail::intBinary(op, std::get<std::int32_t>(a), std::get<std::int32_t>(b));
      break;
    case 3:
      if (b.index() == 3) return detail::intBinary(op, std::get<std::int64_t>(a), std::get<std::int64_t>(b));
      break;
    case 4:
      if (b.index() == 4) return detail::floatBinary(op, std::get<float>(a), std::get<float>(b));
      break;
    case 5:
      if (b.index() == 5) return detail::floatBinary(op, std::get<double>(a), std::get<double>(b));
      break;
    case 6: {
      const auto& x = asSimd(a).lanes;
      std::array<Value, kSimdWidth> out;
      if (isSimdValue(b)) {
        const auto& y = asSimd(b).lanes;
        for (int i = 0; i < kSimdWidth; ++i) out[i] = applyBinary(op, x[i], y[i]);
      } else {
        for (int i = 0; i < kSimdWidth; ++i) out[i] = applyBinary(op, x[i], b);
      }
      return makeSimd(out);
    }
    case 8: {
      if (!isStructValue(b)) break;
      const auto& x = asStruct(a).fields;
      const auto& y = asStruct(b).fields;
      if (x.size() != y.size()) break;
      std::vector<Value> out(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = applyBinary(op, x[i], y[i]);
      return makeStructValue(std::move(out));
    }
    default: break;
  }
  if (isSimdValue(b)) {
    const auto& y = asSimd(b).lanes;
    std::array<Value, kSimdWidth> out;
    for (int i = 0; i < kSimdWidth; ++i) out[i] = applyBinary(op, a, y[i]);
    return makeSimd(out);
  }
  throw EvalError("TypeMismatch", std::string("operator ") + binOpSymbol(op) + " on mismatched operands");
}

inline Value applyUnary(UnaryOp op, const Value& a) {
  switch (a.index()) {
    case 1:
      if (op == UnaryOp::Not) return !std::get<bool>(a);
      break;
    case 2: return detail::intUnary(op, std::get<std::int32_t>(a));
    case 3: return detail::intUnary(op, std::get<std::int64_t>(a));
    case 4: return detail::floatUnary(op, std::get<float>(a));
    case 5: return detail::floatUnary(op, std::get<double>(a));
    case 6: {
      std::array<Value, kSimdWidth> out;
      for (int i = 0; i < kSimdWidth; ++i) out[i] = applyUnary(op, asSimd(a).lanes[i]);
      return makeSimd(out);
    }
    default: break;
  }
  throw EvalError("TypeMismatch", std::string("operator ") + unaryOpName(op) + " on an unsupported operand");
}

inline Value castValue(ScalarKind to, const Value& a) {
  if (isSimdValue(a)) {
    std::array<Value, kSimdWidth> out;
    for (int i = 0; i < kSimdWidth; ++i) out[i] = castValue(to, asSimd(a).lanes[i]);
    return makeSimd(out);
  }
  switch (to) {
    case ScalarKind::Bool: return detail::castScalar<bool>(a);
    case ScalarKind::I32: return detail::castScalar<std::int32_t>(a);
    case ScalarKind::I64: return detail::castScalar<std::int64_t>(a);
    case ScalarKind::F32: return detail::castScalar<float>(a);
    case ScalarKind::F64: return detail::castScalar<double>(a);
  }
  throw EvalError("TypeMismatch", "bad cast");
}

// Identity element of a merge op for a scalar, simd or structure type.
inline Value identityValue(const IrType& t, BinOp op) {
  if (t.isStruct()) {
    std::vector<Value> f;
    for (const auto& ft : t.fields()) f.push_back(identityValue(ft, op));
    return makeStructValue(std::move(f));
  }
  if (t.isSimd()) {
    std::array<Value, kSimdWidth> lanes;
    lanes.fill(identityValue(IrType::scalar(t.scalarKind()), op));
    return makeSimd(lanes);
  }
  if (!isMergeOp(op)) throw EvalError("TypeMismatch", std::string("no identity for ") + binOpSymbol(op));
  return literalValue(mergeIdentity(t.scalarKind(), op));
}

// Folds the lanes of a simd value into one scalar with `op`.
inline Value foldLanes(BinOp op, const Value& v) {
  const auto& l = asSimd(v).lanes;
  Value acc = l[0];
  for (int i = 1; i < kSimdWidth; ++i) acc = applyBinary(op, acc, l[i]);
  return acc;
}

}  // namespace weldmill
