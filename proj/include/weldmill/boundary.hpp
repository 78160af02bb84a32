#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "weldmill/error.hpp"
#include "weldmill/types.hpp"
#include "weldmill/value.hpp"

// Boundary value format: little-endian; bool is one byte (0 or 1); i32 and
// f32 take four bytes; i64 and f64 take eight; a structure is its fields
// back to back with no padding; a vector is a signed 64-bit element count
// followed by its elements, nested vectors inline.

namespace weldmill {

// Scalars, vectors and structures of those. Dictionaries, builders, simd and
// function types have no boundary form.
inline bool boundaryTypeSupported(const IrType& t) {
  if (!t.valid()) return false;
  if (t.isScalar()) return true;
  if (t.isVec()) return boundaryTypeSupported(t.elem());
  if (t.isStruct()) {
    for (const auto& f : t.fields())
      if (!boundaryTypeSupported(f)) return false;
    return true;
  }
  return false;
}

inline void requireBoundaryType(const IrType& t) {
  if (!boundaryTypeSupported(t))
    throw ApiError("UnsupportedBoundaryType", "type " + t.str() + " cannot cross the boundary");
}

namespace detail {

template <typename T>
void putLE(std::vector<std::uint8_t>& out, T v) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

[[noreturn]] inline void badValue(const IrType& t) {
  throw ApiError("BoundaryFormat", "value does not have type " + t.str());
}

inline void encodeInto(const Value& v, const IrType& t, std::vector<std::uint8_t>& out) {
  if (t.isScalar()) {
    switch (t.scalarKind()) {
      case ScalarKind::Bool:
        if (!std::holds_alternative<bool>(v)) badValue(t);
        out.push_back(std::get<bool>(v) ? 1 : 0);
        return;
      case ScalarKind::I32:
        if (!std::holds_alternative<std::int32_t>(v)) badValue(t);
        putLE(out, std::get<std::int32_t>(v));
        return;
      case ScalarKind::I64:
        if (!std::holds_alternative<std::int64_t>(v)) badValue(t);
        putLE(out, std::get<std::int64_t>(v));
        return;
      case ScalarKind::F32:
        if (!std::holds_alternative<float>(v)) badValue(t);
        putLE(out, std::get<float>(v));
        return;
      case ScalarKind::F64:
        if (!std::holds_alternative<double>(v)) badValue(t);
        putLE(out, std::get<double>(v));
        return;
    }
  }
  if (t.isVec()) {
    if (!isVecValue(v)) badValue(t);
    const auto& elems = asVec(v).elems;
    putLE(out, static_cast<std::int64_t>(elems.size()));
    for (const auto& x : elems) encodeInto(x, t.elem(), out);
    return;
  }
  if (t.isStruct()) {
    if (!isStructValue(v)) badValue(t);
    const auto& fields = asStruct(v).fields;
    if (fields.size() != t.fields().size()) badValue(t);
    for (std::size_t i = 0; i < fields.size(); ++i) encodeInto(fields[i], t.fields()[i], out);
    return;
  }
  requireBoundaryType(t);
}

// Bytes one element of `t` occupies at minimum; zero only for empty structures.
inline std::size_t minEncodedSize(const IrType& t) {
  if (t.isScalar()) {
    switch (t.scalarKind()) {
      case ScalarKind::Bool: return 1;
      case ScalarKind::I32:
      case ScalarKind::F32: return 4;
      default: return 8;
    }
  }
  if (t.isVec()) return 8;
  std::size_t n = 0;
  for (const auto& f : t.fields()) n += minEncodedSize(f);
  return n;
}

class Decoder {
 public:
  Decoder(const std::uint8_t* data, std::size_t size) : p_(data), n_(size) {}

  Value decode(const IrType& t) {
    if (t.isScalar()) {
      switch (t.scalarKind()) {
        case ScalarKind::Bool: {
          std::uint8_t b = take<std::uint8_t>();
          if (b > 1) fail("bool byte must be 0 or 1");
          return b == 1;
        }
        case ScalarKind::I32: return std::bit_cast<std::int32_t>(take<std::uint32_t>());
        case ScalarKind::I64: return std::bit_cast<std::int64_t>(take<std::uint64_t>());
        case ScalarKind::F32: return std::bit_cast<float>(take<std::uint32_t>());
        case ScalarKind::F64: return std::bit_cast<double>(take<std::uint64_t>());
      }
    }
    if (t.isVec()) {
      auto count = std::bit_cast<std::int64_t>(take<std::uint64_t>());
      if (count < 0) fail("negative vector length");
      std::size_t each = minEncodedSize(t.elem());
      auto ucount = static_cast<std::uint64_t>(count);
      if (each > 0 ? ucount > (n_ - pos_) / each : ucount > (std::uint64_t{1} << 32))
        fail("vector length " + std::to_string(count) + " exceeds the remaining input");
      std::vector<Value> elems;
      elems.reserve(static_cast<std::size_t>(ucount));
      for (std::uint64_t i = 0; i < ucount; ++i) elems.push_back(decode(t.elem()));
      return makeVec(std::move(elems));
    }
    if (t.isStruct()) {
      std::vector<Value> fields;
      for (const auto& f : t.fields()) fields.push_back(decode(f));
      return makeStructValue(std::move(fields));
    }
    requireBoundaryType(t);
    return {};
  }

  std::size_t consumed() const { return pos_; }

 private:
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw ApiError("BoundaryFormat", why + " at byte " + std::to_string(pos_));
  }

  template <typename U>
  U take() {
    if (n_ - pos_ < sizeof(U)) fail("input truncated");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(p_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
};

}  // namespace detail

// Whether `v` is a value of boundary type `t`; walks without copying.
inline bool valueHasType(const Value& v, const IrType& t) {
  if (t.isScalar()) {
    switch (t.scalarKind()) {
      case ScalarKind::Bool: return std::holds_alternative<bool>(v);
      case ScalarKind::I32: return std::holds_alternative<std::int32_t>(v);
      case ScalarKind::I64: return std::holds_alternative<std::int64_t>(v);
      case ScalarKind::F32: return std::holds_alternative<float>(v);
      case ScalarKind::F64: return std::holds_alternative<double>(v);
    }
  }
  if (t.isVec()) {
    if (!isVecValue(v)) return false;
    for (const auto& x : asVec(v).elems)
      if (!valueHasType(x, t.elem())) return false;
    return true;
  }
  if (t.isStruct()) {
    if (!isStructValue(v) || asStruct(v).fields.size() != t.fields().size()) return false;
    for (std::size_t i = 0; i < t.fields().size(); ++i)
      if (!valueHasType(asStruct(v).fields[i], t.fields()[i])) return false;
    return true;
  }
  return false;
}

inline std::vector<std::uint8_t> encodeBoundary(const Value& v, const IrType& t) {
  requireBoundaryType(t);
  std::vector<std::uint8_t> out;
  detail::encodeInto(v, t, out);
  return out;
}

// The whole buffer must hold exactly one value of type `t`.
inline Value decodeBoundary(const std::uint8_t* data, std::size_t size, const IrType& t) {
  requireBoundaryType(t);
  detail::Decoder d(data, size);
  Value v = d.decode(t);
  if (d.consumed() != size)
    throw ApiError("BoundaryFormat", std::to_string(size - d.consumed()) + " trailing bytes after value");
  return v;
}

inline Value decodeBoundary(const std::vector<std::uint8_t>& bytes, const IrType& t) {
  return decodeBoundary(bytes.data(), bytes.size(), t);
}

}  // namespace weldmill
