#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "weldmill/error.hpp"
#include "weldmill/types.hpp"

namespace weldmill {

class MemoryTracker;
class BuilderState;
struct SimdData;
struct VecData;
struct StructData;
struct DictData;
struct Closure;

using Value = std::variant<std::monostate, bool, std::int32_t, std::int64_t, float, double,
                           std::shared_ptr<const SimdData>, std::shared_ptr<const VecData>,
                           std::shared_ptr<const StructData>, std::shared_ptr<const DictData>,
                           std::shared_ptr<BuilderState>, std::shared_ptr<const Closure>>;

// Logical bytes charged against an evaluation's memory limit; released when
// the owning vector or dictionary is destroyed.
class Allocation {
 public:
  Allocation(std::shared_ptr<MemoryTracker> tracker, std::int64_t bytes);
  ~Allocation();
  Allocation(const Allocation&) = delete;
  Allocation& operator=(const Allocation&) = delete;
  std::int64_t bytes() const { return bytes_; }

 private:
  std::shared_ptr<MemoryTracker> tracker_;
  std::int64_t bytes_;
};

struct SimdData {
  std::array<Value, kSimdWidth> lanes;
};

struct VecData {
  std::vector<Value> elems;
  // Set for vectors materialized by the engine; input vectors have none.
  std::unique_ptr<Allocation> alloc;
};

struct StructData {
  std::vector<Value> fields;
};

// Entries sorted ascending by key.
struct DictData {
  std::vector<std::pair<Value, Value>> entries;
  std::unique_ptr<Allocation> alloc;
};

// ---------------------------------------------------------------------------
// Construction helpers.

inline Value makeVec(std::vector<Value> elems) {
  auto v = std::make_shared<VecData>();
  v->elems = std::move(elems);
  return std::shared_ptr<const VecData>(std::move(v));
}

inline Value makeStructValue(std::vector<Value> fields) {
  auto s = std::make_shared<StructData>();
  s->fields = std::move(fields);
  return std::shared_ptr<const StructData>(std::move(s));
}

inline Value makeSimd(const std::array<Value, kSimdWidth>& lanes) {
  auto s = std::make_shared<SimdData>();
  s->lanes = lanes;
  return std::shared_ptr<const SimdData>(std::move(s));
}

inline Value literalValue(const auto& lit) {
  return std::visit([](auto x) -> Value { return x; }, lit);
}

inline const VecData& asVec(const Value& v) { return *std::get<std::shared_ptr<const VecData>>(v); }
inline const StructData& asStruct(const Value& v) { return *std::get<std::shared_ptr<const StructData>>(v); }
inline const DictData& asDict(const Value& v) { return *std::get<std::shared_ptr<const DictData>>(v); }
inline const SimdData& asSimd(const Value& v) { return *std::get<std::shared_ptr<const SimdData>>(v); }

inline bool isVecValue(const Value& v) { return std::holds_alternative<std::shared_ptr<const VecData>>(v); }
inline bool isStructValue(const Value& v) { return std::holds_alternative<std::shared_ptr<const StructData>>(v); }
inline bool isDictValue(const Value& v) { return std::holds_alternative<std::shared_ptr<const DictData>>(v); }
inline bool isSimdValue(const Value& v) { return std::holds_alternative<std::shared_ptr<const SimdData>>(v); }
inline bool isBuilderValue(const Value& v) { return std::holds_alternative<std::shared_ptr<BuilderState>>(v); }

inline std::int64_t asI64(const Value& v) { return std::get<std::int64_t>(v); }
inline bool asBool(const Value& v) { return std::get<bool>(v); }

// ---------------------------------------------------------------------------
// Ordering, equality and hashing. Floats order totally with NaN above every
// number; -0.0 and 0.0 compare equal.

namespace detail {
template <class F>
int compareFloat(F a, F b) {
  bool na = std::isnan(a), nb = std::isnan(b);
  if (na || nb) return na == nb ? 0 : (na ? 1 : -1);
  return a < b ? -1 : (b < a ? 1 : 0);
}
}  // namespace detail

inline int compareValues(const Value& a, const Value& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  switch (a.index()) {
    case 0: return 0;
    case 1: return static_cast<int>(std::get<bool>(a)) - static_cast<int>(std::get<bool>(b));
    case 2: {
      auto x = std::get<std::int32_t>(a), y = std::get<std::int32_t>(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
    case 3: {
      auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
      return x < y ? -1 : (y < x ? 1 : 0);
    }
    case 4: return detail::compareFloat(std::get<float>(a), std::get<float>(b));
    case 5: return detail::compareFloat(std::get<double>(a), std::get<double>(b));
    case 6: {
      const auto& x = asSimd(a).lanes;
      const auto& y = asSimd(b).lanes;
      for (int i = 0; i < kSimdWidth; ++i)
        if (int c = compareValues(x[i], y[i])) return c;
      return 0;
    }
    case 7: {
      const auto& x = asVec(a).elems;
      const auto& y = asVec(b).elems;
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        if (int c = compareValues(x[i], y[i])) return c;
      return x.size() < y.size() ? -1 : (y.size() < x.size() ? 1 : 0);
    }
    case 8: {
      const auto& x = asStruct(a).fields;
      const auto& y = asStruct(b).fields;
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        if (int c = compareValues(x[i], y[i])) return c;
      return x.size() < y.size() ? -1 : (y.size() < x.size() ? 1 : 0);
    }
    case 9: {
      const auto& x = asDict(a).entries;
      const auto& y = asDict(b).entries;
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (int c = compareValues(x[i].first, y[i].first)) return c;
        if (int c = compareValues(x[i].second, y[i].second)) return c;
      }
      return x.size() < y.size() ? -1 : (y.size() < x.size() ? 1 : 0);
    }
    default: {
      // Builders and closures compare by identity.
      auto pa = a.index() == 10 ? static_cast<const void*>(std::get<10>(a).get()) : std::get<11>(a).get();
      auto pb = b.index() == 10 ? static_cast<const void*>(std::get<10>(b).get()) : std::get<11>(b).get();
      return pa < pb ? -1 : (pb < pa ? 1 : 0);
    }
  }
}

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const { return compareValues(a, b) < 0; }
};

// Exact structural equality (bitwise for floats, so NaN equals NaN).
inline bool valuesIdentical(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  switch (a.index()) {
    case 4: {
      float x = std::get<float>(a), y = std::get<float>(b);
      return std::memcmp(&x, &y, sizeof x) == 0;
    }
    case 5: {
      double x = std::get<double>(a), y = std::get<double>(b);
      return std::memcmp(&x, &y, sizeof x) == 0;
    }
    case 6:
      for (int i = 0; i < kSimdWidth; ++i)
        if (!valuesIdentical(asSimd(a).lanes[i], asSimd(b).lanes[i])) return false;
      return true;
    case 7: {
      const auto& x = asVec(a).elems;
      const auto& y = asVec(b).elems;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!valuesIdentical(x[i], y[i])) return false;
      return true;
    }
    case 8: {
      const auto& x = asStruct(a).fields;
      const auto& y = asStruct(b).fields;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!valuesIdentical(x[i], y[i])) return false;
      return true;
    }
    case 9: {
      const auto& x = asDict(a).entries;
      const auto& y = asDict(b).entries;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!valuesIdentical(x[i].first, y[i].first) || !valuesIdentical(x[i].second, y[i].second)) return false;
      return true;
    }
    default: return compareValues(a, b) == 0;
  }
}

// Equality with a relative tolerance on floating-point leaves:
// |a - b| <= rel * max(|a|, |b|), with an absolute floor of `rel` near zero.
inline bool valuesClose(const Value& a, const Value& b, double rel) {
  if (a.index() != b.index()) return false;
  auto close = [rel](double x, double y) {
    if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
    if (std::isinf(x) || std::isinf(y)) return x == y;
    double scale = std::max({std::fabs(x), std::fabs(y), 1.0});
    return std::fabs(x - y) <= rel * scale;
  };
  switch (a.index()) {
    case 4: return close(std::get<float>(a), std::get<float>(b));
    case 5: return close(std::get<double>(a), std::get<double>(b));
    case 6:
      for (int i = 0; i < kSimdWidth; ++i)
        if (!valuesClose(asSimd(a).lanes[i], asSimd(b).lanes[i], rel)) return false;
      return true;
    case 7: {
      const auto& x = asVec(a).elems;
      const auto& y = asVec(b).elems;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!valuesClose(x[i], y[i], rel)) return false;
      return true;
    }
    case 8: {
      const auto& x = asStruct(a).fields;
      const auto& y = asStruct(b).fields;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!valuesClose(x[i], y[i], rel)) return false;
      return true;
    }
    case 9: {
      const auto& x = asDict(a).entries;
      const auto& y = asDict(b).entries;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!valuesClose(x[i].first, y[i].first, rel) || !valuesClose(x[i].second, y[i].second, rel)) return false;
      return true;
    }
    default: return valuesIdentical(a, b);
  }
}

inline std::size_t hashValue(const Value& v) {
  auto mix = [](std::size_t h, std::size_t x) { return h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); };
  switch (v.index()) {
    case 1: return std::hash<bool>{}(std::get<bool>(v));
    case 2: return std::hash<std::int64_t>{}(std::get<std::int32_t>(v));
    case 3: return std::hash<std::int64_t>{}(std::get<std::int64_t>(v));
    case 4:
    case 5: {
      double d = v.index() == 4 ? std::get<float>(v) : std::get<double>(v);
      if (d == 0.0) d = 0.0;
      if (std::isnan(d)) return 0x7ff8;
      return std::hash<double>{}(d);
    }
    case 8: {
      std::size_t h = 17;
      for (const auto& f : asStruct(v).fields) h = mix(h, hashValue(f));
      return h;
    }
    case 7: {
      std::size_t h = 31;
      for (const auto& f : asVec(v).elems) h = mix(h, hashValue(f));
      return h;
    }
    default: return v.index();
  }
}

struct ValueHash {
  std::size_t operator()(const Value& v) const { return hashValue(v); }
};
struct ValueKeyEq {
  bool operator()(const Value& a, const Value& b) const { return compareValues(a, b) == 0; }
};

// Bytes a value of type `t` occupies inline in the boundary format, not
// counting the contents of nested vectors (each nested vector costs its
// 8-byte length here).
inline std::int64_t inlineBytes(const IrType& t) {
  if (t.isScalar()) return static_cast<std::int64_t>(scalarBytes(t.scalarKind()));
  if (t.isSimd()) return static_cast<std::int64_t>(scalarBytes(t.scalarKind())) * kSimdWidth;
  if (t.isStruct()) {
    std::int64_t n = 0;
    for (const auto& f : t.fields()) n += inlineBytes(f);
    return n;
  }
  return 8;
}

// Debug text: scalars plainly, vectors `[..]`, structures `{..}`, dictionaries `{k: v, ..}`.
inline std::string valueToString(const Value& v) {
  auto num = [](double d, bool f32) {
    if (std::isnan(d)) return std::string("nan");
    if (std::isinf(d)) return std::string(d < 0 ? "-inf" : "inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", f32 ? 9 : 17, d);
    return std::string(buf);
  };
  switch (v.index()) {
    case 0: return "()";
    case 1: return std::get<bool>(v) ? "true" : "false";
    case 2: return std::to_string(std::get<std::int32_t>(v));
    case 3: return std::to_string(std::get<std::int64_t>(v));
    case 4: return num(std::get<float>(v), true);
    case 5: return num(std::get<double>(v), false);
    case 6: {
      std::string s = "<";
      for (int i = 0; i < kSimdWidth; ++i) s += (i ? ", " : "") + valueToString(asSimd(v).lanes[i]);
      return s + ">";
    }
    case 7: {
      std::string s = "[";
      const auto& e = asVec(v).elems;
      for (std::size_t i = 0; i < e.size(); ++i) s += (i ? ", " : "") + valueToString(e[i]);
      return s + "]";
    }
    case 8: {
      std::string s = "{";
      const auto& f = asStruct(v).fields;
      for (std::size_t i = 0; i < f.size(); ++i) s += (i ? ", " : "") + valueToString(f[i]);
      return s + "}";
    }
    case 9: {
      std::string s = "{";
      const auto& e = asDict(v).entries;
      for (std::size_t i = 0; i < e.size(); ++i)
        s += (i ? ", " : "") + valueToString(e[i].first) + ": " + valueToString(e[i].second);
      return s + "}";
    }
    case 10: return "<builder>";
    default: return "<function>";
  }
}

}  // namespace weldmill
