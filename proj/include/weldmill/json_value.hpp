#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "json.hpp"
#include "weldmill/boundary.hpp"
#include "weldmill/error.hpp"
#include "weldmill/types.hpp"
#include "weldmill/value.hpp"

// JSON form of boundary values: scalars as numbers or booleans, vectors and
// structures as arrays. Non-finite floats are the strings "NaN", "Infinity"
// and "-Infinity". 64-bit integers are written exactly, but readers that
// hold numbers as doubles only keep |x| < 2^53; use binary files beyond it.

namespace weldmill {

namespace detail {

[[noreturn]] inline void badJson(const IrType& t, const nlohmann::json& j) {
  throw ApiError("BoundaryFormat", "JSON " + j.dump() + " is not a value of type " + t.str());
}

inline nlohmann::json floatJson(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  return x;
}

inline double floatFromJson(const nlohmann::json& j, const IrType& t) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  badJson(t, j);
}

inline std::int64_t intFromJson(const nlohmann::json& j, const IrType& t, std::int64_t lo, std::int64_t hi) {
  if (j.is_number_integer() && !j.is_number_unsigned()) {
    auto v = j.get<std::int64_t>();
    if (v >= lo && v <= hi) return v;
  } else if (j.is_number_unsigned()) {
    auto v = j.get<std::uint64_t>();
    if (v <= static_cast<std::uint64_t>(hi)) return static_cast<std::int64_t>(v);
  }
  badJson(t, j);
}

}  // namespace detail

inline nlohmann::json valueToJson(const Value& v, const IrType& t) {
  requireBoundaryType(t);
  if (t.isScalar()) {
    switch (t.scalarKind()) {
      case ScalarKind::Bool: return std::get<bool>(v);
      case ScalarKind::I32: return std::get<std::int32_t>(v);
      case ScalarKind::I64: return std::get<std::int64_t>(v);
      case ScalarKind::F32: return detail::floatJson(std::get<float>(v));
      case ScalarKind::F64: return detail::floatJson(std::get<double>(v));
    }
  }
  nlohmann::json arr = nlohmann::json::array();
  if (t.isVec()) {
    for (const auto& x : asVec(v).elems) arr.push_back(valueToJson(x, t.elem()));
  } else {
    const auto& fields = asStruct(v).fields;
    for (std::size_t i = 0; i < fields.size(); ++i) arr.push_back(valueToJson(fields[i], t.fields()[i]));
  }
  return arr;
}

inline Value valueFromJson(const nlohmann::json& j, const IrType& t) {
  requireBoundaryType(t);
  if (t.isScalar()) {
    switch (t.scalarKind()) {
      case ScalarKind::Bool:
        if (!j.is_boolean()) detail::badJson(t, j);
        return j.get<bool>();
      case ScalarKind::I32:
        return static_cast<std::int32_t>(detail::intFromJson(j, t, std::numeric_limits<std::int32_t>::min(),
                                                             std::numeric_limits<std::int32_t>::max()));
      case ScalarKind::I64:
        return detail::intFromJson(j, t, std::numeric_limits<std::int64_t>::min(),
                                   std::numeric_limits<std::int64_t>::max());
      case ScalarKind::F32: return static_cast<float>(detail::floatFromJson(j, t));
      case ScalarKind::F64: return detail::floatFromJson(j, t);
    }
  }
  if (!j.is_array()) detail::badJson(t, j);
  std::vector<Value> elems;
  if (t.isVec()) {
    for (const auto& x : j) elems.push_back(valueFromJson(x, t.elem()));
    return makeVec(std::move(elems));
  }
  if (j.size() != t.fields().size()) detail::badJson(t, j);
  for (std::size_t i = 0; i < j.size(); ++i) elems.push_back(valueFromJson(j[i], t.fields()[i]));
  return makeStructValue(std::move(elems));
}

// Diagnostic object: {"stage", "code", "message", "span": [begin, end]}.
inline nlohmann::json errorJson(Stage stage, const std::string& code, const std::string& message, Span span) {
  return {{"stage", stageName(stage)}, {"code", code}, {"message", message}, {"span", {span.begin, span.end}}};
}

inline nlohmann::json errorJson(const Error& e) { return errorJson(e.stage(), e.code(), e.what(), e.span()); }

}  // namespace weldmill
