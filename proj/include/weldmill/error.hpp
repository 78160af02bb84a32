#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace weldmill {

// Byte offsets into the source text; [begin, end).
struct Span {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

// Pipeline stage that produced an error. Carried by every Error so callers
// across the foreign boundary can report where a program failed.
enum class Stage : std::uint8_t { Parse, Expand, Type, Linearity, Optimize, Eval, Api };

inline const char* stageName(Stage s) {
  switch (s) {
    case Stage::Parse: return "parse";
    case Stage::Expand: return "expand";
    case Stage::Type: return "type";
    case Stage::Linearity: return "linearity";
    case Stage::Optimize: return "optimize";
    case Stage::Eval: return "eval";
    case Stage::Api: return "api";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Stage stage, std::string code, const std::string& message, Span span = {})
      : std::runtime_error(message), stage_(stage), code_(std::move(code)), span_(span) {}

  Stage stage() const noexcept { return stage_; }
  const std::string& code() const noexcept { return code_; }
  Span span() const noexcept { return span_; }

 private:
  Stage stage_;
  std::string code_;
  Span span_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, Span span, std::string expected = {})
      : Error(Stage::Parse, "ParseError", message, span), expected_(std::move(expected)) {}

  // Hint naming the token the parser wanted, empty when not applicable.
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::string expected_;
};

class TypeError : public Error {
 public:
  TypeError(const std::string& message, Span span, std::string left = {}, std::string right = {})
      : Error(Stage::Type, "TypeError", message, span),
        left_(std::move(left)),
        right_(std::move(right)) {}

  // Printed forms of the two sides of a failed unification (may be empty).
  const std::string& left() const noexcept { return left_; }
  const std::string& right() const noexcept { return right_; }

 private:
  std::string left_;
  std::string right_;
};

enum class LinearityKind : std::uint8_t { ConsumedTwice, UnconsumedOnPath, LoopBodyEscape };

inline const char* linearityKindName(LinearityKind k) {
  switch (k) {
    case LinearityKind::ConsumedTwice: return "consumed-twice";
    case LinearityKind::UnconsumedOnPath: return "unconsumed-on-path";
    case LinearityKind::LoopBodyEscape: return "loop-body-escape";
  }
  return "unknown";
}

class LinearityError : public Error {
 public:
  LinearityError(LinearityKind kind, std::string variable, const std::string& message, Span span)
      : Error(Stage::Linearity, linearityKindName(kind), message, span),
        kind_(kind),
        variable_(std::move(variable)) {}

  LinearityKind kind() const noexcept { return kind_; }
  const std::string& variable() const noexcept { return variable_; }

 private:
  LinearityKind kind_;
  std::string variable_;
};

// Malformed sugar call (wrong argument count or shape).
class ExpandError : public Error {
 public:
  ExpandError(const std::string& message, Span span) : Error(Stage::Expand, "ArityError", message, span) {}
};

class OptimizeError : public Error {
 public:
  OptimizeError(std::string code, const std::string& message)
      : Error(Stage::Optimize, std::move(code), message) {}
};

// Runtime failures raised by the engine. Codes: MemoryLimitExceeded,
// IndexOutOfBounds, KeyNotFound, DivideByZero, ExternCallUnknown,
// ZipLengthMismatch, UseAfterResult, IterationLimit.
class EvalError : public Error {
 public:
  EvalError(std::string code, const std::string& message, Span span = {})
      : Error(Stage::Eval, std::move(code), message, span) {}
};

// Errors from the object API: UnsupportedBoundaryType, UndeclaredDependency,
// UseAfterFree, DoubleFree, CycleDetected, EvaluateUnsupportedResultType,
// UnknownHandle, BoundaryFormat, InvalidArgument, InvalidOptions,
// InternalError.
class ApiError : public Error {
 public:
  ApiError(std::string code, const std::string& message)
      : Error(Stage::Api, std::move(code), message) {}
};

}  // namespace weldmill
