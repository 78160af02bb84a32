#include "weldmill/c_api.h"

#include <charconv>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "weldmill/api.hpp"
#include "weldmill/json_value.hpp"

namespace {

using namespace weldmill;

Runtime& runtime() {
  static Runtime rt;
  return rt;
}

// Text views of results, owned here so returned pointers stay valid.
struct ResultText {
  std::shared_ptr<const WeldResult> result;
  std::string type;
  std::string error;
  std::string stats;
};

std::mutex textMu;
std::map<weldmill_handle, ResultText>& texts() {
  static std::map<weldmill_handle, ResultText> m;
  return m;
}

thread_local std::string lastError;
thread_local bool hasLastError = false;
thread_local std::string scratch;

void setError(const nlohmann::json& j) {
  lastError = j.dump();
  hasLastError = true;
}

template <typename F, typename R>
R guarded(R onError, F&& f) {
  hasLastError = false;
  try {
    return f();
  } catch (const Error& e) {
    setError(errorJson(e));
  } catch (const std::exception& e) {
    setError(errorJson(Stage::Api, "InternalError", e.what(), {}));
  }
  return onError;
}

const ResultText& textOf(weldmill_handle r) {
  std::lock_guard<std::mutex> lock(textMu);
  auto it = texts().find(r);
  if (it == texts().end()) {
    runtime().result(r);  // raises UseAfterFree or UnknownHandle
    throw ApiError("UnknownHandle", "no result with handle " + std::to_string(r));
  }
  return it->second;
}

std::int64_t parseInt(const std::string& key, const std::string& text) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v < 0)
    throw ApiError("InvalidOptions", "option '" + key + "' needs a non-negative integer, got '" + text + "'");
  return v;
}

PipelineOptions parseOptions(const char* text) {
  PipelineOptions o;
  if (!text) return o;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    std::string key = tok.substr(0, eq);
    std::string val = eq == std::string::npos ? "" : tok.substr(eq + 1);
    if (key == "threads" && !val.empty()) {
      o.engine.threads = static_cast<int>(std::max<std::int64_t>(1, parseInt(key, val)));
    } else if (key == "memory_limit" && !val.empty()) {
      o.engine.memoryLimit = parseInt(key, val);
    } else if (key == "grain" && !val.empty()) {
      o.engine.grainSize = std::max<std::int64_t>(1, parseInt(key, val));
    } else if (key == "strategy" && val == "local") {
      o.engine.strategy = MergeStrategy::Local;
    } else if (key == "strategy" && val == "shared") {
      o.engine.strategy = MergeStrategy::Shared;
    } else if (key == "strategy" && val == "global") {
      o.engine.strategy = MergeStrategy::Global;
    } else if (tok == "O0") {
      o.level = OptLevel::none();
    } else if (tok == "O3") {
      o.level = OptLevel::all();
    } else if (tok.rfind("no-", 0) != 0 || !o.level.set(tok.substr(3), false)) {
      throw ApiError("InvalidOptions", "unknown option '" + tok + "'");
    }
  }
  return o;
}

}  // namespace

extern "C" {

weldmill_handle weldmill_new_data_object(const void* data, uint64_t size, const char* type) {
  return guarded<>(weldmill_handle{0}, [&] {
    if (!type) throw ApiError("InvalidArgument", "type text is NULL");
    if (!data && size) throw ApiError("InvalidArgument", "data is NULL");
    return runtime().newDataObject(static_cast<const std::uint8_t*>(data), size, parseType(type));
  });
}

weldmill_handle weldmill_new_computed_object(const weldmill_handle* deps, uint64_t ndeps, const char* fragment,
                                             const char* result_type) {
  return guarded<>(weldmill_handle{0}, [&] {
    if (!fragment) throw ApiError("InvalidArgument", "fragment text is NULL");
    if (!deps && ndeps) throw ApiError("InvalidArgument", "deps is NULL");
    std::vector<Handle> ds(deps, deps + ndeps);
    IrType t = result_type ? parseType(result_type) : IrType();
    return runtime().newComputedObject(ds, std::string(fragment), t);
  });
}

const char* weldmill_object_type(weldmill_handle object) {
  return guarded<>(static_cast<const char*>(nullptr), [&] {
    scratch = runtime().getObjectType(object).str();
    return scratch.c_str();
  });
}

weldmill_handle weldmill_evaluate(weldmill_handle object, const char* options) {
  return guarded<>(weldmill_handle{0}, [&] {
    PipelineOptions opts = parseOptions(options);
    Handle r = runtime().evaluateObject(object, opts);
    ResultText t;
    t.result = runtime().result(r);
    if (t.result->ok()) {
      t.type = t.result->type.str();
      t.stats = t.result->stats.str();
    } else {
      const auto& f = *t.result->error;
      t.error = errorJson(f.stage, f.code, f.message, f.span).dump();
    }
    std::lock_guard<std::mutex> lock(textMu);
    texts()[r] = std::move(t);
    return r;
  });
}

int weldmill_free_object(weldmill_handle object) {
  return guarded<>(-1, [&] {
    runtime().freeObject(object);
    return 0;
  });
}

int weldmill_free_result(weldmill_handle result) {
  return guarded<>(-1, [&] {
    runtime().freeResult(result);
    std::lock_guard<std::mutex> lock(textMu);
    texts().erase(result);
    return 0;
  });
}

int weldmill_result_ok(weldmill_handle result) {
  return guarded<>(-1, [&] { return textOf(result).result->ok() ? 1 : 0; });
}

const uint8_t* weldmill_result_data(weldmill_handle result, uint64_t* size) {
  if (size) *size = 0;
  return guarded<>(static_cast<const uint8_t*>(nullptr), [&]() -> const uint8_t* {
    const auto& r = *textOf(result).result;
    if (!r.ok()) throw ApiError("InvalidArgument", "result holds an error");
    if (size) *size = r.bytes.size();
    static const std::uint8_t empty = 0;
    return r.bytes.empty() ? &empty : r.bytes.data();
  });
}

const char* weldmill_result_type(weldmill_handle result) {
  return guarded<>(static_cast<const char*>(nullptr), [&]() -> const char* {
    const auto& t = textOf(result);
    return t.result->ok() ? t.type.c_str() : nullptr;
  });
}

const char* weldmill_result_error(weldmill_handle result) {
  return guarded<>(static_cast<const char*>(nullptr), [&]() -> const char* {
    const auto& t = textOf(result);
    return t.result->ok() ? nullptr : t.error.c_str();
  });
}

const char* weldmill_result_stats(weldmill_handle result) {
  return guarded<>(static_cast<const char*>(nullptr), [&]() -> const char* {
    const auto& t = textOf(result);
    return t.result->ok() ? t.stats.c_str() : nullptr;
  });
}

const char* weldmill_last_error(void) { return hasLastError ? lastError.c_str() : nullptr; }

uint64_t weldmill_evaluation_count(void) { return evaluationCount(); }

}  // extern "C"
