#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "weldmill/boundary.hpp"
#include "weldmill/pipeline.hpp"

namespace weldmill {

using Handle = std::uint64_t;

// One vertex of the object graph. Leaves hold either a host value or a
// borrowed boundary buffer; computed nodes hold a fragment over v0..vk, one
// name per dependency.
struct ObjectNode {
  bool leaf = true;
  IrType type;  // leaves: declared; computed: declared or invalid
  std::string encoder;  // leaves: "host" or "boundary"
  Value value;
  const std::uint8_t* bytes = nullptr;
  std::size_t size = 0;
  std::vector<std::shared_ptr<ObjectNode>> deps;
  ExprPtr fragment;
};

struct BuiltProgram {
  ExprPtr program;
  std::vector<Param> params;
  std::vector<Value> args;

  TypeEnv env() const {
    TypeEnv e;
    for (const auto& p : params) e.vars[p.name] = p.type;
    return e;
  }
  std::map<std::string, Value> inputs() const {
    std::map<std::string, Value> m;
    for (std::size_t i = 0; i < params.size(); ++i) m[params[i].name] = args[i];
    return m;
  }
};

namespace detail {

inline std::string depName(std::size_t i) { return "v" + std::to_string(i); }

class Assembler {
 public:
  BuiltProgram run(const std::shared_ptr<ObjectNode>& root) {
    std::map<const ObjectNode*, int> state;
    countUses(root.get(), state);
    root_ = root.get();
    std::set<std::string> reserved;
    for (const auto& [n, s] : state) {
      if (n->fragment) for (const auto& name : allNames(n->fragment)) reserved.insert(name);
    }
    for (std::size_t i = 0; i <= state.size(); ++i) {
      reserved.insert(depName(i));
      reserved.insert("t" + std::to_string(i));
    }
    gen_ = NameGen(std::move(reserved));
    ExprPtr body = build(root.get());
    for (auto it = lets_.rbegin(); it != lets_.rend(); ++it) body = ir::let(it->first, it->second, body);
    out_.program = body;
    return std::move(out_);
  }

 private:
  const ObjectNode* root_ = nullptr;
  std::map<const ObjectNode*, int> uses_;
  std::map<const ObjectNode*, std::string> named_;
  std::vector<std::pair<std::string, ExprPtr>> lets_;
  BuiltProgram out_;
  NameGen gen_;

  // 1 = on the current path, 2 = finished.
  void countUses(const ObjectNode* n, std::map<const ObjectNode*, int>& state) {
    state[n] = 1;
    for (const auto& d : n->deps) {
      ++uses_[d.get()];
      auto it = state.find(d.get());
      if (it == state.end()) countUses(d.get(), state);
      else if (it->second == 1) throw ApiError("CycleDetected", "object graph contains a cycle");
    }
    state[n] = 2;
  }

  ExprPtr build(const ObjectNode* n) {
    if (auto it = named_.find(n); it != named_.end()) return ir::ident(it->second);
    if (n->leaf) {
      std::string name = depName(out_.params.size());
      named_[n] = name;
      out_.params.push_back({name, n->type});
      out_.args.push_back(n->bytes ? decodeBoundary(n->bytes, n->size, n->type) : n->value);
      return ir::ident(name);
    }
    Bindings b;
    for (std::size_t i = 0; i < n->deps.size(); ++i) b[depName(i)] = build(n->deps[i].get());
    ExprPtr e = substitute(n->fragment, b, gen_);
    if (n != root_ && uses_[n] > 1) {
      std::string name = "t" + std::to_string(lets_.size());
      named_[n] = name;
      lets_.emplace_back(name, e);
      return ir::ident(name);
    }
    return e;
  }
};

}  // namespace detail

// Combines the graph under `root` into one program. Leaves become
// parameters v0, v1, ... in first-use order; computed nodes used more than
// once are bound by a Let ahead of the body, all others are inlined.
inline BuiltProgram buildProgramFrom(const std::shared_ptr<ObjectNode>& root) {
  return detail::Assembler().run(root);
}

struct WeldResult {
  struct Failure {
    Stage stage;
    std::string code;
    std::string message;
    Span span;
  };

  std::vector<std::uint8_t> bytes;  // boundary form
  IrType type;
  Value value;  // decoded from `bytes`
  EvalStats stats;
  std::vector<PassReport> reports;
  std::optional<Failure> error;

  bool ok() const { return !error.has_value(); }
};

// Object and result handles. Construction is lazy: nothing is evaluated
// until evaluateObject. Safe for concurrent use on disjoint objects.
class Runtime {
 public:
  // Host value; shared, never copied or mutated.
  Handle newDataObject(Value v, const IrType& type) {
    requireBoundaryType(type);
    if (!valueHasType(v, type)) throw ApiError("BoundaryFormat", "value does not have type " + type.str());
    auto n = std::make_shared<ObjectNode>();
    n->type = type;
    n->encoder = "host";
    n->value = std::move(v);
    return add(std::move(n));
  }

  // Boundary buffer owned by the caller, who keeps it alive and unchanged
  // until every evaluation depending on it has returned.
  Handle newDataObject(const std::uint8_t* data, std::size_t size, const IrType& type) {
    requireBoundaryType(type);
    auto n = std::make_shared<ObjectNode>();
    n->type = type;
    n->encoder = "boundary";
    n->bytes = data;
    n->size = size;
    return add(std::move(n));
  }

  // `fragment` refers to deps[i] as vi. An invalid resultType is inferred on
  // demand.
  Handle newComputedObject(const std::vector<Handle>& deps, ExprPtr fragment, const IrType& resultType = {}) {
    auto n = std::make_shared<ObjectNode>();
    n->leaf = false;
    n->type = resultType;
    for (const auto& name : freeVariables(fragment)) {
      bool declared = false;
      for (std::size_t i = 0; i < deps.size() && !declared; ++i) declared = name == detail::depName(i);
      if (!declared)
        throw ApiError("UndeclaredDependency", "fragment uses '" + name + "' but declares " +
                                                   std::to_string(deps.size()) + " dependencies");
    }
    n->fragment = std::move(fragment);
    std::lock_guard<std::mutex> lock(mu_);
    for (Handle d : deps) n->deps.push_back(objectLocked(d));
    return addLocked(std::move(n));
  }

  Handle newComputedObject(const std::vector<Handle>& deps, const std::string& fragmentText,
                           const IrType& resultType = {}) {
    return newComputedObject(deps, parse(fragmentText), resultType);
  }

  // Declared type, or the inferred type of the combined program. Never
  // evaluates.
  IrType getObjectType(Handle h) const {
    auto n = object(h);
    if (n->type.valid()) return n->type;
    BuiltProgram b = buildProgramFrom(n);
    return checkProgram({b.program, {}}, b.env()).typed->type;
  }

  BuiltProgram buildProgram(Handle h) const { return buildProgramFrom(object(h)); }

  // Runs the whole pipeline. Stage failures land in the result's error slot;
  // only misuse of handles throws.
  Handle evaluateObject(Handle h, const PipelineOptions& opts = {}) {
    auto n = object(h);
    auto r = std::make_shared<WeldResult>();
    try {
      BuiltProgram b = buildProgramFrom(n);
      RunOutput out = runProgram({b.program, {}}, b.env(), b.inputs(), opts);
      if (!n->leaf && n->type.valid() && !(n->type == out.type))
        throw TypeError("result has type " + out.type.str() + " but the object declares " + n->type.str(), {},
                        n->type.str(), out.type.str());
      if (!boundaryTypeSupported(out.type))
        throw ApiError("EvaluateUnsupportedResultType",
                       "result type " + out.type.str() + " has no boundary form; wrap dictionaries in tovec");
      r->type = out.type;
      r->stats = std::move(out.stats);
      r->reports = std::move(out.reports);
      r->bytes = encodeBoundary(out.value, out.type);
      r->value = decodeBoundary(r->bytes, out.type);
    } catch (const Error& e) {
      r->error = WeldResult::Failure{e.stage(), e.code(), e.what(), e.span()};
    } catch (const std::exception& e) {
      r->error = WeldResult::Failure{Stage::Api, "InternalError", e.what(), {}};
    }
    std::lock_guard<std::mutex> lock(mu_);
    Handle id = next_++;
    results_[id] = std::move(r);
    return id;
  }

  std::shared_ptr<const WeldResult> result(Handle h) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = results_.find(h);
    if (it != results_.end()) return it->second;
    throw missing(h, "result");
  }

  // Drops this handle only; dependents keep what they need.
  void freeObject(Handle h) {
    std::lock_guard<std::mutex> lock(mu_);
    if (objects_.erase(h)) {
      freed_.insert(h);
      return;
    }
    throw doubleOrUnknown(h, "object");
  }

  void freeResult(Handle h) {
    std::lock_guard<std::mutex> lock(mu_);
    if (results_.erase(h)) {
      freed_.insert(h);
      return;
    }
    throw doubleOrUnknown(h, "result");
  }

  std::size_t liveObjects() const {
    std::lock_guard<std::mutex> lock(mu_);
    return objects_.size();
  }

 private:
  mutable std::mutex mu_;
  Handle next_ = 1;
  std::map<Handle, std::shared_ptr<ObjectNode>> objects_;
  std::map<Handle, std::shared_ptr<const WeldResult>> results_;
  std::set<Handle> freed_;

  Handle add(std::shared_ptr<ObjectNode> n) {
    std::lock_guard<std::mutex> lock(mu_);
    return addLocked(std::move(n));
  }

  Handle addLocked(std::shared_ptr<ObjectNode> n) {
    Handle id = next_++;
    objects_[id] = std::move(n);
    return id;
  }

  std::shared_ptr<ObjectNode> object(Handle h) const {
    std::lock_guard<std::mutex> lock(mu_);
    return objectLocked(h);
  }

  std::shared_ptr<ObjectNode> objectLocked(Handle h) const {
    auto it = objects_.find(h);
    if (it != objects_.end()) return it->second;
    throw missing(h, "object");
  }

  ApiError missing(Handle h, const char* what) const {
    if (freed_.count(h)) return ApiError("UseAfterFree", std::string(what) + " " + std::to_string(h) + " was freed");
    return ApiError("UnknownHandle", "no " + std::string(what) + " with handle " + std::to_string(h));
  }

  ApiError doubleOrUnknown(Handle h, const char* what) const {
    if (freed_.count(h)) return ApiError("DoubleFree", std::string(what) + " " + std::to_string(h) + " already freed");
    return ApiError("UnknownHandle", "no " + std::string(what) + " with handle " + std::to_string(h));
  }
};

}  // namespace weldmill
