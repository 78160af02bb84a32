#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "weldmill/builders.hpp"
#include "weldmill/expr.hpp"
#include "weldmill/memory.hpp"
#include "weldmill/ops.hpp"
#include "weldmill/printer.hpp"
#include "weldmill/scheduler.hpp"
#include "weldmill/value.hpp"

namespace weldmill {

struct ExternFunction {
  IrType type;  // function type
  std::function<Value(const std::vector<Value>&)> fn;
};
using ExternRegistry = std::map<std::string, ExternFunction>;

struct EngineConfig {
  int threads = 1;
  std::int64_t memoryLimit = std::int64_t{1} << 34;
  MergeStrategy strategy = MergeStrategy::Local;
  std::int64_t grainSize = 1024;
  std::uint64_t maxIterations = std::uint64_t{1} << 32;
  bool countNodes = false;
  const ExternRegistry* externs = nullptr;
};

struct EvalStats {
  std::uint64_t traversals = 0;
  std::uint64_t vectorAllocations = 0;
  std::uint64_t intermediateAllocations = 0;
  std::uint64_t reallocations = 0;
  std::uint64_t tasksCreated = 0;
  std::uint64_t tasksStolen = 0;
  std::int64_t peakBytes = 0;
  // Indexed by node id (preorder position in the evaluated program); filled
  // only when EngineConfig::countNodes is set.
  std::vector<std::uint64_t> nodeEvals;
  std::vector<std::string> nodeLabels;

  std::uint64_t evaluationsOf(const std::string& label) const {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < nodeEvals.size(); ++i)
      if (nodeLabels[i] == label) n += nodeEvals[i];
    return n;
  }

  std::string str() const {
    std::ostringstream os;
    os << "traversals: " << traversals << "\n"
       << "vector_allocations: " << vectorAllocations << "\n"
       << "intermediate_allocations: " << intermediateAllocations << "\n"
       << "vecbuilder_reallocations: " << reallocations << "\n"
       << "tasks_created: " << tasksCreated << "\n"
       << "tasks_stolen: " << tasksStolen << "\n"
       << "peak_bytes: " << peakBytes << "\n";
    return os.str();
  }
};

struct EvalOutput {
  Value value;
  EvalStats stats;
  // Live bytes after evaluation are exactly those reachable from `value`.
  std::shared_ptr<MemoryTracker> memory;
};

// Evaluates a typed, linear, core-only program. `env` binds its free variables.
EvalOutput evaluate(const ExprPtr& e, const std::map<std::string, Value>& env, const EngineConfig& config = {});

// Number of evaluate() calls made by this process.
std::uint64_t evaluationCount();

namespace detail {

inline std::atomic<std::uint64_t>& evaluationCounter() {
  static std::atomic<std::uint64_t> n{0};
  return n;
}

struct XNode {
  const Expr* src = nullptr;
  ExprKind kind = ExprKind::Literal;
  std::vector<XNode*> kids;
  int id = 0;
  int slot = -1;
  // Lambda layout.
  int frameSize = 0;
  std::vector<int> paramSlots;
  std::vector<std::pair<int, int>> captures;  // enclosing slot -> own slot
  Value literal;
};

}  // namespace detail

struct Closure {
  const detail::XNode* lambda;
  std::vector<Value> captured;
};

namespace detail {

inline std::string nodeLabel(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Literal: return "literal";
    case ExprKind::Ident: return "ident";
    case ExprKind::Let: return "let";
    case ExprKind::Lambda: return "lambda";
    case ExprKind::Apply: return "apply";
    case ExprKind::Binary: return binOpSymbol(e.binop);
    case ExprKind::Unary: return unaryOpName(e.unop);
    case ExprKind::If: return "if";
    case ExprKind::BitSelect: return "bitselect";
    case ExprKind::Iterate: return "iterate";
    case ExprKind::Lookup: return "lookup";
    case ExprKind::GetField: return "getfield";
    case ExprKind::Len: return "len";
    case ExprKind::Sort: return "sort";
    case ExprKind::ToVec: return "tovec";
    case ExprKind::MakeStruct: return "struct";
    case ExprKind::MakeVector: return "vector";
    case ExprKind::NewBuilder: return builderName(e.builder.tag);
    case ExprKind::Merge: return "merge";
    case ExprKind::Result: return "result";
    case ExprKind::For: return "for";
    case ExprKind::ExternCall: return "call";
    case ExprKind::Broadcast: return "broadcast";
    case ExprKind::Cast: return "cast";
    case ExprKind::Sugar: return sugarName(e.sugar);
  }
  return "?";
}

// Lowers a typed tree to slot-resolved nodes; lambdas capture by copy.
class Resolver {
 public:
  std::vector<std::unique_ptr<XNode>> nodes;
  std::map<std::string, int> params;  // free variable -> root slot
  int rootFrameSize = 0;
  std::vector<std::string> labels;

  XNode* run(const ExprPtr& e) {
    Fn root;
    fn_ = &root;
    XNode* r = lower(e);
    rootFrameSize = root.size;
    return r;
  }

 private:
  struct Fn {
    XNode* lambda = nullptr;
    Fn* parent = nullptr;
    std::vector<std::pair<std::string, int>> names;
    std::map<std::string, int> captured;
    int size = 0;
  };
  Fn* fn_ = nullptr;

  int lookup(Fn* f, const std::string& name) {
    for (auto it = f->names.rbegin(); it != f->names.rend(); ++it)
      if (it->first == name) return it->second;
    if (auto it = f->captured.find(name); it != f->captured.end()) return it->second;
    if (!f->parent) {
      auto [it, fresh] = params.emplace(name, 0);
      if (fresh) it->second = f->size++;
      return it->second;
    }
    int outer = lookup(f->parent, name);
    int mine = f->size++;
    f->lambda->captures.emplace_back(outer, mine);
    f->captured[name] = mine;
    return mine;
  }

  XNode* make(const ExprPtr& e) {
    nodes.push_back(std::make_unique<XNode>());
    XNode* n = nodes.back().get();
    n->src = e.get();
    n->kind = e->kind;
    n->id = static_cast<int>(labels.size());
    labels.push_back(nodeLabel(*e));
    return n;
  }

  XNode* lower(const ExprPtr& e) {
    XNode* n = make(e);
    switch (e->kind) {
      case ExprKind::Literal: n->literal = literalValue(e->lit); return n;
      case ExprKind::Ident: n->slot = lookup(fn_, e->name); return n;
      case ExprKind::Let: {
        n->kids.push_back(lower(e->kids[0]));
        n->slot = fn_->size++;
        fn_->names.emplace_back(e->name, n->slot);
        n->kids.push_back(lower(e->kids[1]));
        fn_->names.pop_back();
        return n;
      }
      case ExprKind::Lambda: {
        Fn inner;
        inner.lambda = n;
        inner.parent = fn_;
        for (const auto& p : e->params) {
          int s = inner.size++;
          n->paramSlots.push_back(s);
          inner.names.emplace_back(p.name, s);
        }
        fn_ = &inner;
        n->kids.push_back(lower(e->kids[0]));
        fn_ = inner.parent;
        n->frameSize = inner.size;
        return n;
      }
      case ExprKind::Sugar:
        throw EvalError("Unsupported", std::string("sugar operator '") + sugarName(e->sugar) +
                                           "' reached the engine; expand it first",
                        e->span);
      default:
        for (const auto& k : e->kids) n->kids.push_back(lower(k));
        return n;
    }
  }
};

struct Shared {
  const EngineConfig* config;
  WorkerPool* pool;
  BuilderEnv builderEnv;
};

class Evaluator;

class ForJob final : public LoopJob {
 public:
  ForJob(Evaluator& ev, const XNode* node, const Closure& fn, const Value& init, std::vector<Value> data,
         std::vector<std::int64_t> starts, std::vector<std::int64_t> strides, std::int64_t indexBase)
      : ev_(ev),
        node_(node),
        fn_(fn),
        init_(init),
        data_(std::move(data)),
        starts_(std::move(starts)),
        strides_(std::move(strides)),
        indexBase_(indexBase) {}

  void runRange(WorkerPool& pool, WorkerCtx& w, std::int64_t start, std::int64_t& end) override;
  Value runInline(WorkerCtx& w);

 private:
  Evaluator& ev_;
  const XNode* node_;
  const Closure& fn_;
  const Value& init_;
  std::vector<Value> data_;
  std::vector<std::int64_t> starts_;
  std::vector<std::int64_t> strides_;
  std::int64_t indexBase_;

  friend class Evaluator;
  Value element(std::int64_t k) const;
};

class Evaluator {
 public:
  explicit Evaluator(Shared& s) : s_(s) {}

  Value eval(const XNode* n, Value* f, WorkerCtx& w) {
    if (s_.config->countNodes) ++w.counters.nodeEvals[static_cast<std::size_t>(n->id)];
    const Expr& e = *n->src;
    switch (n->kind) {
      case ExprKind::Literal: return n->literal;
      case ExprKind::Ident: return f[n->slot];
      case ExprKind::Let:
        f[n->slot] = eval(n->kids[0], f, w);
        return eval(n->kids[1], f, w);
      case ExprKind::Lambda: {
        auto c = std::make_shared<Closure>();
        c->lambda = n;
        c->captured.reserve(n->captures.size());
        for (const auto& [outer, inner] : n->captures) c->captured.push_back(f[outer]);
        return std::shared_ptr<const Closure>(std::move(c));
      }
      case ExprKind::Apply: {
        Value fnv = eval(n->kids[0], f, w);
        std::vector<Value> args;
        args.reserve(n->kids.size() - 1);
        for (std::size_t i = 1; i < n->kids.size(); ++i) args.push_back(eval(n->kids[i], f, w));
        return call(closureOf(fnv), args, w);
      }
      case ExprKind::Binary: {
        Value t1, t2;
        const Value& a = ref(n->kids[0], f, w, t1);
        if ((e.binop == BinOp::And || e.binop == BinOp::Or) && a.index() == 1) {
          bool av = std::get<bool>(a);
          if (e.binop == BinOp::And && !av) return false;
          if (e.binop == BinOp::Or && av) return true;
          return eval(n->kids[1], f, w);
        }
        const Value& b = ref(n->kids[1], f, w, t2);
        return applyBinary(e.binop, a, b);
      }
      case ExprKind::Unary: {
        Value t;
        return applyUnary(e.unop, ref(n->kids[0], f, w, t));
      }
      case ExprKind::If: {
        Value t;
        const Value& c = ref(n->kids[0], f, w, t);
        return eval(std::get<bool>(c) ? n->kids[1] : n->kids[2], f, w);
      }
      case ExprKind::BitSelect: {
        Value c = eval(n->kids[0], f, w);
        Value a = eval(n->kids[1], f, w);
        Value b = eval(n->kids[2], f, w);
        if (c.index() == 1) return std::get<bool>(c) ? a : b;
        const auto& mask = asSimd(c).lanes;
        std::array<Value, kSimdWidth> out;
        for (int i = 0; i < kSimdWidth; ++i) {
          const Value& x = isSimdValue(a) ? asSimd(a).lanes[i] : a;
          const Value& y = isSimdValue(b) ? asSimd(b).lanes[i] : b;
          out[i] = std::get<bool>(mask[i]) ? x : y;
        }
        return makeSimd(out);
      }
      case ExprKind::Iterate: return iterate(n, f, w);
      case ExprKind::Lookup: {
        Value t1, t2;
        const Value& c = ref(n->kids[0], f, w, t1);
        const Value& k = ref(n->kids[1], f, w, t2);
        if (isVecValue(c)) {
          const auto& v = asVec(c).elems;
          std::int64_t i = k.index() == 2 ? std::get<std::int32_t>(k) : asI64(k);
          if (i < 0 || static_cast<std::size_t>(i) >= v.size())
            throw EvalError("IndexOutOfBounds",
                            "lookup index " + std::to_string(i) + " outside [0, " + std::to_string(v.size()) + ")",
                            e.span);
          return v[static_cast<std::size_t>(i)];
        }
        const auto& d = asDict(c).entries;
        auto it = std::lower_bound(d.begin(), d.end(), k,
                                   [](const auto& entry, const Value& key) { return compareValues(entry.first, key) < 0; });
        if (it == d.end() || compareValues(it->first, k) != 0)
          throw EvalError("KeyNotFound", "key " + valueToString(k) + " not in dictionary", e.span);
        return it->second;
      }
      case ExprKind::GetField: {
        Value t;
        const Value& s = ref(n->kids[0], f, w, t);
        return asStruct(s).fields[static_cast<std::size_t>(e.index)];
      }
      case ExprKind::Len: {
        Value t;
        const Value& c = ref(n->kids[0], f, w, t);
        if (isVecValue(c)) return static_cast<std::int64_t>(asVec(c).elems.size());
        return static_cast<std::int64_t>(asDict(c).entries.size());
      }
      case ExprKind::Sort: {
        Value vec = eval(n->kids[0], f, w);
        Value keyFn = eval(n->kids[1], f, w);
        const Closure& key = closureOf(keyFn);
        const auto& src = asVec(vec).elems;
        std::vector<std::pair<Value, std::size_t>> keyed;
        keyed.reserve(src.size());
        std::vector<Value> arg(1);
        for (std::size_t i = 0; i < src.size(); ++i) {
          arg[0] = src[i];
          keyed.emplace_back(call(key, arg, w), i);
        }
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& a, const auto& b) { return compareValues(a.first, b.first) < 0; });
        std::vector<Value> out;
        out.reserve(src.size());
        for (auto& [k, i] : keyed) out.push_back(src[i]);
        return tracked(std::move(out), e.type.elem(), w);
      }
      case ExprKind::ToVec: {
        Value d = eval(n->kids[0], f, w);
        std::vector<Value> out;
        out.reserve(asDict(d).entries.size());
        for (const auto& [k, x] : asDict(d).entries) out.push_back(makeStructValue({k, x}));
        return tracked(std::move(out), e.type.elem(), w);
      }
      case ExprKind::MakeStruct: {
        std::vector<Value> fields;
        fields.reserve(n->kids.size());
        for (const auto* k : n->kids) fields.push_back(eval(k, f, w));
        return makeStructValue(std::move(fields));
      }
      case ExprKind::MakeVector: {
        std::vector<Value> elems;
        elems.reserve(n->kids.size());
        for (const auto* k : n->kids) elems.push_back(eval(k, f, w));
        return tracked(std::move(elems), e.type.elem(), w);
      }
      case ExprKind::NewBuilder: {
        if (n->kids.empty()) return newBuilderState(e.builder, s_.builderEnv, nullptr);
        Value arg = eval(n->kids[0], f, w);
        return newBuilderState(e.builder, s_.builderEnv, &arg);
      }
      case ExprKind::Merge: {
        Value b = eval(n->kids[0], f, w);
        Value t;
        const Value& v = ref(n->kids[1], f, w, t);
        std::get<std::shared_ptr<BuilderState>>(b)->merge(v, w);
        return b;
      }
      case ExprKind::Result: return resultOf(eval(n->kids[0], f, w), w);
      case ExprKind::For: return forLoop(n, f, w);
      case ExprKind::ExternCall: {
        const ExternRegistry* reg = s_.config->externs;
        const ExternFunction* fn = nullptr;
        if (reg) {
          auto it = reg->find(e.name);
          if (it != reg->end()) fn = &it->second;
        }
        if (!fn) throw EvalError("ExternCallUnknown", "no host function named '" + e.name + "'", e.span);
        std::vector<Value> args;
        for (const auto* k : n->kids) args.push_back(eval(k, f, w));
        return fn->fn(args);
      }
      case ExprKind::Broadcast: {
        std::array<Value, kSimdWidth> lanes;
        lanes.fill(eval(n->kids[0], f, w));
        return makeSimd(lanes);
      }
      case ExprKind::Cast: {
        Value t;
        return castValue(e.castTo, ref(n->kids[0], f, w, t));
      }
      case ExprKind::Sugar: break;
    }
    throw EvalError("Unsupported", "node cannot be evaluated", e.span);
  }

  Value call(const Closure& c, const std::vector<Value>& args, WorkerCtx& w) {
    std::vector<Value> frame(static_cast<std::size_t>(c.lambda->frameSize));
    bind(c, frame);
    for (std::size_t i = 0; i < args.size(); ++i) frame[static_cast<std::size_t>(c.lambda->paramSlots[i])] = args[i];
    return eval(c.lambda->kids[0], frame.data(), w);
  }

  static void bind(const Closure& c, std::vector<Value>& frame) {
    for (std::size_t i = 0; i < c.captured.size(); ++i)
      frame[static_cast<std::size_t>(c.lambda->captures[i].second)] = c.captured[i];
  }

  Shared& shared() { return s_; }

 private:
  Shared& s_;

  const Value& ref(const XNode* n, Value* f, WorkerCtx& w, Value& tmp) {
    if (n->kind == ExprKind::Ident) {
      if (s_.config->countNodes) ++w.counters.nodeEvals[static_cast<std::size_t>(n->id)];
      return f[n->slot];
    }
    tmp = eval(n, f, w);
    return tmp;
  }

  static const Closure& closureOf(const Value& v) { return *std::get<std::shared_ptr<const Closure>>(v); }

  Value tracked(std::vector<Value> elems, const IrType& elemType, WorkerCtx& w) {
    ++w.counters.vectorAllocations;
    return makeTrackedVec(std::move(elems), elemType, s_.builderEnv.tracker);
  }

  Value resultOf(const Value& v, WorkerCtx& w) {
    if (isBuilderValue(v)) return std::get<std::shared_ptr<BuilderState>>(v)->result(w);
    std::vector<Value> out;
    for (const auto& x : asStruct(v).fields) out.push_back(resultOf(x, w));
    return makeStructValue(std::move(out));
  }

  Value iterate(const XNode* n, Value* f, WorkerCtx& w) {
    Value cur = eval(n->kids[0], f, w);
    Value updateFn = eval(n->kids[1], f, w);
    const Closure& update = closureOf(updateFn);
    std::vector<Value> arg(1);
    for (std::uint64_t k = 0;; ++k) {
      if (k >= s_.config->maxIterations)
        throw EvalError("IterationLimit",
                        "iterate exceeded " + std::to_string(s_.config->maxIterations) + " iterations", n->src->span);
      arg[0] = std::move(cur);
      Value r = call(update, arg, w);
      const auto& fields = asStruct(r).fields;
      cur = fields[0];
      if (!std::get<bool>(fields[1])) return cur;
    }
  }

  Value forLoop(const XNode* n, Value* f, WorkerCtx& w) {
    const Expr& e = *n->src;
    std::vector<Value> data;
    std::vector<std::int64_t> starts, strides;
    std::int64_t count = -1;
    std::int64_t indexBase = 0;
    bool allFringe = true;
    for (std::size_t j = 0; j < e.iters.size(); ++j) {
      std::size_t off = e.iterOffset(j);
      Value d = eval(n->kids[off], f, w);
      std::int64_t len = static_cast<std::int64_t>(asVec(d).elems.size());
      std::int64_t start = 0, end = len, stride = 1;
      if (e.iters[j].ranged) {
        start = asI64(eval(n->kids[off + 1], f, w));
        end = asI64(eval(n->kids[off + 2], f, w));
        stride = asI64(eval(n->kids[off + 3], f, w));
        if (stride < 1 || start < 0 || end > len || start > end)
          throw EvalError("IndexOutOfBounds",
                          "iterator range [" + std::to_string(start) + ", " + std::to_string(end) + ") stride " +
                              std::to_string(stride) + " invalid for length " + std::to_string(len),
                          e.span);
      }
      std::int64_t c = 0, first = start;
      switch (e.iters[j].kind) {
        case IterKind::Scalar: c = (end - start + stride - 1) / stride; break;
        case IterKind::Simd:
          if (stride != 1) throw EvalError("IndexOutOfBounds", "simditer requires stride 1", e.span);
          c = (end - start) / kSimdWidth;
          break;
        case IterKind::Fringe:
          if (stride != 1) throw EvalError("IndexOutOfBounds", "fringeiter requires stride 1", e.span);
          c = (end - start) % kSimdWidth;
          first = end - c;
          indexBase = (end - start) - c;
          break;
      }
      if (e.iters[j].kind != IterKind::Fringe) allFringe = false;
      if (count >= 0 && c != count)
        throw EvalError("ZipLengthMismatch",
                        "iterators yield " + std::to_string(count) + " and " + std::to_string(c) + " iterations",
                        e.span);
      count = c;
      data.push_back(std::move(d));
      starts.push_back(first);
      strides.push_back(e.iters[j].kind == IterKind::Simd ? kSimdWidth : stride);
    }
    Value init = eval(n->kids[0], f, w);
    Value fnv = eval(n->kids[1], f, w);
    if (!allFringe) ++w.counters.traversals;
    if (count <= 0) return init;
    ForJob job(*this, n, closureOf(fnv), init, std::move(data), std::move(starts), std::move(strides), indexBase);
    job.n = count;
    if (w.taskRemaining <= 0) {
      if (s_.pool->size() > 1) {
        s_.pool->runParallel(w, job);
        return init;
      }
      ++w.counters.tasksCreated;
    }
    return job.runInline(w);
  }

  friend class ForJob;
};

inline Value ForJob::element(std::int64_t k) const {
  auto one = [&](std::size_t j) -> Value {
    const auto& elems = asVec(data_[j]).elems;
    std::int64_t pos = starts_[j] + k * strides_[j];
    if (node_->src->iters[j].kind == IterKind::Simd) {
      std::array<Value, kSimdWidth> lanes;
      for (int l = 0; l < kSimdWidth; ++l) lanes[l] = elems[static_cast<std::size_t>(pos + l)];
      return makeSimd(lanes);
    }
    return elems[static_cast<std::size_t>(pos)];
  };
  if (data_.size() == 1) return one(0);
  std::vector<Value> fields;
  fields.reserve(data_.size());
  for (std::size_t j = 0; j < data_.size(); ++j) fields.push_back(one(j));
  return makeStructValue(std::move(fields));
}

inline std::int64_t iterationIndex(const Expr& e, std::int64_t k, std::int64_t base) {
  if (e.iters[0].kind == IterKind::Simd) return k * kSimdWidth;
  return base + k;
}

inline Value ForJob::runInline(WorkerCtx& w) {
  const XNode* lam = fn_.lambda;
  std::vector<Value> frame(static_cast<std::size_t>(lam->frameSize));
  Evaluator::bind(fn_, frame);
  auto pb = static_cast<std::size_t>(lam->paramSlots[0]);
  auto pi = static_cast<std::size_t>(lam->paramSlots[1]);
  auto px = static_cast<std::size_t>(lam->paramSlots[2]);
  std::int64_t saved = w.loopRemaining;
  Value b = init_;
  for (std::int64_t k = 0; k < n; ++k) {
    w.loopRemaining = n - k - 1;
    frame[pb] = std::move(b);
    frame[pi] = iterationIndex(*node_->src, k, indexBase_);
    frame[px] = element(k);
    b = ev_.eval(lam->kids[0], frame.data(), w);
  }
  w.loopRemaining = saved;
  return b;
}

inline void ForJob::runRange(WorkerPool& pool, WorkerCtx& w, std::int64_t start, std::int64_t& end) {
  const XNode* lam = fn_.lambda;
  std::vector<Value> frame(static_cast<std::size_t>(lam->frameSize));
  Evaluator::bind(fn_, frame);
  auto pb = static_cast<std::size_t>(lam->paramSlots[0]);
  auto pi = static_cast<std::size_t>(lam->paramSlots[1]);
  auto px = static_cast<std::size_t>(lam->paramSlots[2]);
  Value b = init_;
  for (std::int64_t k = start; k < end; ++k) {
    pool.maybeSplit(w, *this, k, end);
    w.taskRemaining = end - k - 1;
    w.loopRemaining = end - k - 1;
    frame[pb] = std::move(b);
    frame[pi] = iterationIndex(*node_->src, k, indexBase_);
    frame[px] = element(k);
    b = ev_.eval(lam->kids[0], frame.data(), w);
  }
}

}  // namespace detail

inline std::uint64_t evaluationCount() { return detail::evaluationCounter().load(); }

inline EvalOutput evaluate(const ExprPtr& e, const std::map<std::string, Value>& env, const EngineConfig& config) {
  detail::evaluationCounter().fetch_add(1);
  detail::Resolver resolver;
  detail::XNode* root = resolver.run(e);

  std::vector<Value> frame(static_cast<std::size_t>(resolver.rootFrameSize));
  for (const auto& [name, slot] : resolver.params) {
    auto it = env.find(name);
    if (it == env.end()) throw EvalError("UnboundVariable", "no value bound for '" + name + "'");
    frame[static_cast<std::size_t>(slot)] = it->second;
  }

  auto tracker = std::make_shared<MemoryTracker>(config.memoryLimit);
  EvalOutput out;
  out.memory = tracker;
  {
    WorkerPool pool(config.threads, config.grainSize);
    detail::Shared shared{&config, &pool, BuilderEnv{tracker, pool.size(), config.strategy}};
    if (config.countNodes)
      for (auto& w : pool.contexts()) w.counters.nodeEvals.assign(resolver.labels.size(), 0);
    detail::Evaluator ev(shared);
    try {
      out.value = ev.eval(root, frame.data(), pool.ctx(0));
    } catch (...) {
      if (auto first = pool.firstError()) std::rethrow_exception(first);
      throw;
    }
    pool.shutdown();
    frame.clear();
    for (auto& w : pool.contexts()) {
      const auto& c = w.counters;
      out.stats.traversals += c.traversals;
      out.stats.vectorAllocations += c.vectorAllocations;
      out.stats.reallocations += c.reallocations;
      out.stats.tasksCreated += c.tasksCreated;
      out.stats.tasksStolen += c.tasksStolen;
      if (config.countNodes) {
        out.stats.nodeEvals.resize(c.nodeEvals.size());
        for (std::size_t i = 0; i < c.nodeEvals.size(); ++i) out.stats.nodeEvals[i] += c.nodeEvals[i];
      }
    }
  }
  if (config.countNodes) out.stats.nodeLabels = resolver.labels;
  std::uint64_t reachable = countTrackedVectors(out.value);
  out.stats.intermediateAllocations =
      out.stats.vectorAllocations > reachable ? out.stats.vectorAllocations - reachable : 0;
  out.stats.peakBytes = tracker->peak();
  return out;
}

}  // namespace weldmill
