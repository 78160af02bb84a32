#pragma once

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "weldmill/memory.hpp"
#include "weldmill/ops.hpp"
#include "weldmill/scheduler.hpp"

namespace weldmill {

enum class MergeStrategy : std::uint8_t { Local, Shared, Global };

inline const char* strategyName(MergeStrategy s) {
  switch (s) {
    case MergeStrategy::Local: return "local";
    case MergeStrategy::Shared: return "shared";
    case MergeStrategy::Global: return "global";
  }
  return "?";
}

struct BuilderEnv {
  std::shared_ptr<MemoryTracker> tracker;
  int workers = 1;
  MergeStrategy strategy = MergeStrategy::Local;
};

// Mutable state behind a builder value. Merges are write-only; result() is
// the single read and consumes the builder.
class BuilderState {
 public:
  BuilderState(BuilderKind kind, BuilderEnv env) : kind_(std::move(kind)), env_(std::move(env)) {}
  virtual ~BuilderState() { env_.tracker->release(charged_.load()); }

  BuilderState(const BuilderState&) = delete;
  BuilderState& operator=(const BuilderState&) = delete;

  const BuilderKind& kind() const { return kind_; }

  void merge(const Value& v, WorkerCtx& w) {
    if (consumed_.load(std::memory_order_relaxed))
      throw EvalError("UseAfterResult", "merge into a builder whose result was already taken");
    doMerge(v, w);
  }

  Value result(WorkerCtx& w) {
    if (consumed_.exchange(true)) throw EvalError("UseAfterResult", "result taken twice from one builder");
    Value r = doResult(w);
    env_.tracker->release(charged_.exchange(0));
    return r;
  }

  bool consumed() const { return consumed_.load(); }

 protected:
  virtual void doMerge(const Value& v, WorkerCtx& w) = 0;
  virtual Value doResult(WorkerCtx& w) = 0;

  void charge(std::int64_t bytes) {
    env_.tracker->charge(bytes);
    charged_.fetch_add(bytes, std::memory_order_relaxed);
  }

  BuilderKind kind_;
  BuilderEnv env_;

 private:
  std::atomic<bool> consumed_{false};
  std::atomic<std::int64_t> charged_{0};
};

namespace detail {

// Worker-private append segments keyed by ordinal path.
template <class Elem>
struct Segments {
  struct Segment {
    SegmentKeyPtr key;
    std::vector<Elem> items;
  };
  struct alignas(64) Part {
    std::vector<Segment> segs;
  };
  std::vector<Part> parts;

  explicit Segments(int workers) : parts(static_cast<std::size_t>(workers)) {}

  Segment& current(WorkerCtx& w, bool& created) {
    Part& p = parts[static_cast<std::size_t>(w.id)];
    const SegmentKeyPtr& k = w.segment();
    created = false;
    for (auto it = p.segs.rbegin(); it != p.segs.rend(); ++it)
      if (it->key == k) return *it;
    created = true;
    p.segs.push_back({k, {}});
    return p.segs.back();
  }

  std::vector<Segment*> ordered() {
    std::vector<Segment*> all;
    for (auto& p : parts)
      for (auto& s : p.segs) all.push_back(&s);
    std::sort(all.begin(), all.end(), [](const Segment* a, const Segment* b) { return *a->key < *b->key; });
    return all;
  }
};

}  // namespace detail

class VecBuilderState final : public BuilderState {
 public:
  VecBuilderState(BuilderKind kind, BuilderEnv env, std::int64_t hint)
      : BuilderState(std::move(kind), std::move(env)),
        segs_(env_.workers),
        hint_(hint),
        elemBytes_(inlineBytes(kind_.a)) {}

 protected:
  void doMerge(const Value& v, WorkerCtx& w) override {
    bool created;
    auto& seg = segs_.current(w, created);
    bool simd = isSimdValue(v) && !kind_.a.isSimd();
    std::int64_t lanes = simd ? kSimdWidth : 1;
    if (created && hint_ >= 0) {
      std::int64_t want = w.loopRemaining >= 0 ? (w.loopRemaining + 1) * lanes : hint_;
      grow(seg.items, static_cast<std::size_t>(std::min(want, std::max<std::int64_t>(hint_, lanes))), w, false);
    }
    if (seg.items.size() + static_cast<std::size_t>(lanes) > seg.items.capacity())
      grow(seg.items, std::max<std::size_t>(8, seg.items.capacity() * 2) + static_cast<std::size_t>(lanes), w, true);
    if (simd) {
      for (const auto& l : asSimd(v).lanes) seg.items.push_back(l);
    } else {
      seg.items.push_back(v);
    }
  }

  Value doResult(WorkerCtx& w) override {
    auto order = segs_.ordered();
    std::size_t total = 0;
    for (auto* s : order) total += s->items.size();
    std::vector<Value> out;
    out.reserve(total);
    for (auto* s : order) {
      std::move(s->items.begin(), s->items.end(), std::back_inserter(out));
      std::vector<Value>().swap(s->items);
    }
    ++w.counters.vectorAllocations;
    return makeTrackedVec(std::move(out), kind_.a, env_.tracker);
  }

 private:
  detail::Segments<Value> segs_;
  std::int64_t hint_;
  std::int64_t elemBytes_;

  void grow(std::vector<Value>& items, std::size_t cap, WorkerCtx& w, bool countRealloc) {
    if (cap <= items.capacity()) return;
    charge(static_cast<std::int64_t>(cap - items.capacity()) * elemBytes_);
    if (countRealloc && items.capacity() > 0) ++w.counters.reallocations;
    items.reserve(cap);
  }
};

class MergerState final : public BuilderState {
 public:
  MergerState(BuilderKind kind, BuilderEnv env)
      : BuilderState(std::move(kind), std::move(env)),
        parts_(static_cast<std::size_t>(env_.strategy == MergeStrategy::Global ? 1 : env_.workers)) {}

 protected:
  void doMerge(const Value& v, WorkerCtx& w) override {
    Value x = isSimdValue(v) && !kind_.a.isSimd() ? foldLanes(kind_.op, v) : v;
    Part& p = parts_[static_cast<std::size_t>(w.id) % parts_.size()];
    if (env_.strategy == MergeStrategy::Local) {
      fold(p, x);
    } else {
      std::lock_guard<std::mutex> lock(p.mutex);
      fold(p, x);
    }
  }

  Value doResult(WorkerCtx&) override {
    Value acc = identityValue(kind_.a, kind_.op);
    for (auto& p : parts_)
      if (p.touched) acc = applyBinary(kind_.op, acc, p.acc);
    return acc;
  }

 private:
  struct alignas(64) Part {
    std::mutex mutex;
    Value acc;
    bool touched = false;
  };
  std::vector<Part> parts_;

  void fold(Part& p, const Value& x) {
    if (!p.touched) {
      p.acc = x;
      p.touched = true;
    } else {
      p.acc = applyBinary(kind_.op, p.acc, x);
    }
  }
};

class DictMergerState final : public BuilderState {
 public:
  DictMergerState(BuilderKind kind, BuilderEnv env)
      : BuilderState(std::move(kind), std::move(env)),
        parts_(static_cast<std::size_t>(env_.strategy == MergeStrategy::Global ? 1 : env_.workers)),
        entryBytes_(inlineBytes(kind_.a) + inlineBytes(kind_.b)) {}

 protected:
  void doMerge(const Value& v, WorkerCtx& w) override {
    const auto& f = asStruct(v).fields;
    std::size_t shard = 0;
    switch (env_.strategy) {
      case MergeStrategy::Local: shard = static_cast<std::size_t>(w.id); break;
      case MergeStrategy::Shared: shard = hashValue(f[0]) % parts_.size(); break;
      case MergeStrategy::Global: shard = 0; break;
    }
    Part& p = parts_[shard];
    if (env_.strategy == MergeStrategy::Local) {
      upsert(p, f[0], f[1]);
    } else {
      std::lock_guard<std::mutex> lock(p.mutex);
      upsert(p, f[0], f[1]);
    }
  }

  Value doResult(WorkerCtx&) override {
    std::map<Value, Value, ValueLess> merged;
    for (auto& p : parts_)
      for (auto& [k, x] : p.map) {
        auto [it, fresh] = merged.emplace(k, x);
        if (!fresh) it->second = applyBinary(kind_.op, it->second, x);
      }
    auto d = std::make_shared<DictData>();
    d->alloc = std::make_unique<Allocation>(env_.tracker, static_cast<std::int64_t>(merged.size()) * entryBytes_);
    d->entries.reserve(merged.size());
    for (auto& [k, x] : merged) d->entries.emplace_back(k, x);
    for (auto& p : parts_) p.map.clear();
    return std::shared_ptr<const DictData>(std::move(d));
  }

 private:
  struct alignas(64) Part {
    std::mutex mutex;
    std::unordered_map<Value, Value, ValueHash, ValueKeyEq> map;
  };
  std::vector<Part> parts_;
  std::int64_t entryBytes_;

  void upsert(Part& p, const Value& k, const Value& x) {
    auto it = p.map.find(k);
    if (it == p.map.end()) {
      charge(entryBytes_);
      p.map.emplace(k, x);
    } else {
      it->second = applyBinary(kind_.op, it->second, x);
    }
  }
};

class VecMergerState final : public BuilderState {
 public:
  VecMergerState(BuilderKind kind, BuilderEnv env, Value init)
      : BuilderState(std::move(kind), std::move(env)),
        init_(std::move(init)),
        n_(asVec(init_).elems.size()),
        elemBytes_(inlineBytes(kind_.a)) {
    int copies = env_.strategy == MergeStrategy::Local ? env_.workers : 1;
    parts_ = std::vector<Part>(static_cast<std::size_t>(copies));
    if (env_.strategy != MergeStrategy::Local) {
      materialize(parts_[0]);
      stripes_ = std::vector<Stripe>(static_cast<std::size_t>(env_.strategy == MergeStrategy::Shared ? env_.workers : 1));
    }
  }

 protected:
  void doMerge(const Value& v, WorkerCtx& w) override {
    const auto& f = asStruct(v).fields;
    std::int64_t idx = asI64(f[0]);
    if (idx < 0 || static_cast<std::size_t>(idx) >= n_)
      throw EvalError("IndexOutOfBounds",
                      "vecmerger index " + std::to_string(idx) + " outside [0, " + std::to_string(n_) + ")");
    auto i = static_cast<std::size_t>(idx);
    if (env_.strategy == MergeStrategy::Local) {
      Part& p = parts_[static_cast<std::size_t>(w.id)];
      if (p.cells.empty()) materialize(p);
      p.cells[i] = applyBinary(kind_.op, p.cells[i], f[1]);
      return;
    }
    Stripe& s = stripes_[i % stripes_.size()];
    std::lock_guard<std::mutex> lock(s.mutex);
    parts_[0].cells[i] = applyBinary(kind_.op, parts_[0].cells[i], f[1]);
  }

  Value doResult(WorkerCtx& w) override {
    std::vector<Value> out = asVec(init_).elems;
    for (auto& p : parts_) {
      if (p.cells.empty()) continue;
      for (std::size_t i = 0; i < n_; ++i) out[i] = applyBinary(kind_.op, out[i], p.cells[i]);
      std::vector<Value>().swap(p.cells);
    }
    ++w.counters.vectorAllocations;
    return makeTrackedVec(std::move(out), kind_.a, env_.tracker);
  }

 private:
  struct alignas(64) Part {
    std::vector<Value> cells;
  };
  struct alignas(64) Stripe {
    std::mutex mutex;
  };
  Value init_;
  std::size_t n_;
  std::int64_t elemBytes_;
  std::vector<Part> parts_;
  std::vector<Stripe> stripes_;

  void materialize(Part& p) {
    charge(static_cast<std::int64_t>(n_) * elemBytes_);
    p.cells.assign(n_, identityValue(kind_.a, kind_.op));
  }
};

class GroupBuilderState final : public BuilderState {
 public:
  GroupBuilderState(BuilderKind kind, BuilderEnv env)
      : BuilderState(std::move(kind), std::move(env)),
        segs_(env_.workers),
        pairBytes_(inlineBytes(kind_.a) + inlineBytes(kind_.b)) {}

 protected:
  void doMerge(const Value& v, WorkerCtx& w) override {
    bool created;
    auto& seg = segs_.current(w, created);
    const auto& f = asStruct(v).fields;
    charge(pairBytes_);
    seg.items.emplace_back(f[0], f[1]);
  }

  Value doResult(WorkerCtx& w) override {
    std::map<Value, std::vector<Value>, ValueLess> groups;
    for (auto* s : segs_.ordered()) {
      for (auto& [k, x] : s->items) groups[k].push_back(std::move(x));
      decltype(s->items)().swap(s->items);
    }
    auto d = std::make_shared<DictData>();
    d->alloc = std::make_unique<Allocation>(env_.tracker,
                                            static_cast<std::int64_t>(groups.size()) * (inlineBytes(kind_.a) + 8));
    d->entries.reserve(groups.size());
    for (auto& [k, xs] : groups) {
      ++w.counters.vectorAllocations;
      d->entries.emplace_back(k, makeTrackedVec(std::move(xs), kind_.b, env_.tracker));
    }
    return std::shared_ptr<const DictData>(std::move(d));
  }

 private:
  detail::Segments<std::pair<Value, Value>> segs_;
  std::int64_t pairBytes_;
};

// Creates the state for a builder of `kind`. `arg` is the vecmerger initial
// vector or the vecbuilder size hint (negative when absent).
inline std::shared_ptr<BuilderState> newBuilderState(const BuilderKind& kind, const BuilderEnv& env,
                                                     const Value* arg) {
  switch (kind.tag) {
    case BuilderTag::VecBuilder: {
      std::int64_t hint = arg ? std::max<std::int64_t>(0, asI64(*arg)) : -1;
      return std::make_shared<VecBuilderState>(kind, env, hint);
    }
    case BuilderTag::Merger: return std::make_shared<MergerState>(kind, env);
    case BuilderTag::DictMerger: return std::make_shared<DictMergerState>(kind, env);
    case BuilderTag::VecMerger: return std::make_shared<VecMergerState>(kind, env, *arg);
    case BuilderTag::GroupBuilder: return std::make_shared<GroupBuilderState>(kind, env);
  }
  throw EvalError("TypeMismatch", "unknown builder kind");
}

}  // namespace weldmill
