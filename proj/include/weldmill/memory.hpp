#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_set>

#include "weldmill/value.hpp"

namespace weldmill {

// Tracks logical bytes of engine-owned vectors, dictionaries and builder
// partials for one evaluation.
class MemoryTracker {
 public:
  explicit MemoryTracker(std::int64_t limit) : limit_(limit) {}

  void charge(std::int64_t bytes) {
    if (bytes <= 0) return;
    std::int64_t now = live_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    if (now > limit_) {
      live_.fetch_sub(bytes, std::memory_order_relaxed);
      throw EvalError("MemoryLimitExceeded", "allocation of " + std::to_string(bytes) + " bytes exceeds the limit of " +
                                                 std::to_string(limit_) + " bytes (" +
                                                 std::to_string(now - bytes) + " live)");
    }
    std::int64_t peak = peak_.load(std::memory_order_relaxed);
    while (now > peak && !peak_.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
    }
  }

  void release(std::int64_t bytes) {
    if (bytes > 0) live_.fetch_sub(bytes, std::memory_order_relaxed);
  }

  std::int64_t live() const { return live_.load(); }
  std::int64_t peak() const { return peak_.load(); }
  std::int64_t limit() const { return limit_; }

 private:
  std::int64_t limit_;
  std::atomic<std::int64_t> live_{0};
  std::atomic<std::int64_t> peak_{0};
};

inline Allocation::Allocation(std::shared_ptr<MemoryTracker> tracker, std::int64_t bytes)
    : tracker_(std::move(tracker)), bytes_(bytes) {
  tracker_->charge(bytes_);
}

inline Allocation::~Allocation() { tracker_->release(bytes_); }

// A vector value whose storage is charged to `tracker`.
inline Value makeTrackedVec(std::vector<Value> elems, const IrType& elemType,
                            const std::shared_ptr<MemoryTracker>& tracker) {
  auto v = std::make_shared<VecData>();
  v->alloc = std::make_unique<Allocation>(tracker, 8 + static_cast<std::int64_t>(elems.size()) * inlineBytes(elemType));
  v->elems = std::move(elems);
  return std::shared_ptr<const VecData>(std::move(v));
}

namespace detail {
inline void collectTracked(const Value& v, std::unordered_set<const void*>& seen) {
  if (isVecValue(v)) {
    const auto& d = asVec(v);
    if (d.alloc) seen.insert(&d);
    if (!d.elems.empty() && (isVecValue(d.elems[0]) || isStructValue(d.elems[0]) || isDictValue(d.elems[0])))
      for (const auto& e : d.elems) collectTracked(e, seen);
  } else if (isStructValue(v)) {
    for (const auto& f : asStruct(v).fields) collectTracked(f, seen);
  } else if (isDictValue(v)) {
    for (const auto& [k, x] : asDict(v).entries) {
      collectTracked(k, seen);
      collectTracked(x, seen);
    }
  }
}
}  // namespace detail

// Counts distinct engine-allocated vectors reachable from `v`.
inline std::uint64_t countTrackedVectors(const Value& v) {
  std::unordered_set<const void*> seen;
  detail::collectTracked(v, seen);
  return seen.size();
}

}  // namespace weldmill
