#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace weldmill {

// Ordinal path of a vecbuilder segment. Sequential execution order equals the
// lexicographic order of paths (a prefix sorts before its extensions).
using SegmentKey = std::vector<std::int64_t>;
using SegmentKeyPtr = std::shared_ptr<const SegmentKey>;

struct WorkerCounters {
  std::uint64_t traversals = 0;
  std::uint64_t vectorAllocations = 0;
  std::uint64_t reallocations = 0;
  std::uint64_t tasksCreated = 0;
  std::uint64_t tasksStolen = 0;
  std::vector<std::uint64_t> nodeEvals;
};

// Per-worker execution state threaded through evaluation.
struct WorkerCtx {
  int id = 0;
  SegmentKey base;
  std::int64_t seq = 0;
  SegmentKeyPtr key;
  // Iterations left after the current one in the enclosing parallel task
  // (-1 outside any task) and in the innermost executing loop.
  std::int64_t taskRemaining = -1;
  std::int64_t loopRemaining = -1;
  WorkerCounters counters;

  const SegmentKeyPtr& segment() {
    if (!key) {
      auto k = std::make_shared<SegmentKey>(base);
      k->push_back(seq);
      key = std::move(k);
    }
    return key;
  }
  SegmentKey loopPrefix() const {
    SegmentKey p = base;
    p.push_back(seq);
    return p;
  }
  void advance() {
    ++seq;
    key.reset();
  }
};

class WorkerPool;

// One parallel loop: iterations [0, n) run as tasks over the pool.
class LoopJob {
 public:
  virtual ~LoopJob() = default;
  // Runs iterations [start, end), calling pool.maybeSplit before each one.
  virtual void runRange(WorkerPool& pool, WorkerCtx& w, std::int64_t start, std::int64_t& end) = 0;

  std::int64_t n = 0;
  SegmentKey prefix;
  std::atomic<std::int64_t> pending{0};
  std::mutex errorMutex;
  std::exception_ptr error;
};

// Raised inside tasks once another task has failed.
struct TaskCancelled {};

class WorkerPool {
 public:
  WorkerPool(int threads, std::int64_t grain) : grain_(grain < 1 ? 1 : grain), ctxs_(threads < 1 ? 1 : threads) {
    for (std::size_t i = 0; i < ctxs_.size(); ++i) {
      ctxs_[i].id = static_cast<int>(i);
      queues_.push_back(std::make_unique<Queue>());
    }
    for (std::size_t i = 1; i < ctxs_.size(); ++i) threads_.emplace_back([this, i] { workerMain(static_cast<int>(i)); });
  }

  ~WorkerPool() { shutdown(); }

  // Stops and joins the worker threads; idempotent.
  void shutdown() {
    if (stop_.exchange(true)) return;
    {
      std::lock_guard<std::mutex> lock(sleepMutex_);
    }
    sleepCv_.notify_all();
    for (auto& t : threads_) t.join();
    threads_.clear();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(ctxs_.size()); }
  WorkerCtx& ctx(int i) { return ctxs_[i]; }
  std::vector<WorkerCtx>& contexts() { return ctxs_; }

  bool failed() const { return failed_.load(std::memory_order_relaxed); }
  std::exception_ptr firstError() {
    std::lock_guard<std::mutex> lock(errorMutex_);
    return firstError_;
  }

  // Executes the whole job from worker `w`, helping with queued tasks until
  // every task of the job has finished. Rethrows the first task failure.
  void runParallel(WorkerCtx& w, LoopJob& job) {
    job.prefix = w.loopPrefix();
    job.pending.store(1);
    ++w.counters.tasksCreated;
    execute(w, job, 0, job.n);
    while (job.pending.load(std::memory_order_acquire) > 0) {
      if (!helpOnce(w)) std::this_thread::yield();
    }
    w.advance();
    if (job.error) std::rethrow_exception(job.error);
  }

  // Splits the running task at the midpoint of its remaining iterations when
  // this worker's queue is empty and enough work remains.
  void maybeSplit(WorkerCtx& w, LoopJob& job, std::int64_t i, std::int64_t& end) {
    if (failed()) throw TaskCancelled{};
    if (ctxs_.size() < 2 || end - i < 2 * grain_) return;
    Queue& q = *queues_[w.id];
    if (q.size.load(std::memory_order_relaxed) != 0) return;
    std::int64_t mid = i + (end - i) / 2;
    job.pending.fetch_add(1, std::memory_order_acq_rel);
    ++w.counters.tasksCreated;
    {
      std::lock_guard<std::mutex> lock(q.mutex);
      q.tasks.push_back({&job, mid, end});
      q.size.store(q.tasks.size(), std::memory_order_relaxed);
    }
    end = mid;
    sleepCv_.notify_one();
  }

 private:
  struct Task {
    LoopJob* job;
    std::int64_t start, end;
  };
  struct Queue {
    std::mutex mutex;
    std::deque<Task> tasks;
    std::atomic<std::size_t> size{0};
  };

  std::int64_t grain_;
  std::vector<WorkerCtx> ctxs_;
  std::vector<std::unique_ptr<Queue>> queues_;
  std::vector<std::thread> threads_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> failed_{false};
  std::mutex errorMutex_;
  std::exception_ptr firstError_;
  std::mutex sleepMutex_;
  std::condition_variable sleepCv_;

  void execute(WorkerCtx& w, LoopJob& job, std::int64_t start, std::int64_t end) {
    SegmentKey savedBase = std::move(w.base);
    std::int64_t savedSeq = w.seq;
    SegmentKeyPtr savedKey = std::move(w.key);
    std::int64_t savedTask = w.taskRemaining, savedLoop = w.loopRemaining;
    w.base = job.prefix;
    w.base.push_back(start);
    w.seq = 0;
    w.key.reset();
    try {
      job.runRange(*this, w, start, end);
    } catch (const TaskCancelled&) {
    } catch (...) {
      recordFailure(job, std::current_exception());
    }
    w.base = std::move(savedBase);
    w.seq = savedSeq;
    w.key = std::move(savedKey);
    w.taskRemaining = savedTask;
    w.loopRemaining = savedLoop;
    job.pending.fetch_sub(1, std::memory_order_acq_rel);
  }

  void recordFailure(LoopJob& job, std::exception_ptr err) {
    {
      std::lock_guard<std::mutex> lock(job.errorMutex);
      if (!job.error) job.error = err;
    }
    std::lock_guard<std::mutex> lock(errorMutex_);
    if (!firstError_) {
      firstError_ = err;
      failed_.store(true);
    }
  }

  bool pop(int self, Task& out) {
    Queue& q = *queues_[self];
    if (q.size.load(std::memory_order_relaxed) == 0) return false;
    std::lock_guard<std::mutex> lock(q.mutex);
    if (q.tasks.empty()) return false;
    out = q.tasks.back();
    q.tasks.pop_back();
    q.size.store(q.tasks.size(), std::memory_order_relaxed);
    return true;
  }

  bool steal(int self, Task& out) {
    int n = static_cast<int>(queues_.size());
    for (int k = 1; k < n; ++k) {
      Queue& q = *queues_[(self + k) % n];
      if (q.size.load(std::memory_order_relaxed) == 0) continue;
      std::lock_guard<std::mutex> lock(q.mutex);
      if (q.tasks.empty()) continue;
      out = q.tasks.front();
      q.tasks.pop_front();
      q.size.store(q.tasks.size(), std::memory_order_relaxed);
      return true;
    }
    return false;
  }

  bool helpOnce(WorkerCtx& w) {
    Task t;
    if (pop(w.id, t)) {
      execute(w, *t.job, t.start, t.end);
      return true;
    }
    if (steal(w.id, t)) {
      ++w.counters.tasksStolen;
      execute(w, *t.job, t.start, t.end);
      return true;
    }
    return false;
  }

  void workerMain(int id) {
    WorkerCtx& w = ctxs_[id];
    int idle = 0;
    while (!stop_.load(std::memory_order_relaxed)) {
      if (helpOnce(w)) {
        idle = 0;
        continue;
      }
      if (++idle < 64) {
        std::this_thread::yield();
        continue;
      }
      std::unique_lock<std::mutex> lock(sleepMutex_);
      sleepCv_.wait_for(lock, std::chrono::microseconds(200));
    }
  }
};

}  // namespace weldmill
