#ifndef GEODENSITY_PARALLEL_HPP
#define GEODENSITY_PARALLEL_HPP

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace geodensity {

/// Fixed-size worker pool used for data-parallel chunk execution.
///
/// The pool never reduces anything itself: jobs write results to per-chunk
/// slots, the caller sums them in a fixed order afterwards. Output is
/// therefore independent of the worker count (GEODENSITY_THREADS).
class ThreadPool {
  struct Job {
    std::function<void(std::size_t)> fn;
    std::atomic<std::size_t> next{0};
    std::size_t total = 0;
    std::atomic<std::size_t> pending{0};
  };

public:
  static ThreadPool& instance() {
    static ThreadPool pool;
    return pool;
  }

  std::size_t size() const { return workers_.size() + 1; }

  /// Runs fn(chunk) for chunk = 0..num_chunks-1 and blocks until done.
  /// The calling thread participates. fn must be safe to run concurrently
  /// for distinct chunks.
  void run(std::size_t num_chunks, std::function<void(std::size_t)> fn) {
    if (num_chunks == 0) return;
    if (workers_.empty() || num_chunks == 1) {
      for (std::size_t c = 0; c < num_chunks; ++c) fn(c);
      return;
    }
    auto job = std::make_shared<Job>();
    job->fn = std::move(fn);
    job->total = num_chunks;
    job->pending.store(num_chunks, std::memory_order_relaxed);
    {
      std::lock_guard<std::mutex> lk(mtx_);
      current_ = job;
    }
    cv_start_.notify_all();
    drain(*job);
    std::unique_lock<std::mutex> lk(mtx_);
    cv_done_.wait(lk, [&] { return job->pending.load() == 0; });
    if (current_ == job) current_.reset();
  }

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

private:
  ThreadPool() {
    std::size_t n = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("GEODENSITY_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v > 0) n = static_cast<std::size_t>(v);
    }
    if (n == 0) n = 1;
    for (std::size_t i = 0; i + 1 < n; ++i)
      workers_.emplace_back([this] { worker_main(); });
  }

  ~ThreadPool() {
    {
      std::lock_guard<std::mutex> lk(mtx_);
      stop_ = true;
    }
    cv_start_.notify_all();
    for (auto& t : workers_) t.join();
  }

  void worker_main() {
    std::shared_ptr<Job> last;
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock<std::mutex> lk(mtx_);
        cv_start_.wait(lk, [&] { return stop_ || (current_ && current_ != last); });
        if (stop_) return;
        job = current_;
      }
      last = job;
      drain(*job);
    }
  }

  void drain(Job& job) {
    for (;;) {
      std::size_t c = job.next.fetch_add(1, std::memory_order_relaxed);
      if (c >= job.total) return;
      job.fn(c);
      if (job.pending.fetch_sub(1, std::memory_order_acq_rel) == 1) {
        std::lock_guard<std::mutex> lk(mtx_);
        cv_done_.notify_all();
      }
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mtx_;
  std::condition_variable cv_start_, cv_done_;
  std::shared_ptr<Job> current_;
  bool stop_ = false;
};

}  // namespace geodensity

#endif
