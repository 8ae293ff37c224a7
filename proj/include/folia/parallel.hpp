#pragma once
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace folia {

// Worker-count resolution: explicit argument > THREADS env > hardware.
std::size_t resolve_workers(int requested);

namespace detail {

// Runs fn(i) for i in [0,n) on `workers` threads and folds the results into
// `fold(i, result)` strictly in index order, so the merged output is
// byte-identical no matter how many workers ran or how they were scheduled.
template <typename R>
void ordered_map_fold(std::size_t n, std::size_t workers,
                      const std::function<R(std::size_t)>& fn,
                      const std::function<void(std::size_t, R&)>& fold) {
  if (n == 0) return;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      R r = fn(i);
      fold(i, r);
    }
    return;
  }
  std::mutex mu;
  std::condition_variable cv;
  std::map<std::size_t, R> ready;
  std::size_t next_claim = 0;
  std::exception_ptr err;

  auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lk(mu);
        if (err || next_claim >= n) return;
        idx = next_claim++;
      }
      try {
        R r = fn(idx);
        std::lock_guard<std::mutex> lk(mu);
        ready.emplace(idx, std::move(r));
        cv.notify_all();
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
        cv.notify_all();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);

  std::size_t next_fold = 0;
  {
    std::unique_lock<std::mutex> lk(mu);
    while (next_fold < n) {
      cv.wait(lk, [&] { return err || ready.count(next_fold) > 0; });
      if (err) break;
      R r = std::move(ready.at(next_fold));
      ready.erase(next_fold);
      lk.unlock();
      fold(next_fold, r);
      lk.lock();
      ++next_fold;
    }
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

template <typename R, typename Fn, typename Fold>
void ordered_map_fold(std::size_t n, std::size_t workers, Fn&& fn, Fold&& fold) {
  detail::ordered_map_fold<R>(n, workers, std::function<R(std::size_t)>(std::forward<Fn>(fn)),
                              std::function<void(std::size_t, R&)>(std::forward<Fold>(fold)));
}

}  // namespace folia
