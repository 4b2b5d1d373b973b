#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace sgvae {

inline int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Evaluates fn(0..n-1) and returns the results in index order. Work items are
// handed out by an atomic counter, but since every item is independent and
// results are collected by index, the output does not depend on the thread
// count. Callers that need determinism must not share mutable state through fn.
template <typename Fn>
auto parallel_map(int n, int threads, Fn&& fn)
    -> std::vector<decltype(fn(0))> {
  using R = decltype(fn(0));
  std::vector<std::optional<R>> slots(static_cast<std::size_t>(n < 0 ? 0 : n));
  if (n <= 0) return {};

  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) slots[i].emplace(fn(i));
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
      for (;;) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        try {
          slots[i].emplace(fn(i));
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    const int k = threads < n ? threads : n;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace sgvae
