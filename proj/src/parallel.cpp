#include "mlkit/parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace mlkit {

ParallelConfig& parallel_config() {
  static ParallelConfig cfg;
  return cfg;
}

namespace {
thread_local bool in_worker = false;
}

void parallel_for(const std::string& level, int n,
                  const std::function<void(int)>& fn) {
  const ParallelConfig& cfg = parallel_config();
  const bool enabled = cfg.workers > 1 && n > 1 && !in_worker &&
                       (cfg.level.empty() || cfg.level == level);
  if (!enabled) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int w = std::min(cfg.workers, n);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (int t = 0; t < w; ++t) {
    threads.emplace_back([&] {
      in_worker = true;
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
      in_worker = false;
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mlkit
