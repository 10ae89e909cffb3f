#pragma once

#include <functional>
#include <string>

namespace mlkit {

// Work units write into per-index slots, so scheduling never affects results.
struct ParallelConfig {
  int workers = 1;
  std::string level;  // restrict to one named level; empty = outermost loop
};

ParallelConfig& parallel_config();

// Runs fn(0..n-1), concurrently when the config enables this level. Nested
// calls inside worker threads always run sequentially.
void parallel_for(const std::string& level, int n,
                  const std::function<void(int)>& fn);

}  // namespace mlkit
