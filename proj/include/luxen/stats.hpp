#pragma once

#include <atomic>
#include <cstdint>

namespace luxen {

/// Process-wide instrumentation counters. Tests and the benchmark read them
/// to check laziness, memoization and pruning behaviour.
struct Stats {
  std::atomic<std::uint64_t> metadata_computations{0};
  std::atomic<std::uint64_t> dashboard_computations{0};
  std::atomic<std::uint64_t> scoring_operations{0};
  std::atomic<std::uint64_t> approximate_scores{0};
  std::atomic<std::uint64_t> max_rows_per_approximate_score{0};
  std::atomic<std::uint64_t> vis_processed{0};

  void reset() noexcept {
    metadata_computations = 0;
    dashboard_computations = 0;
    scoring_operations = 0;
    approximate_scores = 0;
    max_rows_per_approximate_score = 0;
    vis_processed = 0;
  }

  void note_approximate_rows(std::uint64_t rows) noexcept {
    auto cur = max_rows_per_approximate_score.load();
    while (rows > cur && !max_rows_per_approximate_score.compare_exchange_weak(cur, rows)) {}
  }
};

Stats& stats() noexcept;

}  // namespace luxen
