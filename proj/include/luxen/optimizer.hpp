#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "luxen/frame.hpp"
#include "luxen/sample.hpp"
#include "luxen/vis.hpp"

namespace luxen {

inline constexpr std::size_t kDefaultSampleCap = 30000;
inline constexpr std::size_t kDefaultTopK = 15;
inline constexpr double kDefaultPruneMargin = 2.0;
inline constexpr std::uint64_t kDefaultSeed = 0x5eedULL;

struct OptimizerConfig {
  bool wflow = true;   // lazy metadata and memoized dashboards
  bool prune = true;   // two-pass approximate top-k
  bool async = true;   // cost-ordered scheduling on the pool
  std::size_t sample_cap = kDefaultSampleCap;
  std::size_t k = kDefaultTopK;
  double margin = kDefaultPruneMargin;
  std::uint64_t seed = kDefaultSeed;
  std::size_t parallelism = 0;  // 0: hardware concurrency

  /// Reads LUXEN_SAMPLE_CAP, LUXEN_TOPK, LUXEN_PRUNE_MARGIN, LUXEN_PARALLELISM.
  static OptimizerConfig from_env(OptimizerConfig base);
  static OptimizerConfig from_env();
  std::size_t workers() const noexcept;
};

struct PruneDecision {
  std::size_t n = 0;
  std::size_t k = 0;
  double t_exact = 0;
  double t_approx = 0;
  bool apply = false;
};

/// apply ⇔ N > k and N·t_exact ≥ margin·(N·t_approx + k·t_exact).
PruneDecision should_prune(std::size_t n, std::size_t k, double t_exact, double t_approx, double margin);

/// Uniform sample without replacement seeded by (seed, version); identity when rows ≤ cap.
SampleCache build_sample(std::size_t rows, std::size_t cap, std::uint64_t seed, std::uint64_t version);
/// Attaches the sampled rows of `data` as a contiguous frame.
std::shared_ptr<const SampleCache> materialize_sample(const FrameData& data, SampleCache sample);
/// build_sample plus materialize_sample, memoized on the frame until its version changes.
std::shared_ptr<const SampleCache> make_sample(Frame& frame, const FrameData& snapshot, std::size_t cap,
                                               std::uint64_t seed);

/// Ranking order: defined scores before undefined, higher score first, lower
/// rank_hint first, then attribute names and filters lexicographically.
bool rank_before(const Vis& a, const Vis& b);
void rank(std::vector<Vis>& vises);

/// Scores one candidate on the full data, or on `sample` when it is non-null.
using VisScorer = std::function<std::optional<double>(const Vis&, const SampleCache* sample)>;

/// Scores every candidate on the full data and ranks; keeps all of them.
std::vector<Vis> exact_rank(std::vector<Vis> candidates, const VisScorer& scorer);

/// Pass 1 scores every candidate on `sample`; the top k are rescored on full data.
std::vector<Vis> approx_topk(std::vector<Vis> candidates, const VisScorer& scorer, const SampleCache& sample,
                             std::size_t k);

/// Fixed-size worker pool. Jobs run in submission order per worker.
class ThreadPool {
 public:
  explicit ThreadPool(std::size_t workers);
  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  void submit(std::function<void()> job);
  std::size_t size() const noexcept { return threads_.size(); }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> jobs_;
  std::vector<std::thread> threads_;
  bool stop_ = false;
};

struct ScheduleEntry {
  std::string action;
  double estimated_cost = 0;
  std::size_t registration = 0;
  std::size_t position = 0;
};

/// Sorts by (estimated_cost, registration) and assigns positions.
std::vector<ScheduleEntry> order_schedule(std::vector<ScheduleEntry> entries);

}  // namespace luxen
