#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "luxen/recommender.hpp"

namespace luxen {

struct StreamEvent {
  enum class Kind { schedule, recommendation, done, error };
  Kind kind = Kind::done;
  std::vector<ScheduleEntry> schedule;
  Recommendation recommendation;
  std::string error;
};

/// Append-only event log of one dashboard computation. Any number of readers
/// may replay it from the start, concurrently with the writer.
class DashboardStream {
 public:
  void push(StreamEvent event);
  void finish(std::shared_ptr<const Dashboard> dashboard);
  void fail(const std::string& message);

  /// Calls `fn` for every event in order, waiting for new ones until the
  /// terminal event. Returns false if `fn` stopped early or `timeout` expired.
  bool replay(const std::function<bool(const StreamEvent&)>& fn,
              std::chrono::milliseconds timeout = std::chrono::hours(1)) const;
  /// Events from index `from` on, waiting up to `timeout` for at least one.
  std::vector<StreamEvent> poll(std::size_t from, std::chrono::milliseconds timeout) const;

  std::shared_ptr<const Dashboard> wait() const;
  bool finished() const;
  std::shared_ptr<const Dashboard> result() const;
  std::string error() const;

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<StreamEvent> events_;
  bool finished_ = false;
  std::shared_ptr<const Dashboard> result_;
  std::string error_;
};

/// Owns configuration, the action registry and the worker pools; memoizes
/// dashboards on frames and shares in-flight computations.
class Engine {
 public:
  explicit Engine(OptimizerConfig config = OptimizerConfig::from_env());
  ~Engine();

  const OptimizerConfig& config() const noexcept { return config_; }
  Registry& registry() noexcept { return registry_; }
  ThreadPool& pool() noexcept { return *pool_; }

  EncodingOptions encoding;
  /// Process every candidate before ranking (benchmark baseline).
  bool eager_processing = false;

  /// Dashboard for the frame's current (version, intent version, overrides, k):
  /// cached when wflow is on and fresh, computed otherwise. Blocks.
  std::shared_ptr<const Dashboard> lookup_or_compute(const std::shared_ptr<Frame>& frame,
                                                     std::optional<std::size_t> k = std::nullopt);

  /// Streaming variant; concurrent callers for the same stamp share one stream.
  std::shared_ptr<DashboardStream> stream(const std::shared_ptr<Frame>& frame,
                                          std::optional<std::size_t> k = std::nullopt);

  GenerateOptions generate_options(std::size_t k) const;

 private:
  OptimizerConfig config_;
  Registry registry_;
  std::unique_ptr<ThreadPool> pool_;
  std::unique_ptr<ThreadPool> drivers_;
  std::mutex mu_;
  using Key = std::tuple<const Frame*, std::uint64_t, std::uint64_t, std::uint64_t, std::size_t>;
  std::map<Key, std::weak_ptr<DashboardStream>> inflight_;
};

/// A finished stream replaying a computed dashboard in schedule order.
std::shared_ptr<DashboardStream> replay_stream(std::shared_ptr<const Dashboard> dashboard);

}  // namespace luxen
