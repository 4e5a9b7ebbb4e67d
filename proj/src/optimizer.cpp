#include "luxen/optimizer.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>

#include "luxen/stats.hpp"

namespace luxen {

namespace {

template <class T>
std::optional<T> env_number(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (auto d = parse_double(v)) return static_cast<T>(*d);
  } else {
    if (auto i = parse_int(v); i && *i >= 0) return static_cast<T>(*i);
  }
  throw InvalidArgument(std::string("invalid value for ") + name + ": '" + v + "'");
}

}  // namespace

OptimizerConfig OptimizerConfig::from_env(OptimizerConfig base) {
  if (auto v = env_number<std::size_t>("LUXEN_SAMPLE_CAP")) base.sample_cap = std::max<std::size_t>(1, *v);
  if (auto v = env_number<std::size_t>("LUXEN_TOPK")) base.k = *v;
  if (auto v = env_number<double>("LUXEN_PRUNE_MARGIN")) base.margin = *v;
  if (auto v = env_number<std::size_t>("LUXEN_PARALLELISM")) base.parallelism = *v;
  return base;
}

OptimizerConfig OptimizerConfig::from_env() { return from_env(OptimizerConfig{}); }

std::size_t OptimizerConfig::workers() const noexcept {
  if (parallelism) return parallelism;
  return std::max(1u, std::thread::hardware_concurrency());
}

PruneDecision should_prune(std::size_t n, std::size_t k, double t_exact, double t_approx, double margin) {
  PruneDecision d{n, k, t_exact, t_approx, false};
  double N = static_cast<double>(n), K = static_cast<double>(k);
  d.apply = n > k && N * t_exact >= margin * (N * t_approx + K * t_exact);
  return d;
}

SampleCache build_sample(std::size_t rows, std::size_t cap, std::uint64_t seed, std::uint64_t version) {
  SampleCache s;
  s.total_rows = rows;
  s.cap = cap;
  s.seed = seed;
  s.version = version;
  if (rows <= cap) return s;
  s.all_rows = false;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(version), static_cast<std::uint32_t>(version >> 32)};
  std::mt19937_64 rng(seq);
  // Floyd's algorithm: cap distinct draws without materializing all rows.
  std::vector<std::uint8_t> taken(rows, 0);
  s.rows.reserve(cap);
  for (std::size_t j = rows - cap; j < rows; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    std::size_t t = dist(rng);
    std::size_t pick = taken[t] ? j : t;
    taken[pick] = 1;
  }
  for (std::size_t r = 0; r < rows; ++r)
    if (taken[r]) s.rows.push_back(static_cast<std::uint32_t>(r));
  return s;
}

std::shared_ptr<const SampleCache> materialize_sample(const FrameData& data, SampleCache sample) {
  if (!sample.all_rows) {
    auto d = std::make_shared<FrameData>();
    d->rows = sample.rows.size();
    d->version = data.version;
    d->overrides = data.overrides;
    d->columns.reserve(data.columns.size());
    for (const auto& c : data.columns) d->columns.push_back(std::make_shared<const Column>(c->take(sample.rows)));
    sample.data = std::move(d);
  }
  return std::make_shared<const SampleCache>(std::move(sample));
}

std::shared_ptr<const SampleCache> make_sample(Frame& frame, const FrameData& snap, std::size_t cap,
                                               std::uint64_t seed) {
  if (auto hit = frame.cached_sample(snap.version, cap, seed)) return hit;
  auto s = materialize_sample(snap, build_sample(snap.rows, cap, seed, snap.version));
  frame.store_sample(s);
  return s;
}

bool rank_before(const Vis& a, const Vis& b) {
  if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
  if (a.score && *a.score != *b.score) return *a.score > *b.score;
  if (a.rank_hint != b.rank_hint) return a.rank_hint < b.rank_hint;
  return a.spec.sort_key() < b.spec.sort_key();
}

void rank(std::vector<Vis>& vises) { std::stable_sort(vises.begin(), vises.end(), rank_before); }

std::vector<Vis> exact_rank(std::vector<Vis> candidates, const VisScorer& scorer) {
  for (auto& v : candidates) {
    v.score = scorer(v, nullptr);
    v.approximate = false;
  }
  rank(candidates);
  return candidates;
}

std::vector<Vis> approx_topk(std::vector<Vis> candidates, const VisScorer& scorer, const SampleCache& sample,
                             std::size_t k) {
  if (sample.all_rows || k >= candidates.size()) return exact_rank(std::move(candidates), scorer);
  for (auto& v : candidates) {
    v.score = scorer(v, &sample);
    v.approximate = true;
    stats().approximate_scores++;
    stats().note_approximate_rows(sample.rows.size());
  }
  rank(candidates);
  candidates.resize(k);
  return exact_rank(std::move(candidates), scorer);
}

ThreadPool::ThreadPool(std::size_t workers) {
  workers = std::max<std::size_t>(1, workers);
  for (std::size_t i = 0; i < workers; ++i) {
    threads_.emplace_back([this] {
      while (true) {
        std::function<void()> job;
        {
          std::unique_lock lock(mu_);
          cv_.wait(lock, [&] { return stop_ || !jobs_.empty(); });
          if (jobs_.empty()) return;
          job = std::move(jobs_.front());
          jobs_.pop_front();
        }
        job();
      }
    });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void ThreadPool::submit(std::function<void()> job) {
  {
    std::lock_guard lock(mu_);
    jobs_.push_back(std::move(job));
  }
  cv_.notify_one();
}

std::vector<ScheduleEntry> order_schedule(std::vector<ScheduleEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.estimated_cost != b.estimated_cost) return a.estimated_cost < b.estimated_cost;
    return a.registration < b.registration;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].position = i;
  return entries;
}

}  // namespace luxen
