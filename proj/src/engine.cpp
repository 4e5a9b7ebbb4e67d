#include "luxen/engine.hpp"

#include <algorithm>

namespace luxen {

void DashboardStream::push(StreamEvent event) {
  {
    std::lock_guard lock(mu_);
    if (finished_) return;
    events_.push_back(std::move(event));
  }
  cv_.notify_all();
}

void DashboardStream::finish(std::shared_ptr<const Dashboard> dashboard) {
  {
    std::lock_guard lock(mu_);
    if (finished_) return;
    events_.push_back(StreamEvent{StreamEvent::Kind::done, {}, {}, {}});
    result_ = std::move(dashboard);
    finished_ = true;
  }
  cv_.notify_all();
}

void DashboardStream::fail(const std::string& message) {
  {
    std::lock_guard lock(mu_);
    if (finished_) return;
    events_.push_back(StreamEvent{StreamEvent::Kind::error, {}, {}, message});
    error_ = message;
    finished_ = true;
  }
  cv_.notify_all();
}

bool DashboardStream::replay(const std::function<bool(const StreamEvent&)>& fn,
                             std::chrono::milliseconds timeout) const {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  std::size_t next = 0;
  while (true) {
    StreamEvent ev;
    {
      std::unique_lock lock(mu_);
      if (!cv_.wait_until(lock, deadline, [&] { return next < events_.size(); })) return false;
      ev = events_[next++];
    }
    if (!fn(ev)) return false;
    if (ev.kind == StreamEvent::Kind::done || ev.kind == StreamEvent::Kind::error) return true;
  }
}

std::vector<StreamEvent> DashboardStream::poll(std::size_t from, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return from < events_.size(); });
  if (from >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(from), events_.end()};
}

std::shared_ptr<const Dashboard> DashboardStream::wait() const {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return finished_; });
  return result_;
}

bool DashboardStream::finished() const {
  std::lock_guard lock(mu_);
  return finished_;
}

std::shared_ptr<const Dashboard> DashboardStream::result() const {
  std::lock_guard lock(mu_);
  return result_;
}

std::string DashboardStream::error() const {
  std::lock_guard lock(mu_);
  return error_;
}

std::shared_ptr<DashboardStream> replay_stream(std::shared_ptr<const Dashboard> dashboard) {
  auto s = std::make_shared<DashboardStream>();
  std::vector<const Recommendation*> order;
  for (const auto& r : dashboard->recommendations) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](auto a, auto b) { return a->position < b->position; });
  StreamEvent sched{StreamEvent::Kind::schedule, {}, {}, {}};
  for (const auto* r : order) sched.schedule.push_back(ScheduleEntry{r->action, r->estimated_cost, 0, r->position});
  s->push(std::move(sched));
  for (const auto* r : order) s->push(StreamEvent{StreamEvent::Kind::recommendation, {}, *r, {}});
  s->finish(std::move(dashboard));
  return s;
}

Engine::Engine(OptimizerConfig config)
    : config_(config),
      pool_(std::make_unique<ThreadPool>(config.workers())),
      drivers_(std::make_unique<ThreadPool>(std::max<std::size_t>(2, config.workers()))) {}

Engine::~Engine() {
  drivers_.reset();
  pool_.reset();
}

GenerateOptions Engine::generate_options(std::size_t k) const {
  GenerateOptions o;
  o.config = config_;
  o.config.k = k;
  o.encoding = encoding;
  o.eager_processing = eager_processing;
  return o;
}

std::shared_ptr<DashboardStream> Engine::stream(const std::shared_ptr<Frame>& frame, std::optional<std::size_t> k) {
  std::size_t kk = k.value_or(config_.k);
  auto snap = frame->snapshot();
  auto stamp = Frame::rec_stamp(*snap, kk);
  Key key{frame.get(), stamp.version, stamp.intent_version, stamp.override_epoch, kk};

  std::lock_guard lock(mu_);
  for (auto it = inflight_.begin(); it != inflight_.end();) {
    if (it->second.expired()) it = inflight_.erase(it);
    else ++it;
  }
  if (auto it = inflight_.find(key); it != inflight_.end())
    if (auto s = it->second.lock(); s && !s->finished()) return s;
  if (config_.wflow)
    if (auto cached = frame->cached_dashboard(stamp)) return replay_stream(std::move(cached));

  auto s = std::make_shared<DashboardStream>();
  inflight_[key] = s;
  auto opts = generate_options(kk);
  opts.pool = pool_.get();
  opts.on_schedule = [s](const std::vector<ScheduleEntry>& sched) {
    s->push(StreamEvent{StreamEvent::Kind::schedule, sched, {}, {}});
  };
  opts.on_recommendation = [s](const Recommendation& r) {
    s->push(StreamEvent{StreamEvent::Kind::recommendation, {}, r, {}});
  };
  bool wflow = config_.wflow;
  drivers_->submit([this, s, frame, snap, opts, stamp, wflow] {
    try {
      auto dash = std::make_shared<const Dashboard>(generate_dashboard(*frame, snap, registry_, opts));
      if (wflow) frame->store_dashboard(stamp, dash);
      s->finish(std::move(dash));
    } catch (const std::exception& e) {
      s->fail(e.what());
    }
  });
  return s;
}

std::shared_ptr<const Dashboard> Engine::lookup_or_compute(const std::shared_ptr<Frame>& frame,
                                                           std::optional<std::size_t> k) {
  auto s = stream(frame, k);
  auto dash = s->wait();
  if (!dash) throw Error("recommendation failed: " + s->error());
  return dash;
}

}  // namespace luxen
