#include "luxen/session.hpp"

#include <algorithm>
#include <random>

namespace luxen {

Session::Session(std::string id, OptimizerConfig config, std::size_t capacity)
    : id_(std::move(id)), created_(std::chrono::system_clock::now()), config_(config),
      capacity_(std::max<std::size_t>(1, capacity)) {}

bool Session::pinned(const std::string& frame_id) const {
  return std::any_of(frames_.begin(), frames_.end(), [&](const auto& kv) { return kv.second->parent == frame_id; });
}

void Session::touch(const std::string& frame_id) {
  lru_.remove(frame_id);
  lru_.push_front(frame_id);
}

std::vector<std::string> Session::add(std::shared_ptr<FrameEntry> entry) {
  std::lock_guard lock(mu_);
  std::string id = entry->id;
  frames_[id] = std::move(entry);
  touch(id);
  std::vector<std::string> out;
  while (frames_.size() > capacity_) {
    auto victim = std::find_if(lru_.rbegin(), lru_.rend(), [&](const std::string& f) { return f != id && !pinned(f); });
    if (victim == lru_.rend()) break;
    std::string v = *victim;
    lru_.erase(std::next(victim).base());
    frames_.erase(v);
    evicted_.insert(v);
    out.push_back(v);
  }
  return out;
}

std::shared_ptr<FrameEntry> Session::find(const std::string& frame_id) {
  std::lock_guard lock(mu_);
  auto it = frames_.find(frame_id);
  if (it == frames_.end()) return nullptr;
  touch(frame_id);
  return it->second;
}

bool Session::evicted(const std::string& frame_id) const {
  std::lock_guard lock(mu_);
  return evicted_.count(frame_id) > 0;
}

std::size_t Session::size() const {
  std::lock_guard lock(mu_);
  return frames_.size();
}

std::vector<std::string> Session::frame_ids() const {
  std::lock_guard lock(mu_);
  return {lru_.begin(), lru_.end()};
}

SessionStore::SessionStore(OptimizerConfig config, std::size_t frames_per_session)
    : config_(config), frames_per_session_(frames_per_session) {
  std::random_device rd;
  std::uniform_int_distribution<unsigned> hex(0, 15);
  for (int i = 0; i < 6; ++i) salt_ += "0123456789abcdef"[hex(rd)];
}

std::shared_ptr<Session> SessionStore::create() {
  std::lock_guard lock(mu_);
  auto id = "s" + salt_ + std::to_string(next_session_++);
  auto s = std::make_shared<Session>(id, config_, frames_per_session_);
  sessions_[id] = s;
  return s;
}

std::shared_ptr<Session> SessionStore::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<FrameEntry> SessionStore::add_frame(Session& session, std::shared_ptr<Frame> frame, std::string parent) {
  auto entry = std::make_shared<FrameEntry>();
  {
    std::lock_guard lock(mu_);
    entry->id = "f" + salt_ + std::to_string(next_frame_++);
    frame_sessions_[entry->id] = session.id();
  }
  entry->session = session.id();
  entry->frame = std::move(frame);
  entry->parent = std::move(parent);
  session.add(entry);
  return entry;
}

std::pair<FrameLookup, std::shared_ptr<FrameEntry>> SessionStore::frame(const std::string& frame_id) const {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    auto it = frame_sessions_.find(frame_id);
    if (it == frame_sessions_.end()) return {FrameLookup::unknown, nullptr};
    s = sessions_.at(it->second);
  }
  if (auto e = s->find(frame_id)) return {FrameLookup::found, e};
  return {s->evicted(frame_id) ? FrameLookup::evicted : FrameLookup::unknown, nullptr};
}

}  // namespace luxen
