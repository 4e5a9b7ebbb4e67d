#pragma once

#include <chrono>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "luxen/frame.hpp"
#include "luxen/optimizer.hpp"

namespace luxen {

inline constexpr std::size_t kDefaultFramesPerSession = 32;

/// A frame held by a session. `write` serializes transforms and intent
/// changes on it; reads go through snapshots and need no lock.
struct FrameEntry {
  std::string id;
  std::string session;
  std::shared_ptr<Frame> frame;
  std::string parent;  // empty for loaded frames
  std::mutex write;
};

/// Frames of one analysis session, with LRU eviction. A frame is pinned
/// while any live frame in the session names it as parent.
class Session {
 public:
  Session(std::string id, OptimizerConfig config, std::size_t capacity);

  const std::string& id() const noexcept { return id_; }
  std::chrono::system_clock::time_point created_at() const noexcept { return created_; }
  const OptimizerConfig& config() const noexcept { return config_; }
  std::size_t capacity() const noexcept { return capacity_; }

  /// Adds a frame and evicts as needed. Returns the ids evicted.
  std::vector<std::string> add(std::shared_ptr<FrameEntry> entry);
  /// Marks the frame most recently used.
  std::shared_ptr<FrameEntry> find(const std::string& frame_id);
  bool evicted(const std::string& frame_id) const;
  std::size_t size() const;
  std::vector<std::string> frame_ids() const;  // most recent first

 private:
  std::string id_;
  std::chrono::system_clock::time_point created_;
  OptimizerConfig config_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<FrameEntry>> frames_;
  std::list<std::string> lru_;  // front: most recent
  std::set<std::string> evicted_;

  bool pinned(const std::string& frame_id) const;
  void touch(const std::string& frame_id);
};

enum class FrameLookup { found, unknown, evicted };

/// All sessions of a server. Frame ids are unique across sessions.
class SessionStore {
 public:
  explicit SessionStore(OptimizerConfig config = {}, std::size_t frames_per_session = kDefaultFramesPerSession);

  std::shared_ptr<Session> create();
  std::shared_ptr<Session> session(const std::string& id) const;

  /// Registers a frame in a session and returns its entry.
  std::shared_ptr<FrameEntry> add_frame(Session& session, std::shared_ptr<Frame> frame, std::string parent = {});
  std::pair<FrameLookup, std::shared_ptr<FrameEntry>> frame(const std::string& frame_id) const;

 private:
  OptimizerConfig config_;
  std::size_t frames_per_session_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::string> frame_sessions_;  // frame id -> session id
  std::uint64_t next_session_ = 1;
  std::uint64_t next_frame_ = 1;
  std::string salt_;
};

}  // namespace luxen
