#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "json.hpp"
#include "luxen/engine.hpp"
#include "luxen/session.hpp"

namespace luxen {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0: any free port
  OptimizerConfig optimizer = OptimizerConfig::from_env();
  std::size_t frames_per_session = kDefaultFramesPerSession;
  std::size_t page_size = 50;
  std::chrono::milliseconds stream_timeout{10 * 60 * 1000};
};

/// HTTP/JSON service over sessions of frames. Recommendations stream as
/// server-sent events named recommendation, done and error.
class Server {
 public:
  explicit Server(ServerConfig config = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listening socket and returns the port.
  int bind();
  /// Serves until stop(). Binds first if needed.
  void run();
  /// Binds and serves on a background thread; returns the port once ready.
  int start();
  void stop();

  Engine& engine();
  SessionStore& sessions();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// JSON form of a table cell: null, number, bool or string.
nlohmann::ordered_json cell_json(const Cell& cell);
/// One recommendation with its charts as spec documents.
nlohmann::ordered_json recommendation_json(const Recommendation& rec);
/// Scores and ids of every vis, without data.
nlohmann::ordered_json dashboard_manifest(const Dashboard& dash);
nlohmann::ordered_json warning_json(const IntentWarning& warning);

}  // namespace luxen
