#include "luxen/server.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "luxen/csv.hpp"
#include "luxen/spec_doc.hpp"

namespace luxen {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, double>) return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
        else if constexpr (std::is_same_v<T, DateTime>) return format_datetime(v);
        else return v;
      },
      cell);
}

ordered_json warning_json(const IntentWarning& w) {
  ordered_json j{{"clause", w.clause}, {"kind", w.kind}, {"message", w.message}};
  j["suggestion"] = w.suggestion ? ordered_json(*w.suggestion) : ordered_json(nullptr);
  return j;
}

namespace {

ordered_json score_json(const std::optional<double>& s) {
  return s && std::isfinite(*s) ? ordered_json(*s) : ordered_json(nullptr);
}

ordered_json schedule_json(const std::vector<ScheduleEntry>& schedule) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : schedule)
    arr.push_back({{"action", e.action}, {"estimated_cost", e.estimated_cost}, {"position", e.position}});
  return arr;
}

}  // namespace

ordered_json recommendation_json(const Recommendation& rec) {
  ordered_json j;
  j["action"] = rec.action;
  j["display_order"] = rec.display_order;
  j["position"] = rec.position;
  j["estimated_cost"] = rec.estimated_cost;
  j["truncated"] = rec.truncated;
  j["diagnostics"] = rec.diagnostics;
  ordered_json vises = ordered_json::array();
  for (std::size_t i = 0; i < rec.vises.size(); ++i) {
    const auto& v = rec.vises[i];
    vises.push_back({{"id", vis_id(rec.action, i + 1)},
                     {"rank", i + 1},
                     {"score", score_json(v.score)},
                     {"spec", to_spec_doc(v)}});
  }
  j["vises"] = std::move(vises);
  return j;
}

ordered_json dashboard_manifest(const Dashboard& dash) {
  ordered_json j;
  j["frame_version"] = dash.frame_version;
  j["intent_version"] = dash.intent_version;
  j["k"] = dash.k;
  j["diagnostics"] = dash.diagnostics;
  j["warnings"] = dash.warnings;
  ordered_json recs = ordered_json::array();
  for (const auto& r : dash.recommendations) {
    ordered_json vises = ordered_json::array();
    for (std::size_t i = 0; i < r.vises.size(); ++i) {
      const auto& v = r.vises[i];
      vises.push_back({{"id", vis_id(r.action, i + 1)},
                       {"file", vis_id(r.action, i + 1) + ".json"},
                       {"score", score_json(v.score)},
                       {"title", v.spec.title()}});
    }
    recs.push_back({{"action", r.action},
                    {"truncated", r.truncated},
                    {"diagnostics", r.diagnostics},
                    {"vises", std::move(vises)}});
  }
  j["recommendations"] = std::move(recs);
  return j;
}

struct Server::Impl {
  ServerConfig config;
  Engine engine;
  SessionStore store;
  httplib::Server http;
  std::thread thread;
  int port = -1;

  std::mutex polls_mu;
  std::map<std::string, std::shared_ptr<DashboardStream>> polls;

  explicit Impl(ServerConfig c)
      : config(std::move(c)), engine(config.optimizer), store(config.optimizer, config.frames_per_session) {
    routes();
  }

  static void send_json(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message,
                         const std::vector<std::string>& diagnostics = {}) {
    send_json(res, status, ordered_json{{"error", message}, {"diagnostics", diagnostics}});
  }

  // Resolves {f}; on failure writes the response and returns null.
  std::shared_ptr<FrameEntry> frame_or_fail(const std::string& id, httplib::Response& res, int evicted_status) {
    auto [state, entry] = store.frame(id);
    if (state == FrameLookup::found) return entry;
    if (state == FrameLookup::evicted) send_error(res, evicted_status, "frame '" + id + "' was evicted");
    else send_error(res, 404, "unknown frame '" + id + "'");
    return nullptr;
  }

  std::optional<std::size_t> size_param(const httplib::Request& req, const std::string& name, std::size_t fallback,
                                        httplib::Response& res, bool positive) {
    if (!req.has_param(name)) return fallback;
    auto v = parse_int(req.get_param_value(name));
    if (!v || *v < 0 || (positive && *v == 0)) {
      send_error(res, 400, "invalid '" + name + "' parameter");
      return std::nullopt;
    }
    return static_cast<std::size_t>(*v);
  }

  static std::string sse(const std::string& event, const ordered_json& data) {
    return "event: " + event + "\ndata: " + data.dump() + "\n\n";
  }

  static std::optional<std::pair<std::string, ordered_json>> event_payload(const StreamEvent& ev, const std::string& frame_id,
                                                                           std::uint64_t version) {
    switch (ev.kind) {
      case StreamEvent::Kind::schedule: return std::nullopt;
      case StreamEvent::Kind::recommendation: {
        auto j = recommendation_json(ev.recommendation);
        j["frame"] = frame_id;
        j["version"] = version;
        return std::make_pair(std::string("recommendation"), std::move(j));
      }
      case StreamEvent::Kind::error:
        return std::make_pair(std::string("error"), ordered_json{{"frame", frame_id}, {"error", ev.error}});
      case StreamEvent::Kind::done: return std::make_pair(std::string("done"), ordered_json{});
    }
    return std::nullopt;
  }

  static ordered_json done_payload(const std::string& frame_id, const DashboardStream& s) {
    ordered_json j{{"frame", frame_id}};
    if (auto d = s.result()) {
      j["version"] = d->frame_version;
      j["intent_version"] = d->intent_version;
      j["k"] = d->k;
      std::vector<ScheduleEntry> sched;
      for (const auto& r : d->recommendations) sched.push_back(ScheduleEntry{r.action, r.estimated_cost, 0, r.position});
      std::stable_sort(sched.begin(), sched.end(), [](const auto& a, const auto& b) { return a.position < b.position; });
      j["schedule"] = schedule_json(sched);
      ordered_json order = ordered_json::array();
      for (const auto& r : d->recommendations) order.push_back(r.action);
      j["display_order"] = std::move(order);
      j["diagnostics"] = d->diagnostics;
      j["warnings"] = d->warnings;
    }
    return j;
  }

  void routes() {
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      } catch (...) {
        send_error(res, 500, "internal error");
      }
    });

    http.Post("/sessions", [this](const httplib::Request&, httplib::Response& res) {
      auto s = store.create();
      send_json(res, 201, {{"session", s->id()}, {"frames_per_session", s->capacity()}});
    });

    http.Post(R"(/sessions/([^/]+)/frames)", [this](const httplib::Request& req, httplib::Response& res) {
      auto session = store.session(req.matches[1]);
      if (!session) return send_error(res, 404, "unknown session '" + std::string(req.matches[1]) + "'");
      std::shared_ptr<Frame> frame;
      try {
        frame = Frame::create(parse_csv(req.body));
      } catch (const Error& e) {
        return send_error(res, 400, e.what(), {e.what()});
      }
      auto entry = store.add_frame(*session, frame);
      auto snap = frame->snapshot();
      send_json(res, 201,
                {{"frame", entry->id}, {"version", snap->version}, {"rows", snap->rows}, {"columns", snap->column_names()}});
    });

    http.Get(R"(/frames/([^/]+)/table)", [this](const httplib::Request& req, httplib::Response& res) {
      auto entry = frame_or_fail(req.matches[1], res, 404);
      if (!entry) return;
      auto offset = size_param(req, "offset", 0, res, false);
      if (!offset) return;
      auto limit = size_param(req, "limit", config.page_size, res, true);
      if (!limit) return;
      auto snap = entry->frame->snapshot();
      std::size_t begin = std::min(*offset, snap->rows), end = std::min(snap->rows, begin + *limit);
      ordered_json cols = ordered_json::array();
      for (const auto& c : snap->columns) cols.push_back({{"name", c->name()}, {"storage", to_string(c->type())}});
      ordered_json rows = ordered_json::array();
      for (std::size_t r = begin; r < end; ++r) {
        ordered_json row = ordered_json::array();
        for (const auto& c : snap->columns) row.push_back(cell_json(c->cell(r)));
        rows.push_back(std::move(row));
      }
      ordered_json labels = ordered_json::array();
      for (std::size_t r = begin; r < end; ++r) labels.push_back(snap->row_label(r));
      ordered_json j{{"frame", entry->id},        {"version", snap->version}, {"rows", snap->rows},
                     {"offset", begin},           {"limit", *limit},          {"index_name", snap->index_name()},
                     {"columns", std::move(cols)}, {"index", std::move(labels)}, {"data", std::move(rows)}};
      j["parent"] = entry->parent.empty() ? ordered_json(nullptr) : ordered_json(entry->parent);
      j["intent"] = snap->intent ? ordered_json(intent_to_json(*snap->intent)) : ordered_json::array();
      send_json(res, 200, j);
    });

    http.Put(R"(/frames/([^/]+)/intent)", [this](const httplib::Request& req, httplib::Response& res) {
      auto entry = frame_or_fail(req.matches[1], res, 404);
      if (!entry) return;
      IntentSpec intent;
      try {
        auto body = json::parse(req.body, nullptr, false);
        intent = body.is_discarded() ? parse_intent_list(req.body) : intent_from_json(body);
      } catch (const Error& e) {
        return send_error(res, 400, e.what(), {e.what()});
      }
      std::lock_guard lock(entry->write);
      ordered_json warnings = ordered_json::array();
      bool applied = true;
      if (!intent.clauses.empty()) {
        auto meta = entry->frame->metadata();
        try {
          for (const auto& w : validate_intent(intent, *meta)) warnings.push_back(warning_json(w));
        } catch (const IntentError& e) {
          for (const auto& w : e.warnings()) warnings.push_back(warning_json(w));
          applied = false;
        }
      }
      if (applied) entry->frame->set_intent(intent.clauses.empty() ? std::nullopt : std::optional(intent));
      auto snap = entry->frame->snapshot();
      send_json(res, 200,
                {{"frame", entry->id},
                 {"applied", applied},
                 {"intent_version", snap->intent_version},
                 {"intent", snap->intent ? ordered_json(intent_to_json(*snap->intent)) : ordered_json::array()},
                 {"warnings", std::move(warnings)}});
    });

    http.Post(R"(/frames/([^/]+)/transform)", [this](const httplib::Request& req, httplib::Response& res) {
      auto entry = frame_or_fail(req.matches[1], res, 409);
      if (!entry) return;
      auto body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) return send_error(res, 400, "transform body is not valid JSON");
      Transform op;
      try {
        op = transform_from_json(body);
      } catch (const Error& e) {
        return send_error(res, 400, e.what(), {e.what()});
      }
      std::shared_ptr<Frame> out;
      {
        std::lock_guard lock(entry->write);
        try {
          out = apply_transform(entry->frame, op);
        } catch (const Error& e) {
          return send_error(res, 400, e.what(), {e.what()});
        }
      }
      if (op.inplace) {
        return send_json(res, 200, {{"frame", entry->id}, {"inplace", true}, {"version", out->version()}});
      }
      auto session = store.session(entry->session);
      auto child = store.add_frame(*session, out, entry->id);
      send_json(res, 201,
                {{"frame", child->id}, {"parent", entry->id}, {"inplace", false}, {"version", out->version()},
                 {"rows", out->rows()}});
    });

    http.Get(R"(/frames/([^/]+)/recommendations)", [this](const httplib::Request& req, httplib::Response& res) {
      auto entry = frame_or_fail(req.matches[1], res, 404);
      if (!entry) return;
      auto k = size_param(req, "k", engine.config().k, res, true);
      if (!k) return;
      auto stream = engine.stream(entry->frame, *k);
      auto frame_id = entry->id;
      auto version = entry->frame->version();
      auto timeout = config.stream_timeout;
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream", [stream, frame_id, version, timeout](std::size_t, httplib::DataSink& sink) {
            stream->replay(
                [&](const StreamEvent& ev) {
                  auto p = event_payload(ev, frame_id, version);
                  if (!p) return true;
                  if (p->first == "done") p->second = done_payload(frame_id, *stream);
                  auto text = sse(p->first, p->second);
                  return sink.write(text.data(), text.size());
                },
                timeout);
            sink.done();
            return true;
          });
    });

    http.Get(R"(/frames/([^/]+)/recommendations/poll)", [this](const httplib::Request& req, httplib::Response& res) {
      auto entry = frame_or_fail(req.matches[1], res, 404);
      if (!entry) return;
      auto k = size_param(req, "k", engine.config().k, res, true);
      if (!k) return;
      auto from = size_param(req, "from", 0, res, false);
      if (!from) return;
      auto wait = size_param(req, "timeout_ms", 25000, res, false);
      if (!wait) return;
      auto stamp = Frame::rec_stamp(*entry->frame->snapshot(), *k);
      std::string key = entry->id + "/" + std::to_string(stamp.version) + "/" + std::to_string(stamp.intent_version) +
                        "/" + std::to_string(stamp.override_epoch) + "/" + std::to_string(*k);
      std::shared_ptr<DashboardStream> stream;
      {
        std::lock_guard lock(polls_mu);
        auto& slot = polls[key];
        if (!slot) slot = engine.stream(entry->frame, *k);
        stream = slot;
      }
      auto events = stream->poll(*from, std::chrono::milliseconds(*wait));
      ordered_json out = ordered_json::array();
      bool done = false;
      for (const auto& ev : events) {
        auto p = event_payload(ev, entry->id, stamp.version);
        if (!p) continue;
        if (p->first == "done") p->second = done_payload(entry->id, *stream);
        if (p->first == "done" || p->first == "error") done = true;
        out.push_back({{"event", p->first}, {"data", std::move(p->second)}});
      }
      send_json(res, 200, {{"frame", entry->id}, {"next", *from + events.size()}, {"done", done}, {"events", std::move(out)}});
    });

    http.Get(R"(/frames/([^/]+)/vis/([^/]+)/spec)", [this](const httplib::Request& req, httplib::Response& res) {
      auto entry = frame_or_fail(req.matches[1], res, 404);
      if (!entry) return;
      auto k = size_param(req, "k", engine.config().k, res, true);
      if (!k) return;
      auto snap = entry->frame->snapshot();
      for (const char* p : {"version", "intent_version"}) {
        if (!req.has_param(p)) continue;
        auto v = parse_int(req.get_param_value(p));
        if (!v) return send_error(res, 400, std::string("invalid '") + p + "' parameter");
        auto current = std::string_view(p) == "version" ? snap->version : snap->intent_version;
        if (static_cast<std::uint64_t>(*v) != current)
          return send_error(res, 409, "vis '" + std::string(req.matches[2]) + "' is stale: frame changed since it was rendered");
      }
      std::shared_ptr<const Dashboard> dash;
      try {
        dash = engine.lookup_or_compute(entry->frame, *k);
      } catch (const Error& e) {
        return send_error(res, 500, e.what());
      }
      const Vis* vis = dash->find_vis(req.matches[2].str());
      if (!vis) return send_error(res, 404, "unknown vis '" + std::string(req.matches[2]) + "'");
      res.status = 200;
      res.set_content(spec_doc_string(*vis), "application/json; charset=utf-8");
    });
  }
};

Server::Server(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->port >= 0) return impl_->port;
  if (impl_->config.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->config.host);
  } else {
    if (!impl_->http.bind_to_port(impl_->config.host, impl_->config.port))
      throw Error("cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
    impl_->port = impl_->config.port;
  }
  if (impl_->port < 0) throw Error("cannot bind " + impl_->config.host);
  return impl_->port;
}

void Server::run() {
  bind();
  impl_->http.listen_after_bind();
}

int Server::start() {
  int port = bind();
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

Engine& Server::engine() { return impl_->engine; }
SessionStore& Server::sessions() { return impl_->store; }

}  // namespace luxen
