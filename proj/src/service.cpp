#include "beyond/service.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <shared_mutex>
#include <thread>

#include "httplib.h"

#include "beyond/error.hpp"
#include "beyond/gadgets.hpp"

namespace beyond {

using nlohmann::json;
namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "rename " + tmp.string() + ": " + ec.message());
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

enum class JobStatus { Pending, Running, Done, Failed };

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Pending: return "Pending";
    case JobStatus::Running: return "Running";
    case JobStatus::Done: return "Done";
    case JobStatus::Failed: return "Failed";
  }
  return "";
}

struct Job {
  std::string id;
  std::string session_id;  // empty for standalone calculations
  std::uint64_t simulation_id = 0;
  SimulationParams params;
  std::optional<WallConstruction> wall;
  JobStatus status = JobStatus::Pending;
  json result;
  std::string error;
  std::string submitted_at;
  std::string finished_at;
};

json job_to_json(const Job& j) {
  json out{{"job_id", j.id},
           {"session_id", j.session_id.empty() ? json(nullptr) : json(j.session_id)},
           {"status", to_string(j.status)},
           {"params", to_json(j.params)},
           {"submitted_at", j.submitted_at},
           {"finished_at", j.finished_at.empty() ? json(nullptr) : json(j.finished_at)},
           {"result", j.status == JobStatus::Done ? j.result : json(nullptr)}};
  if (j.status == JobStatus::Failed) out["error"] = j.error;
  return out;
}

struct Session {
  std::string id;
  const Engine* engine = nullptr;
  GameState state;
  std::string created_at;
  std::string updated_at;
  std::mutex mu;
};

json events_json(const std::vector<Event>& events) {
  json arr = json::array();
  for (const auto& e : events) arr.push_back(to_json(e));
  return arr;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  reply(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

struct Service::Impl {
  const ContentPack& content;
  std::vector<Scenario> scenarios;
  std::map<std::string, std::unique_ptr<Engine>> engines;
  GadgetEvaluator evaluator;
  ServiceOptions options;

  httplib::Server server;
  std::thread server_thread;
  std::mutex log_mu;

  mutable std::shared_mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::mt19937_64 id_rng{std::random_device{}()};

  std::mutex jobs_mu;
  std::condition_variable jobs_cv;
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::deque<std::shared_ptr<Job>> queue;
  std::uint64_t next_job = 1;
  bool stopping = false;
  std::thread worker;

  std::vector<std::string> restore_problems;

  Impl(const ContentPack& c, std::vector<Scenario> s, std::shared_ptr<const SurrogateModel> model, ServiceOptions o)
      : content(c), scenarios(std::move(s)), evaluator(c, std::move(model)), options(std::move(o)) {
    if (scenarios.empty()) throw Error(ErrorCode::InvalidInput, "the service needs at least one scenario");
    for (const auto& sc : scenarios) engines[sc.id] = std::make_unique<Engine>(sc, content);
    if (!options.data_dir.empty()) {
      fs::create_directories(options.data_dir / "sessions");
      restore();
    }
    routes();
    worker = std::thread([this] { work(); });
  }

  ~Impl() { shutdown(); }

  void shutdown() {
    if (server.is_running()) server.stop();
    if (server_thread.joinable()) server_thread.join();
    {
      std::lock_guard lk(jobs_mu);
      stopping = true;
    }
    jobs_cv.notify_all();
    if (worker.joinable()) worker.join();
  }

  // -- persistence ----------------------------------------------------------

  fs::path session_path(const std::string& id) const { return options.data_dir / "sessions" / (id + ".json"); }

  void persist(const Session& s) {
    if (options.data_dir.empty()) return;
    json j{{"session_id", s.id},
           {"scenario_id", s.engine->scenario().id},
           {"created_at", s.created_at},
           {"updated_at", s.updated_at},
           {"state", state_to_json(s.state)}};
    write_file_atomic(session_path(s.id), j.dump());
  }

  // Caller holds sessions_mu exclusively.
  void persist_index() {
    if (options.data_dir.empty()) return;
    json list = json::array();
    for (const auto& [id, s] : sessions) list.push_back({{"session_id", id}, {"scenario_id", s->engine->scenario().id}});
    write_file_atomic(options.data_dir / "index.json", json{{"schema", "beyond.sessions/1"}, {"sessions", list}}.dump(2));
  }

  std::shared_ptr<Session> load_session(const std::string& id) {
    const fs::path path = session_path(id);
    try {
      const json j = read_json_file(path);
      auto s = std::make_shared<Session>();
      s->id = j.at("session_id").get<std::string>();
      if (s->id != id) throw Error(ErrorCode::RestoreFailed, "session id mismatch");
      const std::string scenario_id = j.at("scenario_id").get<std::string>();
      auto eng = engines.find(scenario_id);
      if (eng == engines.end()) throw Error(ErrorCode::RestoreFailed, "unknown scenario '" + scenario_id + "'");
      s->engine = eng->second.get();
      s->created_at = j.at("created_at").get<std::string>();
      s->updated_at = j.at("updated_at").get<std::string>();
      s->state = state_from_json(j.at("state"), content);
      if (s->state.scenario_id != scenario_id) throw Error(ErrorCode::RestoreFailed, "scenario mismatch in state");
      return s;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::RestoreFailed, path.string() + ": " + e.what());
    }
  }

  void restore() {
    const fs::path index = options.data_dir / "index.json";
    if (!fs::exists(index)) return;
    json j;
    try {
      j = read_json_file(index);
      j.at("sessions");
    } catch (const std::exception& e) {
      restore_problems.push_back(std::string("RestoreFailed: index: ") + e.what());
      return;
    }
    for (const auto& entry : j.at("sessions")) {
      try {
        const std::string id = entry.at("session_id").get<std::string>();
        auto s = load_session(id);
        sessions[id] = s;
        if (s->state.pending_simulation) submit_session_job(*s);
      } catch (const Error& e) {
        restore_problems.push_back(std::string(e.name()) + ": " + e.what());
      } catch (const std::exception& e) {
        restore_problems.push_back(std::string("RestoreFailed: ") + e.what());
      }
    }
    for (const auto& p : restore_problems) log_line({{"event", "restore_failed"}, {"message", p}});
  }

  // -- jobs -------------------------------------------------------------------

  std::shared_ptr<Job> enqueue(std::shared_ptr<Job> job) {
    {
      std::lock_guard lk(jobs_mu);
      job->id = "job-" + std::to_string(next_job++);
      job->submitted_at = utc_now();
      jobs[job->id] = job;
      queue.push_back(job);
    }
    jobs_cv.notify_one();
    return job;
  }

  // Caller holds s.mu.
  std::shared_ptr<Job> submit_session_job(const Session& s) {
    auto job = std::make_shared<Job>();
    job->session_id = s.id;
    job->simulation_id = s.state.pending_simulation->id;
    job->params = s.state.pending_simulation->params;
    job->wall = s.state.assigned_wall;
    return enqueue(job);
  }

  void work() {
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lk(jobs_mu);
        jobs_cv.wait(lk, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        job = queue.front();
        queue.pop_front();
        job->status = JobStatus::Running;
      }
      json result;
      std::string error;
      std::optional<GadgetReport> report;
      try {
        if (job->wall) {
          report = evaluator.evaluate(*job->wall, job->params);
          result = to_json(*report);
        } else {
          result = {{"energy", to_json(evaluator.energy(job->params))}};
        }
      } catch (const std::exception& e) {
        error = e.what();
      }
      if (report && !job->session_id.empty()) deliver(*job, *report);
      {
        std::lock_guard lk(jobs_mu);
        job->finished_at = utc_now();
        if (error.empty()) {
          job->result = std::move(result);
          job->status = JobStatus::Done;
        } else {
          job->error = error;
          job->status = JobStatus::Failed;
        }
      }
      if (!error.empty()) log_line({{"event", "job_failed"}, {"job_id", job->id}, {"message", error}});
    }
  }

  void deliver(const Job& job, const GadgetReport& report) {
    auto s = find_session(job.session_id);
    if (!s) return;
    std::lock_guard lk(s->mu);
    const auto& pending = s->state.pending_simulation;
    if (!pending || pending->id != job.simulation_id) return;
    s->engine->complete_simulation(s->state, report);
    s->updated_at = utc_now();
    persist(*s);
  }

  // -- sessions ---------------------------------------------------------------

  std::shared_ptr<Session> find_session(const std::string& id) const {
    std::shared_lock lk(sessions_mu);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  std::string new_session_id() {
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(id_rng()));
    return buf;
  }

  void log_line(const json& j) {
    if (!options.access_log) return;
    std::lock_guard lk(log_mu);
    *options.access_log << j.dump() << '\n' << std::flush;
  }

  // -- routes -----------------------------------------------------------------

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const json::exception& e) {
        reply_error(res, 400, "InvalidInput", e.what());
      } catch (const Error& e) {
        const int status = e.code() == ErrorCode::NotFound ? 404 : e.code() == ErrorCode::IoError ? 500 : 400;
        reply_error(res, status, e.name(), e.what());
      } catch (const std::exception& e) {
        reply_error(res, 500, "Internal", e.what());
      }
    };
  }

  void routes() {
    server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
      log_line({{"ts", utc_now()},
                {"remote", req.remote_addr},
                {"method", req.method},
                {"path", req.path},
                {"status", res.status},
                {"bytes", res.body.size()}});
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) reply_error(res, res.status, res.status == 404 ? "NotFound" : "InvalidInput", "no such route");
    });

    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}, {"backend", to_string(evaluator.backend())}});
    });

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      if (!body.is_object()) return reply_error(res, 400, "InvalidInput", "body must be an object");
      const std::string scenario_id = body.value("scenario_id", scenarios.front().id);
      const std::uint64_t seed = body.value("seed", std::uint64_t{0});
      auto eng = engines.find(scenario_id);
      if (eng == engines.end()) return reply_error(res, 404, "NotFound", "unknown scenario '" + scenario_id + "'");

      auto s = std::make_shared<Session>();
      s->engine = eng->second.get();
      s->state = s->engine->new_session(seed);
      s->created_at = s->updated_at = utc_now();
      {
        std::unique_lock lk(sessions_mu);
        do {
          s->id = new_session_id();
        } while (sessions.count(s->id));
        persist(*s);
        sessions[s->id] = s;
        persist_index();
      }
      reply(res, 201, {{"session_id", s->id}, {"scenario_id", scenario_id}, {"events", events_json(s->state.event_log)}});
    }));

    server.Get(R"(/sessions/([^/]+)/state)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = find_session(req.matches[1]);
      if (!s) return reply_error(res, 404, "NotFound", "unknown session");
      std::lock_guard lk(s->mu);
      json view = state_view(s->state, s->engine->scenario());
      view["session_id"] = s->id;
      view["created_at"] = s->created_at;
      view["updated_at"] = s->updated_at;
      reply(res, 200, view);
    }));

    server.Get(R"(/sessions/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = find_session(req.matches[1]);
      if (!s) return reply_error(res, 404, "NotFound", "unknown session");
      std::uint64_t after = 0;
      if (req.has_param("after")) {
        const std::string v = req.get_param_value("after");
        std::size_t used = 0;
        try {
          after = std::stoull(v, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (v.empty() || used != v.size() || v[0] == '-')
          return reply_error(res, 400, "InvalidInput", "after must be a non-negative integer");
      }
      std::lock_guard lk(s->mu);
      json arr = json::array();
      for (const auto& e : s->state.event_log) {
        if (e.seq > after) arr.push_back(to_json(e));
      }
      reply(res, 200, {{"events", arr}, {"last_seq", s->state.last_seq()}});
    }));

    server.Post(R"(/sessions/([^/]+)/actions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto s = find_session(req.matches[1]);
      if (!s) return reply_error(res, 404, "NotFound", "unknown session");
      const json body = parse_body(req);
      const Action action = action_from_json(body.is_object() && body.contains("action") ? body.at("action") : body);
      std::lock_guard lk(s->mu);
      ActionResult r;
      try {
        r = s->engine->apply(s->state, action);
      } catch (const Error& e) {
        return reply_error(res, 409, e.name(), e.what());
      }
      json out{{"events", events_json(r.events)}, {"output", r.output}};
      const bool started = std::any_of(r.events.begin(), r.events.end(),
                                       [](const Event& e) { return e.kind == EventKind::SimulationStarted; });
      if (started) out["job_id"] = submit_session_job(*s)->id;
      if (action.type != ActionType::ReadGadgets) {
        s->updated_at = utc_now();
        persist(*s);
      }
      reply(res, 200, out);
    }));

    server.Post("/simulations", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      if (!body.is_object() || !body.contains("params"))
        return reply_error(res, 400, "InvalidInput", "expected {\"params\": {...}}");
      auto job = std::make_shared<Job>();
      job->params = params_from_json(body.at("params"));
      if (job->params.location.empty() && !content.climate.locations.empty())
        job->params.location = content.climate.locations.front().id;
      check_params(job->params, content.climate, content.ranges);
      if (body.contains("wall") && !body.at("wall").is_null()) {
        job->wall = wall_from_json(body.at("wall"), content);
        check_wall(*job->wall);
      }
      enqueue(job);
      reply(res, 202, {{"job_id", job->id}, {"status", "Pending"}});
    }));

    server.Get(R"(/simulations/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lk(jobs_mu);
      auto it = jobs.find(req.matches[1]);
      if (it == jobs.end()) return reply_error(res, 404, "NotFound", "unknown job");
      reply(res, 200, job_to_json(*it->second));
    }));
  }
};

Service::Service(const ContentPack& content, std::vector<Scenario> scenarios, std::shared_ptr<const SurrogateModel> model,
                 ServiceOptions options)
    : impl_(std::make_unique<Impl>(content, std::move(scenarios), std::move(model), std::move(options))) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port))
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::start() {
  impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void Service::stop() { impl_->shutdown(); }

std::size_t Service::session_count() const {
  std::shared_lock lk(impl_->sessions_mu);
  return impl_->sessions.size();
}

const std::vector<std::string>& Service::restore_problems() const { return impl_->restore_problems; }

}  // namespace beyond
