#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "beyond/content.hpp"
#include "beyond/quest.hpp"
#include "beyond/surrogate.hpp"

namespace beyond {

struct ServiceOptions {
  std::filesystem::path data_dir;  // empty: sessions live in memory only
  std::ostream* access_log = nullptr;
};

/// HTTP front end: sessions, actions, the event feed and simulation jobs.
///
///   POST /sessions                {scenario_id, seed}   201 {session_id, events}
///   GET  /sessions/{id}/state                           200 state view
///   POST /sessions/{id}/actions   {action}              200 {events, output} | 409
///   GET  /sessions/{id}/events?after=N                  200 {events}
///   POST /simulations             {params, wall?}       202 {job_id}
///   GET  /simulations/{id}                              200 job
///   GET  /healthz                                       200
///
/// Errors carry {"error": {"code", "message"}}.
class Service {
 public:
  /// `model` null selects the oracle backend. Sessions found under
  /// `options.data_dir` are restored and their pending simulations resubmitted.
  Service(const ContentPack& content, std::vector<Scenario> scenarios, std::shared_ptr<const SurrogateModel> model,
          ServiceOptions options = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds without serving; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call bind() first.
  void run();
  /// run() on a background thread; returns once the server accepts.
  void start();
  void stop();

  std::size_t session_count() const;
  /// Problems met while restoring sessions at startup.
  const std::vector<std::string>& restore_problems() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Writes `text` to `path` through a sibling temp file and rename, so a
/// crash never leaves a partial file under the final name.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace beyond
