// Operator entry point: service, calculations, surrogate pipeline, headless play.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "beyond/content.hpp"
#include "beyond/error.hpp"
#include "beyond/gadgets.hpp"
#include "beyond/quest.hpp"
#include "beyond/service.hpp"
#include "beyond/surrogate.hpp"

#ifndef BEYOND_CONTENT_DIR
#define BEYOND_CONTENT_DIR "content"
#endif

namespace {

using namespace beyond;
using nlohmann::json;

const std::string kDefaultContent = std::string(BEYOND_CONTENT_DIR) + "/content_pack.json";
const std::string kDefaultScenario = std::string(BEYOND_CONTENT_DIR) + "/escape_room.json";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_dataset_csv(in);
}

std::shared_ptr<const SurrogateModel> maybe_model(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const SurrogateModel>(load_model(path));
}

// Exit code for a failure: usage problems are 2, everything else 1.
int fail(const Error& e) {
  std::string msg = e.what();
  for (char& c : msg) {
    if (c == '\n') c = ' ';
  }
  std::fprintf(stderr, "error: code=%s message=%s\n", std::string(e.name()).c_str(), json(msg).dump().c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beyond the Walls: building-physics escape room tools"};
  app.require_subcommand(1);

  std::string content_path = kDefaultContent;
  std::vector<std::string> scenario_paths;
  std::string model_path, out_path, data_path, params_path, wall_path, script_path, state_out;
  std::string host = "127.0.0.1", data_dir;
  int port = 8080;
  bool oracle = false, quiet = false, print_events = false;
  std::size_t n = 12000;
  std::uint64_t seed = 7;
  double lambda = 1e-3;
  int degree = 3;

  auto add_content = [&](CLI::App* sub) {
    sub->add_option("--content", content_path, "Content pack JSON")->check(CLI::ExistingFile)->capture_default_str();
  };

  auto* serve = app.add_subcommand("serve", "Run the HTTP service until interrupted");
  serve->add_option("--port", port, "TCP port (0 picks a free one)")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  add_content(serve);
  serve->add_option("--scenario", scenario_paths, "Scenario JSON, repeatable")->check(CLI::ExistingFile);
  serve->add_option("--model", model_path, "Surrogate model JSON")->check(CLI::ExistingFile);
  serve->add_flag("--oracle", oracle, "Use the physics oracle instead of the surrogate");
  serve->add_option("--data-dir", data_dir, "Directory for session files; empty keeps sessions in memory");
  serve->add_flag("--quiet", quiet, "Disable the access log");

  auto* gadgets = app.add_subcommand("gadgets", "Print the five gadget readings for a wall");
  gadgets->add_option("--wall", wall_path, "Wall JSON {system, layers:[{material, thickness}]}")
      ->required()
      ->check(CLI::ExistingFile);
  add_content(gadgets);
  gadgets->add_option("--params", params_path, "Simulation params JSON (defaults otherwise)")->check(CLI::ExistingFile);
  gadgets->add_option("--model", model_path, "Surrogate model for the energy gadget")->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand("simulate", "Annual heating/cooling demand for one parameter set");
  simulate->add_option("--params", params_path, "Simulation params JSON")->required()->check(CLI::ExistingFile);
  add_content(simulate);
  simulate->add_option("--model", model_path, "Surrogate model; the oracle is used without one")
      ->check(CLI::ExistingFile);

  auto* sample = app.add_subcommand("sample", "Write a Latin-hypercube oracle dataset as CSV");
  sample->add_option("--n", n, "Number of rows")->capture_default_str();
  sample->add_option("--seed", seed, "RNG seed")->capture_default_str();
  sample->add_option("--out", out_path, "Output CSV")->required();
  add_content(sample);

  auto* train = app.add_subcommand("train", "Fit the ridge surrogate; metrics go to stdout");
  train->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--lambda", lambda, "Ridge penalty")->capture_default_str();
  train->add_option("--seed", seed, "Seed of the 80/20 split")->capture_default_str();
  train->add_option("--degree", degree, "Polynomial degree")->capture_default_str()->check(CLI::Range(1, 4));
  train->add_option("--out", out_path, "Output model JSON")->required();
  add_content(train);

  auto* eval = app.add_subcommand("eval", "Score a model on a dataset");
  eval->add_option("--model", model_path, "Surrogate model JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
  add_content(eval);

  auto* play = app.add_subcommand("play", "Run an action script headlessly; exit 0 iff the door opens");
  play->add_option("--scenario", scenario_paths, "Scenario JSON")->check(CLI::ExistingFile);
  play->add_option("--script", script_path, "Action script, one action per line")->required()->check(CLI::ExistingFile);
  add_content(play);
  play->add_option("--model", model_path, "Surrogate model for simulations")->check(CLI::ExistingFile);
  play->add_option("--seed", seed, "Session seed")->capture_default_str();
  play->add_option("--state-out", state_out, "Write the final game state JSON here");
  play->add_flag("--events", print_events, "Print every event as a JSON line");

  auto* validate = app.add_subcommand("validate-content", "Check a content pack and scenarios");
  add_content(validate);
  validate->add_option("--scenario", scenario_paths, "Scenario JSON, repeatable")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) {
      json report{{"content", content_path}, {"problems", json::array()}, {"scenarios", json::array()}};
      bool ok = true;
      const json cj = read_json_file(content_path);
      const auto problems = content_problems(cj);
      report["problems"] = problems;
      ok = problems.empty();
      if (ok) {
        const ContentPack content = parse_content(cj);
        report["hash"] = hex64(content.hash);
        report["materials"] = content.materials.size();
        if (scenario_paths.empty()) scenario_paths = {kDefaultScenario};
        for (const auto& path : scenario_paths) {
          json entry{{"path", path}};
          try {
            const Scenario s = load_scenario(path, content);
            entry["id"] = s.id;
            entry["ok"] = true;
            entry["quests"] = s.quests.size();
            entry["major_quests"] = s.major_count();
            entry["hints"] = s.hints.size();
          } catch (const Error& e) {
            entry["ok"] = false;
            entry["problem"] = e.what();
            ok = false;
          }
          report["scenarios"].push_back(entry);
        }
      }
      report["ok"] = ok;
      std::cout << report.dump(2) << '\n';
      if (!ok) {
        std::fprintf(stderr, "error: code=InvalidContent message=\"validation failed\"\n");
        return 1;
      }
      return 0;
    }

    const ContentPack content = load_content(content_path);

    if (sample->parsed()) {
      if (n == 0) throw Error(ErrorCode::InvalidInput, "--n must be positive");
      const Dataset data = sample_dataset(n, seed, content.climate, content.room, content.ranges, content.rules);
      std::ostringstream ss;
      write_dataset_csv(ss, data);
      write_text(out_path, ss.str());
      std::cout << json{{"rows", data.size()}, {"seed", seed}, {"out", out_path}}.dump() << '\n';
      return 0;
    }

    if (train->parsed()) {
      const std::string bytes = read_file(data_path);
      std::istringstream in(bytes);
      const Dataset data = read_dataset_csv(in);
      SurrogateModel model = fit(data, lambda, seed, degree);
      model.provenance.content_hash = hex64(content.hash);
      model.provenance.dataset_hash = hex64(fnv1a(bytes));
      save_model(model, out_path);
      std::cout << json{{"rows", data.size()},
                        {"n_train", model.n_train},
                        {"features", model.spec.width()},
                        {"lambda", lambda},
                        {"holdout", to_json(model.holdout)}}
                       .dump(2)
                << '\n';
      return 0;
    }

    if (eval->parsed()) {
      const SurrogateModel model = load_model(model_path);
      const Metrics m = evaluate(model, read_dataset(data_path), content.rules);
      std::cout << to_json(m).dump(2) << '\n';
      return 0;
    }

    if (simulate->parsed()) {
      const GadgetEvaluator ev(content, maybe_model(model_path));
      SimulationParams p = params_from_json(read_json_file(params_path));
      check_params(p, content.climate, content.ranges);
      json out = to_json(ev.energy(p));
      out["backend"] = to_string(ev.backend());
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (gadgets->parsed()) {
      const GadgetEvaluator ev(content, maybe_model(model_path));
      const WallConstruction wall = wall_from_json(read_json_file(wall_path), content);
      check_wall(wall);
      SimulationParams p = params_path.empty() ? SimulationParams{} : params_from_json(read_json_file(params_path));
      json out = to_json(ev.evaluate(wall, p));
      out["validation"] = to_json(validate_layer_order(wall, content.rules));
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (play->parsed()) {
      const Scenario scenario = load_scenario(scenario_paths.empty() ? kDefaultScenario : scenario_paths.front(), content);
      const Engine engine(scenario, content);
      const GadgetEvaluator ev(content, maybe_model(model_path));
      std::ifstream in(script_path);
      const std::vector<Action> actions = parse_script(in);

      GameState state = engine.new_session(seed);
      auto show = [&](const std::vector<Event>& events) {
        if (!print_events) return;
        for (const auto& e : events) std::cout << to_json(e).dump() << '\n';
      };
      show(state.event_log);
      for (const auto& a : actions) {
        ActionResult r = engine.apply(state, a);
        show(r.events);
        if (print_events && !r.output.is_null())
          std::cout << json{{"action", format_action(a)}, {"output", r.output}}.dump() << '\n';
        if (state.pending_simulation) {
          const GadgetReport report = ev.evaluate(*state.assigned_wall, state.pending_simulation->params);
          show(engine.complete_simulation(state, report).events);
        }
      }
      if (!state_out.empty()) write_text(state_out, state_to_json(state).dump(2));
      std::cout << json{{"door_open", state.door_open},
                        {"locks_unlocked", state.locks_unlocked},
                        {"events", state.event_log.size()},
                        {"actions", actions.size()}}
                       .dump()
                << '\n';
      if (!state.door_open) {
        std::fprintf(stderr, "error: code=DoorClosed message=\"script finished with %d of 4 locks\"\n",
                     state.locks_unlocked);
        return 1;
      }
      return 0;
    }

    if (serve->parsed()) {
      if (!oracle && model_path.empty()) {
        std::fprintf(stderr, "error: code=Usage message=\"serve needs --model or --oracle\"\n");
        return 2;
      }
      if (scenario_paths.empty()) scenario_paths = {kDefaultScenario, std::string(BEYOND_CONTENT_DIR) + "/tutorial.json"};
      std::vector<Scenario> scenarios;
      for (const auto& path : scenario_paths) scenarios.push_back(load_scenario(path, content));
      // Block the stop signals before any thread exists so sigwait sees them.
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      ServiceOptions opts;
      opts.data_dir = data_dir;
      opts.access_log = quiet ? nullptr : &std::cout;
      Service service(content, std::move(scenarios), oracle ? nullptr : maybe_model(model_path), opts);
      const int bound = service.bind(host, port);
      std::cout << json{{"event", "listening"}, {"host", host}, {"port", bound},
                        {"backend", oracle ? "oracle" : "surrogate"}, {"sessions", service.session_count()}}
                       .dump()
                << std::endl;
      service.start();
      int sig = 0;
      sigwait(&signals, &sig);
      service.stop();
      return 0;
    }
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(Error(ErrorCode::InvalidInput, e.what()));
  }
  return 2;
}
