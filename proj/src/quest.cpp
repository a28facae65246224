#include "beyond/quest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <sstream>

namespace beyond {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 11> kEventNames{
    "QuestActivated", "HintSpawned",       "HintCollected",         "MinorChime", "MajorFanfare",
    "DayNightCycle",  "LockUnlocked",      "SimulationStarted",     "SimulationCompleted",
    "DoorOpened",     "ValidationFeedback"};
constexpr std::array<std::string_view, 11> kActionNames{
    "CollectHint", "ProjectHint",      "PlayCassette",     "SetDeskDial", "SpawnLayer", "PlaceLayer",
    "RemoveLayer", "CreateWallSample", "AssignWallSample", "ReadGadgets", "TryDoor"};
constexpr std::array<std::string_view, 3> kStatusNames{"Inactive", "Active", "Completed"};
constexpr std::array<std::string_view, 4> kSolutionDials{"orientation", "month", "hour", "location"};

[[noreturn]] void bad_scenario(const std::string& msg) { throw Error(ErrorCode::InvalidScenario, msg); }

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_number(std::string_view s, std::string_view what) {
  const std::string str(s);
  char* end = nullptr;
  const double v = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(v))
    throw Error(ErrorCode::InvalidInput, "bad " + std::string(what) + " '" + str + "'");
  return v;
}

int parse_integer(std::string_view s, std::string_view what) {
  const double v = parse_number(s, what);
  if (v != std::floor(v)) throw Error(ErrorCode::InvalidInput, std::string(what) + " must be an integer");
  return static_cast<int>(v);
}

std::size_t parse_index(std::string_view s, std::string_view what) {
  const int v = parse_integer(s, what);
  if (v < 0) throw Error(ErrorCode::InvalidInput, std::string(what) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

bool is_dial(std::string_view d) { return std::find(kDials.begin(), kDials.end(), d) != kDials.end(); }

Condition parse_condition(const json& j, const std::string& where) {
  if (!j.is_object() || j.empty()) bad_scenario(where + ": condition must be a non-empty object");
  Condition c;
  auto children = [&](const json& arr) {
    if (!arr.is_array() || arr.empty()) bad_scenario(where + ": all/any needs a non-empty list");
    for (const auto& x : arr) c.children.push_back(parse_condition(x, where));
  };
  if (j.contains("all")) {
    c.op = Condition::Op::All;
    children(j.at("all"));
  } else if (j.contains("any")) {
    c.op = Condition::Op::Any;
    children(j.at("any"));
  } else if (j.contains("desk")) {
    c.op = Condition::Op::DeskEquals;
    c.key = j.at("desk").get<std::string>();
    const json& v = j.at("equals");
    c.value = v.is_string() ? v.get<std::string>() : v.dump();
  } else if (j.contains("hint_collected")) {
    c.op = Condition::Op::HintCollected;
    c.key = j.at("hint_collected").get<std::string>();
  } else if (j.contains("hint_projected")) {
    c.op = Condition::Op::HintProjected;
    c.key = j.at("hint_projected").get<std::string>();
  } else if (j.contains("cassette_played")) {
    c.op = Condition::Op::CassettePlayed;
  } else if (j.contains("sample_created")) {
    c.op = Condition::Op::SampleCreated;
  } else if (j.contains("wall_passes")) {
    c.op = Condition::Op::WallPasses;
  } else {
    bad_scenario(where + ": unknown condition " + j.dump());
  }
  return c;
}

json condition_to_json(const Condition& c) {
  switch (c.op) {
    case Condition::Op::All:
    case Condition::Op::Any: {
      json arr = json::array();
      for (const auto& x : c.children) arr.push_back(condition_to_json(x));
      return {{c.op == Condition::Op::All ? "all" : "any", arr}};
    }
    case Condition::Op::DeskEquals: return {{"desk", c.key}, {"equals", c.value}};
    case Condition::Op::HintCollected: return {{"hint_collected", c.key}};
    case Condition::Op::HintProjected: return {{"hint_projected", c.key}};
    case Condition::Op::CassettePlayed: return {{"cassette_played", true}};
    case Condition::Op::SampleCreated: return {{"sample_created", true}};
    case Condition::Op::WallPasses: return {{"wall_passes", true}};
  }
  return nullptr;
}

void check_condition(const Condition& c, const Scenario& s, const ContentPack& content, const std::string& where) {
  switch (c.op) {
    case Condition::Op::All:
    case Condition::Op::Any:
      for (const auto& x : c.children) check_condition(x, s, content, where);
      break;
    case Condition::Op::DeskEquals:
      if (!is_dial(c.key)) bad_scenario(where + ": unknown desk dial '" + c.key + "'");
      if (c.value == "$solution") {
        if (std::find(kSolutionDials.begin(), kSolutionDials.end(), c.key) == kSolutionDials.end())
          bad_scenario(where + ": dial '" + c.key + "' has no solution value");
      } else {
        try {
          normalise_dial(c.key, c.value, content);
        } catch (const Error& e) {
          bad_scenario(where + ": " + e.what());
        }
      }
      break;
    case Condition::Op::HintCollected:
    case Condition::Op::HintProjected:
      if (!(c.op == Condition::Op::HintProjected && c.key == "*") && !s.hint(c.key))
        bad_scenario(where + ": unknown hint '" + c.key + "'");
      break;
    default:
      break;
  }
}

Desk desk_from_json(const json& j, const ContentPack& content, Desk base) {
  for (const auto& [dial, v] : j.items()) {
    const std::string value = v.is_string() ? v.get<std::string>() : (v.is_boolean() ? (v.get<bool>() ? "on" : "off") : v.dump());
    const std::string norm = normalise_dial(dial, value, content);
    if (dial == "orientation") base.orientation = parse_orientation(norm);
    else if (dial == "month") base.month = parse_integer(norm, dial);
    else if (dial == "hour") base.hour = parse_integer(norm, dial);
    else if (dial == "location") base.location = norm;
    else if (dial == "cooling") base.cooling_enabled = norm == "on";
    else if (dial == "shades") base.shades_on = norm == "on";
    else if (dial == "setpoint_heating") base.setpoint_heating = parse_number(norm, dial);
    else if (dial == "setpoint_cooling") base.setpoint_cooling = parse_number(norm, dial);
    else if (dial == "window_u") base.window_u = parse_number(norm, dial);
    else if (dial == "shgc") base.shgc = parse_number(norm, dial);
  }
  return base;
}

json desk_to_json(const Desk& d) {
  return {{"orientation", to_string(d.orientation)},
          {"month", d.month},
          {"hour", d.hour},
          {"location", d.location},
          {"cooling", d.cooling_enabled ? "on" : "off"},
          {"shades", d.shades_on ? "on" : "off"},
          {"setpoint_heating", d.setpoint_heating},
          {"setpoint_cooling", d.setpoint_cooling},
          {"window_u", d.window_u},
          {"shgc", d.shgc}};
}

json layer_to_json(const Layer& l) { return {{"material", l.material.id}, {"thickness", l.thickness}}; }

Layer layer_from_json(const json& j, const ContentPack& content) {
  return {content.material(j.at("material").get<std::string>()), j.at("thickness").get<double>()};
}

}  // namespace

std::string_view to_string(QuestKind k) { return k == QuestKind::Major ? "Major" : "Minor"; }
std::string_view to_string(QuestStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(EventKind k) { return kEventNames[static_cast<std::size_t>(k)]; }
std::string_view to_string(ActionType t) { return kActionNames[static_cast<std::size_t>(t)]; }

EventKind parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == s) return static_cast<EventKind>(i);
  }
  throw Error(ErrorCode::InvalidInput, "unknown event kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Scenario

const QuestDef& Scenario::quest(std::string_view id) const {
  for (const auto& q : quests) {
    if (q.id == id) return q;
  }
  throw Error(ErrorCode::UnknownEntity, "unknown quest '" + std::string(id) + "'");
}

const HintDef* Scenario::hint(std::string_view id) const {
  for (const auto& h : hints) {
    if (h.id == id) return &h;
  }
  return nullptr;
}

std::size_t Scenario::major_count() const {
  return static_cast<std::size_t>(
      std::count_if(quests.begin(), quests.end(), [](const QuestDef& q) { return q.kind == QuestKind::Major; }));
}

Scenario parse_scenario(const json& j, const ContentPack& content) {
  Scenario s;
  try {
    if (j.value("schema", "") != "beyond.scenario/1") bad_scenario("expected schema 'beyond.scenario/1'");
    s.id = j.at("id").get<std::string>();
    s.title = j.value("title", s.id);
    s.has_door = j.value("door", true);
    s.gadget_pass_profile = j.value("gadget_pass_thresholds", std::string("default"));
    s.assembly_slots = j.value("assembly_slots", std::size_t{8});
    if (j.contains("timer_minutes") && !j.at("timer_minutes").is_null()) s.timer_minutes = j.at("timer_minutes").get<int>();

    for (const auto& q : j.at("quests")) {
      QuestDef def;
      def.id = q.at("id").get<std::string>();
      def.title = q.value("title", def.id);
      const std::string kind = q.at("kind").get<std::string>();
      if (kind != "Major" && kind != "Minor") bad_scenario("quest '" + def.id + "': kind must be Major or Minor");
      def.kind = kind == "Major" ? QuestKind::Major : QuestKind::Minor;
      def.prerequisites = q.value("prerequisites", std::vector<std::string>{});
      def.condition = parse_condition(q.at("condition"), "quest '" + def.id + "'");
      s.quests.push_back(std::move(def));
    }
    for (const auto& h : j.value("hints", json::array())) {
      HintDef def;
      def.id = h.at("id").get<std::string>();
      def.quest_id = h.at("quest_id").get<std::string>();
      def.text = h.at("text").get<std::string>();
      def.figure_asset_id = h.value("figure", std::string{});
      def.voiceover_transcript = h.at("voiceover").get<std::string>();
      s.hints.push_back(std::move(def));
    }

    const json& sol = j.at("desk_solution");
    s.desk_solution.orientation = parse_orientation(sol.at("orientation").get<std::string>());
    s.desk_solution.month = sol.at("month").get<int>();
    s.desk_solution.hour = sol.at("hour").get<int>();
    s.desk_solution.location = sol.at("location").get<std::string>();

    Desk initial;
    initial.location = content.climate.locations.empty() ? "" : content.climate.locations.front().id;
    s.initial_desk = desk_from_json(j.value("initial_desk", json::object()), content, initial);
  } catch (const json::exception& e) {
    bad_scenario(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidScenario) throw;
    bad_scenario(e.what());
  }

  // Identity and references.
  std::set<std::string> ids;
  for (const auto& q : s.quests) {
    if (q.id.empty() || !ids.insert(q.id).second) bad_scenario("duplicate or empty quest id '" + q.id + "'");
  }
  for (const auto& q : s.quests) {
    for (const auto& p : q.prerequisites) {
      if (p == q.id) bad_scenario("quest '" + q.id + "' requires itself");
      if (!ids.count(p)) bad_scenario("quest '" + q.id + "' requires unknown quest '" + p + "'");
    }
  }
  std::set<std::string> hint_ids;
  for (const auto& h : s.hints) {
    if (h.id.empty() || !hint_ids.insert(h.id).second) bad_scenario("duplicate or empty hint id '" + h.id + "'");
    if (!ids.count(h.quest_id)) bad_scenario("hint '" + h.id + "' references unknown quest '" + h.quest_id + "'");
    if (h.text.empty() || h.voiceover_transcript.empty()) bad_scenario("hint '" + h.id + "' needs text and voiceover");
  }
  for (const auto& q : s.quests) check_condition(q.condition, s, content, "quest '" + q.id + "'");

  // Prerequisite DAG via DFS colouring.
  std::map<std::string, int> colour;
  std::function<void(const QuestDef&)> visit = [&](const QuestDef& q) {
    colour[q.id] = 1;
    for (const auto& p : q.prerequisites) {
      if (colour[p] == 1) bad_scenario("prerequisite cycle through '" + q.id + "' and '" + p + "'");
      if (colour[p] == 0) visit(s.quest(p));
    }
    colour[q.id] = 2;
  };
  for (const auto& q : s.quests) {
    if (colour[q.id] == 0) visit(q);
  }

  const std::size_t majors = s.major_count();
  if (s.has_door && majors != 4) bad_scenario("a door scenario needs exactly 4 major quests, found " + std::to_string(majors));
  if (!s.has_door && majors != 0) bad_scenario("a scenario without a door cannot have major quests");

  if (!content.climate.contains(s.desk_solution.location))
    bad_scenario("desk solution location '" + s.desk_solution.location + "' not in climate table");
  if (s.desk_solution.month < 1 || s.desk_solution.month > 12 || s.desk_solution.hour < 0 || s.desk_solution.hour > 23)
    bad_scenario("desk solution month/hour out of range");
  if (!content.gadget_pass.count(s.gadget_pass_profile))
    bad_scenario("unknown gadget pass profile '" + s.gadget_pass_profile + "'");
  if (s.assembly_slots == 0 || s.assembly_slots > 32) bad_scenario("assembly_slots must be in 1..32");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const ContentPack& content) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    bad_scenario(e.what());
  }
  return parse_scenario(j, content);
}

// ---------------------------------------------------------------------------
// Actions

Action parse_action(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  if (tok.empty()) throw Error(ErrorCode::InvalidInput, "empty action");

  Action a;
  auto it = std::find(kActionNames.begin(), kActionNames.end(), tok[0]);
  if (it == kActionNames.end()) throw Error(ErrorCode::InvalidInput, "unknown action '" + tok[0] + "'");
  a.type = static_cast<ActionType>(it - kActionNames.begin());

  auto want = [&](std::size_t n) {
    if (tok.size() != n + 1)
      throw Error(ErrorCode::InvalidInput, tok[0] + " takes " + std::to_string(n) + " argument(s)");
  };
  switch (a.type) {
    case ActionType::CollectHint:
    case ActionType::ProjectHint:
      want(1);
      a.id = tok[1];
      break;
    case ActionType::SetDeskDial:
      want(2);
      a.dial = tok[1];
      a.value = tok[2];
      break;
    case ActionType::SpawnLayer:
      want(2);
      a.id = tok[1];
      a.thickness = parse_number(tok[2], "thickness");
      break;
    case ActionType::PlaceLayer:
      want(2);
      a.bench_index = parse_index(tok[1], "bench index");
      a.position = parse_index(tok[2], "position");
      break;
    case ActionType::RemoveLayer:
      want(1);
      a.position = parse_index(tok[1], "position");
      break;
    default:
      want(0);
  }
  return a;
}

std::string format_action(const Action& a) {
  std::string out(to_string(a.type));
  switch (a.type) {
    case ActionType::CollectHint:
    case ActionType::ProjectHint: return out + " " + a.id;
    case ActionType::SetDeskDial: return out + " " + a.dial + " " + a.value;
    case ActionType::SpawnLayer: return out + " " + a.id + " " + fmt_number(a.thickness);
    case ActionType::PlaceLayer: return out + " " + std::to_string(a.bench_index) + " " + std::to_string(a.position);
    case ActionType::RemoveLayer: return out + " " + std::to_string(a.position);
    default: return out;
  }
}

std::vector<Action> parse_script(std::istream& in) {
  std::vector<Action> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_action(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidInput, "script line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Action action_from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "action must be an object");
    const std::string type = j.at("type").get<std::string>();
    auto str = [&](const char* key) {
      const json& v = j.at(key);
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    Action a;
    auto it = std::find(kActionNames.begin(), kActionNames.end(), type);
    if (it == kActionNames.end()) throw Error(ErrorCode::InvalidInput, "unknown action '" + type + "'");
    a.type = static_cast<ActionType>(it - kActionNames.begin());
    switch (a.type) {
      case ActionType::CollectHint:
      case ActionType::ProjectHint: a.id = j.contains("hint") ? str("hint") : str("id"); break;
      case ActionType::SetDeskDial:
        a.dial = str("dial");
        a.value = j.at("value").is_boolean() ? (j.at("value").get<bool>() ? "on" : "off") : str("value");
        break;
      case ActionType::SpawnLayer:
        a.id = j.contains("material") ? str("material") : str("id");
        a.thickness = j.at("thickness").get<double>();
        break;
      case ActionType::PlaceLayer:
        a.bench_index = j.at("bench_index").get<std::size_t>();
        a.position = j.at("position").get<std::size_t>();
        break;
      case ActionType::RemoveLayer: a.position = j.at("position").get<std::size_t>(); break;
      default: break;
    }
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("action: ") + e.what());
  }
}

json to_json(const Action& a) {
  json j{{"type", to_string(a.type)}};
  switch (a.type) {
    case ActionType::CollectHint:
    case ActionType::ProjectHint: j["hint"] = a.id; break;
    case ActionType::SetDeskDial:
      j["dial"] = a.dial;
      j["value"] = a.value;
      break;
    case ActionType::SpawnLayer:
      j["material"] = a.id;
      j["thickness"] = a.thickness;
      break;
    case ActionType::PlaceLayer:
      j["bench_index"] = a.bench_index;
      j["position"] = a.position;
      break;
    case ActionType::RemoveLayer: j["position"] = a.position; break;
    default: break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Desk

std::string normalise_dial(std::string_view dial, std::string_view value, const ContentPack& content) {
  const std::string v(value);
  auto in_range = [&](const Range& r, std::string_view name) {
    const double x = parse_number(v, name);
    if (!r.contains(x))
      throw Error(ErrorCode::InvalidInput, std::string(name) + " " + v + " outside [" + fmt_number(r.min) + ", " +
                                               fmt_number(r.max) + "]");
    return fmt_number(x);
  };
  if (dial == "orientation") return std::string(to_string(parse_orientation(v)));
  if (dial == "month") {
    const int m = parse_integer(v, dial);
    if (m < 1 || m > 12) throw Error(ErrorCode::InvalidInput, "month must be in 1..12");
    return std::to_string(m);
  }
  if (dial == "hour") {
    const int h = parse_integer(v, dial);
    if (h < 0 || h > 23) throw Error(ErrorCode::InvalidInput, "hour must be in 0..23");
    return std::to_string(h);
  }
  if (dial == "location") {
    if (!content.climate.contains(v)) throw Error(ErrorCode::InvalidInput, "unknown location '" + v + "'");
    return v;
  }
  if (dial == "cooling" || dial == "shades") {
    if (v == "on" || v == "true" || v == "1") return "on";
    if (v == "off" || v == "false" || v == "0") return "off";
    throw Error(ErrorCode::InvalidInput, std::string(dial) + " must be on or off");
  }
  if (dial == "setpoint_heating") return in_range(content.ranges.setpoint_heating, dial);
  if (dial == "setpoint_cooling") return in_range(content.ranges.setpoint_cooling, dial);
  if (dial == "window_u") return in_range(content.ranges.window_u, dial);
  if (dial == "shgc") return in_range(content.ranges.shgc, dial);
  throw Error(ErrorCode::InvalidInput, "unknown dial '" + v + "'");
}

SimulationParams desk_params(const Desk& desk, double wall_u) {
  SimulationParams p;
  p.location = desk.location;
  p.orientation = desk.orientation;
  p.month = desk.month;
  p.hour = desk.hour;
  p.cooling_enabled = desk.cooling_enabled;
  p.shades_on = desk.shades_on;
  p.setpoint_heating = desk.setpoint_heating;
  p.setpoint_cooling = desk.setpoint_cooling;
  p.window_u = desk.window_u;
  p.shgc = desk.shgc;
  p.wall_u = wall_u;
  return p;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(const Scenario& scenario, const ContentPack& content)
    : scenario_(scenario), content_(content), pass_(content.pass_profile(scenario.gadget_pass_profile)) {}

std::string Engine::dial_value(const Desk& desk, std::string_view dial) const {
  if (dial == "orientation") return std::string(to_string(desk.orientation));
  if (dial == "month") return std::to_string(desk.month);
  if (dial == "hour") return std::to_string(desk.hour);
  if (dial == "location") return desk.location;
  if (dial == "cooling") return desk.cooling_enabled ? "on" : "off";
  if (dial == "shades") return desk.shades_on ? "on" : "off";
  if (dial == "setpoint_heating") return fmt_number(desk.setpoint_heating);
  if (dial == "setpoint_cooling") return fmt_number(desk.setpoint_cooling);
  if (dial == "window_u") return fmt_number(desk.window_u);
  if (dial == "shgc") return fmt_number(desk.shgc);
  return {};
}

std::string Engine::solution_value(std::string_view dial) const {
  const DeskSolution& s = scenario_.desk_solution;
  if (dial == "orientation") return std::string(to_string(s.orientation));
  if (dial == "month") return std::to_string(s.month);
  if (dial == "hour") return std::to_string(s.hour);
  return s.location;
}

bool Engine::holds(const GameState& state, const Condition& c) const {
  switch (c.op) {
    case Condition::Op::All:
      return std::all_of(c.children.begin(), c.children.end(), [&](const Condition& x) { return holds(state, x); });
    case Condition::Op::Any:
      return std::any_of(c.children.begin(), c.children.end(), [&](const Condition& x) { return holds(state, x); });
    case Condition::Op::DeskEquals: {
      const std::string want =
          c.value == "$solution" ? solution_value(c.key) : normalise_dial(c.key, c.value, content_);
      return dial_value(state.desk, c.key) == want;
    }
    case Condition::Op::HintCollected: return state.collected_hints.count(c.key) > 0;
    case Condition::Op::HintProjected:
      return state.projected_hint && (c.key == "*" || *state.projected_hint == c.key);
    case Condition::Op::CassettePlayed: return state.cassette_played;
    case Condition::Op::SampleCreated: return state.bench.sample.has_value();
    case Condition::Op::WallPasses:
      return state.assigned_wall && state.last_gadgets && !state.pending_simulation &&
             failing_gadgets(*state.last_gadgets, pass_).empty();
  }
  return false;
}

namespace {

void emit(GameState& state, std::vector<Event>& out, EventKind kind, json payload) {
  Event e{state.last_seq() + 1, kind, std::move(payload)};
  state.event_log.push_back(e);
  out.push_back(std::move(e));
}

}  // namespace

void Engine::settle(GameState& state, std::vector<Event>& out) const {
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& q : scenario_.quests) {
      auto& status = state.quest_status[q.id];
      if (status != QuestStatus::Active || !holds(state, q.condition)) continue;
      status = QuestStatus::Completed;
      changed = true;
      if (q.kind == QuestKind::Minor) {
        emit(state, out, EventKind::MinorChime, {{"quest", q.id}});
      } else {
        emit(state, out, EventKind::MajorFanfare, {{"quest", q.id}});
        ++state.day_night_cycles_run;
        emit(state, out, EventKind::DayNightCycle, {{"cycle", state.day_night_cycles_run}});
        ++state.locks_unlocked;
        emit(state, out, EventKind::LockUnlocked, {{"quest", q.id}, {"locks_unlocked", state.locks_unlocked}});
      }
    }
    for (const auto& q : scenario_.quests) {
      auto& status = state.quest_status[q.id];
      if (status != QuestStatus::Inactive) continue;
      const bool ready = std::all_of(q.prerequisites.begin(), q.prerequisites.end(), [&](const std::string& p) {
        return state.quest_status[p] == QuestStatus::Completed;
      });
      if (!ready) continue;
      status = QuestStatus::Active;
      changed = true;
      emit(state, out, EventKind::QuestActivated, {{"quest", q.id}, {"title", q.title}, {"kind", to_string(q.kind)}});
      for (const auto& h : scenario_.hints) {
        if (h.quest_id != q.id || !state.spawned_hints.insert(h.id).second) continue;
        emit(state, out, EventKind::HintSpawned, {{"hint", h.id}, {"quest", q.id}});
      }
    }
  }
}

GameState Engine::new_session(std::uint64_t seed) const {
  GameState state;
  state.scenario_id = scenario_.id;
  state.seed = seed;
  state.desk = scenario_.initial_desk;
  state.bench.slots.resize(scenario_.assembly_slots);
  for (const auto& q : scenario_.quests) state.quest_status[q.id] = QuestStatus::Inactive;
  std::vector<Event> ignored;
  settle(state, ignored);
  return state;
}

ActionResult Engine::apply(GameState& state, const Action& a) const {
  ActionResult r;
  switch (a.type) {
    case ActionType::CollectHint: {
      if (!scenario_.hint(a.id)) throw Error(ErrorCode::UnknownEntity, "unknown hint '" + a.id + "'");
      if (!state.spawned_hints.count(a.id)) throw Error(ErrorCode::NotAvailable, "hint '" + a.id + "' has not spawned");
      if (state.collected_hints.count(a.id)) throw Error(ErrorCode::AlreadyCollected, "hint '" + a.id + "' already collected");
      state.collected_hints.insert(a.id);
      emit(state, r.events, EventKind::HintCollected, {{"hint", a.id}});
      break;
    }
    case ActionType::ProjectHint: {
      if (!scenario_.hint(a.id)) throw Error(ErrorCode::UnknownEntity, "unknown hint '" + a.id + "'");
      if (!state.collected_hints.count(a.id)) throw Error(ErrorCode::NotCollected, "hint '" + a.id + "' not collected");
      state.projected_hint = a.id;
      const HintDef& h = *scenario_.hint(a.id);
      r.output = {{"hint", h.id}, {"text", h.text}, {"figure", h.figure_asset_id}};
      break;
    }
    case ActionType::PlayCassette: {
      if (!state.projected_hint) throw Error(ErrorCode::NotProjected, "no hint selected at the projector");
      state.cassette_played = true;
      r.output = {{"hint", *state.projected_hint},
                  {"transcript", scenario_.hint(*state.projected_hint)->voiceover_transcript}};
      break;
    }
    case ActionType::SetDeskDial: {
      const std::string v = normalise_dial(a.dial, a.value, content_);
      state.desk = desk_from_json(json{{a.dial, v}}, content_, state.desk);
      break;
    }
    case ActionType::SpawnLayer: {
      const Material& m = content_.material(a.id);
      if (!(a.thickness > 0.0) || !std::isfinite(a.thickness) || a.thickness > 2.0)
        throw Error(ErrorCode::InvalidInput, "thickness must be in (0, 2] m");
      state.bench.spawned.push_back({m, a.thickness});
      r.output = {{"bench_index", state.bench.spawned.size() - 1}};
      break;
    }
    case ActionType::PlaceLayer: {
      if (a.bench_index >= state.bench.spawned.size())
        throw Error(ErrorCode::UnknownEntity, "no spawned layer at bench index " + std::to_string(a.bench_index));
      if (a.position >= state.bench.slots.size())
        throw Error(ErrorCode::InvalidInput, "position " + std::to_string(a.position) + " outside the assembly");
      if (state.bench.slots[a.position])
        throw Error(ErrorCode::PositionOccupied, "position " + std::to_string(a.position) + " is occupied");
      const auto idx = static_cast<std::ptrdiff_t>(a.bench_index);
      state.bench.slots[a.position] = state.bench.spawned[a.bench_index];
      state.bench.spawned.erase(state.bench.spawned.begin() + idx);
      break;
    }
    case ActionType::RemoveLayer: {
      if (a.position >= state.bench.slots.size())
        throw Error(ErrorCode::InvalidInput, "position " + std::to_string(a.position) + " outside the assembly");
      if (!state.bench.slots[a.position])
        throw Error(ErrorCode::PositionEmpty, "position " + std::to_string(a.position) + " is empty");
      state.bench.spawned.push_back(*state.bench.slots[a.position]);
      state.bench.slots[a.position].reset();
      break;
    }
    case ActionType::CreateWallSample: {
      WallConstruction wall;
      std::optional<StructuralSystem> system;
      for (const auto& slot : state.bench.slots) {
        if (!slot) continue;
        wall.layers.push_back(*slot);
        if (!system && slot->material.structural_system) system = slot->material.structural_system;
      }
      if (wall.layers.empty()) throw Error(ErrorCode::EmptyAssembly, "the assembly holds no layers");
      wall.system = system.value_or(StructuralSystem::Masonry);
      const ValidationResult v = validate_layer_order(wall, content_.rules);
      state.bench.sample = wall;
      emit(state, r.events, EventKind::ValidationFeedback,
           {{"source", "assembly"}, {"ok", v.ok()}, {"system", to_string(wall.system)}, {"violations", to_json(v)}});
      break;
    }
    case ActionType::AssignWallSample: {
      if (!state.bench.sample) throw Error(ErrorCode::NoSample, "no wall sample has been created");
      if (state.pending_simulation) throw Error(ErrorCode::SimulationPending, "a simulation is already running");
      const WallConstruction& wall = *state.bench.sample;
      const ValidationResult v = validate_layer_order(wall, content_.rules);
      if (!v.ok()) {
        emit(state, r.events, EventKind::ValidationFeedback,
             {{"source", "assignment"}, {"ok", false}, {"violations", to_json(v)}});
        break;
      }
      const double u = compute_u_value(wall, content_.design_conditions);
      state.assigned_wall = wall;
      state.last_gadgets.reset();
      PendingSimulation job{state.last_seq() + 1, desk_params(state.desk, u)};
      state.pending_simulation = job;
      emit(state, r.events, EventKind::SimulationStarted,
           {{"simulation_id", job.id}, {"params", to_json(job.params)}, {"wall", to_json(wall)}});
      break;
    }
    case ActionType::ReadGadgets: {
      if (!state.last_gadgets) throw Error(ErrorCode::NoGadgets, "no simulation result yet");
      r.output = to_json(*state.last_gadgets);
      return r;
    }
    case ActionType::TryDoor: {
      if (state.door_open) break;
      if (scenario_.has_door && state.locks_unlocked == 4) {
        state.door_open = true;
        emit(state, r.events, EventKind::DoorOpened, {{"locks_unlocked", state.locks_unlocked}});
      } else {
        emit(state, r.events, EventKind::ValidationFeedback,
             {{"source", "door"},
              {"ok", false},
              {"locks_unlocked", state.locks_unlocked},
              {"message", scenario_.has_door ? "the door is still locked" : "this room has no door"}});
      }
      break;
    }
  }
  settle(state, r.events);
  return r;
}

ActionResult Engine::complete_simulation(GameState& state, const GadgetReport& report) const {
  if (!state.pending_simulation) throw Error(ErrorCode::NoPendingSimulation, "no simulation is pending");
  ActionResult r;
  const std::uint64_t id = state.pending_simulation->id;
  state.pending_simulation.reset();
  state.last_gadgets = report;
  emit(state, r.events, EventKind::SimulationCompleted, {{"simulation_id", id}, {"gadgets", to_json(report)}});
  const auto failing = failing_gadgets(report, pass_);
  if (!failing.empty())
    emit(state, r.events, EventKind::ValidationFeedback, {{"source", "gadgets"}, {"ok", false}, {"failing", failing}});
  settle(state, r.events);
  return r;
}

std::string Engine::replay_hint(const GameState& state, std::string_view hint_id) const {
  if (!state.projected_hint) throw Error(ErrorCode::NotProjected, "no hint selected at the projector");
  if (*state.projected_hint != hint_id)
    throw Error(ErrorCode::NotProjected, "hint '" + std::string(hint_id) + "' is not the projected hint");
  return scenario_.hint(hint_id)->voiceover_transcript;
}

// ---------------------------------------------------------------------------
// Serialisation

json to_json(const Event& e) { return {{"seq", e.seq}, {"kind", to_string(e.kind)}, {"payload", e.payload}}; }

Event event_from_json(const json& j) {
  return {j.at("seq").get<std::uint64_t>(), parse_event_kind(j.at("kind").get<std::string>()), j.at("payload")};
}

json state_to_json(const GameState& s) {
  json quests = json::object();
  for (const auto& [id, st] : s.quest_status) quests[id] = to_string(st);
  json spawned = json::array();
  for (const auto& l : s.bench.spawned) spawned.push_back(layer_to_json(l));
  json slots = json::array();
  for (const auto& l : s.bench.slots) slots.push_back(l ? layer_to_json(*l) : json(nullptr));
  json log = json::array();
  for (const auto& e : s.event_log) log.push_back(to_json(e));
  json pending = nullptr;
  if (s.pending_simulation)
    pending = {{"id", s.pending_simulation->id}, {"params", to_json(s.pending_simulation->params)}};
  return {{"scenario_id", s.scenario_id},
          {"seed", s.seed},
          {"quest_status", quests},
          {"spawned_hints", s.spawned_hints},
          {"collected_hints", s.collected_hints},
          {"projected_hint", s.projected_hint ? json(*s.projected_hint) : json(nullptr)},
          {"cassette_played", s.cassette_played},
          {"locks_unlocked", s.locks_unlocked},
          {"door_open", s.door_open},
          {"desk", desk_to_json(s.desk)},
          {"bench",
           {{"spawned", spawned},
            {"slots", slots},
            {"sample", s.bench.sample ? to_json(*s.bench.sample) : json(nullptr)}}},
          {"assigned_wall", s.assigned_wall ? to_json(*s.assigned_wall) : json(nullptr)},
          {"last_gadgets", s.last_gadgets ? to_json(*s.last_gadgets) : json(nullptr)},
          {"pending_simulation", pending},
          {"day_night_cycles_run", s.day_night_cycles_run},
          {"event_log", log}};
}

GameState state_from_json(const json& j, const ContentPack& content) {
  try {
    GameState s;
    s.scenario_id = j.at("scenario_id").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [id, st] : j.at("quest_status").items()) {
      const std::string name = st.get<std::string>();
      auto it = std::find(kStatusNames.begin(), kStatusNames.end(), name);
      if (it == kStatusNames.end()) throw Error(ErrorCode::InvalidInput, "bad quest status '" + name + "'");
      s.quest_status[id] = static_cast<QuestStatus>(it - kStatusNames.begin());
    }
    s.spawned_hints = j.at("spawned_hints").get<std::set<std::string>>();
    s.collected_hints = j.at("collected_hints").get<std::set<std::string>>();
    if (!j.at("projected_hint").is_null()) s.projected_hint = j.at("projected_hint").get<std::string>();
    s.cassette_played = j.at("cassette_played").get<bool>();
    s.locks_unlocked = j.at("locks_unlocked").get<int>();
    s.door_open = j.at("door_open").get<bool>();
    Desk base;
    base.location = j.at("desk").at("location").get<std::string>();
    s.desk = desk_from_json(j.at("desk"), content, base);
    const json& bench = j.at("bench");
    for (const auto& l : bench.at("spawned")) s.bench.spawned.push_back(layer_from_json(l, content));
    for (const auto& l : bench.at("slots")) {
      s.bench.slots.push_back(l.is_null() ? std::nullopt : std::optional<Layer>(layer_from_json(l, content)));
    }
    if (!bench.at("sample").is_null()) s.bench.sample = wall_from_json(bench.at("sample"), content);
    if (!j.at("assigned_wall").is_null()) s.assigned_wall = wall_from_json(j.at("assigned_wall"), content);
    if (!j.at("last_gadgets").is_null()) s.last_gadgets = gadget_report_from_json(j.at("last_gadgets"));
    if (!j.at("pending_simulation").is_null()) {
      const json& p = j.at("pending_simulation");
      s.pending_simulation = PendingSimulation{p.at("id").get<std::uint64_t>(), params_from_json(p.at("params"))};
    }
    s.day_night_cycles_run = j.at("day_night_cycles_run").get<int>();
    for (const auto& e : j.at("event_log")) s.event_log.push_back(event_from_json(e));
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("game state: ") + e.what());
  }
}

json state_view(const GameState& s, const Scenario& scenario) {
  json view = state_to_json(s);
  view.erase("event_log");
  view["last_seq"] = s.last_seq();
  json hints = json::array();
  for (const auto& h : scenario.hints) {
    if (!s.spawned_hints.count(h.id)) continue;
    hints.push_back({{"id", h.id},
                     {"quest_id", h.quest_id},
                     {"text", h.text},
                     {"figure", h.figure_asset_id},
                     {"voiceover", h.voiceover_transcript},
                     {"collected", s.collected_hints.count(h.id) > 0}});
  }
  view["hints"] = hints;
  json quests = json::array();
  for (const auto& q : scenario.quests) {
    quests.push_back({{"id", q.id}, {"title", q.title}, {"kind", to_string(q.kind)},
                      {"status", to_string(s.quest_status.at(q.id))}});
  }
  view["quests"] = quests;
  return view;
}

}  // namespace beyond
