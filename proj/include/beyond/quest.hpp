#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "beyond/climate.hpp"
#include "beyond/content.hpp"
#include "beyond/physics.hpp"

namespace beyond {

enum class QuestKind { Minor, Major };
enum class QuestStatus { Inactive, Active, Completed };

std::string_view to_string(QuestKind k);
std::string_view to_string(QuestStatus s);

/// Declarative completion predicate over GameState, loaded from the
/// scenario file.
struct Condition {
  enum class Op {
    All,             // {"all": [...]}
    Any,             // {"any": [...]}
    DeskEquals,      // {"desk": "orientation", "equals": "$solution" | literal}
    HintCollected,   // {"hint_collected": id}
    HintProjected,   // {"hint_projected": id | "*"}
    CassettePlayed,  // {"cassette_played": true}
    SampleCreated,   // {"sample_created": true}
    WallPasses,      // {"wall_passes": true}
  };
  Op op = Op::All;
  std::vector<Condition> children;
  std::string key;    // dial name or hint id
  std::string value;  // literal dial value or "$solution"
};

struct QuestDef {
  std::string id;
  std::string title;
  QuestKind kind = QuestKind::Minor;
  std::vector<std::string> prerequisites;
  Condition condition;
};

struct HintDef {
  std::string id;
  std::string quest_id;
  std::string text;
  std::string figure_asset_id;
  std::string voiceover_transcript;
};

/// Desk dial positions. The four puzzle dials come first; the rest are the
/// simulation settings fed to the energy model.
struct Desk {
  Orientation orientation = Orientation::N;
  int month = 1;
  int hour = 0;
  std::string location;
  bool cooling_enabled = true;
  bool shades_on = false;
  double setpoint_heating = 21.0;
  double setpoint_cooling = 25.0;
  double window_u = 1.1;
  double shgc = 0.6;

  bool operator==(const Desk&) const = default;
};

inline constexpr std::array<std::string_view, 10> kDials{
    "orientation", "month",     "hour",     "location", "cooling",
    "shades",      "setpoint_heating", "setpoint_cooling", "window_u", "shgc"};

struct DeskSolution {
  Orientation orientation = Orientation::S;
  int month = 6;
  int hour = 12;
  std::string location;
};

struct Scenario {
  std::string id;
  std::string title;
  bool has_door = true;
  std::vector<QuestDef> quests;
  std::vector<HintDef> hints;
  DeskSolution desk_solution;
  Desk initial_desk;
  std::string gadget_pass_profile = "default";
  std::size_t assembly_slots = 8;
  std::optional<int> timer_minutes;  // informational; the engine never enforces it

  const QuestDef& quest(std::string_view id) const;
  const HintDef* hint(std::string_view id) const;
  std::size_t major_count() const;
};

/// Validates ids, references, prerequisite DAG and the lock count
/// (4 majors with a door, 0 without). Throws InvalidScenario.
Scenario parse_scenario(const nlohmann::json& j, const ContentPack& content);
Scenario load_scenario(const std::filesystem::path& path, const ContentPack& content);

enum class EventKind {
  QuestActivated,
  HintSpawned,
  HintCollected,
  MinorChime,
  MajorFanfare,
  DayNightCycle,
  LockUnlocked,
  SimulationStarted,
  SimulationCompleted,
  DoorOpened,
  ValidationFeedback,
};

std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view s);

struct Event {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::QuestActivated;
  nlohmann::json payload;

  bool operator==(const Event&) const = default;
};

struct Bench {
  std::vector<Layer> spawned;
  std::vector<std::optional<Layer>> slots;  // assembly stack, interior (0) to exterior
  std::optional<WallConstruction> sample;
};

struct PendingSimulation {
  std::uint64_t id = 0;  // seq of its SimulationStarted event
  SimulationParams params;
};

struct GameState {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::map<std::string, QuestStatus> quest_status;
  std::set<std::string> spawned_hints;
  std::set<std::string> collected_hints;
  std::optional<std::string> projected_hint;
  bool cassette_played = false;
  int locks_unlocked = 0;
  bool door_open = false;
  Desk desk;
  Bench bench;
  std::optional<WallConstruction> assigned_wall;
  std::optional<GadgetReport> last_gadgets;
  std::optional<PendingSimulation> pending_simulation;
  std::vector<Event> event_log;
  int day_night_cycles_run = 0;

  std::uint64_t last_seq() const { return event_log.empty() ? 0 : event_log.back().seq; }
};

enum class ActionType {
  CollectHint,
  ProjectHint,
  PlayCassette,
  SetDeskDial,
  SpawnLayer,
  PlaceLayer,
  RemoveLayer,
  CreateWallSample,
  AssignWallSample,
  ReadGadgets,
  TryDoor,
};

std::string_view to_string(ActionType t);

struct Action {
  ActionType type = ActionType::TryDoor;
  std::string id;     // hint id (CollectHint, ProjectHint) or material id (SpawnLayer)
  std::string dial;   // SetDeskDial
  std::string value;  // SetDeskDial
  double thickness = 0.0;
  std::size_t bench_index = 0;
  std::size_t position = 0;
};

/// One action per line: `SetDeskDial orientation S`, `SpawnLayer eps 0.16`,
/// `PlaceLayer 0 2`, ... Throws InvalidInput.
Action parse_action(std::string_view line);
std::string format_action(const Action& a);
/// Skips blank lines and `#` comments.
std::vector<Action> parse_script(std::istream& in);

Action action_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Action& a);

struct ActionResult {
  std::vector<Event> events;
  nlohmann::json output;  // read results (transcript, gadgets, bench index); null otherwise
};

/// The escape-room state machine. Holds references only; scenario and
/// content must outlive it. Every operation either throws Error before
/// touching the state or applies completely.
class Engine {
 public:
  Engine(const Scenario& scenario, const ContentPack& content);

  GameState new_session(std::uint64_t seed) const;
  ActionResult apply(GameState& state, const Action& action) const;
  ActionResult complete_simulation(GameState& state, const GadgetReport& report) const;
  /// Transcript of the projected hint; throws NotProjected.
  std::string replay_hint(const GameState& state, std::string_view hint_id) const;

  bool holds(const GameState& state, const Condition& c) const;

  const Scenario& scenario() const { return scenario_; }
  const ContentPack& content() const { return content_; }
  const GadgetPass& gadget_pass() const { return pass_; }

 private:
  void settle(GameState& state, std::vector<Event>& out) const;
  std::string dial_value(const Desk& desk, std::string_view dial) const;
  std::string solution_value(std::string_view dial) const;

  const Scenario& scenario_;
  const ContentPack& content_;
  const GadgetPass& pass_;
};

/// Canonical text of a dial setting; validates and normalises `value`.
/// Throws InvalidInput.
std::string normalise_dial(std::string_view dial, std::string_view value, const ContentPack& content);

SimulationParams desk_params(const Desk& desk, double wall_u);

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

/// Full state, loss-free; inverse of state_from_json.
nlohmann::json state_to_json(const GameState& s);
GameState state_from_json(const nlohmann::json& j, const ContentPack& content);

/// Player-facing view: no event log, hint definitions only for spawned hints.
nlohmann::json state_view(const GameState& s, const Scenario& scenario);

}  // namespace beyond
