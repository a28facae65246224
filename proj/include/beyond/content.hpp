#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "beyond/climate.hpp"
#include "beyond/physics.hpp"

namespace beyond {

/// Gadget thresholds a wall must meet for the wall quest.
struct GadgetPass {
  bool require_u_ok = true;
  MoldLevel max_mold = MoldLevel::Light;
  Stability max_stability = Stability::MinorCracks;
  Rating max_rating = Rating::C;
};

/// Names of the gadgets that fail `pass` ("u_value", "mold", "stability",
/// "energy"); empty when the report passes.
std::vector<std::string> failing_gadgets(const GadgetReport& report, const GadgetPass& pass);

struct ContentPack {
  std::string version;
  std::vector<Material> materials;
  PhysicsRules rules;
  SurfaceConditions design_conditions;
  RoomModel room;
  ClimateTable climate;
  ParamRanges ranges;
  std::map<std::string, GadgetPass> gadget_pass;
  std::uint64_t hash = 0;  // FNV-1a of the canonical JSON

  const Material& material(std::string_view id) const;
  const GadgetPass& pass_profile(std::string_view name) const;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Parses and validates; throws Error{InvalidContent} with the first problem.
ContentPack parse_content(const nlohmann::json& j);
ContentPack load_content(const std::filesystem::path& path);

/// Full invariant report (every problem, not just the first).
std::vector<std::string> content_problems(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);

// JSON views of physics/climate types shared by the CLI and the service.
nlohmann::json to_json(const GadgetReport& r);
nlohmann::json to_json(const EnergyResult& r);
nlohmann::json to_json(const SimulationParams& p);
nlohmann::json to_json(const WallConstruction& w);
nlohmann::json to_json(const ValidationResult& v);
GadgetReport gadget_report_from_json(const nlohmann::json& j);
EnergyResult energy_from_json(const nlohmann::json& j);
/// Missing fields keep SimulationParams defaults.
SimulationParams params_from_json(const nlohmann::json& j);
/// {"system": "...", "layers": [{"material": id, "thickness": m}, ...]}
WallConstruction wall_from_json(const nlohmann::json& j, const ContentPack& content);

}  // namespace beyond
