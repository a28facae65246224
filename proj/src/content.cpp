#include "beyond/content.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace beyond {

using nlohmann::json;

namespace {

constexpr std::string_view kSchema = "beyond.content/1";

// Collects problems instead of stopping at the first one.
struct Problems {
  std::vector<std::string> items;

  template <typename F>
  void guard(const std::string& where, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      items.push_back(where + ": " + e.what());
    } catch (const json::exception& e) {
      items.push_back(where + ": " + e.what());
    }
  }
  void add(std::string msg) { items.push_back(std::move(msg)); }
};

double num(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw Error(ErrorCode::InvalidContent, std::string("missing number '") + key + "'");
  return j.at(key).get<double>();
}

Range range_of(const json& j, const char* key) {
  const json& r = j.at(key);
  if (!r.is_array() || r.size() != 2) throw Error(ErrorCode::InvalidContent, std::string(key) + " must be [min, max]");
  Range out{r[0].get<double>(), r[1].get<double>()};
  if (!(out.min < out.max)) throw Error(ErrorCode::InvalidContent, std::string(key) + " needs min < max");
  return out;
}

Material material_of(const json& m) {
  Material out;
  out.id = m.at("id").get<std::string>();
  out.name = m.value("name", out.id);
  out.category = parse_category(m.at("category").get<std::string>());
  out.conductivity = num(m, "conductivity");
  out.vapor_resistance = num(m, "vapor_resistance");
  out.unit_cost = num(m, "unit_cost");
  if (m.contains("structural_system") && !m.at("structural_system").is_null())
    out.structural_system = parse_system(m.at("structural_system").get<std::string>());
  out.min_thickness = num(m, "min_thickness");
  out.max_thickness = num(m, "max_thickness");
  check_material(out);
  return out;
}

std::array<double, 12> monthly(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 12)
    throw Error(ErrorCode::InvalidContent, std::string(key) + " needs 12 monthly values");
  std::array<double, 12> out{};
  for (std::size_t i = 0; i < 12; ++i) out[i] = a[i].get<double>();
  return out;
}

ContentPack parse_into(const json& j, Problems& problems) {
  ContentPack pack;
  if (!j.is_object()) {
    problems.add("content pack must be a JSON object");
    return pack;
  }
  problems.guard("schema", [&] {
    if (j.at("schema").get<std::string>() != kSchema)
      throw Error(ErrorCode::InvalidContent, "expected '" + std::string(kSchema) + "'");
  });
  problems.guard("version", [&] { pack.version = j.at("version").get<std::string>(); });

  problems.guard("materials", [&] {
    const json& mats = j.at("materials");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      problems.guard("materials[" + std::to_string(i) + "]", [&] {
        Material m = material_of(mats[i]);
        if (!ids.insert(m.id).second) throw Error(ErrorCode::InvalidContent, "duplicate id '" + m.id + "'");
        pack.materials.push_back(std::move(m));
      });
    }
  });

  PhysicsRules& rules = pack.rules;
  problems.guard("canonical_orders", [&] {
    const json& orders = j.at("canonical_orders");
    for (StructuralSystem s : {StructuralSystem::Masonry, StructuralSystem::ReinforcedConcrete, StructuralSystem::Timber}) {
      const auto name = std::string(to_string(s));
      problems.guard("canonical_orders." + name, [&] {
        std::vector<Category> order;
        for (const auto& c : orders.at(name)) order.push_back(parse_category(c.get<std::string>()));
        if (std::count(order.begin(), order.end(), Category::Structural) != 1)
          throw Error(ErrorCode::InvalidContent, "needs exactly one Structural entry");
        rules.canonical_orders[static_cast<std::size_t>(s)] = std::move(order);
      });
    }
  });

  problems.guard("rules", [&] {
    const json& r = j.at("rules");
    rules.labor_cost_per_layer = num(r, "labor_cost_per_layer");
    const json& tiers = r.at("cost_tiers");
    rules.cost_cheap_max = num(tiers, "cheap_max");
    rules.cost_medium_max = num(tiers, "medium_max");
    if (!(rules.cost_cheap_max < rules.cost_medium_max))
      throw Error(ErrorCode::InvalidContent, "cost tiers need cheap_max < medium_max");
    const json& u = r.at("u_value_range");
    rules.u_ok_min = num(u, "min");
    rules.u_ok_max = num(u, "max");
    if (!(0.0 < rules.u_ok_min && rules.u_ok_min < rules.u_ok_max))
      throw Error(ErrorCode::InvalidContent, "u_value_range needs 0 < min < max");
    const json& mold = r.at("mold_f_rsi");
    rules.mold_light_below = num(mold, "light_below");
    rules.mold_moderate_below = num(mold, "moderate_below");
    rules.mold_heavy_below = num(mold, "heavy_below");
    if (!(rules.mold_heavy_below < rules.mold_moderate_below && rules.mold_moderate_below < rules.mold_light_below &&
          rules.mold_light_below < 1.0))
      throw Error(ErrorCode::InvalidContent, "mold thresholds need heavy < moderate < light < 1");
    if (mold.contains("interstitial")) {
      const std::string scope = mold.at("interstitial").get<std::string>();
      if (scope == "warm_side") {
        rules.mold_interstitial = PhysicsRules::Interstitial::WarmSide;
      } else if (scope == "all") {
        rules.mold_interstitial = PhysicsRules::Interstitial::AllInterfaces;
      } else {
        throw Error(ErrorCode::InvalidContent, "mold_f_rsi.interstitial must be warm_side or all");
      }
    }
    const json& st = r.at("stability");
    for (StructuralSystem s : {StructuralSystem::Masonry, StructuralSystem::ReinforcedConcrete, StructuralSystem::Timber}) {
      const double t = st.at("min_thickness").at(std::string(to_string(s))).get<double>();
      if (!(t > 0.0)) throw Error(ErrorCode::InvalidContent, "stability minimum thickness must be > 0");
      rules.min_structural_thickness[static_cast<std::size_t>(s)] = t;
    }
    rules.stability_minor_from = num(st, "minor_from");
    rules.stability_severe_from = num(st, "severe_from");
    if (!(0.0 < rules.stability_severe_from && rules.stability_severe_from < rules.stability_minor_from &&
          rules.stability_minor_from < 1.0))
      throw Error(ErrorCode::InvalidContent, "stability ratios need 0 < severe_from < minor_from < 1");

    std::vector<RatingBand> bands;
    for (const auto& b : r.at("rating_bands")) {
      RatingBand band{parse_rating(b.at("rating").get<std::string>()), std::nullopt};
      if (!b.at("max").is_null()) band.upper = b.at("max").get<double>();
      bands.push_back(band);
    }
    if (bands.empty() || bands.back().upper) throw Error(ErrorCode::InvalidContent, "last rating band must be unbounded");
    for (std::size_t i = 0; i < bands.size(); ++i) {
      if (static_cast<std::size_t>(bands[i].rating) != i)
        throw Error(ErrorCode::InvalidContent, "rating bands must list A+..H in order");
      if (i > 0 && bands[i - 1].upper && bands[i].upper && !(*bands[i - 1].upper < *bands[i].upper))
        throw Error(ErrorCode::InvalidContent, "rating band bounds must increase");
      if (i + 1 < bands.size() && !bands[i].upper)
        throw Error(ErrorCode::InvalidContent, "only the last rating band may be unbounded");
    }
    rules.rating_bands = std::move(bands);
  });

  problems.guard("design_conditions", [&] {
    const json& d = j.at("design_conditions");
    SurfaceConditions& s = pack.design_conditions;
    s.theta_i = num(d, "theta_i");
    s.rh_i = num(d, "rh_i");
    s.theta_e = num(d, "theta_e");
    s.rh_e = num(d, "rh_e");
    s.r_si = num(d, "r_si");
    s.r_se = num(d, "r_se");
    if (!(s.rh_i > 0 && s.rh_i <= 100 && s.rh_e > 0 && s.rh_e <= 100))
      throw Error(ErrorCode::InvalidContent, "relative humidity must be in (0, 100]");
    if (!(s.r_si > 0 && s.r_se > 0)) throw Error(ErrorCode::InvalidContent, "surface resistances must be > 0");
  });

  problems.guard("room", [&] {
    const json& r = j.at("room");
    RoomModel& room = pack.room;
    room.floor_area = num(r, "floor_area");
    room.volume = num(r, "volume");
    room.opaque_wall_area = num(r, "opaque_wall_area");
    room.window_area = num(r, "window_area");
    room.air_change_rate = num(r, "air_change_rate");
    room.internal_gains = num(r, "internal_gains");
    for (double v : {room.floor_area, room.volume, room.opaque_wall_area, room.window_area, room.air_change_rate,
                     room.internal_gains}) {
      if (!(v > 0.0)) throw Error(ErrorCode::InvalidContent, "room values must be positive");
    }
  });

  problems.guard("climate", [&] {
    const json& c = j.at("climate");
    const json& f = c.at("orientation_factors");
    for (Orientation o : kOrientations) {
      const double v = f.at(std::string(to_string(o))).get<double>();
      if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidContent, "orientation factors must be in (0, 1]");
      pack.climate.orientation_factors[static_cast<std::size_t>(o)] = v;
    }
    for (const auto& l : c.at("locations")) {
      LocationClimate loc;
      loc.id = l.at("id").get<std::string>();
      loc.temperature = monthly(l, "temperature");
      loc.irradiance = monthly(l, "irradiance");
      for (double v : loc.irradiance) {
        if (!(v >= 0.0)) throw Error(ErrorCode::InvalidContent, "irradiance must be >= 0 (" + loc.id + ")");
      }
      if (pack.climate.contains(loc.id)) throw Error(ErrorCode::InvalidContent, "duplicate location '" + loc.id + "'");
      pack.climate.locations.push_back(std::move(loc));
    }
    if (pack.climate.locations.size() < 3) throw Error(ErrorCode::InvalidContent, "need at least 3 locations");
  });

  problems.guard("sampling_ranges", [&] {
    const json& r = j.at("sampling_ranges");
    pack.ranges.setpoint_heating = range_of(r, "setpoint_heating");
    pack.ranges.setpoint_cooling = range_of(r, "setpoint_cooling");
    pack.ranges.window_u = range_of(r, "window_u");
    pack.ranges.shgc = range_of(r, "shgc");
    pack.ranges.wall_u = range_of(r, "wall_u");
    if (!(pack.ranges.wall_u.min > 0.0)) throw Error(ErrorCode::InvalidContent, "wall_u range must be positive");
  });

  problems.guard("gadget_pass", [&] {
    for (const auto& [name, p] : j.at("gadget_pass").items()) {
      GadgetPass pass;
      pass.require_u_ok = p.at("require_u_ok").get<bool>();
      pass.max_mold = parse_mold(p.at("max_mold").get<std::string>());
      pass.max_stability = parse_stability(p.at("max_stability").get<std::string>());
      pass.max_rating = parse_rating(p.at("max_rating").get<std::string>());
      pack.gadget_pass.emplace(name, pass);
    }
    if (pack.gadget_pass.empty()) throw Error(ErrorCode::InvalidContent, "at least one profile required");
  });

  // Catalog coverage.
  for (Category c : {Category::InteriorFinish, Category::Structural, Category::Insulation, Category::Membrane,
                     Category::ExteriorFinish}) {
    if (std::none_of(pack.materials.begin(), pack.materials.end(), [&](const Material& m) { return m.category == c; }))
      problems.add("materials: no " + std::string(to_string(c)) + " material");
  }
  for (StructuralSystem s : {StructuralSystem::Masonry, StructuralSystem::ReinforcedConcrete, StructuralSystem::Timber}) {
    if (std::none_of(pack.materials.begin(), pack.materials.end(),
                     [&](const Material& m) { return m.structural_system == s; }))
      problems.add("materials: no structural material for " + std::string(to_string(s)));
  }

  pack.hash = fnv1a(j.dump());
  return pack;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> failing_gadgets(const GadgetReport& report, const GadgetPass& pass) {
  std::vector<std::string> out;
  if (pass.require_u_ok && !report.u_value_ok) out.emplace_back("u_value");
  if (report.mold > pass.max_mold) out.emplace_back("mold");
  if (report.stability > pass.max_stability) out.emplace_back("stability");
  if (!report.energy || report.energy->rating > pass.max_rating) out.emplace_back("energy");
  return out;
}

const Material& ContentPack::material(std::string_view id) const {
  for (const auto& m : materials) {
    if (m.id == id) return m;
  }
  throw Error(ErrorCode::UnknownEntity, "unknown material '" + std::string(id) + "'");
}

const GadgetPass& ContentPack::pass_profile(std::string_view name) const {
  auto it = gadget_pass.find(std::string(name));
  if (it == gadget_pass.end())
    throw Error(ErrorCode::UnknownEntity, "unknown gadget pass profile '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> content_problems(const json& j) {
  Problems problems;
  parse_into(j, problems);
  return problems.items;
}

ContentPack parse_content(const json& j) {
  Problems problems;
  ContentPack pack = parse_into(j, problems);
  if (!problems.items.empty()) throw Error(ErrorCode::InvalidContent, problems.items.front());
  return pack;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, path.string() + ": " + e.what());
  }
}

ContentPack load_content(const std::filesystem::path& path) { return parse_content(read_json_file(path)); }

json to_json(const EnergyResult& r) {
  return {{"heating", r.heating}, {"cooling", r.cooling}, {"total", r.total}, {"rating", to_string(r.rating)}};
}

json to_json(const GadgetReport& r) {
  json j{{"u_value", r.u_value},
         {"u_value_ok", r.u_value_ok},
         {"mold", to_string(r.mold)},
         {"cost_per_m2", r.cost_per_m2},
         {"cost_tier", to_string(r.cost_tier)},
         {"stability", to_string(r.stability)},
         {"energy", nullptr}};
  if (r.energy) j["energy"] = to_json(*r.energy);
  return j;
}

json to_json(const SimulationParams& p) {
  return {{"location", p.location},
          {"orientation", to_string(p.orientation)},
          {"month", p.month},
          {"hour", p.hour},
          {"cooling_enabled", p.cooling_enabled},
          {"shades_on", p.shades_on},
          {"setpoint_heating", p.setpoint_heating},
          {"setpoint_cooling", p.setpoint_cooling},
          {"window_u", p.window_u},
          {"shgc", p.shgc},
          {"wall_u", p.wall_u}};
}

json to_json(const WallConstruction& w) {
  json layers = json::array();
  for (const auto& l : w.layers) layers.push_back({{"material", l.material.id}, {"thickness", l.thickness}});
  return {{"system", to_string(w.system)}, {"layers", std::move(layers)}};
}

json to_json(const ValidationResult& v) {
  json out = json::array();
  for (const auto& x : v.violations)
    out.push_back({{"position", x.position}, {"kind", to_string(x.kind)}, {"message", x.message}});
  return out;
}

EnergyResult energy_from_json(const json& j) {
  EnergyResult r;
  r.heating = j.at("heating").get<double>();
  r.cooling = j.at("cooling").get<double>();
  r.total = j.at("total").get<double>();
  r.rating = parse_rating(j.at("rating").get<std::string>());
  return r;
}

GadgetReport gadget_report_from_json(const json& j) {
  GadgetReport r;
  r.u_value = j.at("u_value").get<double>();
  r.u_value_ok = j.at("u_value_ok").get<bool>();
  r.mold = parse_mold(j.at("mold").get<std::string>());
  r.cost_per_m2 = j.at("cost_per_m2").get<double>();
  r.cost_tier = parse_cost_tier(j.at("cost_tier").get<std::string>());
  r.stability = parse_stability(j.at("stability").get<std::string>());
  if (j.contains("energy") && !j.at("energy").is_null()) r.energy = energy_from_json(j.at("energy"));
  return r;
}

SimulationParams params_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "simulation params must be an object");
  try {
    SimulationParams p;
    if (j.contains("location")) p.location = j.at("location").get<std::string>();
    if (j.contains("orientation")) p.orientation = parse_orientation(j.at("orientation").get<std::string>());
    p.month = j.value("month", p.month);
    p.hour = j.value("hour", p.hour);
    p.cooling_enabled = j.value("cooling_enabled", p.cooling_enabled);
    p.shades_on = j.value("shades_on", p.shades_on);
    p.setpoint_heating = j.value("setpoint_heating", p.setpoint_heating);
    p.setpoint_cooling = j.value("setpoint_cooling", p.setpoint_cooling);
    p.window_u = j.value("window_u", p.window_u);
    p.shgc = j.value("shgc", p.shgc);
    p.wall_u = j.value("wall_u", p.wall_u);
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("simulation params: ") + e.what());
  }
}

WallConstruction wall_from_json(const json& j, const ContentPack& content) {
  try {
    WallConstruction w;
    w.system = parse_system(j.at("system").get<std::string>());
    for (const auto& l : j.at("layers")) {
      w.layers.push_back({content.material(l.at("material").get<std::string>()), l.at("thickness").get<double>()});
    }
    return w;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("wall: ") + e.what());
  }
}

}  // namespace beyond
