#include "beyond/climate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "beyond/random.hpp"

namespace beyond {
namespace {

constexpr std::array<std::string_view, 8> kOrientationNames{"N", "NE", "E", "SE", "S", "SW", "W", "NW"};

constexpr double kUtilisation = 0.9;
constexpr double kAirHeatCapacity = 0.34;  // Wh/(m3 K)
constexpr double kShadeFactor = 0.3;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(ErrorCode::InvalidInput, "dataset line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s, std::size_t line) {
  const double v = parse_double(s, line);
  if (v != std::floor(v))
    throw Error(ErrorCode::InvalidInput, "dataset line " + std::to_string(line) + ": expected integer '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

std::string_view to_string(Orientation o) { return kOrientationNames[static_cast<std::size_t>(o)]; }

Orientation parse_orientation(std::string_view s) {
  for (std::size_t i = 0; i < kOrientationNames.size(); ++i) {
    if (kOrientationNames[i] == s) return static_cast<Orientation>(i);
  }
  throw Error(ErrorCode::InvalidInput, "unknown orientation '" + std::string(s) + "'");
}

const LocationClimate& ClimateTable::at(std::string_view id) const {
  for (const auto& loc : locations) {
    if (loc.id == id) return loc;
  }
  throw Error(ErrorCode::InvalidInput, "unknown location '" + std::string(id) + "'");
}

bool ClimateTable::contains(std::string_view id) const {
  return std::any_of(locations.begin(), locations.end(), [&](const auto& l) { return l.id == id; });
}

void check_params(const SimulationParams& p, const ClimateTable& climate, const ParamRanges& ranges) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidInput, what); };
  if (!climate.contains(p.location)) fail("unknown location '" + p.location + "'");
  if (p.month < 1 || p.month > 12) fail("month must be in 1..12");
  if (p.hour < 0 || p.hour > 23) fail("hour must be in 0..23");
  if (!ranges.setpoint_heating.contains(p.setpoint_heating)) fail("setpoint_heating out of range");
  if (!ranges.setpoint_cooling.contains(p.setpoint_cooling)) fail("setpoint_cooling out of range");
  if (!ranges.window_u.contains(p.window_u)) fail("window_u out of range");
  if (!ranges.shgc.contains(p.shgc)) fail("shgc out of range");
  if (!(p.wall_u > 0.0) || !std::isfinite(p.wall_u)) fail("wall_u must be positive");
}

double heat_loss_coefficient(const SimulationParams& p, const RoomModel& room) {
  return p.wall_u * room.opaque_wall_area + p.window_u * room.window_area +
         kAirHeatCapacity * room.air_change_rate * room.volume;
}

EnergyResult annual_energy(const SimulationParams& p, const RoomModel& room, const ClimateTable& climate,
                           const PhysicsRules& rules) {
  const LocationClimate& loc = climate.at(p.location);
  if (p.month < 1 || p.month > 12 || p.hour < 0 || p.hour > 23)
    throw Error(ErrorCode::InvalidInput, "month/hour out of range");
  for (double v : {p.wall_u, p.window_u, p.shgc, room.air_change_rate, room.internal_gains}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "negative or non-finite input");
  }
  if (!(room.floor_area > 0.0)) throw Error(ErrorCode::InvalidInput, "floor area must be positive");

  const double h = heat_loss_coefficient(p, room);
  const double f_orient = climate.orientation_factors[static_cast<std::size_t>(p.orientation)];
  const double f_shade = p.shades_on ? kShadeFactor : 1.0;
  const double internal = room.internal_gains * room.floor_area;

  double heating = 0.0;
  double cooling = 0.0;
  for (std::size_t m = 0; m < 12; ++m) {
    const double hours = 24.0 * kDaysInMonth[m];
    const double theta_e = loc.temperature[m];
    const double solar = p.shgc * room.window_area * loc.irradiance[m] * f_orient * f_shade;
    const double gains = (internal + solar) * hours;

    const double loss_heating = h * std::max(0.0, p.setpoint_heating - theta_e) * hours;
    heating += std::max(0.0, loss_heating - kUtilisation * gains);

    if (p.cooling_enabled) {
      // Transmission above the cooling setpoint is an extra load.
      const double gain_transmission = h * std::max(0.0, theta_e - p.setpoint_cooling) * hours;
      const double loss_cooling = h * std::max(0.0, p.setpoint_cooling - theta_e) * hours;
      cooling += std::max(0.0, gains + gain_transmission - kUtilisation * loss_cooling);
    }
  }

  EnergyResult r;
  r.heating = heating / 1000.0 / room.floor_area;
  r.cooling = cooling / 1000.0 / room.floor_area;
  r.total = r.heating + r.cooling;
  r.rating = energy_rating(r.total, rules);
  return r;
}

Dataset sample_dataset(std::size_t n, std::uint64_t seed, const ClimateTable& climate, const RoomModel& room,
                       const ParamRanges& ranges, const PhysicsRules& rules) {
  if (n == 0) throw Error(ErrorCode::InvalidInput, "sample count must be >= 1");
  if (climate.locations.empty()) throw Error(ErrorCode::InvalidInput, "climate table has no locations");
  Rng rng(seed);

  // One stratum permutation per continuous dimension.
  const std::array<Range, 5> dims{ranges.setpoint_heating, ranges.setpoint_cooling, ranges.window_u,
                                  ranges.shgc, ranges.wall_u};
  std::array<std::vector<std::size_t>, 5> strata;
  for (auto& perm : strata) {
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
  }

  Dataset out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 5> v{};
    for (std::size_t d = 0; d < dims.size(); ++d) {
      const double u = (static_cast<double>(strata[d][i]) + rng.uniform()) / static_cast<double>(n);
      v[d] = dims[d].min + u * (dims[d].max - dims[d].min);
    }
    SimulationParams p;
    p.location = climate.locations[rng.below(climate.locations.size())].id;
    p.orientation = static_cast<Orientation>(rng.below(8));
    p.month = static_cast<int>(rng.below(12)) + 1;
    p.hour = static_cast<int>(rng.below(24));
    p.cooling_enabled = rng.below(2) == 1;
    p.shades_on = rng.below(2) == 1;
    p.setpoint_heating = v[0];
    p.setpoint_cooling = v[1];
    p.window_u = v[2];
    p.shgc = v[3];
    p.wall_u = v[4];
    out.push_back({p, annual_energy(p, room, climate, rules)});
  }
  return out;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
    os << (i ? "," : "") << kDatasetColumns[i];
  }
  os << '\n';
  for (const auto& [p, r] : data) {
    os << p.location << ',' << to_string(p.orientation) << ',' << p.month << ',' << p.hour << ','
       << (p.cooling_enabled ? 1 : 0) << ',' << (p.shades_on ? 1 : 0) << ',' << num(p.setpoint_heating) << ','
       << num(p.setpoint_cooling) << ',' << num(p.window_u) << ',' << num(p.shgc) << ',' << num(p.wall_u) << ','
       << num(r.heating) << ',' << num(r.cooling) << ',' << num(r.total) << ',' << to_string(r.rating) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::InvalidInput, "dataset is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::string expected;
    for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
      expected += (i ? "," : "");
      expected += kDatasetColumns[i];
    }
    if (line != expected) throw Error(ErrorCode::InvalidInput, "dataset header mismatch");
  }

  Dataset out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != kDatasetColumns.size())
      throw Error(ErrorCode::InvalidInput, "dataset line " + std::to_string(lineno) + ": expected " +
                                               std::to_string(kDatasetColumns.size()) + " columns");
    Sample s;
    s.params.location = cells[0];
    s.params.orientation = parse_orientation(cells[1]);
    s.params.month = parse_int(cells[2], lineno);
    s.params.hour = parse_int(cells[3], lineno);
    s.params.cooling_enabled = parse_int(cells[4], lineno) != 0;
    s.params.shades_on = parse_int(cells[5], lineno) != 0;
    s.params.setpoint_heating = parse_double(cells[6], lineno);
    s.params.setpoint_cooling = parse_double(cells[7], lineno);
    s.params.window_u = parse_double(cells[8], lineno);
    s.params.shgc = parse_double(cells[9], lineno);
    s.params.wall_u = parse_double(cells[10], lineno);
    s.result.heating = parse_double(cells[11], lineno);
    s.result.cooling = parse_double(cells[12], lineno);
    s.result.total = parse_double(cells[13], lineno);
    s.result.rating = parse_rating(cells[14]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace beyond
