#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "beyond/physics.hpp"

namespace beyond {

enum class Orientation { N, NE, E, SE, S, SW, W, NW };

std::string_view to_string(Orientation o);
Orientation parse_orientation(std::string_view s);
inline constexpr std::array<Orientation, 8> kOrientations{
    Orientation::N, Orientation::NE, Orientation::E, Orientation::SE,
    Orientation::S, Orientation::SW, Orientation::W, Orientation::NW};

struct SimulationParams {
  std::string location = "Graz";
  Orientation orientation = Orientation::S;
  int month = 6;
  int hour = 12;
  bool cooling_enabled = true;
  bool shades_on = false;
  double setpoint_heating = 21.0;
  double setpoint_cooling = 25.0;
  double window_u = 1.1;
  double shgc = 0.6;
  double wall_u = 0.21;
};

struct RoomModel {
  double floor_area = 20.0;       // m2
  double volume = 60.0;           // m3
  double opaque_wall_area = 11.0; // m2
  double window_area = 4.0;       // m2
  double air_change_rate = 0.4;   // 1/h
  double internal_gains = 5.0;    // W/m2 floor
};

struct LocationClimate {
  std::string id;
  std::array<double, 12> temperature{};  // monthly mean exterior air, C
  std::array<double, 12> irradiance{};   // monthly mean on a south facade, W/m2
};

struct ClimateTable {
  std::vector<LocationClimate> locations;
  // Indexed by Orientation.
  std::array<double, 8> orientation_factors{0.35, 0.45, 0.7, 0.9, 1.0, 0.9, 0.7, 0.45};

  const LocationClimate& at(std::string_view id) const;
  bool contains(std::string_view id) const;
};

struct Range {
  double min = 0.0;
  double max = 1.0;
  bool contains(double v) const { return v >= min && v <= max; }
};

/// Admissible ranges of the continuous simulation inputs; the sampler
/// stratifies over exactly these.
struct ParamRanges {
  Range setpoint_heating{18.0, 25.0};
  Range setpoint_cooling{25.0, 28.0};
  Range window_u{0.6, 2.8};
  Range shgc{0.1, 0.8};
  Range wall_u{0.1, 4.5};
};

/// Range and domain check of the desk/gadget inputs. Throws InvalidInput.
void check_params(const SimulationParams& p, const ClimateTable& climate, const ParamRanges& ranges);

inline constexpr std::array<int, 12> kDaysInMonth{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

/// Heat-loss coefficient of the room envelope plus ventilation, W/K.
double heat_loss_coefficient(const SimulationParams& p, const RoomModel& room);

/// Monthly quasi-steady heating/cooling balance summed over a year.
EnergyResult annual_energy(const SimulationParams& p, const RoomModel& room, const ClimateTable& climate,
                           const PhysicsRules& rules = default_rules());

struct Sample {
  SimulationParams params;
  EnergyResult result;
};

using Dataset = std::vector<Sample>;

/// Latin-hypercube over the continuous ranges, uniform over the discrete
/// ones, each row labelled by annual_energy. Deterministic in `seed`.
Dataset sample_dataset(std::size_t n, std::uint64_t seed, const ClimateTable& climate, const RoomModel& room,
                       const ParamRanges& ranges, const PhysicsRules& rules = default_rules());

/// Column order of the dataset file.
inline constexpr std::array<std::string_view, 15> kDatasetColumns{
    "location", "orientation",      "month",            "hour",     "cooling_enabled",
    "shades_on", "setpoint_heating", "setpoint_cooling", "window_u", "shgc",
    "wall_u",   "heating",          "cooling",          "total",    "rating"};

void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

}  // namespace beyond
