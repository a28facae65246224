#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "beyond/error.hpp"

namespace beyond {

enum class Category { InteriorFinish, Structural, Insulation, Membrane, ExteriorFinish };
enum class StructuralSystem { Masonry, ReinforcedConcrete, Timber };
enum class MoldLevel { None, Light, Moderate, Heavy };
enum class CostTier { Cheap, Medium, Expensive };
enum class Stability { NoCracks, MinorCracks, SevereCracks, Collapse };
enum class Rating { APlus, A, B, C, D, E, F, G, H };

std::string_view to_string(Category c);
std::string_view to_string(StructuralSystem s);
std::string_view to_string(MoldLevel m);
std::string_view to_string(CostTier t);
std::string_view to_string(Stability s);
std::string_view to_string(Rating r);

// Inverse lookups; throw Error{InvalidInput} on unknown names.
Category parse_category(std::string_view s);
StructuralSystem parse_system(std::string_view s);
MoldLevel parse_mold(std::string_view s);
Stability parse_stability(std::string_view s);
Rating parse_rating(std::string_view s);
CostTier parse_cost_tier(std::string_view s);

struct Material {
  std::string id;
  std::string name;
  Category category = Category::Structural;
  double conductivity = 1.0;      // W/(m K)
  double vapor_resistance = 1.0;  // mu, dimensionless
  double unit_cost = 0.0;         // EUR/m^3
  std::optional<StructuralSystem> structural_system;
  double min_thickness = 0.0;  // m
  double max_thickness = 1.0;  // m
};

/// Throws InvalidContent when a catalog entry breaks its invariants.
void check_material(const Material& m);

struct Layer {
  Material material;
  double thickness = 0.0;  // m
};

/// Layers are ordered interior to exterior.
struct WallConstruction {
  StructuralSystem system = StructuralSystem::Masonry;
  std::vector<Layer> layers;
};

struct SurfaceConditions {
  double theta_i = 20.0;
  double rh_i = 50.0;
  double theta_e = -10.0;
  double rh_e = 80.0;
  double r_si = 0.13;
  double r_se = 0.04;
};

struct EnergyResult {
  double heating = 0.0;  // kWh/(m2 a)
  double cooling = 0.0;
  double total = 0.0;
  Rating rating = Rating::APlus;
};

struct GadgetReport {
  double u_value = 0.0;
  bool u_value_ok = false;
  MoldLevel mold = MoldLevel::None;
  double cost_per_m2 = 0.0;
  CostTier cost_tier = CostTier::Cheap;
  Stability stability = Stability::NoCracks;
  std::optional<EnergyResult> energy;
};

struct RatingBand {
  Rating rating;
  std::optional<double> upper;  // inclusive; nullopt = unbounded
};

/// Tunable game balance. Defaults are the shipped values; a content pack
/// may override any of them.
struct PhysicsRules {
  double labor_cost_per_layer = 15.0;
  double cost_cheap_max = 180.0;
  double cost_medium_max = 320.0;
  double u_ok_min = 0.12;
  double u_ok_max = 0.35;
  double mold_light_below = 0.71;
  double mold_moderate_below = 0.65;
  double mold_heavy_below = 0.60;
  // Which interfaces count as interstitial condensation for Moderate:
  // WarmSide stops at the room-side face of the first insulation layer,
  // AllInterfaces is the plain Glaser reading.
  enum class Interstitial { WarmSide, AllInterfaces };
  Interstitial mold_interstitial = Interstitial::WarmSide;
  // Indexed by StructuralSystem.
  std::array<double, 3> min_structural_thickness{0.25, 0.18, 0.12};
  double stability_minor_from = 0.8;
  double stability_severe_from = 0.6;
  std::vector<RatingBand> rating_bands{
      {Rating::APlus, 15.0}, {Rating::A, 25.0},  {Rating::B, 50.0},
      {Rating::C, 75.0},     {Rating::D, 100.0}, {Rating::E, 150.0},
      {Rating::F, 200.0},    {Rating::G, 250.0}, {Rating::H, std::nullopt}};
  std::array<std::vector<Category>, 3> canonical_orders{
      std::vector<Category>{Category::InteriorFinish, Category::Structural,
                            Category::Insulation, Category::ExteriorFinish},
      std::vector<Category>{Category::InteriorFinish, Category::Structural,
                            Category::Insulation, Category::ExteriorFinish},
      std::vector<Category>{Category::InteriorFinish, Category::Membrane,
                            Category::Structural, Category::Insulation,
                            Category::Membrane, Category::ExteriorFinish}};
};

const PhysicsRules& default_rules();

/// Structural invariants: non-empty, positive thicknesses, exactly one
/// structural layer whose system matches the wall's.
void check_wall(const WallConstruction& wall);

/// d_i / lambda_i for every layer, interior to exterior.
Eigen::ArrayXd layer_resistances(const WallConstruction& wall);
/// mu_i * d_i for every layer.
Eigen::ArrayXd layer_vapor_thicknesses(const WallConstruction& wall);

double total_resistance(const WallConstruction& wall, const SurfaceConditions& surf);
double compute_u_value(const WallConstruction& wall, const SurfaceConditions& surf = {});

/// Saturation vapour pressure in Pa (Magnus form, same coefficients as dew_point).
double saturation_pressure(double theta);
double dew_point(double theta, double rh);

/// Interface temperatures from the interior surface to the exterior
/// surface; size = layers + 1.
Eigen::VectorXd temperature_profile(const WallConstruction& wall, const SurfaceConditions& surf);

/// Linear vapour pressure at the same interfaces as temperature_profile.
Eigen::VectorXd vapor_pressure_profile(const WallConstruction& wall, const SurfaceConditions& surf);

struct CondensationCheck {
  double f_rsi = 1.0;
  std::vector<bool> condensing;  // per interface
  bool any() const;
};

CondensationCheck glaser_check(const WallConstruction& wall, const SurfaceConditions& surf);

MoldLevel mold_level(const WallConstruction& wall, const SurfaceConditions& surf,
                     const PhysicsRules& rules = default_rules());

struct CostResult {
  double per_m2 = 0.0;
  CostTier tier = CostTier::Cheap;
};

CostTier cost_tier(double per_m2, const PhysicsRules& rules = default_rules());
CostResult wall_cost(const WallConstruction& wall, const PhysicsRules& rules = default_rules());

Stability stability_level(const WallConstruction& wall, const PhysicsRules& rules = default_rules());

bool u_value_ok(double u, const PhysicsRules& rules = default_rules());

Rating energy_rating(double q, const PhysicsRules& rules = default_rules());

enum class ViolationKind {
  Missing,
  Extra,
  Order,
  ThicknessBelowMin,
  ThicknessAboveMax,
  SystemMismatch,
};

std::string_view to_string(ViolationKind k);

struct Violation {
  std::size_t position = 0;  // layer index, or insertion index for Missing
  ViolationKind kind = ViolationKind::Order;
  std::string message;
};

struct ValidationResult {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationResult validate_layer_order(const WallConstruction& wall,
                                      const PhysicsRules& rules = default_rules());

/// The four static gadgets; `energy` is left empty.
GadgetReport wall_gadgets(const WallConstruction& wall, const SurfaceConditions& surf,
                          const PhysicsRules& rules = default_rules());

}  // namespace beyond
