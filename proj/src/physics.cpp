#include "beyond/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace beyond {
namespace {

constexpr std::array<std::string_view, 5> kCategoryNames{
    "InteriorFinish", "Structural", "Insulation", "Membrane", "ExteriorFinish"};
constexpr std::array<std::string_view, 3> kSystemNames{"Masonry", "ReinforcedConcrete", "Timber"};
constexpr std::array<std::string_view, 4> kMoldNames{"None", "Light", "Moderate", "Heavy"};
constexpr std::array<std::string_view, 3> kCostNames{"Cheap", "Medium", "Expensive"};
constexpr std::array<std::string_view, 4> kStabilityNames{"NoCracks", "MinorCracks",
                                                          "SevereCracks", "Collapse"};
constexpr std::array<std::string_view, 9> kRatingNames{"A+", "A", "B", "C", "D",
                                                       "E",  "F", "G", "H"};
constexpr std::array<std::string_view, 6> kViolationNames{
    "Missing", "Extra", "Order", "ThicknessBelowMin", "ThicknessAboveMax", "SystemMismatch"};

template <typename E, std::size_t N>
E parse_enum(const std::array<std::string_view, N>& names, std::string_view s,
             std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw Error(ErrorCode::InvalidInput,
              "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Magnus coefficients over water.
constexpr double kMagnusA = 17.62;
constexpr double kMagnusB = 243.12;
constexpr double kMagnusP0 = 611.2;

}  // namespace

std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(StructuralSystem s) { return kSystemNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(MoldLevel m) { return kMoldNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(CostTier t) { return kCostNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(Stability s) { return kStabilityNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(Rating r) { return kRatingNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(ViolationKind k) { return kViolationNames[static_cast<std::size_t>(k)]; }

Category parse_category(std::string_view s) { return parse_enum<Category>(kCategoryNames, s, "category"); }
StructuralSystem parse_system(std::string_view s) {
  return parse_enum<StructuralSystem>(kSystemNames, s, "structural system");
}
MoldLevel parse_mold(std::string_view s) { return parse_enum<MoldLevel>(kMoldNames, s, "mold level"); }
Stability parse_stability(std::string_view s) {
  return parse_enum<Stability>(kStabilityNames, s, "stability level");
}
Rating parse_rating(std::string_view s) { return parse_enum<Rating>(kRatingNames, s, "rating"); }
CostTier parse_cost_tier(std::string_view s) { return parse_enum<CostTier>(kCostNames, s, "cost tier"); }

const PhysicsRules& default_rules() {
  static const PhysicsRules rules{};
  return rules;
}

void check_material(const Material& m) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidContent, "material '" + m.id + "': " + why);
  };
  if (m.id.empty()) fail("empty id");
  if (!(m.conductivity > 0.0)) fail("conductivity must be > 0");
  if (!(m.vapor_resistance >= 1.0)) fail("vapor resistance must be >= 1");
  if (!(m.unit_cost >= 0.0)) fail("unit cost must be >= 0");
  if (!(m.min_thickness > 0.0) || !(m.min_thickness <= m.max_thickness))
    fail("thickness range must satisfy 0 < min <= max");
  if ((m.category == Category::Structural) != m.structural_system.has_value())
    fail("structural_system must be set exactly for Structural materials");
}

void check_wall(const WallConstruction& wall) {
  if (wall.layers.empty()) throw Error(ErrorCode::InvalidWall, "wall has no layers");
  int structural = 0;
  for (const auto& layer : wall.layers) {
    if (!(layer.thickness > 0.0))
      throw Error(ErrorCode::InvalidWall, "layer '" + layer.material.id + "' has non-positive thickness");
    if (!(layer.material.conductivity > 0.0))
      throw Error(ErrorCode::InvalidWall, "layer '" + layer.material.id + "' has non-positive conductivity");
    if (layer.material.category == Category::Structural) {
      ++structural;
      if (layer.material.structural_system != wall.system)
        throw Error(ErrorCode::InvalidWall, "structural layer '" + layer.material.id +
                                                "' does not match wall system " +
                                                std::string(to_string(wall.system)));
    }
  }
  if (structural != 1)
    throw Error(ErrorCode::InvalidWall,
                "wall needs exactly one structural layer, found " + std::to_string(structural));
}

namespace {

void require_layers(const WallConstruction& wall) {
  if (wall.layers.empty()) throw Error(ErrorCode::InvalidWall, "wall has no layers");
  for (const auto& layer : wall.layers) {
    if (!(layer.thickness > 0.0) || !(layer.material.conductivity > 0.0))
      throw Error(ErrorCode::InvalidWall,
                  "layer '" + layer.material.id + "' needs positive thickness and conductivity");
  }
}

void require_surface(const SurfaceConditions& s) {
  if (!(s.r_si > 0.0) || !(s.r_se > 0.0))
    throw Error(ErrorCode::InvalidInput, "surface resistances must be positive");
  if (!(s.rh_i > 0.0 && s.rh_i <= 100.0) || !(s.rh_e > 0.0 && s.rh_e <= 100.0))
    throw Error(ErrorCode::InvalidInput, "relative humidity must be in (0, 100]");
}

std::size_t structural_index(const WallConstruction& wall) {
  for (std::size_t i = 0; i < wall.layers.size(); ++i) {
    if (wall.layers[i].material.category == Category::Structural) return i;
  }
  throw Error(ErrorCode::InvalidWall, "wall has no structural layer");
}

}  // namespace

Eigen::ArrayXd layer_resistances(const WallConstruction& wall) {
  Eigen::ArrayXd r(static_cast<Eigen::Index>(wall.layers.size()));
  for (std::size_t i = 0; i < wall.layers.size(); ++i) {
    r(static_cast<Eigen::Index>(i)) = wall.layers[i].thickness / wall.layers[i].material.conductivity;
  }
  return r;
}

Eigen::ArrayXd layer_vapor_thicknesses(const WallConstruction& wall) {
  Eigen::ArrayXd sd(static_cast<Eigen::Index>(wall.layers.size()));
  for (std::size_t i = 0; i < wall.layers.size(); ++i) {
    sd(static_cast<Eigen::Index>(i)) = wall.layers[i].material.vapor_resistance * wall.layers[i].thickness;
  }
  return sd;
}

double total_resistance(const WallConstruction& wall, const SurfaceConditions& surf) {
  require_layers(wall);
  require_surface(surf);
  return surf.r_si + layer_resistances(wall).sum() + surf.r_se;
}

double compute_u_value(const WallConstruction& wall, const SurfaceConditions& surf) {
  return 1.0 / total_resistance(wall, surf);
}

double saturation_pressure(double theta) {
  return kMagnusP0 * std::exp(kMagnusA * theta / (kMagnusB + theta));
}

double dew_point(double theta, double rh) {
  if (!(theta >= -40.0 && theta <= 60.0))
    throw Error(ErrorCode::InvalidInput, "temperature outside [-40, 60] C");
  if (!(rh >= 1.0 && rh <= 100.0))
    throw Error(ErrorCode::InvalidInput, "relative humidity outside [1, 100] %");
  const double gamma = std::log(rh / 100.0) + kMagnusA * theta / (kMagnusB + theta);
  return kMagnusB * gamma / (kMagnusA - gamma);
}

namespace {

// Cumulative share of `parts` at each interface, 0 at the interior surface
// and 1 at the exterior surface, offset by `lead` and scaled by `total`.
Eigen::VectorXd interface_fractions(const Eigen::ArrayXd& parts, double lead, double total) {
  Eigen::VectorXd out(parts.size() + 1);
  double acc = lead;
  out(0) = acc / total;
  for (Eigen::Index i = 0; i < parts.size(); ++i) {
    acc += parts(i);
    out(i + 1) = acc / total;
  }
  return out;
}

}  // namespace

Eigen::VectorXd temperature_profile(const WallConstruction& wall, const SurfaceConditions& surf) {
  const double r_total = total_resistance(wall, surf);
  const Eigen::VectorXd frac = interface_fractions(layer_resistances(wall), surf.r_si, r_total);
  return (surf.theta_i - (surf.theta_i - surf.theta_e) * frac.array()).matrix();
}

Eigen::VectorXd vapor_pressure_profile(const WallConstruction& wall, const SurfaceConditions& surf) {
  require_layers(wall);
  require_surface(surf);
  const double p_i = surf.rh_i / 100.0 * saturation_pressure(surf.theta_i);
  const double p_e = surf.rh_e / 100.0 * saturation_pressure(surf.theta_e);
  const Eigen::ArrayXd sd = layer_vapor_thicknesses(wall);
  const double sd_total = sd.sum();
  const Eigen::VectorXd frac = interface_fractions(sd, 0.0, sd_total);
  return (p_i - (p_i - p_e) * frac.array()).matrix();
}

bool CondensationCheck::any() const {
  return std::any_of(condensing.begin(), condensing.end(), [](bool b) { return b; });
}

CondensationCheck glaser_check(const WallConstruction& wall, const SurfaceConditions& surf) {
  const Eigen::VectorXd theta = temperature_profile(wall, surf);
  const Eigen::VectorXd p = vapor_pressure_profile(wall, surf);
  CondensationCheck out;
  out.f_rsi = surf.theta_i == surf.theta_e
                  ? 1.0
                  : (theta(0) - surf.theta_e) / (surf.theta_i - surf.theta_e);
  out.condensing.resize(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    out.condensing[static_cast<std::size_t>(k)] = p(k) > saturation_pressure(theta(k));
  }
  return out;
}

MoldLevel mold_level(const WallConstruction& wall, const SurfaceConditions& surf,
                     const PhysicsRules& rules) {
  require_layers(wall);
  const std::size_t structural = structural_index(wall);
  if (surf.theta_i == surf.theta_e) return MoldLevel::None;

  const CondensationCheck check = glaser_check(wall, surf);
  if (check.f_rsi < rules.mold_heavy_below || check.condensing[structural]) return MoldLevel::Heavy;
  // Condensation on the cold side of the insulation would make extra
  // insulation look harmful; by default only the warm side counts.
  std::size_t last = check.condensing.size();
  if (rules.mold_interstitial == PhysicsRules::Interstitial::WarmSide) {
    for (std::size_t i = 0; i < wall.layers.size(); ++i) {
      if (wall.layers[i].material.category == Category::Insulation) {
        last = i + 1;
        break;
      }
    }
  }
  const bool interstitial =
      std::any_of(check.condensing.begin(), check.condensing.begin() + static_cast<std::ptrdiff_t>(last),
                  [](bool c) { return c; });
  if (check.f_rsi < rules.mold_moderate_below || interstitial) return MoldLevel::Moderate;
  if (check.f_rsi < rules.mold_light_below) return MoldLevel::Light;
  return MoldLevel::None;
}

CostTier cost_tier(double per_m2, const PhysicsRules& rules) {
  if (per_m2 <= rules.cost_cheap_max) return CostTier::Cheap;
  if (per_m2 <= rules.cost_medium_max) return CostTier::Medium;
  return CostTier::Expensive;
}

CostResult wall_cost(const WallConstruction& wall, const PhysicsRules& rules) {
  require_layers(wall);
  double cost = 0.0;
  for (const auto& layer : wall.layers) {
    cost += layer.thickness * layer.material.unit_cost + rules.labor_cost_per_layer;
  }
  return {cost, cost_tier(cost, rules)};
}

Stability stability_level(const WallConstruction& wall, const PhysicsRules& rules) {
  require_layers(wall);
  const std::size_t idx = structural_index(wall);
  const StructuralSystem system = *wall.layers[idx].material.structural_system;
  // Adjacent structural layers of one material act as one thicker layer.
  double thickness = 0.0;
  for (const auto& layer : wall.layers) {
    if (layer.material.category == Category::Structural && layer.material.structural_system == system)
      thickness += layer.thickness;
  }
  const double ratio = thickness / rules.min_structural_thickness[static_cast<std::size_t>(system)];
  if (ratio >= 1.0) return Stability::NoCracks;
  if (ratio >= rules.stability_minor_from) return Stability::MinorCracks;
  if (ratio >= rules.stability_severe_from) return Stability::SevereCracks;
  return Stability::Collapse;
}

bool u_value_ok(double u, const PhysicsRules& rules) {
  return u >= rules.u_ok_min && u <= rules.u_ok_max;
}

Rating energy_rating(double q, const PhysicsRules& rules) {
  if (!(q >= 0.0)) throw Error(ErrorCode::InvalidInput, "energy demand must be >= 0");
  for (const auto& band : rules.rating_bands) {
    if (!band.upper || q <= *band.upper) return band.rating;
  }
  return Rating::H;
}

ValidationResult validate_layer_order(const WallConstruction& wall, const PhysicsRules& rules) {
  const auto& canonical = rules.canonical_orders[static_cast<std::size_t>(wall.system)];
  const std::size_t n = wall.layers.size();

  // The k-th layer of a category occupies the k-th canonical slot of that category.
  std::vector<std::optional<std::size_t>> slot(n);
  std::array<std::size_t, kCategoryNames.size()> seen{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto cat = wall.layers[i].material.category;
    std::size_t want = seen[static_cast<std::size_t>(cat)]++;
    for (std::size_t s = 0; s < canonical.size(); ++s) {
      if (canonical[s] != cat) continue;
      if (want == 0) {
        slot[i] = s;
        break;
      }
      --want;
    }
  }

  ValidationResult result;
  auto add = [&](std::size_t pos, ViolationKind kind, std::string msg) {
    result.violations.push_back({pos, kind, std::move(msg)});
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto& layer = wall.layers[i];
    const auto cat = std::string(to_string(layer.material.category));
    if (!slot[i]) add(i, ViolationKind::Extra, "Extra " + cat + " at position " + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (slot[i] && slot[j] && *slot[i] > *slot[j]) {
        std::string msg = cat + " before " + std::string(to_string(wall.layers[j].material.category));
        const bool dup = std::any_of(result.violations.begin(), result.violations.end(),
                                     [&](const Violation& v) { return v.position == i && v.message == msg; });
        if (!dup) add(i, ViolationKind::Order, std::move(msg));
      }
    }
    if (layer.thickness < layer.material.min_thickness)
      add(i, ViolationKind::ThicknessBelowMin,
          layer.material.id + " thickness " + fmt(layer.thickness) + " m below minimum " +
              fmt(layer.material.min_thickness) + " m");
    if (layer.thickness > layer.material.max_thickness)
      add(i, ViolationKind::ThicknessAboveMax,
          layer.material.id + " thickness " + fmt(layer.thickness) + " m above maximum " +
              fmt(layer.material.max_thickness) + " m");
    if (layer.material.category == Category::Structural && layer.material.structural_system != wall.system)
      add(i, ViolationKind::SystemMismatch,
          layer.material.id + " is not a " + std::string(to_string(wall.system)) + " material");
  }

  for (std::size_t s = 0; s < canonical.size(); ++s) {
    const bool covered = std::any_of(slot.begin(), slot.end(), [&](const auto& o) { return o && *o == s; });
    if (covered) continue;
    const auto pos = static_cast<std::size_t>(
        std::count_if(slot.begin(), slot.end(), [&](const auto& o) { return o && *o < s; }));
    add(pos, ViolationKind::Missing, "Missing " + std::string(to_string(canonical[s])));
  }

  std::stable_sort(result.violations.begin(), result.violations.end(),
                   [](const Violation& a, const Violation& b) { return a.position < b.position; });
  return result;
}

GadgetReport wall_gadgets(const WallConstruction& wall, const SurfaceConditions& surf,
                          const PhysicsRules& rules) {
  GadgetReport report;
  report.u_value = compute_u_value(wall, surf);
  report.u_value_ok = u_value_ok(report.u_value, rules);
  report.mold = mold_level(wall, surf, rules);
  const CostResult cost = wall_cost(wall, rules);
  report.cost_per_m2 = cost.per_m2;
  report.cost_tier = cost.tier;
  report.stability = stability_level(wall, rules);
  return report;
}

}  // namespace beyond
