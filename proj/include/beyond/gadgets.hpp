#pragma once

#include <memory>
#include <string_view>

#include "beyond/content.hpp"
#include "beyond/surrogate.hpp"

namespace beyond {

enum class EnergyBackend { Oracle, Surrogate };

std::string_view to_string(EnergyBackend b);
EnergyBackend parse_energy_backend(std::string_view s);

/// Computes the full gadget report for a wall under desk settings. The wall
/// U-value in `params` is replaced by the one computed from `wall`.
class GadgetEvaluator {
 public:
  explicit GadgetEvaluator(const ContentPack& content) : content_(content) {}
  /// Throws IncompatibleModel when the model's locations do not match the
  /// content's climate table.
  GadgetEvaluator(const ContentPack& content, std::shared_ptr<const SurrogateModel> model);

  EnergyBackend backend() const { return model_ ? EnergyBackend::Surrogate : EnergyBackend::Oracle; }

  EnergyResult energy(const SimulationParams& p) const;
  GadgetReport evaluate(const WallConstruction& wall, SimulationParams params) const;

 private:
  const ContentPack& content_;
  std::shared_ptr<const SurrogateModel> model_;
};

}  // namespace beyond
