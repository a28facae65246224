#include "beyond/gadgets.hpp"

#include <algorithm>

#include "beyond/error.hpp"

namespace beyond {

std::string_view to_string(EnergyBackend b) { return b == EnergyBackend::Oracle ? "oracle" : "surrogate"; }

EnergyBackend parse_energy_backend(std::string_view s) {
  if (s == "oracle") return EnergyBackend::Oracle;
  if (s == "surrogate") return EnergyBackend::Surrogate;
  throw Error(ErrorCode::InvalidInput, "energy backend must be oracle or surrogate");
}

GadgetEvaluator::GadgetEvaluator(const ContentPack& content, std::shared_ptr<const SurrogateModel> model)
    : content_(content), model_(std::move(model)) {
  if (!model_) return;
  for (const auto& e : model_->spec.enums) {
    if (e.name != "location") continue;
    for (const auto& loc : content_.climate.locations) {
      if (std::find(e.levels.begin(), e.levels.end(), loc.id) == e.levels.end())
        throw Error(ErrorCode::IncompatibleModel, "model was not trained on location '" + loc.id + "'");
    }
  }
}

EnergyResult GadgetEvaluator::energy(const SimulationParams& p) const {
  if (model_) return predict(*model_, p, content_.rules).energy;
  return annual_energy(p, content_.room, content_.climate, content_.rules);
}

GadgetReport GadgetEvaluator::evaluate(const WallConstruction& wall, SimulationParams params) const {
  GadgetReport r = wall_gadgets(wall, content_.design_conditions, content_.rules);
  params.wall_u = r.u_value;
  r.energy = energy(params);
  return r;
}

}  // namespace beyond
