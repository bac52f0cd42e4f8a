#pragma once

#include "nucav/optimize.hpp"

#include <json.hpp>

namespace nucav {

using json = nlohmann::json;

json to_json(const CavityParams& p);
CavityParams params_from_json(const json& j);

json to_json(const CavityTemplate& t);
CavityTemplate template_from_json(const json& j);

json to_json(const AnnealOptions& a);
json to_json(const FieldOptions& f);

/// Full optimization record. `db` supplies the per-cladding angle bounds.
json to_json(const OptimizationResult& r, const MaterialsDb& db);

/// Reads back what to_json wrote; runs and settings are restored as far as
/// needed to reuse the geometry.
OptimizationResult optimization_from_json(const json& j);

}  // namespace nucav
