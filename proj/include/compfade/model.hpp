#pragma once

#include "compfade/channel_models.hpp"
#include "compfade/composite.hpp"

#include "json.hpp"
#include <variant>

namespace compfade {

/// A stand-alone multipath law with a fixed rms scale.
struct MultipathModel {
    MultipathParams params;
    RmsScale rhat{1.0};
};

/// Everything the library can evaluate or sample.
using Model = std::variant<MultipathModel, GammaShadowParams, CompositeModel>;

/// Parameters as a JSON object with a "family" tag.
nlohmann::json describe(const Model& m);

/// Typical magnitude of the variate; used to place quadrature nodes.
double typical_scale(const Model& m);

/// Density through the closed-form / series route.
Density model_density(const Model& m, const composite::SeriesConfig& cfg = {});

/// Density through the most direct route: the mixture integral for
/// composites, the closed forms otherwise.
Density reference_density(const Model& m);

}  // namespace compfade
