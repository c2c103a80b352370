#include "compfade/model.hpp"

#include <cmath>

namespace compfade {
namespace {

nlohmann::json describe_multipath(const MultipathParams& mp) {
    return std::visit(
        [](const auto& p) -> nlohmann::json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AkmParams>) {
                return {{"multipath", "alpha-kappa-mu"}, {"alpha", p.alpha()}, {"kappa", p.kappa()}, {"mu", p.mu()}};
            } else if constexpr (std::is_same_v<T, AmParams>) {
                return {{"multipath", "alpha-mu"}, {"alpha", p.alpha()}, {"mu", p.mu()}};
            } else {
                return {{"multipath", "alpha-kappa-mu-extreme"}, {"alpha", p.alpha()}, {"m", p.m()}};
            }
        },
        mp);
}

}  // namespace

nlohmann::json describe(const Model& m) {
    if (const auto* mm = std::get_if<MultipathModel>(&m)) {
        auto j = describe_multipath(mm->params);
        j["family"] = j["multipath"];
        j["rhat"] = mm->rhat.value();
        return j;
    }
    if (const auto* g = std::get_if<GammaShadowParams>(&m)) {
        return {{"family", "gamma-shadow"}, {"b", g->b()}, {"omega", g->omega()}};
    }
    const auto& c = std::get<CompositeModel>(m);
    auto j = describe_multipath(c.multipath);
    j["family"] = j["multipath"].get<std::string>() + "/gamma";
    j["b"] = c.shadow.b();
    j["omega"] = c.shadow.omega();
    return j;
}

double typical_scale(const Model& m) {
    if (const auto* mm = std::get_if<MultipathModel>(&m)) return mm->rhat.value();
    if (const auto* g = std::get_if<GammaShadowParams>(&m)) return composite::shadow_mean(*g);
    return composite::shadow_mean(std::get<CompositeModel>(m).shadow);
}

Density model_density(const Model& m, const composite::SeriesConfig& cfg) {
    if (const auto* c = std::get_if<CompositeModel>(&m)) {
        return composite::composite_density(*c, cfg);
    }
    return reference_density(m);
}

Density reference_density(const Model& m) {
    if (const auto* g = std::get_if<GammaShadowParams>(&m)) {
        return channel::gamma_shadow_density(*g);
    }
    if (const auto* c = std::get_if<CompositeModel>(&m)) {
        return composite::mixture_pdf(*c);
    }
    const auto& mm = std::get<MultipathModel>(m);
    return std::visit(
        [&mm](const auto& p) -> Density {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AkmParams>) {
                return channel::akm_density(p, mm.rhat);
            } else if constexpr (std::is_same_v<T, AmParams>) {
                return channel::am_density(p, mm.rhat);
            } else {
                return channel::extreme_pdf(p, mm.rhat);
            }
        },
        mm.params);
}

}  // namespace compfade
