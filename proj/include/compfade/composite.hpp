#pragma once

#include "compfade/channel_models.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace compfade {

using MultipathParams = std::variant<AkmParams, AmParams, ExtremeParams>;

/// One multipath law whose rms scale is itself gamma distributed.
struct CompositeModel {
    MultipathParams multipath;
    GammaShadowParams shadow;
};

/// Arguments of ∫₀^∞ u^{p-1} e^{-A/u} e^{-u^{1/α}/Ω} du.
struct KernelArgs {
    double p;
    double A;
    double alpha;
    double omega;
};

struct KernelOptions {
    double rel_tol = 1e-12;
    std::size_t budget = 200000;
};

namespace composite {

/// ln of the shadow-kernel integral. Requires A > 0, or A = 0 with p > 0.
double log_shadow_kernel_integral(const KernelArgs& k, const KernelOptions& options = {});

/// The shadow-kernel integral itself; OverflowError if it exceeds double range.
double shadow_kernel_integral(const KernelArgs& k, const KernelOptions& options = {});

/// Hook for substituting the log-kernel evaluator (used by fault-injection runs).
using LogKernelFn = std::function<double(const KernelArgs&)>;

struct SeriesConfig {
    int n = 40;                    ///< degree of the polynomial Bessel surrogate (use_gross)
    std::size_t max_terms = 5000;  ///< cap on the adaptive infinite-series sum
    double rel_tol = 1e-8;
    bool use_gross = false;
    LogKernelFn log_kernel;  ///< empty: built-in quadrature
};

/// Memoizes kernel integrals within one batch of evaluations. Not
/// synchronized: confine each instance to one thread.
class KernelCache {
public:
    double log_kernel(const KernelArgs& k, const SeriesConfig& cfg);
    std::size_t size() const { return entries_.size(); }
    std::size_t hits() const { return hits_; }

private:
    struct KeyHash {
        std::size_t operator()(const std::array<double, 4>& key) const;
    };
    std::unordered_map<std::array<double, 4>, double, KeyHash> entries_;
    std::size_t hits_ = 0;
};

struct SeriesEvaluation {
    double value = 0.0;
    std::size_t terms_used = 0;
    bool reduced_to_alpha_mu = false;  ///< κ below threshold: evaluated as α-μ/gamma
};

// Conditional multipath density -------------------------------------------

/// Continuous part of the multipath density at x when the rms scale is y.
double conditional_pdf(const MultipathParams& mp, double y, double x);

/// Mass of the multipath law's atom at zero (e^{-2m} for Extreme, else 0).
double multipath_atom_mass(const MultipathParams& mp);

// Mixture-integral reference ----------------------------------------------

struct MixtureOptions {
    double rel_tol = 1e-10;
    std::size_t budget = 400000;
};

/// ∫₀^∞ p(x | y) p_Y(y) dy by adaptive quadrature: the reference every
/// series form is checked against.
double mixture_pdf_continuous(const CompositeModel& m, double x, const MixtureOptions& options = {});

Density mixture_pdf(const CompositeModel& m, const MixtureOptions& options = {});

// Series and closed forms ---------------------------------------------------

SeriesEvaluation akm_gamma_series(const AkmParams& p, const GammaShadowParams& g, double x,
                                  const SeriesConfig& cfg = {}, KernelCache* cache = nullptr);

/// α-κ-μ/gamma density as Σ_l C_l(x) · kernel(b/α-μ-l, μ(1+κ)x^α).
double akm_gamma_pdf_series(const AkmParams& p, const GammaShadowParams& g, double x,
                            const SeriesConfig& cfg = {});

/// α-μ/gamma density, exact single-kernel form.
double am_gamma_pdf(const AmParams& p, const GammaShadowParams& g, double r, const KernelOptions& options = {});

SeriesEvaluation extreme_gamma_series(const ExtremeParams& p, const GammaShadowParams& g, double r,
                                      const SeriesConfig& cfg = {}, KernelCache* cache = nullptr);

double extreme_gamma_pdf_continuous(const ExtremeParams& p, const GammaShadowParams& g, double r,
                                    const SeriesConfig& cfg = {});

/// Series continuous part plus the atom (0, e^{-2m}).
Density extreme_gamma_pdf(const ExtremeParams& p, const GammaShadowParams& g, const SeriesConfig& cfg = {});

/// Value of the continuous composite density at x = 0: 0 when the leading
/// power of x is positive, the finite limit when it is zero. DomainError for
/// a singular origin.
double origin_value(const CompositeModel& m);

/// Composite density through the series/closed-form route.
Density composite_density(const CompositeModel& m, const SeriesConfig& cfg = {});

/// Continuous part on a grid. `oracle` selects the mixture integral.
/// Each worker thread owns its own kernel cache; output order follows `xs`.
std::vector<double> evaluate_curve(const CompositeModel& m, std::span<const double> xs, const SeriesConfig& cfg,
                                   bool oracle, unsigned threads = 1);

/// E[Y] = bΩ, the typical rms scale.
double shadow_mean(const GammaShadowParams& g);

}  // namespace composite
}  // namespace compfade
