#pragma once

#include <functional>
#include <string>
#include <vector>

namespace compfade {

// ---------------------------------------------------------------------------
// Parameter types. Construction validates; instances are immutable.
// ---------------------------------------------------------------------------

/// α-κ-μ multipath: non-linearity α > 0, dominant/scattered power ratio
/// κ ≥ 0, clustering μ > 0.
class AkmParams {
public:
    AkmParams(double alpha, double kappa, double mu);
    double alpha() const { return alpha_; }
    double kappa() const { return kappa_; }
    double mu() const { return mu_; }

private:
    double alpha_;
    double kappa_;
    double mu_;
};

/// α-μ multipath.
class AmParams {
public:
    AmParams(double alpha, double mu);
    double alpha() const { return alpha_; }
    double mu() const { return mu_; }

private:
    double alpha_;
    double mu_;
};

/// α-κ-μ Extreme multipath, parameterized by the severity m; α = 2 gives
/// the κ-μ Extreme model.
class ExtremeParams {
public:
    ExtremeParams(double alpha, double m);
    double alpha() const { return alpha_; }
    double m() const { return m_; }

private:
    double alpha_;
    double m_;
};

/// Gamma shadowing with shape b and scale Ω.
class GammaShadowParams {
public:
    GammaShadowParams(double b, double omega);
    double b() const { return b_; }
    double omega() const { return omega_; }

private:
    double b_;
    double omega_;
};

/// Root-mean-square envelope scale r̂.
class RmsScale {
public:
    explicit RmsScale(double rhat);
    double value() const { return rhat_; }

private:
    double rhat_;
};

// ---------------------------------------------------------------------------
// Mixed continuous/discrete densities.
// ---------------------------------------------------------------------------

struct Atom {
    double location;
    double mass;
};

/// A density on [0, ∞): a continuous part plus point masses. The Extreme
/// models put mass e^{-2m} at the origin.
struct Density {
    std::function<double(double)> continuous;
    std::vector<Atom> atoms;

    double atom_mass() const;
};

/// Total mass of `d`: adaptive quadrature of the continuous part on (0, ∞)
/// plus the atoms. `scale` hints where the bulk of the density lies.
double total_mass(const Density& d, double scale = 1.0, double rel_tol = 1e-10);

namespace channel {

/// κ below this is evaluated through the analytic κ → 0 limit (the α-μ law).
inline constexpr double kKappaZeroThreshold = 1e-8;

// α-κ-μ ---------------------------------------------------------------------

/// Density of the normalized envelope P = R/r̂.
double akm_pdf_normalized(const AkmParams& p, double rho);

/// Envelope density with rms scale r̂: akm_pdf_normalized(p, r/r̂)/r̂.
double akm_pdf_envelope(const AkmParams& p, const RmsScale& s, double r);

/// CDF of the normalized envelope, 1 - Q_μ(√(2μκ), ρ^{α/2}√(2μ(1+κ))).
double akm_cdf(const AkmParams& p, double rho);

/// The same CDF written as a Poisson(μκ) mixture of regularized lower
/// incomplete gamma functions; an independent route used for cross-checks.
double akm_cdf_gamma_series(const AkmParams& p, double rho);

/// Density of W = P²: akm_pdf_normalized(√w)/(2√w).
double akm_power_pdf(const AkmParams& p, double w);

/// E[P^l] = Γ(μ+l/α) 1F1(μ+l/α; μ; κμ) / (Γ(μ) e^{μκ} (μ(1+κ))^{l/α}).
double akm_moment(const AkmParams& p, double l);

/// The moment expression exactly as printed in the source derivation,
/// Γ(l/α+μ) 1F1(l/α; μ; κμ) Γ(μ) / (e^{μκ} ((1+κ)μ)^{l/α}). Kept only so the
/// validation report can show how it compares to the quadrature moments.
double akm_moment_as_printed(const AkmParams& p, double l);

/// Nakagami-m equivalent μ(1+κ)²/(1+2κ).
double nakagami_m_equiv(double kappa, double mu);

Density akm_density(const AkmParams& p, const RmsScale& s = RmsScale(1.0));

// α-μ -----------------------------------------------------------------------

double am_pdf(const AmParams& p, const RmsScale& s, double r);
double am_cdf(const AmParams& p, const RmsScale& s, double r);
Density am_density(const AmParams& p, const RmsScale& s = RmsScale(1.0));

// α-κ-μ Extreme ---------------------------------------------------------------

/// Continuous part 2αm ρ^{α/2-1} e^{-2m(1+ρ^α)} I₁(4mρ^{α/2}).
double extreme_pdf_continuous(const ExtremeParams& p, double rho);

/// Continuous part plus the atom (0, e^{-2m}).
Density extreme_pdf(const ExtremeParams& p, const RmsScale& s = RmsScale(1.0));

/// Pr[P ≤ ρ] including the atom at zero.
double extreme_cdf(const ExtremeParams& p, double rho);

// Gamma shadowing ---------------------------------------------------------

double gamma_shadow_pdf(const GammaShadowParams& g, double y);
double gamma_shadow_cdf(const GammaShadowParams& g, double y);
Density gamma_shadow_density(const GammaShadowParams& g);

// Classical special cases ---------------------------------------------------

enum class ClassicalModel { rayleigh, nakagami_m, rice, weibull, kappa_mu, alpha_mu, generic };

struct Specialization {
    ClassicalModel model;
    double parameter;  ///< m for Nakagami, k for Rice, α for Weibull, 0 otherwise
};

/// Names the classical law an α-κ-μ parameter set reduces to (tolerance 1e-9).
Specialization specialize(const AkmParams& p);

std::string to_string(ClassicalModel m);

}  // namespace channel
}  // namespace compfade
