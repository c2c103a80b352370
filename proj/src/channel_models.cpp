#include "compfade/channel_models.hpp"

#include "compfade/errors.hpp"
#include "compfade/numerics.hpp"
#include "compfade/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace compfade {

using specfun::ln_gamma;

AkmParams::AkmParams(double alpha, double kappa, double mu) : alpha_(alpha), kappa_(kappa), mu_(mu) {
    detail::require_positive(alpha, "AkmParams", "alpha");
    detail::require_non_negative(kappa, "AkmParams", "kappa");
    detail::require_positive(mu, "AkmParams", "mu");
}

AmParams::AmParams(double alpha, double mu) : alpha_(alpha), mu_(mu) {
    detail::require_positive(alpha, "AmParams", "alpha");
    detail::require_positive(mu, "AmParams", "mu");
}

ExtremeParams::ExtremeParams(double alpha, double m) : alpha_(alpha), m_(m) {
    detail::require_positive(alpha, "ExtremeParams", "alpha");
    detail::require_positive(m, "ExtremeParams", "m");
}

GammaShadowParams::GammaShadowParams(double b, double omega) : b_(b), omega_(omega) {
    detail::require_positive(b, "GammaShadowParams", "b");
    detail::require_positive(omega, "GammaShadowParams", "omega");
}

RmsScale::RmsScale(double rhat) : rhat_(rhat) {
    detail::require_positive(rhat, "RmsScale", "rhat");
}

double Density::atom_mass() const {
    double total = 0.0;
    for (const auto& a : atoms) total += a.mass;
    return total;
}

double total_mass(const Density& d, double scale, double rel_tol) {
    numerics::QuadratureOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-15;
    opt.scale = scale;
    opt.initial_intervals = 16;
    const auto r = numerics::integrate_semi_infinite(d.continuous, opt);
    return numerics::require_converged(r, "total_mass") + d.atom_mass();
}

namespace channel {
namespace {

void check_abscissa(double x, const char* where, const char* name) {
    if (std::isnan(x) || x < 0.0) {
        detail::throw_domain(where, std::string(name) + " must be >= 0");
    }
}

// Value at the origin of c·x^exponent: 0, c, or a singularity.
double origin_limit(double exponent, double coefficient, const char* where) {
    if (exponent > 0.0) return 0.0;
    if (exponent == 0.0) return coefficient;
    detail::throw_domain(where, "density is singular at the origin for these parameters");
}

double am_log_pdf_unit(double alpha, double mu, double rho) {
    return std::log(alpha) + mu * std::log(mu) + (alpha * mu - 1.0) * std::log(rho) - mu * std::pow(rho, alpha) -
           ln_gamma(mu);
}

// ln I_ν(e^{log_z}); below the double range of z the leading series term is exact to rounding.
double log_bessel_i_from_log(double nu, double log_z) {
    if (log_z < -300.0) {
        return nu * (log_z - std::numbers::ln2) - ln_gamma(nu + 1.0);
    }
    return specfun::log_bessel_i(nu, std::exp(log_z));
}

}  // namespace

double akm_pdf_normalized(const AkmParams& p, double rho) {
    check_abscissa(rho, "akm_pdf_normalized", "rho");
    const double a = p.alpha();
    const double k = p.kappa();
    const double mu = p.mu();
    if (rho == 0.0) {
        const double coeff =
            std::exp(std::log(a) + mu * std::log(mu) + mu * std::log1p(k) - mu * k - ln_gamma(mu));
        return origin_limit(a * mu - 1.0, coeff, "akm_pdf_normalized");
    }
    if (std::isinf(rho)) return 0.0;
    if (k < kKappaZeroThreshold) {
        return std::exp(am_log_pdf_unit(a, mu, rho));
    }
    const double rho_a = std::pow(rho, a);
    if (!std::isfinite(rho_a)) return 0.0;
    const double log_rho = std::log(rho);
    const double log_z = std::log(2.0 * mu * std::sqrt(k * (1.0 + k))) + 0.5 * a * log_rho;
    const double log_pdf = std::log(a * mu) + (0.5 * a * (1.0 + mu) - 1.0) * log_rho +
                           0.5 * (1.0 + mu) * std::log1p(k) - 0.5 * (mu - 1.0) * std::log(k) - mu * k -
                           mu * (1.0 + k) * rho_a + log_bessel_i_from_log(mu - 1.0, log_z);
    return std::exp(log_pdf);
}

double akm_pdf_envelope(const AkmParams& p, const RmsScale& s, double r) {
    check_abscissa(r, "akm_pdf_envelope", "r");
    return akm_pdf_normalized(p, r / s.value()) / s.value();
}

double akm_cdf(const AkmParams& p, double rho) {
    check_abscissa(rho, "akm_cdf", "rho");
    if (rho == 0.0) return 0.0;
    if (std::isinf(rho)) return 1.0;
    const double mu = p.mu();
    const double rho_half_a = std::pow(rho, 0.5 * p.alpha());
    if (p.kappa() < kKappaZeroThreshold) {
        return specfun::reg_lower_gamma(mu, mu * rho_half_a * rho_half_a);
    }
    const double a = std::sqrt(2.0 * mu * p.kappa());
    const double b = rho_half_a * std::sqrt(2.0 * mu * (1.0 + p.kappa()));
    return specfun::marcum_q_pair(mu, a, b).p;
}

double akm_cdf_gamma_series(const AkmParams& p, double rho) {
    check_abscissa(rho, "akm_cdf_gamma_series", "rho");
    if (rho == 0.0) return 0.0;
    const double mu = p.mu();
    const double lambda = mu * p.kappa();
    const double x = mu * (1.0 + p.kappa()) * std::pow(rho, p.alpha());
    if (lambda == 0.0) {
        return specfun::reg_lower_gamma(mu, x);
    }
    const double log_lambda = std::log(lambda);
    const auto series = numerics::sum_adaptive(
        [&](std::size_t i) {
            const double n = static_cast<double>(i);
            const double weight = std::exp(-lambda + n * log_lambda - ln_gamma(n + 1.0));
            return weight * specfun::reg_lower_gamma(n + mu, x);
        },
        1e-17, 100000);
    if (!series.converged) {
        throw ConvergenceError("akm_cdf_gamma_series: Poisson mixture did not converge");
    }
    return series.value;
}

double akm_power_pdf(const AkmParams& p, double w) {
    check_abscissa(w, "akm_power_pdf", "w");
    if (w == 0.0) {
        // p_P(ρ) ~ c ρ^{αμ-1} near 0, hence p_W(w) ~ (c/2) w^{αμ/2-1}.
        const double a = p.alpha();
        const double mu = p.mu();
        const double k = p.kappa() < kKappaZeroThreshold ? 0.0 : p.kappa();
        const double coeff =
            0.5 * std::exp(std::log(a) + mu * std::log(mu) + mu * std::log1p(k) - mu * k - ln_gamma(mu));
        return origin_limit(0.5 * a * mu - 1.0, coeff, "akm_power_pdf");
    }
    const double root = std::sqrt(w);
    return akm_pdf_normalized(p, root) / (2.0 * root);
}

double akm_moment(const AkmParams& p, double l) {
    if (std::isnan(l) || l < 0.0) {
        detail::throw_domain("akm_moment", "order l must be >= 0");
    }
    const double mu = p.mu();
    const double shifted = mu + l / p.alpha();
    if (p.kappa() < kKappaZeroThreshold) {
        return std::exp(ln_gamma(shifted) - ln_gamma(mu) - (l / p.alpha()) * std::log(mu));
    }
    const double x = p.kappa() * mu;
    return std::exp(ln_gamma(shifted) + specfun::log_kummer_1f1(shifted, mu, x) - ln_gamma(mu) - x -
                    (l / p.alpha()) * std::log(mu * (1.0 + p.kappa())));
}

double akm_moment_as_printed(const AkmParams& p, double l) {
    if (std::isnan(l) || l < 0.0) {
        detail::throw_domain("akm_moment_as_printed", "order l must be >= 0");
    }
    const double mu = p.mu();
    const double ratio = l / p.alpha();
    const double x = p.kappa() * mu;
    const double log_hyp = (ratio == 0.0 || x == 0.0) ? 0.0 : specfun::log_kummer_1f1(ratio, mu, x);
    return std::exp(ln_gamma(ratio + mu) + log_hyp + ln_gamma(mu) - x - ratio * std::log(mu * (1.0 + p.kappa())));
}

double nakagami_m_equiv(double kappa, double mu) {
    detail::require_non_negative(kappa, "nakagami_m_equiv", "kappa");
    detail::require_positive(mu, "nakagami_m_equiv", "mu");
    return mu * (1.0 + kappa) * (1.0 + kappa) / (1.0 + 2.0 * kappa);
}

Density akm_density(const AkmParams& p, const RmsScale& s) {
    return {[p, s](double r) { return akm_pdf_envelope(p, s, r); }, {}};
}

double am_pdf(const AmParams& p, const RmsScale& s, double r) {
    check_abscissa(r, "am_pdf", "r");
    const double a = p.alpha();
    const double mu = p.mu();
    const double rhat = s.value();
    if (r == 0.0) {
        const double coeff = std::exp(std::log(a) + mu * std::log(mu) - a * mu * std::log(rhat) - ln_gamma(mu));
        return origin_limit(a * mu - 1.0, coeff, "am_pdf");
    }
    if (std::isinf(r)) return 0.0;
    return std::exp(am_log_pdf_unit(a, mu, r / rhat)) / rhat;
}

double am_cdf(const AmParams& p, const RmsScale& s, double r) {
    check_abscissa(r, "am_cdf", "r");
    if (r == 0.0) return 0.0;
    return specfun::reg_lower_gamma(p.mu(), p.mu() * std::pow(r / s.value(), p.alpha()));
}

Density am_density(const AmParams& p, const RmsScale& s) {
    return {[p, s](double r) { return am_pdf(p, s, r); }, {}};
}

double extreme_pdf_continuous(const ExtremeParams& p, double rho) {
    check_abscissa(rho, "extreme_pdf_continuous", "rho");
    const double a = p.alpha();
    const double m = p.m();
    if (rho == 0.0) {
        // I₁(z) ~ z/2 gives 4αm² e^{-2m} ρ^{α-1}.
        return origin_limit(a - 1.0, 4.0 * a * m * m * std::exp(-2.0 * m), "extreme_pdf_continuous");
    }
    if (std::isinf(rho)) return 0.0;
    const double rho_half_a = std::pow(rho, 0.5 * a);
    if (!std::isfinite(rho_half_a * rho_half_a)) return 0.0;
    const double log_rho = std::log(rho);
    const double log_pdf = std::log(2.0 * a * m) + (0.5 * a - 1.0) * log_rho -
                           2.0 * m * (1.0 + rho_half_a * rho_half_a) +
                           log_bessel_i_from_log(1.0, std::log(4.0 * m) + 0.5 * a * log_rho);
    return std::exp(log_pdf);
}

Density extreme_pdf(const ExtremeParams& p, const RmsScale& s) {
    const double rhat = s.value();
    return {[p, rhat](double r) { return extreme_pdf_continuous(p, r / rhat) / rhat; },
            {Atom{0.0, std::exp(-2.0 * p.m())}}};
}

double extreme_cdf(const ExtremeParams& p, double rho) {
    check_abscissa(rho, "extreme_cdf", "rho");
    const double lambda = 2.0 * p.m();
    const double atom = std::exp(-lambda);
    if (rho == 0.0) return atom;
    // ρ^α | N=n ~ Gamma(n, rate 2m) for n ≥ 1.
    const double g = lambda * std::pow(rho, p.alpha());
    const auto series = numerics::sum_adaptive(
        [&](std::size_t i) {
            const double n = static_cast<double>(i + 1);
            const double weight = std::exp(-lambda + n * std::log(lambda) - ln_gamma(n + 1.0));
            return weight * specfun::reg_lower_gamma(n, g);
        },
        1e-17, 100000);
    if (!series.converged) {
        throw ConvergenceError("extreme_cdf: Poisson mixture did not converge");
    }
    return atom + series.value;
}

double gamma_shadow_pdf(const GammaShadowParams& g, double y) {
    check_abscissa(y, "gamma_shadow_pdf", "y");
    const double b = g.b();
    const double omega = g.omega();
    if (y == 0.0) {
        return origin_limit(b - 1.0, 1.0 / omega, "gamma_shadow_pdf");
    }
    if (std::isinf(y)) return 0.0;
    return std::exp((b - 1.0) * std::log(y) - y / omega - ln_gamma(b) - b * std::log(omega));
}

double gamma_shadow_cdf(const GammaShadowParams& g, double y) {
    check_abscissa(y, "gamma_shadow_cdf", "y");
    return specfun::reg_lower_gamma(g.b(), y / g.omega());
}

Density gamma_shadow_density(const GammaShadowParams& g) {
    return {[g](double y) { return gamma_shadow_pdf(g, y); }, {}};
}

Specialization specialize(const AkmParams& p) {
    constexpr double tol = 1e-9;
    const bool linear = std::fabs(p.alpha() - 2.0) <= tol;
    const bool no_los = p.kappa() <= tol;
    const bool single_cluster = std::fabs(p.mu() - 1.0) <= tol;
    if (linear && no_los && single_cluster) return {ClassicalModel::rayleigh, 0.0};
    if (linear && no_los) return {ClassicalModel::nakagami_m, p.mu()};
    if (linear && single_cluster) return {ClassicalModel::rice, p.kappa()};
    if (no_los && single_cluster) return {ClassicalModel::weibull, p.alpha()};
    if (linear) return {ClassicalModel::kappa_mu, 0.0};
    if (no_los) return {ClassicalModel::alpha_mu, 0.0};
    return {ClassicalModel::generic, 0.0};
}

std::string to_string(ClassicalModel m) {
    switch (m) {
        case ClassicalModel::rayleigh: return "rayleigh";
        case ClassicalModel::nakagami_m: return "nakagami-m";
        case ClassicalModel::rice: return "rice";
        case ClassicalModel::weibull: return "weibull";
        case ClassicalModel::kappa_mu: return "kappa-mu";
        case ClassicalModel::alpha_mu: return "alpha-mu";
        case ClassicalModel::generic: return "generic";
    }
    return "generic";
}

}  // namespace channel
}  // namespace compfade
