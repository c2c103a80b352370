#include "compfade/validation.hpp"

#include "compfade/composite.hpp"
#include "compfade/curves.hpp"
#include "compfade/errors.hpp"
#include "compfade/mc.hpp"
#include "compfade/model.hpp"
#include "compfade/numerics.hpp"
#include "compfade/specfun.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

namespace compfade::validation {
namespace {

using Fn = std::function<double(double)>;
constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Reference routines kept apart from the library's own numerics.
// ---------------------------------------------------------------------------

// Double-exponential (exp-sinh) rule on (0, ∞): x = s·exp(π/2·sinh t).
double de_half_line(const Fn& f, double s, double tol = 1e-14) {
    constexpr double kT = 6.0;
    auto contribution = [&](double t) {
        const double u = 0.5 * kPi * std::sinh(t);
        const double x = s * std::exp(u);
        if (!std::isfinite(x) || x == 0.0) return 0.0;
        const double fx = f(x);
        if (fx == 0.0) return 0.0;
        return fx * x * 0.5 * kPi * std::cosh(t);
    };
    double h = 0.5;
    double sum = contribution(0.0);
    for (double t = h; t <= kT; t += h) sum += contribution(t) + contribution(-t);
    double estimate = sum * h;
    for (int level = 0; level < 12; ++level) {
        h *= 0.5;
        for (double t = h; t <= kT; t += 2.0 * h) sum += contribution(t) + contribution(-t);
        const double next = sum * h;
        if (std::fabs(next - estimate) <= tol * std::fabs(next) && level >= 2) return next;
        estimate = next;
    }
    return estimate;
}

// tanh-sinh rule on [a, b].
double de_interval(const Fn& f, double a, double b, double tol = 1e-14) {
    constexpr double kT = 3.5;
    const double half = 0.5 * (b - a);
    auto contribution = [&](double t) {
        const double u = 0.5 * kPi * std::sinh(t);
        const double e = std::exp(-2.0 * std::fabs(u));
        // distance from the nearer end, computed without cancellation
        const double gap = 2.0 * half * e / (1.0 + e);
        const double x = u >= 0.0 ? b - gap : a + gap;
        if (gap == 0.0) return 0.0;
        const double c = std::cosh(u);
        return f(x) * half * 0.5 * kPi * std::cosh(t) / (c * c);
    };
    double h = 0.5;
    double sum = contribution(0.0);
    for (double t = h; t <= kT; t += h) sum += contribution(t) + contribution(-t);
    double estimate = sum * h;
    for (int level = 0; level < 12; ++level) {
        h *= 0.5;
        for (double t = h; t <= kT; t += 2.0 * h) sum += contribution(t) + contribution(-t);
        const double next = sum * h;
        if (std::fabs(next - estimate) <= tol * std::fabs(next) && level >= 2) return next;
        estimate = next;
    }
    return estimate;
}

// ln I_ν(z) from the standard library for moderate z, Hankel's expansion beyond.
double ref_log_bessel_i(double nu, double z) {
    if (z < 500.0) {
        double v;
        if (nu >= 0.0) {
            v = std::cyl_bessel_i(nu, z);
        } else {
            const double n = -nu;
            v = std::cyl_bessel_i(n, z) + 2.0 / kPi * std::sin(n * kPi) * std::cyl_bessel_k(n, z);
        }
        return std::log(v);
    }
    const double m4 = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 12; ++k) {
        term *= -(m4 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * z);
        sum += term;
    }
    return z - 0.5 * std::log(2.0 * kPi * z) + std::log(sum);
}

// κ-μ envelope density at unit rms, written out directly.
double ref_kappa_mu_pdf(double kappa, double mu, double rho) {
    if (rho <= 0.0) return 0.0;
    const double z = 2.0 * mu * std::sqrt(kappa * (1.0 + kappa)) * rho;
    const double log_pdf = std::log(2.0 * mu) + 0.5 * (mu + 1.0) * std::log1p(kappa) -
                           0.5 * (mu - 1.0) * std::log(kappa) - mu * kappa + mu * std::log(rho) -
                           mu * (1.0 + kappa) * rho * rho + ref_log_bessel_i(mu - 1.0, z);
    return std::exp(log_pdf);
}

// κ-μ Extreme envelope density (continuous part), unit rms.
double ref_kappa_mu_extreme_pdf(double m, double rho) {
    if (rho <= 0.0) return 0.0;
    return std::exp(std::log(4.0 * m) - 2.0 * m * (1.0 + rho * rho) + ref_log_bessel_i(1.0, 4.0 * m * rho));
}

double ref_gamma_pdf(double b, double omega, double y) {
    return std::exp((b - 1.0) * std::log(y) - y / omega - std::lgamma(b) - b * std::log(omega));
}

// ∫₀^∞ (1/y) f(x/y) p_Y(y) dy by the double-exponential rule.
double ref_mixture(const Fn& unit_pdf, double b, double omega, double x) {
    const Fn integrand = [&](double y) {
        const double g = ref_gamma_pdf(b, omega, y);
        if (g == 0.0) return 0.0;
        return unit_pdf(x / y) / y * g;
    };
    return de_half_line(integrand, std::sqrt(x * b * omega));
}

double ref_rayleigh_unit(double rho) { return 2.0 * rho * std::exp(-rho * rho); }

// K_ν(z) = ∫₀^∞ e^{-z cosh t} cosh(νt) dt by the trapezoid rule, which
// converges geometrically for this analytic integrand.
double ref_bessel_k(double nu, double z) {
    auto trapezoid = [&](double h) {
        double sum = 0.5 * std::exp(-z);
        for (int k = 1; k < 200000; ++k) {
            const double t = k * h;
            const double term = std::exp(-z * std::cosh(t) + std::fabs(nu) * t) * 0.5 *
                                (1.0 + std::exp(-2.0 * std::fabs(nu) * t));
            sum += term;
            if (term < 1e-20 * sum && z * std::cosh(t) > std::fabs(nu) * t + 50.0) break;
        }
        return sum * h;
    };
    return trapezoid(0.02);
}

// ---------------------------------------------------------------------------
// Bookkeeping.
// ---------------------------------------------------------------------------

class Draws {
public:
    explicit Draws(std::uint64_t seed) : rng_(seed) {}
    double operator()(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }

private:
    mc::Rng rng_;
};

struct Box {
    static constexpr double alpha_lo = 1.0, alpha_hi = 4.0;
    static constexpr double kappa_lo = 0.0, kappa_hi = 5.0;
    static constexpr double mu_lo = 0.5, mu_hi = 4.0;
    static constexpr double m_lo = 0.5, m_hi = 3.0;
    static constexpr double b_lo = 0.8, b_hi = 5.0;
    static constexpr double omega_lo = 0.3, omega_hi = 3.0;
};

AkmParams draw_akm(Draws& d) {
    const double alpha = d(Box::alpha_lo, Box::alpha_hi);
    const double kappa = d(Box::kappa_lo, Box::kappa_hi);
    return AkmParams(alpha, kappa, d(Box::mu_lo, Box::mu_hi));
}
AmParams draw_am(Draws& d) {
    const double alpha = d(Box::alpha_lo, Box::alpha_hi);
    return AmParams(alpha, d(Box::mu_lo, Box::mu_hi));
}
ExtremeParams draw_extreme(Draws& d) {
    const double alpha = d(Box::alpha_lo, Box::alpha_hi);
    return ExtremeParams(alpha, d(Box::m_lo, Box::m_hi));
}
GammaShadowParams draw_shadow(Draws& d) {
    const double b = d(Box::b_lo, Box::b_hi);
    return GammaShadowParams(b, d(Box::omega_lo, Box::omega_hi));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string params_text(const Model& m) { return describe(m).dump(); }

class Tracker {
public:
    Tracker(int criterion, std::string name, double tolerance)
        : criterion_(criterion), name_(std::move(name)), tolerance_(tolerance) {}

    void record(double error, const std::string& where) {
        ++count_;
        if (std::isnan(error)) {
            failed_ = true;
            if (!nan_seen_) note_ = "NaN at " + where;
            nan_seen_ = true;
            return;
        }
        if (error > worst_) {
            worst_ = error;
            worst_where_ = where;
        }
    }

    void fail(const std::string& why) {
        failed_ = true;
        if (note_.empty()) note_ = why;
    }

    CheckResult result() const {
        CheckResult r;
        r.criterion = criterion_;
        r.name = name_;
        r.tolerance = tolerance_;
        r.measured = worst_;
        r.passed = !failed_ && worst_ <= tolerance_ && count_ > 0;
        std::string detail = std::to_string(count_) + " cases; worst at " + (worst_where_.empty() ? "-" : worst_where_);
        if (!note_.empty()) detail = note_ + "; " + detail;
        r.detail = detail;
        return r;
    }

private:
    int criterion_;
    std::string name_;
    double tolerance_;
    double worst_ = 0.0;
    std::string worst_where_;
    std::string note_;
    std::size_t count_ = 0;
    bool failed_ = false;
    bool nan_seen_ = false;
};

double rel_err(double value, double reference) {
    if (reference == 0.0) return std::fabs(value);
    return std::fabs(value - reference) / std::fabs(reference);
}

template <class Body>
void guarded(Tracker& t, const std::string& where, Body body) {
    try {
        body();
    } catch (const std::exception& e) {
        t.fail(where + ": " + e.what());
    }
}

composite::SeriesConfig series_config(const Options& o) {
    composite::SeriesConfig cfg;
    if (o.inject_kernel_sign_fault) {
        cfg.log_kernel = [](const KernelArgs& k) {
            return composite::log_shadow_kernel_integral({-k.p, k.A, k.alpha, k.omega});
        };
    }
    return cfg;
}

std::size_t draws_for(const Options& o, std::size_t full, std::size_t quick) {
    return o.level == Level::full ? full : quick;
}

// ---------------------------------------------------------------------------
// Criteria.
// ---------------------------------------------------------------------------

std::vector<CheckResult> normalization(const Options& o) {
    const std::size_t n = draws_for(o, 20, 3);
    const auto cfg = series_config(o);
    constexpr double kTol = 1e-6;
    Draws d(101);
    Tracker env(1, "normalization.akm_envelope", kTol);
    Tracker power(1, "normalization.akm_power", kTol);
    Tracker am(1, "normalization.am_envelope", kTol);
    Tracker kmu_ext(1, "normalization.kmu_extreme", kTol);
    Tracker ext(1, "normalization.akm_extreme", kTol);
    Tracker shadow(1, "normalization.gamma_shadow", kTol);
    Tracker akm_g(1, "normalization.akm_gamma", kTol);
    Tracker am_g(1, "normalization.am_gamma", kTol);
    Tracker ext_g(1, "normalization.extreme_gamma", kTol);
    for (std::size_t i = 0; i < n; ++i) {
        const AkmParams akm = draw_akm(d);
        const RmsScale s(d(0.5, 2.0));
        const AmParams amp = draw_am(d);
        const ExtremeParams e = draw_extreme(d);
        const ExtremeParams e2(2.0, e.m());
        const GammaShadowParams g = draw_shadow(d);
        const std::string tag = "draw " + std::to_string(i);
        guarded(env, tag, [&] {
            env.record(std::fabs(total_mass(channel::akm_density(akm, s), s.value()) - 1.0),
                       tag + " " + params_text(MultipathModel{akm, s}));
        });
        guarded(power, tag, [&] {
            Density pw;
            pw.continuous = [akm](double w) { return channel::akm_power_pdf(akm, w); };
            power.record(std::fabs(total_mass(pw, 1.0) - 1.0), tag + " " + params_text(MultipathModel{akm, RmsScale(1.0)}));
        });
        guarded(am, tag, [&] {
            am.record(std::fabs(total_mass(channel::am_density(amp, s), s.value()) - 1.0),
                      tag + " " + params_text(MultipathModel{amp, s}));
        });
        guarded(kmu_ext, tag, [&] {
            kmu_ext.record(std::fabs(total_mass(channel::extreme_pdf(e2, s), s.value()) - 1.0),
                           tag + " " + params_text(MultipathModel{e2, s}));
        });
        guarded(ext, tag, [&] {
            ext.record(std::fabs(total_mass(channel::extreme_pdf(e, s), s.value()) - 1.0),
                       tag + " " + params_text(MultipathModel{e, s}));
        });
        guarded(shadow, tag, [&] {
            shadow.record(std::fabs(total_mass(channel::gamma_shadow_density(g), composite::shadow_mean(g)) - 1.0),
                          tag + " " + params_text(g));
        });
        for (auto [tracker, model] : {std::pair<Tracker*, CompositeModel>{&akm_g, {akm, g}},
                                      std::pair<Tracker*, CompositeModel>{&am_g, {amp, g}},
                                      std::pair<Tracker*, CompositeModel>{&ext_g, {e, g}}}) {
            guarded(*tracker, tag, [&] {
                const double mass = total_mass(composite::composite_density(model, cfg), composite::shadow_mean(g));
                tracker->record(std::fabs(mass - 1.0), tag + " " + params_text(model));
            });
        }
    }
    return {env.result(),    power.result(), am.result(),   kmu_ext.result(), ext.result(),
            shadow.result(), akm_g.result(), am_g.result(), ext_g.result()};
}

std::vector<CheckResult> series_vs_oracle(const Options& o) {
    const std::size_t n = draws_for(o, 20, 3);
    const std::size_t points = draws_for(o, 25, 8);
    const auto cfg = series_config(o);
    Draws d(202);
    Tracker akm_t(2, "series_vs_mixture.akm_gamma", 1e-4);
    Tracker ext_t(2, "series_vs_mixture.extreme_gamma", 1e-4);
    Tracker am_t(2, "exact_kernel_vs_mixture.am_gamma", 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
        const AkmParams akm = draw_akm(d);
        const AmParams amp = draw_am(d);
        const ExtremeParams e = draw_extreme(d);
        const GammaShadowParams g = draw_shadow(d);
        const double scale = composite::shadow_mean(g);
        for (std::size_t k = 0; k < points; ++k) {
            const double x = scale * 0.05 * std::pow(100.0, static_cast<double>(k) / static_cast<double>(points - 1));
            const std::string at = "draw " + std::to_string(i) + " x=" + fmt(x);
            const CompositeModel ma{akm, g};
            guarded(akm_t, at, [&] {
                akm_t.record(rel_err(composite::akm_gamma_pdf_series(akm, g, x, cfg), composite::mixture_pdf_continuous(ma, x)),
                             at + " " + params_text(ma));
            });
            const CompositeModel me{e, g};
            guarded(ext_t, at, [&] {
                ext_t.record(rel_err(composite::extreme_gamma_pdf_continuous(e, g, x, cfg),
                                     composite::mixture_pdf_continuous(me, x)),
                             at + " " + params_text(me));
            });
            const CompositeModel mm{amp, g};
            guarded(am_t, at, [&] {
                am_t.record(rel_err(composite::am_gamma_pdf(amp, g, x), composite::mixture_pdf_continuous(mm, x)),
                            at + " " + params_text(mm));
            });
        }
    }
    return {akm_t.result(), ext_t.result(), am_t.result()};
}

std::vector<CheckResult> reductions(const Options& o) {
    const std::size_t n = draws_for(o, 20, 4);
    const auto cfg = series_config(o);
    Draws d(303);
    Tracker kmu(3, "reduction.akm_alpha2_is_kappa_mu", 1e-10);
    Tracker ext(3, "reduction.extreme_alpha2_is_kappa_mu_extreme", 1e-10);
    Tracker k0(3, "reduction.akm_kappa0_is_alpha_mu", 1e-10);
    Tracker kdist(3, "reduction.rayleigh_gamma_vs_nested_quadrature", 1e-6);
    Tracker k0_comp(3, "reduction.akm_gamma_kappa0_is_am_gamma", 1e-10);
    Tracker kmu_g(3, "reduction.kappa_mu_gamma_series_vs_direct_mixture", 1e-4);
    Tracker ext_g(3, "reduction.kmu_extreme_gamma_series_vs_direct_mixture", 1e-4);
    for (std::size_t i = 0; i < n; ++i) {
        const double kappa = d(0.05, 5.0);
        const double mu = d(Box::mu_lo, Box::mu_hi);
        const double alpha = d(Box::alpha_lo, Box::alpha_hi);
        const double m = d(Box::m_lo, Box::m_hi);
        const std::string tag = "draw " + std::to_string(i);
        for (const double rho : {0.05, 0.3, 0.7, 1.0, 1.6, 2.5}) {
            const std::string at = tag + " rho=" + fmt(rho) + " kappa=" + fmt(kappa) + " mu=" + fmt(mu);
            guarded(kmu, at, [&] {
                kmu.record(rel_err(channel::akm_pdf_normalized(AkmParams(2.0, kappa, mu), rho),
                                   ref_kappa_mu_pdf(kappa, mu, rho)),
                           at);
            });
            guarded(ext, at, [&] {
                ext.record(rel_err(channel::extreme_pdf_continuous(ExtremeParams(2.0, m), rho),
                                   ref_kappa_mu_extreme_pdf(m, rho)),
                           tag + " rho=" + fmt(rho) + " m=" + fmt(m));
            });
            for (const double tiny : {0.0, 5e-9}) {
                guarded(k0, at, [&] {
                    k0.record(rel_err(channel::akm_pdf_normalized(AkmParams(alpha, tiny, mu), rho),
                                      channel::am_pdf(AmParams(alpha, mu), RmsScale(1.0), rho)),
                              tag + " rho=" + fmt(rho) + " alpha=" + fmt(alpha) + " kappa=" + fmt(tiny));
                });
            }
        }
        // Rayleigh/gamma through three library routes against the direct mixture.
        const double b = i == 0 ? 1.0 : d(1.0, Box::b_hi);
        const double omega = d(Box::omega_lo, Box::omega_hi);
        const GammaShadowParams g(b, omega);
        const CompositeModel ray{AkmParams(2.0, 0.0, 1.0), g};
        const CompositeModel kmu_model{AkmParams(2.0, kappa, mu), g};
        const CompositeModel ext_model{ExtremeParams(2.0, m), g};
        for (const double x : {0.05, 0.2, 0.5, 1.0, 2.0, 4.0}) {
            const double xs = x * b * omega;
            const std::string at = tag + " x=" + fmt(xs) + " b=" + fmt(b) + " omega=" + fmt(omega);
            guarded(kdist, at, [&] {
                const double ref = ref_mixture(ref_rayleigh_unit, b, omega, xs);
                kdist.record(rel_err(composite::akm_gamma_pdf_series(std::get<AkmParams>(ray.multipath), g, xs, cfg), ref),
                             at + " series");
                kdist.record(rel_err(composite::am_gamma_pdf(AmParams(2.0, 1.0), g, xs), ref), at + " alpha-mu kernel");
                kdist.record(rel_err(composite::mixture_pdf_continuous(ray, xs), ref), at + " mixture");
            });
            guarded(k0_comp, at, [&] {
                const AkmParams tiny(alpha, 1e-9, mu);
                k0_comp.record(rel_err(composite::akm_gamma_pdf_series(tiny, g, xs, cfg),
                                       composite::am_gamma_pdf(AmParams(alpha, mu), g, xs)),
                               at + " alpha=" + fmt(alpha) + " mu=" + fmt(mu));
            });
            guarded(kmu_g, at, [&] {
                const double ref = ref_mixture([&](double r) { return ref_kappa_mu_pdf(kappa, mu, r); }, b, omega, xs);
                kmu_g.record(rel_err(composite::akm_gamma_pdf_series(AkmParams(2.0, kappa, mu), g, xs, cfg), ref),
                             at + " " + params_text(kmu_model));
            });
            guarded(ext_g, at, [&] {
                const double ref = ref_mixture([&](double r) { return ref_kappa_mu_extreme_pdf(m, r); }, b, omega, xs);
                ext_g.record(rel_err(composite::extreme_gamma_pdf_continuous(ExtremeParams(2.0, m), g, xs, cfg), ref),
                             at + " " + params_text(ext_model));
            });
        }
    }
    return {kmu.result(), ext.result(), k0.result(), kdist.result(), k0_comp.result(), kmu_g.result(), ext_g.result()};
}

std::vector<CheckResult> cdf_forms(const Options& o) {
    const std::size_t n = draws_for(o, 100, 20);
    Draws d(404);
    Tracker t(4, "cdf.marcum_vs_gamma_series", 1e-9);
    for (std::size_t i = 0; i < n; ++i) {
        const AkmParams p = draw_akm(d);
        const double rho = d(0.05, 3.0);
        const std::string at = "point " + std::to_string(i) + " rho=" + fmt(rho) + " " + params_text(MultipathModel{p, RmsScale(1.0)});
        guarded(t, at, [&] { t.record(std::fabs(channel::akm_cdf(p, rho) - channel::akm_cdf_gamma_series(p, rho)), at); });
    }
    return {t.result()};
}

std::vector<CheckResult> moments(const Options& o, nlohmann::json& observations) {
    const std::size_t n = draws_for(o, 20, 4);
    Draws d(505);
    Tracker closed(5, "moments.closed_form_vs_quadrature", 1e-6);
    Tracker zeroth(5, "moments.zeroth_is_one", 1e-12);
    double literal_worst = 0.0;
    double literal_zeroth_worst = 0.0;
    nlohmann::json example;
    for (std::size_t i = 0; i < n; ++i) {
        const AkmParams p = draw_akm(d);
        const std::string tag = "draw " + std::to_string(i) + " " + params_text(MultipathModel{p, RmsScale(1.0)});
        guarded(zeroth, tag, [&] { zeroth.record(std::fabs(channel::akm_moment(p, 0.0) - 1.0), tag); });
        for (int l = 0; l <= 4; ++l) {
            guarded(closed, tag, [&] {
                const double quad =
                    de_half_line(
                    [&](double r) {
                        const double f = channel::akm_pdf_normalized(p, r);
                        return f == 0.0 ? 0.0 : std::pow(r, l) * f;
                    },
                    1.0);
                const double value = channel::akm_moment(p, l);
                closed.record(rel_err(value, quad), tag + " l=" + std::to_string(l));
                const double literal = channel::akm_moment_as_printed(p, l);
                literal_worst = std::max(literal_worst, rel_err(literal, quad));
                if (l == 0) literal_zeroth_worst = std::max(literal_zeroth_worst, std::fabs(literal - 1.0));
                if (i == 0) {
                    example.push_back({{"l", l}, {"quadrature", quad}, {"validated", value}, {"literal", literal}});
                }
            });
        }
    }
    const bool literal_ok = literal_worst <= 1e-6;
    observations["literal_moment_form"] = {
        {"description", "moment expression as printed, Gamma(l/alpha+mu) 1F1(l/alpha; mu; kappa mu) Gamma(mu) / "
                        "(e^{mu kappa} ((1+kappa) mu)^{l/alpha})"},
        {"matches_quadrature", literal_ok},
        {"max_rel_error_vs_quadrature", literal_worst},
        {"max_zeroth_moment_error", literal_zeroth_worst},
        {"first_draw", example}};
    CheckResult recorded;
    recorded.criterion = 5;
    recorded.name = "moments.literal_form_comparison_recorded";
    recorded.passed = true;
    recorded.measured = literal_worst;
    recorded.tolerance = 1e-6;
    recorded.detail = std::string("executed; literal form ") + (literal_ok ? "matches" : "does not match") +
                      " quadrature (max rel error " + fmt(literal_worst) + ", E[P^0] off by " +
                      fmt(literal_zeroth_worst) + ")";
    return {closed.result(), zeroth.result(), recorded};
}

std::vector<CheckResult> nakagami_equivalence(const Options& o, nlohmann::json& observations) {
    const std::size_t n = draws_for(o, 20, 5);
    Draws d(606);
    Tracker t(6, "nakagami_m.alpha2_inverse_power_variance", 1e-6);
    nlohmann::json general = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const double kappa = d(Box::kappa_lo, Box::kappa_hi);
        const double mu = d(Box::mu_lo, Box::mu_hi);
        const std::string at = "draw " + std::to_string(i) + " kappa=" + fmt(kappa) + " mu=" + fmt(mu);
        guarded(t, at, [&] {
            const AkmParams p(2.0, kappa, mu);
            const double e2 = channel::akm_moment(p, 2.0);
            const double var = channel::akm_moment(p, 4.0) - e2 * e2;
            t.record(rel_err(1.0 / var, channel::nakagami_m_equiv(kappa, mu)), at);
            for (const double alpha : {1.0, 1.5, 3.0, 4.0}) {
                const AkmParams q(alpha, kappa, mu);
                const double m2 = channel::akm_moment(q, 2.0);
                const double v = channel::akm_moment(q, 4.0) / (m2 * m2) - 1.0;
                general.push_back({{"alpha", alpha}, {"kappa", kappa}, {"mu", mu},
                                   {"inverse_normalized_power_variance", 1.0 / v},
                                   {"formula", channel::nakagami_m_equiv(kappa, mu)}});
            }
        });
    }
    double worst = 0.0;
    for (const auto& row : general) {
        worst = std::max(worst, rel_err(row["inverse_normalized_power_variance"].get<double>(), row["formula"].get<double>()));
    }
    observations["nakagami_m_general_alpha"] = {{"max_rel_deviation", worst}, {"cases", general.size()}};
    return {t.result()};
}

std::vector<CheckResult> kernels(const Options& o) {
    const std::size_t n = draws_for(o, 20, 5);
    Draws d(707);
    Tracker gamma_form(7, "kernel.A0_gamma_closed_form", 1e-9);
    Tracker bessel_form(7, "kernel.alpha1_bessel_k_closed_form", 1e-8);
    Tracker doubling(7, "kernel.budget_doubling_stability", 1e-9);
    auto check_gamma = [&](double p, double alpha, double omega) {
        const std::string at = "p=" + fmt(p) + " alpha=" + fmt(alpha) + " omega=" + fmt(omega);
        guarded(gamma_form, at, [&] {
            const double ref = alpha * std::exp(std::lgamma(alpha * p) + alpha * p * std::log(omega));
            gamma_form.record(rel_err(composite::shadow_kernel_integral({p, 0.0, alpha, omega}), ref), at);
        });
    };
    auto check_bessel = [&](double p, double A, double omega) {
        const std::string at = "p=" + fmt(p) + " A=" + fmt(A) + " omega=" + fmt(omega);
        guarded(bessel_form, at, [&] {
            const double ref = 2.0 * std::pow(A * omega, 0.5 * p) * ref_bessel_k(p, 2.0 * std::sqrt(A / omega));
            bessel_form.record(rel_err(composite::shadow_kernel_integral({p, A, 1.0, omega}), ref), at);
        });
    };
    auto check_doubling = [&](const KernelArgs& k) {
        const std::string at = "p=" + fmt(k.p) + " A=" + fmt(k.A) + " alpha=" + fmt(k.alpha) + " omega=" + fmt(k.omega);
        guarded(doubling, at, [&] {
            const KernelOptions base;
            KernelOptions doubled = base;
            doubled.budget *= 2;
            const double v0 = composite::log_shadow_kernel_integral(k, base);
            const double v1 = composite::log_shadow_kernel_integral(k, doubled);
            doubled.rel_tol = 1e-13;
            const double v2 = composite::log_shadow_kernel_integral(k, doubled);
            doubling.record(std::max(std::fabs(std::expm1(v1 - v0)), std::fabs(std::expm1(v2 - v0))), at);
        });
    };
    check_gamma(1.3, 1.5, 0.8);
    check_bessel(-0.7, 2.0, 1.5);
    check_doubling({-2.1, 1.7, 2.0, 0.9});
    for (std::size_t i = 0; i < n; ++i) {
        check_gamma(d(0.1, 4.0), d(Box::alpha_lo, Box::alpha_hi), d(Box::omega_lo, Box::omega_hi));
        check_bessel(d(-4.0, 3.0), d(0.05, 6.0), d(Box::omega_lo, Box::omega_hi));
        const double p = d(-6.0, 3.0);
        const double alpha = d(Box::alpha_lo, Box::alpha_hi);
        check_doubling({p, d(0.01, 8.0), alpha, d(Box::omega_lo, Box::omega_hi)});
    }
    return {gamma_form.result(), bessel_form.result(), doubling.result()};
}

std::vector<CheckResult> monte_carlo(const Options& o) {
    const std::size_t draws = draws_for(o, 3, 1);
    const std::size_t seeds = draws_for(o, 3, 1);
    const std::size_t count = draws_for(o, 100000, 20000);
    const auto cfg = series_config(o);
    Draws d(808);
    struct Family {
        std::string name;
        std::function<Model(Draws&)> make;
        std::function<Density(const Model&)> density;
    };
    const auto plain = [](const Model& m) { return reference_density(m); };
    const auto series = [cfg](const Model& m) { return model_density(m, cfg); };
    const std::vector<Family> families = {
        {"akm", [](Draws& r) { return Model{MultipathModel{draw_akm(r), RmsScale(r(0.5, 2.0))}}; }, plain},
        {"am", [](Draws& r) { return Model{MultipathModel{draw_am(r), RmsScale(r(0.5, 2.0))}}; }, plain},
        {"extreme", [](Draws& r) { return Model{MultipathModel{draw_extreme(r), RmsScale(r(0.5, 2.0))}}; }, plain},
        {"gamma_shadow", [](Draws& r) { return Model{draw_shadow(r)}; }, plain},
        {"akm_gamma", [](Draws& r) { return Model{CompositeModel{draw_akm(r), draw_shadow(r)}}; }, series},
        {"am_gamma", [](Draws& r) { return Model{CompositeModel{draw_am(r), draw_shadow(r)}}; }, series},
        {"extreme_gamma", [](Draws& r) { return Model{CompositeModel{draw_extreme(r), draw_shadow(r)}}; }, series},
    };
    std::vector<CheckResult> out;
    Tracker zero(8, "monte_carlo.extreme_zero_fraction_in_standard_errors", 5.0);
    for (const auto& fam : families) {
        Tracker ks(8, "monte_carlo.ks_ratio_to_critical." + fam.name, 1.0);
        for (std::size_t i = 0; i < draws; ++i) {
            const Model model = fam.make(d);
            const Density density = fam.density(model);
            for (std::size_t s = 0; s < seeds; ++s) {
                const std::uint64_t seed = 1000 + 17 * i + s;
                const std::string at = "draw " + std::to_string(i) + " seed " + std::to_string(seed) + " " + params_text(model);
                guarded(ks, at, [&] {
                    const auto batch = mc::sample_partitioned(model, count, seed, 4, o.threads);
                    mc::GofOptions gopt;
                    gopt.scale = typical_scale(model);
                    const auto report = mc::gof_compare(batch, density, gopt);
                    if (!report.ks_defined) {
                        ks.fail(at + ": no nonzero draws");
                        return;
                    }
                    ks.record(report.ks_statistic / report.ks_critical, at);
                    if (report.atom_mass_expected > 0.0) {
                        zero.record(std::fabs(report.atom_frequency_observed - report.atom_mass_expected) /
                                        report.atom_standard_error,
                                    at);
                    }
                });
            }
        }
        out.push_back(ks.result());
    }
    out.push_back(zero.result());
    return out;
}

std::vector<CheckResult> figures(const Options& o) {
    Tracker mass(9, "figures.total_mass", 1e-6);
    Tracker nonneg(9, "figures.nonnegative", 0.0);
    Tracker modes(9, "figures.unimodal_regression", 0.0);
    curves::EvalOptions eval;
    eval.series = series_config(o);
    eval.threads = o.threads;
    // One mode per curve, measured on the emitted grids and frozen here.
    constexpr std::size_t kExpectedModes = 1;
    for (int id = 1; id <= 4; ++id) {
        const std::string fig = "figure " + std::to_string(id);
        guarded(mass, fig, [&] {
            const auto tables = curves::figure_curves(id, eval);
            const std::size_t expected_members = id == 2 ? 4 : 5;
            if (tables.size() != expected_members) mass.fail(fig + ": wrong number of curves");
            for (const auto& t : tables) {
                const std::string at = fig + " " + t.metadata["label"].get<std::string>();
                curves::check_table(t);
                mass.record(std::fabs(t.metadata["total_mass"].get<double>() - 1.0), at);
                const auto negatives = static_cast<double>(std::count_if(
                    t.values.begin(), t.values.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); }));
                nonneg.record(negatives, at);
                modes.record(std::fabs(static_cast<double>(t.metadata["modes"].get<std::size_t>()) -
                                       static_cast<double>(kExpectedModes)),
                             at);
            }
        });
    }
    return {mass.result(), nonneg.result(), modes.result()};
}

std::vector<CheckResult> special_functions(nlohmann::json& observations) {
    using namespace specfun;
    std::vector<CheckResult> out;
    auto golden = [&](const std::string& name, double value, double expected, double tol, bool relative) {
        Tracker t(10, "specfun." + name, tol);
        t.record(relative ? rel_err(value, expected) : std::fabs(value - expected), "value " + fmt(value));
        out.push_back(t.result());
    };
    auto guarded_golden = [&](const std::string& name, const std::function<double()>& value, double expected,
                              double tol, bool relative) {
        try {
            golden(name, value(), expected, tol, relative);
        } catch (const std::exception& e) {
            Tracker t(10, "specfun." + name, tol);
            t.fail(e.what());
            out.push_back(t.result());
        }
    };
    guarded_golden("ln_gamma(1)", [] { return ln_gamma(1.0); }, 0.0, 1e-13, false);
    guarded_golden("ln_gamma(5)", [] { return ln_gamma(5.0); }, std::log(24.0), 1e-13, true);
    guarded_golden("ln_gamma(0.5)", [] { return ln_gamma(0.5); }, 0.5 * std::log(kPi), 1e-13, true);
    guarded_golden("bessel_i(0,0)", [] { return bessel_i(0.0, 0.0); }, 1.0, 1e-12, true);
    guarded_golden("bessel_i(1,0)", [] { return bessel_i(1.0, 0.0); }, 0.0, 0.0, false);
    guarded_golden("bessel_i(0.5,1)", [] { return bessel_i(0.5, 1.0); }, std::sqrt(2.0 / kPi) * std::sinh(1.0), 1e-12,
                   true);
    guarded_golden("bessel_i_gross(1,0,n=7)", [] { return bessel_i_gross(1.0, 0.0, 7); }, 0.0, 0.0, false);
    guarded_golden("bessel_i_gross(0,2,n=30)_vs_bessel_i", [] { return bessel_i_gross(0.0, 2.0, 30); },
                   std::cyl_bessel_i(0.0, 2.0), 1e-8, false);
    guarded_golden("bessel_i_gross(1,0.5,n=5)_within_1e-3", [] { return bessel_i_gross(1.0, 0.5, 5); }, 0.2578943,
                   1e-3, false);
    // Deviation of the n = 5 surrogate from I_1(0.5), measured once and frozen.
    guarded_golden("bessel_i_gross(1,0.5,n=5)_frozen_deviation",
                   [] { return bessel_i_gross(1.0, 0.5, 5) - std::cyl_bessel_i(1.0, 0.5); }, -3.33790991487105e-06,
                   1e-15, false);
    guarded_golden("reg_upper_gamma(3.7,0)", [] { return reg_upper_gamma(3.7, 0.0); }, 1.0, 1e-12, true);
    guarded_golden("reg_upper_gamma(1,2)", [] { return reg_upper_gamma(1.0, 2.0); }, std::exp(-2.0), 1e-12, true);
    guarded_golden("reg_upper_gamma(2,1)", [] { return reg_upper_gamma(2.0, 1.0); }, 2.0 * std::exp(-1.0), 1e-12,
                   true);
    guarded_golden("marcum_q(2.5,1.3,0)", [] { return marcum_q(2.5, 1.3, 0.0); }, 1.0, 1e-12, false);
    guarded_golden("marcum_q(1,0,1)", [] { return marcum_q(1.0, 0.0, 1.0); }, std::exp(-0.5), 1e-12, true);
    {
        // Q_1.5(1, 2): κ = a²/(2μ) = 1/3 and ρ = b/√(2μ(1+κ)) = 1.
        const double kappa = 1.0 / 3.0;
        const double cdf = de_interval([&](double r) { return ref_kappa_mu_pdf(kappa, 1.5, r); }, 0.0, 1.0);
        guarded_golden("marcum_q(1.5,1,2)_vs_kappa_mu_quadrature", [] { return marcum_q(1.5, 1.0, 2.0); }, 1.0 - cdf,
                       1e-8, false);
    }
    guarded_golden("kummer_1f1(2.2,3.1,0)", [] { return kummer_1f1(2.2, 3.1, 0.0); }, 1.0, 1e-10, true);
    guarded_golden("kummer_1f1(1,1,1.5)", [] { return kummer_1f1(1.0, 1.0, 1.5); }, std::exp(1.5), 1e-10, true);
    guarded_golden("kummer_1f1(1,2,1)", [] { return kummer_1f1(1.0, 2.0, 1.0); }, std::exp(1.0) - 1.0, 1e-10, true);

    // Gross surrogate: max relative error over x ∈ [0, 10] must not grow with n.
    Tracker mono(10, "specfun.bessel_i_gross_error_nonincreasing_in_n", 0.0);
    nlohmann::json errors = nlohmann::json::object();
    for (const double nu : {0.0, 1.0, 2.0}) {
        double previous = INFINITY;
        nlohmann::json row = nlohmann::json::object();
        for (const int n : {5, 10, 20, 40}) {
            double worst = 0.0;
            for (int i = 0; i <= 100; ++i) {
                const double x = 0.1 * i;
                const double exact = std::cyl_bessel_i(nu, x);
                if (exact == 0.0) continue;
                worst = std::max(worst, rel_err(bessel_i_gross(nu, x, n), exact));
            }
            row[std::to_string(n)] = worst;
            mono.record(std::max(0.0, worst - previous), "nu=" + fmt(nu) + " n=" + std::to_string(n));
            previous = worst;
        }
        errors["nu=" + fmt(nu)] = row;
    }
    observations["bessel_i_gross_max_rel_error"] = errors;
    out.push_back(mono.result());
    return out;
}

}  // namespace

bool Report::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json Report::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    nlohmann::json criteria = nlohmann::json::object();
    for (const auto& c : checks) {
        list.push_back({{"criterion", c.criterion}, {"name", c.name}, {"passed", c.passed},
                        {"measured", c.measured}, {"tolerance", c.tolerance}, {"detail", c.detail}});
        auto& entry = criteria[std::to_string(c.criterion)];
        if (entry.is_null()) entry = {{"title", criterion_title(c.criterion)}, {"passed", true}};
        if (!c.passed) entry["passed"] = false;
    }
    return {{"level", level == Level::full ? "full" : "quick"},
            {"passed", all_passed()},
            {"seconds", seconds},
            {"criteria", criteria},
            {"checks", list},
            {"observations", observations},
            {"version", curves::kToolVersion}};
}

std::string criterion_title(int id) {
    switch (id) {
        case 1: return "normalization of every density";
        case 2: return "series and exact-kernel forms vs mixture quadrature";
        case 3: return "special-case reductions";
        case 4: return "cdf: Marcum Q form vs incomplete-gamma series";
        case 5: return "moments: closed form vs quadrature";
        case 6: return "Nakagami-m equivalence at alpha = 2";
        case 7: return "shadow-kernel integral cross-checks";
        case 8: return "Monte Carlo samplers vs densities";
        case 9: return "figure curve families";
        case 10: return "special-function goldens and Gross surrogate";
        default: return "unknown";
    }
}

std::vector<CheckResult> run_criterion(int id, const Options& options, nlohmann::json& observations) {
    switch (id) {
        case 1: return normalization(options);
        case 2: return series_vs_oracle(options);
        case 3: return reductions(options);
        case 4: return cdf_forms(options);
        case 5: return moments(options, observations);
        case 6: return nakagami_equivalence(options, observations);
        case 7: return kernels(options);
        case 8: return monte_carlo(options);
        case 9: return figures(options);
        case 10: return special_functions(observations);
        default: detail::throw_domain("validation", "criterion must be 1.." + std::to_string(kCriteria));
    }
}

Report run(const Options& options) {
    const auto start = std::chrono::steady_clock::now();
    Report report;
    report.level = options.level;
    for (int id = 1; id <= kCriteria; ++id) {
        auto checks = run_criterion(id, options, report.observations);
        report.checks.insert(report.checks.end(), checks.begin(), checks.end());
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace compfade::validation
