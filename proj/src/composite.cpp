#include "compfade/composite.hpp"

#include "compfade/errors.hpp"
#include "compfade/numerics.hpp"
#include "compfade/specfun.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace compfade::composite {
namespace {

using specfun::ln_gamma;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogMax = 709.78;

void check_kernel_args(const KernelArgs& k) {
    detail::require_finite(k.p, "shadow_kernel_integral", "p");
    detail::require_non_negative(k.A, "shadow_kernel_integral", "A");
    detail::require_positive(k.alpha, "shadow_kernel_integral", "alpha");
    detail::require_positive(k.omega, "shadow_kernel_integral", "omega");
    if (k.A == 0.0 && k.p <= 0.0) {
        detail::throw_domain("shadow_kernel_integral", "integral diverges at u -> 0 when A = 0 and p <= 0");
    }
}

// e^x - 1 - x.
double expm1_minus_x(double x) {
    if (std::fabs(x) >= 0.1) return std::expm1(x) - x;
    static constexpr std::array<double, 11> inv_factorial = {
        1.0 / 2,        1.0 / 6,         1.0 / 24,         1.0 / 120,         1.0 / 720,        1.0 / 5040,
        1.0 / 40320,    1.0 / 362880,    1.0 / 3628800,    1.0 / 39916800,    1.0 / 479001600};
    double sum = inv_factorial[10];
    for (int k = 9; k >= 0; --k) sum = sum * x + inv_factorial[k];
    return sum * x * x;
}

// In w = ln(u^{1/α}) the kernel is α ∫ exp(G(w)) dw with
// G(w) = αp·w - A e^{-αw} - e^{w}/Ω, a strictly concave function.
struct KernelExponent {
    double ap;
    double A;
    double alpha;
    double omega;

    double value(double w) const {
        const double inner = A == 0.0 ? 0.0 : A * std::exp(-alpha * w);
        return ap * w - inner - std::exp(w) / omega;
    }
    double slope(double w) const {
        const double inner = A == 0.0 ? 0.0 : alpha * A * std::exp(-alpha * w);
        return ap + inner - std::exp(w) / omega;
    }
    double curvature(double w) const {
        const double inner = A == 0.0 ? 0.0 : alpha * alpha * A * std::exp(-alpha * w);
        return -inner - std::exp(w) / omega;
    }
};

// G(mode + v) - G(mode) as s·v - c_A·(e^{-αv} - 1 + αv) - c_Ω·(e^v - 1 - v),
// free of the cancellation between two large values of G.
struct ModeIncrement {
    double slope;
    double inner;
    double outer;
    double alpha;

    double at(double v) const {
        const double base = slope * v - outer * expm1_minus_x(v);
        return inner == 0.0 ? base : base - inner * expm1_minus_x(-alpha * v);
    }
};

double kernel_mode(const KernelExponent& g) {
    if (g.A == 0.0) {
        return std::log(g.ap * g.omega);
    }
    // slope() decreases monotonically from +∞ to -∞; bracket then refine.
    double guess = std::log(g.omega * std::max(std::fabs(g.ap), 1.0));
    double lo = guess;
    double hi = guess;
    double step = 1.0;
    if (g.slope(guess) > 0.0) {
        while (g.slope(hi) > 0.0) {
            lo = hi;
            hi += step;
            step *= 2.0;
        }
    } else {
        while (g.slope(lo) <= 0.0) {
            hi = lo;
            lo -= step;
            step *= 2.0;
        }
    }
    double w = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double s = g.slope(w);
        if (s > 0.0) {
            lo = w;
        } else {
            hi = w;
        }
        double next = w - s / g.curvature(w);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::fabs(next - w) <= 1e-15 * std::max(1.0, std::fabs(w)) || hi - lo <= 1e-15 * std::max(1.0, std::fabs(w))) {
            return next;
        }
        w = next;
    }
    return w;
}

double builtin_log_kernel(const KernelArgs& k, const KernelOptions& options) {
    check_kernel_args(k);
    const KernelExponent g{k.alpha * k.p, k.A, k.alpha, k.omega};
    const double mode = kernel_mode(g);
    const double peak = g.value(mode);
    const double width = 1.0 / std::sqrt(-g.curvature(mode));

    const ModeIncrement step{g.slope(mode), k.A == 0.0 ? 0.0 : k.A * std::exp(-k.alpha * mode),
                             std::exp(mode) / k.omega, k.alpha};

    numerics::QuadratureOptions q;
    q.rel_tol = options.rel_tol;
    q.abs_tol = 0.0;
    q.budget = options.budget;
    q.scale = width;
    q.initial_intervals = 8;
    const auto r = numerics::integrate_semi_infinite(
        [&](double v) { return std::exp(step.at(v)) + std::exp(step.at(-v)); }, q);
    numerics::require_converged(r, "shadow_kernel_integral");
    return std::log(k.alpha) + peak + std::log(r.value);
}

double evaluate_log_kernel(const KernelArgs& k, const SeriesConfig& cfg, KernelCache* cache) {
    if (cache != nullptr) return cache->log_kernel(k, cfg);
    if (cfg.log_kernel) return cfg.log_kernel(k);
    return builtin_log_kernel(k, {});
}

double gross_log_weight(int n, std::size_t l) {
    const double ld = static_cast<double>(l);
    return ln_gamma(n + ld) + (1.0 - 2.0 * ld) * std::log(static_cast<double>(n)) - ln_gamma(n - ld + 1.0);
}

// Σ_l exp(log_term(l)), either the fixed polynomial surrogate of degree n or
// the adaptively truncated infinite series.
template <class LogTerm>
SeriesEvaluation sum_series(LogTerm log_term, const SeriesConfig& cfg, const char* where) {
    SeriesEvaluation out;
    if (cfg.use_gross) {
        if (cfg.n < 1) detail::throw_domain(where, "Gross degree n must be >= 1");
        double sum = 0.0;
        for (std::size_t l = 0; l <= static_cast<std::size_t>(cfg.n); ++l) {
            sum += std::exp(log_term(l) + gross_log_weight(cfg.n, l));
        }
        out.value = sum;
        out.terms_used = static_cast<std::size_t>(cfg.n) + 1;
        return out;
    }
    const auto r = numerics::sum_adaptive([&](std::size_t l) { return std::exp(log_term(l)); }, cfg.rel_tol,
                                          cfg.max_terms);
    if (!r.converged) {
        throw ConvergenceError(std::string(where) + ": series not converged after " + std::to_string(r.terms_used) +
                               " terms (raise max_terms)");
    }
    out.value = r.value;
    out.terms_used = r.terms_used;
    return out;
}

double multipath_origin_exponent(const MultipathParams& mp) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ExtremeParams>) {
                return p.alpha() - 1.0;
            } else {
                return p.alpha() * p.mu() - 1.0;
            }
        },
        mp);
}

// c in p(ρ) ≈ c ρ^e as ρ → 0 for the unit-scale multipath law.
double multipath_origin_coefficient(const MultipathParams& mp) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ExtremeParams>) {
                return 4.0 * p.alpha() * p.m() * p.m() * std::exp(-2.0 * p.m());
            } else if constexpr (std::is_same_v<T, AkmParams>) {
                const double mu = p.mu();
                const double k = p.kappa() < channel::kKappaZeroThreshold ? 0.0 : p.kappa();
                return std::exp(std::log(p.alpha()) + mu * std::log(mu) + mu * std::log1p(k) - mu * k - ln_gamma(mu));
            } else {
                const double mu = p.mu();
                return std::exp(std::log(p.alpha()) + mu * std::log(mu) - ln_gamma(mu));
            }
        },
        mp);
}

double composite_common_log(const GammaShadowParams& g) {
    return -ln_gamma(g.b()) - g.b() * std::log(g.omega());
}

}  // namespace

double log_shadow_kernel_integral(const KernelArgs& k, const KernelOptions& options) {
    return builtin_log_kernel(k, options);
}

double shadow_kernel_integral(const KernelArgs& k, const KernelOptions& options) {
    const double v = log_shadow_kernel_integral(k, options);
    if (v > kLogMax) {
        throw OverflowError("shadow_kernel_integral: value exceeds double range");
    }
    return std::exp(v);
}

std::size_t KernelCache::KeyHash::operator()(const std::array<double, 4>& key) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (double d : key) {
        h ^= std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(d)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

double KernelCache::log_kernel(const KernelArgs& k, const SeriesConfig& cfg) {
    const std::array<double, 4> key{k.p, k.A, k.alpha, k.omega};
    if (auto it = entries_.find(key); it != entries_.end()) {
        ++hits_;
        return it->second;
    }
    const double v = cfg.log_kernel ? cfg.log_kernel(k) : builtin_log_kernel(k, {});
    entries_.emplace(key, v);
    return v;
}

double shadow_mean(const GammaShadowParams& g) {
    return g.b() * g.omega();
}

double conditional_pdf(const MultipathParams& mp, double y, double x) {
    return std::visit(
        [y, x](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AkmParams>) {
                return channel::akm_pdf_envelope(p, RmsScale(y), x);
            } else if constexpr (std::is_same_v<T, AmParams>) {
                return channel::am_pdf(p, RmsScale(y), x);
            } else {
                return channel::extreme_pdf_continuous(p, x / y) / y;
            }
        },
        mp);
}

double multipath_atom_mass(const MultipathParams& mp) {
    if (const auto* e = std::get_if<ExtremeParams>(&mp)) {
        return std::exp(-2.0 * e->m());
    }
    return 0.0;
}

double origin_value(const CompositeModel& m) {
    const double b = m.shadow.b();
    const double omega = m.shadow.omega();
    const double e_multipath = multipath_origin_exponent(m.multipath);
    const double e_shadow = b - 1.0;
    const double leading = std::min(e_multipath, e_shadow);
    if (leading > 0.0) return 0.0;
    if (leading < 0.0) {
        detail::throw_domain("composite density", "singular at x = 0 for these parameters");
    }
    if (e_multipath == 0.0 && e_shadow > 0.0) {
        // c · E[1/Y] with E[1/Y] = 1/((b-1)Ω).
        return multipath_origin_coefficient(m.multipath) / ((b - 1.0) * omega);
    }
    if (e_shadow == 0.0 && e_multipath > 0.0) {
        // p_Y(0) · E[1/P] over the continuous multipath part.
        numerics::QuadratureOptions q;
        q.rel_tol = 1e-11;
        q.abs_tol = 0.0;
        q.initial_intervals = 16;
        const auto r = numerics::integrate_semi_infinite(
            [&](double s) { return conditional_pdf(m.multipath, 1.0, s) / s; }, q);
        return numerics::require_converged(r, "composite origin limit") / omega;
    }
    detail::throw_domain("composite density", "logarithmic singularity at x = 0 for these parameters");
}

double mixture_pdf_continuous(const CompositeModel& m, double x, const MixtureOptions& options) {
    if (std::isnan(x) || x < 0.0) {
        detail::throw_domain("mixture_pdf", "x must be >= 0");
    }
    if (x == 0.0) return origin_value(m);
    if (std::isinf(x)) return 0.0;
    const GammaShadowParams& g = m.shadow;
    numerics::QuadratureOptions q;
    q.rel_tol = options.rel_tol;
    q.abs_tol = 0.0;
    q.budget = options.budget;
    q.scale = std::sqrt(x * shadow_mean(g));
    q.initial_intervals = 16;
    const auto r = numerics::integrate_semi_infinite(
        [&](double y) {
            const double shadow = channel::gamma_shadow_pdf(g, y);
            if (shadow == 0.0) return 0.0;
            return conditional_pdf(m.multipath, y, x) * shadow;
        },
        q);
    return numerics::require_converged(r, "mixture_pdf");
}

Density mixture_pdf(const CompositeModel& m, const MixtureOptions& options) {
    Density d;
    d.continuous = [m, options](double x) { return mixture_pdf_continuous(m, x, options); };
    if (const double atom = multipath_atom_mass(m.multipath); atom > 0.0) {
        d.atoms.push_back({0.0, atom});
    }
    return d;
}

double am_gamma_pdf(const AmParams& p, const GammaShadowParams& g, double r, const KernelOptions& options) {
    if (std::isnan(r) || r < 0.0) {
        detail::throw_domain("am_gamma_pdf", "r must be >= 0");
    }
    if (r == 0.0) return origin_value({p, g});
    if (std::isinf(r)) return 0.0;
    const double a = p.alpha();
    const double mu = p.mu();
    const double A = mu * std::pow(r, a);
    if (!std::isfinite(A)) return 0.0;
    const double log_kernel = log_shadow_kernel_integral({g.b() / a - mu, A, a, g.omega()}, options);
    return std::exp(mu * std::log(mu) + (a * mu - 1.0) * std::log(r) - ln_gamma(mu) + composite_common_log(g) +
                    log_kernel);
}

SeriesEvaluation akm_gamma_series(const AkmParams& p, const GammaShadowParams& g, double x, const SeriesConfig& cfg,
                                  KernelCache* cache) {
    if (std::isnan(x) || x < 0.0) {
        detail::throw_domain("akm_gamma_pdf_series", "x must be >= 0");
    }
    if (p.kappa() < channel::kKappaZeroThreshold) {
        SeriesEvaluation out;
        out.value = am_gamma_pdf(AmParams(p.alpha(), p.mu()), g, x);
        out.terms_used = 1;
        out.reduced_to_alpha_mu = true;
        return out;
    }
    if (x == 0.0) return {origin_value({p, g}), 0, false};
    const double a = p.alpha();
    const double mu = p.mu();
    const double k = p.kappa();
    const double x_a = std::pow(x, a);
    if (!std::isfinite(x_a)) return {0.0, 0, false};
    const double A = mu * (1.0 + k) * x_a;
    const double log_x = std::log(x);
    const double log_mu = std::log(mu);
    const double log_k = std::log(k);
    const double log_1k = std::log1p(k);
    const double base = composite_common_log(g) - mu * k;
    const double p0 = g.b() / a - mu;

    auto log_term = [&](std::size_t l) {
        const double ld = static_cast<double>(l);
        const double log_coeff = (a * (mu + ld) - 1.0) * log_x + (mu + 2.0 * ld) * log_mu + ld * log_k +
                                 (mu + ld) * log_1k - ln_gamma(ld + 1.0) - ln_gamma(mu + ld) + base;
        return log_coeff + evaluate_log_kernel({p0 - ld, A, a, g.omega()}, cfg, cache);
    };
    return sum_series(log_term, cfg, "akm_gamma_pdf_series");
}

double akm_gamma_pdf_series(const AkmParams& p, const GammaShadowParams& g, double x, const SeriesConfig& cfg) {
    return akm_gamma_series(p, g, x, cfg).value;
}

SeriesEvaluation extreme_gamma_series(const ExtremeParams& p, const GammaShadowParams& g, double r,
                                      const SeriesConfig& cfg, KernelCache* cache) {
    if (std::isnan(r) || r < 0.0) {
        detail::throw_domain("extreme_gamma_pdf", "r must be >= 0");
    }
    if (r == 0.0) return {origin_value({p, g}), 0, false};
    const double a = p.alpha();
    const double m = p.m();
    const double r_a = std::pow(r, a);
    if (!std::isfinite(r_a)) return {0.0, 0, false};
    const double A = 2.0 * m * r_a;
    const double log_r = std::log(r);
    const double log_2m = std::log(2.0 * m);
    const double base = composite_common_log(g) - 2.0 * m;
    const double p0 = g.b() / a - 1.0;

    // I₁ series: (2m)^{2l+2} r^{α(l+1)-1} / (l! (l+1)! Γ(b) Ω^b e^{2m}) per term.
    auto log_term = [&](std::size_t l) {
        const double ld = static_cast<double>(l);
        const double log_coeff = (2.0 * ld + 2.0) * log_2m + (a * (ld + 1.0) - 1.0) * log_r - ln_gamma(ld + 1.0) -
                                 ln_gamma(ld + 2.0) + base;
        return log_coeff + evaluate_log_kernel({p0 - ld, A, a, g.omega()}, cfg, cache);
    };
    return sum_series(log_term, cfg, "extreme_gamma_pdf");
}

double extreme_gamma_pdf_continuous(const ExtremeParams& p, const GammaShadowParams& g, double r,
                                    const SeriesConfig& cfg) {
    return extreme_gamma_series(p, g, r, cfg).value;
}

Density extreme_gamma_pdf(const ExtremeParams& p, const GammaShadowParams& g, const SeriesConfig& cfg) {
    return {[p, g, cfg](double r) { return extreme_gamma_pdf_continuous(p, g, r, cfg); },
            {Atom{0.0, std::exp(-2.0 * p.m())}}};
}

namespace {

double series_value(const CompositeModel& m, double x, const SeriesConfig& cfg, KernelCache* cache) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AkmParams>) {
                return akm_gamma_series(p, m.shadow, x, cfg, cache).value;
            } else if constexpr (std::is_same_v<T, AmParams>) {
                return am_gamma_pdf(p, m.shadow, x);
            } else {
                return extreme_gamma_series(p, m.shadow, x, cfg, cache).value;
            }
        },
        m.multipath);
}

}  // namespace

Density composite_density(const CompositeModel& m, const SeriesConfig& cfg) {
    Density d;
    d.continuous = [m, cfg](double x) { return series_value(m, x, cfg, nullptr); };
    if (const double atom = multipath_atom_mass(m.multipath); atom > 0.0) {
        d.atoms.push_back({0.0, atom});
    }
    return d;
}

std::vector<double> evaluate_curve(const CompositeModel& m, std::span<const double> xs, const SeriesConfig& cfg,
                                   bool oracle, unsigned threads) {
    std::vector<double> out(xs.size(), 0.0);
    auto work = [&](std::size_t begin, std::size_t end) {
        KernelCache cache;
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = oracle ? mixture_pdf_continuous(m, xs[i]) : series_value(m, xs[i], cfg, &cache);
        }
    };
    const std::size_t n = xs.size();
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers <= 1) {
        work(0, n);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            pool.emplace_back([&, w, begin, end] {
                try {
                    work(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

}  // namespace compfade::composite
