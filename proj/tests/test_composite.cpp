#include "compfade/composite.hpp"
#include "compfade/errors.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

using namespace compfade;
using namespace compfade::composite;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

// ∫ p(x | y) p_Y(y) dy with the conditional written out per family.
double mixture(const CompositeModel& m, double x) {
    const double b = m.shadow.b();
    const double omega = m.shadow.omega();
    auto conditional = [&](double y) {
        if (const auto* p = std::get_if<AkmParams>(&m.multipath)) return channel::akm_pdf_envelope(*p, RmsScale(y), x);
        if (const auto* p = std::get_if<AmParams>(&m.multipath)) {
            const double a = p->alpha();
            const double mu = p->mu();
            return std::exp(std::log(a) + mu * std::log(mu) + (a * mu - 1.0) * std::log(x) - a * mu * std::log(y) -
                            mu * std::pow(x / y, a) - std::lgamma(mu));
        }
        const auto& p = std::get<ExtremeParams>(m.multipath);
        const double a = p.alpha();
        const double mm = p.m();
        const double rho = x / y;
        const double z = 4.0 * mm * std::pow(rho, a / 2.0);
        if (z == 0.0) return 0.0;
        return std::exp(std::log(2.0 * a * mm) + (a / 2.0 - 1.0) * std::log(rho) - 2.0 * mm * (1.0 + std::pow(rho, a)) +
                        oracle::log_bessel_i(1.0, z)) /
               y;
    };
    return oracle::exp_sinh([&](double y) { return conditional(y) * oracle::gamma_pdf(b, omega, y); }, b * omega, 1e-13);
}

}  // namespace

TEST_CASE("shadow kernel closed forms") {
    const double gamma_form = 1.5 * std::exp(std::lgamma(1.95)) * std::pow(0.8, 1.95);
    CHECK(rel(shadow_kernel_integral({1.3, 0.0, 1.5, 0.8}), gamma_form) <= 1e-9);
    for (double p : {-0.7, 0.4, 2.6, -3.1}) {
        const double A = 2.0;
        const double omega = 1.5;
        const double bessel_form = 2.0 * std::pow(A * omega, p / 2.0) * std::cyl_bessel_k(std::fabs(p), 2.0 * std::sqrt(A / omega));
        CHECK(rel(shadow_kernel_integral({p, A, 1.0, omega}), bessel_form) <= 1e-8);
    }
    const double base = shadow_kernel_integral({-2.1, 1.7, 2.0, 0.9}, {1e-12, 200000});
    const double doubled = shadow_kernel_integral({-2.1, 1.7, 2.0, 0.9}, {1e-13, 400000});
    CHECK(rel(base, doubled) <= 1e-9);
    CHECK(rel(std::exp(log_shadow_kernel_integral({0.9, 0.3, 2.5, 1.4})), shadow_kernel_integral({0.9, 0.3, 2.5, 1.4})) <=
          1e-13);
}

TEST_CASE("shadow kernel against direct quadrature") {
    for (double alpha : {1.3, 2.0, 3.7}) {
        for (double p : {-1.5, 0.2, 1.8}) {
            const KernelArgs k{p, 0.6, alpha, 1.1};
            const double direct = oracle::exp_sinh(
                [&](double u) { return std::pow(u, p - 1.0) * std::exp(-k.A / u - std::pow(u, 1.0 / alpha) / k.omega); },
                1.0, 1e-13);
            CHECK(rel(shadow_kernel_integral(k), direct) <= 1e-9);
        }
    }
}

TEST_CASE("shadow kernel domain") {
    CHECK_THROWS_AS(shadow_kernel_integral({0.0, 0.0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(shadow_kernel_integral({-1.0, 0.0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(shadow_kernel_integral({1.0, -1.0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(shadow_kernel_integral({1.0, 1.0, 0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(shadow_kernel_integral({800.0, 0.0, 1.0, 5.0}), OverflowError);
    CHECK(std::isfinite(log_shadow_kernel_integral({800.0, 0.0, 1.0, 5.0})));
}

TEST_CASE("mixture reference against a K-distribution construction") {
    const CompositeModel m{AkmParams(2.0, 0.0, 1.0), GammaShadowParams(1.0, 1.3)};
    for (double x : {0.1, 0.6, 1.4, 3.0}) {
        CHECK(rel(mixture_pdf_continuous(m, x), oracle::k_distribution_pdf(1.0, 1.3, x)) <= 1e-6);
    }
    CHECK(mixture_pdf_continuous(CompositeModel{AkmParams(2.0, 1.0, 2.0), GammaShadowParams(2.0, 1.0)}, 0.0) == 0.0);
}

TEST_CASE("alpha-mu/gamma") {
    CHECK(rel(am_gamma_pdf(AmParams(2.0, 1.0), GammaShadowParams(2.5, 0.6), 1.0), oracle::k_distribution_pdf(2.5, 0.6, 1.0)) <=
          1e-6);
    const AmParams p(3.1, 1.6);
    const GammaShadowParams g(1.1, 0.9);
    for (double r : {0.05, 0.3, 0.9, 1.7, 3.5}) {
        CHECK(rel(am_gamma_pdf(p, g, r), mixture(CompositeModel{p, g}, r)) <= 1e-6);
    }
    const double total = oracle::exp_sinh([&](double r) { return am_gamma_pdf(p, g, r); }, 1.0, 1e-12);
    CHECK(std::fabs(total - 1.0) <= 1e-6);
    CHECK_THROWS_AS(am_gamma_pdf(p, g, -1.0), DomainError);
}

TEST_CASE("alpha-kappa-mu/gamma series against the mixture") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> a(1.0, 4.0), kap(0.0, 5.0), mu(0.5, 4.0), b(0.8, 5.0), om(0.3, 3.0);
    for (int draw = 0; draw < 5; ++draw) {
        const AkmParams p(a(gen), kap(gen), mu(gen));
        const GammaShadowParams g(b(gen), om(gen));
        const double scale = g.b() * g.omega();
        for (double f : {0.05, 0.3, 1.0, 2.0, 5.0}) {
            const double x = f * scale;
            CAPTURE(draw);
            CAPTURE(x);
            CHECK(rel(akm_gamma_pdf_series(p, g, x), mixture(CompositeModel{p, g}, x)) <= 1e-4);
        }
    }
}

TEST_CASE("figure parameter sets agree with the mixture") {
    for (double alpha : {1.0, 2.0, 4.0}) {
        const AkmParams p(alpha, 1.0, 2.1);
        const GammaShadowParams g(1.1, 0.9);
        for (double x : {0.2, 1.0, 3.0}) CHECK(rel(akm_gamma_pdf_series(p, g, x), mixture({p, g}, x)) <= 1e-4);
    }
    for (double mu : {0.5, 4.0}) {
        const AkmParams p(2.0, 4.0, mu);
        const GammaShadowParams g(1.8, 0.7);
        for (double x : {0.2, 1.0, 3.0}) CHECK(rel(akm_gamma_pdf_series(p, g, x), mixture({p, g}, x)) <= 1e-4);
    }
    for (double alpha : {1.0, 2.0, 4.0}) {
        const ExtremeParams p(alpha, 1.1);
        const GammaShadowParams g(1.2, 0.8);
        for (double x : {0.2, 1.0, 3.0}) {
            CHECK(rel(extreme_gamma_pdf_continuous(p, g, x), mixture({p, g}, x)) <= 1e-4);
        }
    }
}

TEST_CASE("kappa limit routes to alpha-mu/gamma") {
    const GammaShadowParams g(1.4, 0.8);
    const auto s = akm_gamma_series(AkmParams(2.2, 1e-10, 1.7), g, 0.9);
    CHECK(s.reduced_to_alpha_mu);
    CHECK(rel(s.value, am_gamma_pdf(AmParams(2.2, 1.7), g, 0.9)) <= 1e-10);
    CHECK_FALSE(akm_gamma_series(AkmParams(2.2, 0.5, 1.7), g, 0.9).reduced_to_alpha_mu);
}

TEST_CASE("extreme/gamma") {
    const ExtremeParams p(2.0, 1.1);
    const GammaShadowParams g(1.2, 0.8);
    const Density d = extreme_gamma_pdf(p, g);
    REQUIRE(d.atoms.size() == 1);
    CHECK(d.atoms[0].mass == doctest::Approx(std::exp(-2.2)).epsilon(1e-15));
    CHECK(std::fabs(oracle::exp_sinh(d.continuous, 1.0, 1e-12) + d.atoms[0].mass - 1.0) <= 1e-6);

    const ExtremeParams large(1.5, 8.0);
    const Density dl = extreme_gamma_pdf(large, g);
    CHECK(std::fabs(oracle::exp_sinh(dl.continuous, 1.0, 1e-12) - (1.0 - std::exp(-16.0))) <= 1e-6);
    CHECK(mixture_pdf(CompositeModel{large, g}).atoms.at(0).mass == doctest::Approx(std::exp(-16.0)));
}

TEST_CASE("origin values") {
    CHECK(origin_value(CompositeModel{AkmParams(2.0, 1.0, 2.0), GammaShadowParams(2.0, 1.0)}) == 0.0);
    const CompositeModel flat{AmParams(1.0, 1.0), GammaShadowParams(3.0, 0.5)};
    CHECK(rel(origin_value(flat), 1.0 / (0.5 * 2.0)) <= 1e-9);
    CHECK_THROWS_AS(origin_value(CompositeModel{AmParams(1.0, 0.5), GammaShadowParams(3.0, 0.5)}), DomainError);
    const Density d = composite_density(CompositeModel{AkmParams(2.0, 1.0, 2.0), GammaShadowParams(2.0, 1.0)});
    CHECK(d.continuous(0.0) == 0.0);
}

TEST_CASE("degenerate shadow approaches the plain multipath law") {
    const AkmParams p(2.3, 1.2, 1.5);
    const double c = 1.0;
    double previous = INFINITY;
    for (double b : {1e2, 1e3}) {
        const CompositeModel m{p, GammaShadowParams(b, c / b)};
        double worst = 0.0;
        for (double x : {0.2, 0.5, 0.8, 1.1, 1.4}) {
            worst = std::max(worst, rel(mixture_pdf_continuous(m, x), channel::akm_pdf_envelope(p, RmsScale(c), x)));
        }
        CHECK(worst < previous);
        previous = worst;
    }
    CHECK(previous <= 1e-2);
}

TEST_CASE("Gross coefficients approach the infinite-series coefficients") {
    const AkmParams p(2.4, 1.5, 1.3);
    const GammaShadowParams g(1.6, 0.9);
    double previous = INFINITY;
    for (int n : {10, 20, 40}) {
        SeriesConfig cfg;
        cfg.use_gross = true;
        cfg.n = n;
        double worst = 0.0;
        for (double x : {0.3, 1.0, 2.5}) {
            worst = std::max(worst, rel(akm_gamma_pdf_series(p, g, x, cfg), akm_gamma_pdf_series(p, g, x)));
        }
        CHECK(worst < previous);
        previous = worst;
    }
}

TEST_CASE("series budget") {
    SeriesConfig cfg;
    cfg.max_terms = 2;
    cfg.rel_tol = 1e-14;
    CHECK_THROWS_AS(akm_gamma_pdf_series(AkmParams(2.0, 5.0, 3.0), GammaShadowParams(2.0, 1.5), 3.0, cfg),
                    ConvergenceError);
}

TEST_CASE("kernel cache") {
    KernelCache cache;
    SeriesConfig cfg;
    const KernelArgs k{0.5, 1.0, 2.0, 1.0};
    const double first = cache.log_kernel(k, cfg);
    const double second = cache.log_kernel(k, cfg);
    CHECK(first == second);
    CHECK(cache.size() == 1);
    CHECK(cache.hits() == 1);
}

TEST_CASE("parallel curves equal serial curves") {
    std::vector<double> xs;
    for (int i = 1; i <= 40; ++i) xs.push_back(0.1 * i);
    for (const CompositeModel& m : {CompositeModel{AkmParams(1.7, 2.0, 1.4), GammaShadowParams(1.3, 0.9)},
                                    CompositeModel{ExtremeParams(2.5, 0.8), GammaShadowParams(2.0, 0.6)}}) {
        const auto serial = evaluate_curve(m, xs, {}, false, 1);
        const auto parallel = evaluate_curve(m, xs, {}, false, 4);
        CHECK(serial == parallel);
        const auto oracle_serial = evaluate_curve(m, xs, {}, true, 1);
        CHECK(oracle_serial == evaluate_curve(m, xs, {}, true, 3));
    }
}

TEST_CASE("shadow mean") { CHECK(shadow_mean(GammaShadowParams(1.8, 0.7)) == doctest::Approx(1.26)); }
