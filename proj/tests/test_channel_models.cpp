#include "compfade/channel_models.hpp"
#include "compfade/errors.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace compfade;
using namespace compfade::channel;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

double mass(const Density& d, double scale = 1.0) {
    return oracle::exp_sinh(d.continuous, scale, 1e-13) + d.atom_mass();
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(AkmParams(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(AkmParams(2.0, -0.1, 1.0), DomainError);
    CHECK_THROWS_AS(AkmParams(2.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(AmParams(2.0, std::nan("")), DomainError);
    CHECK_THROWS_AS(ExtremeParams(2.0, 0.0), DomainError);
    CHECK_THROWS_AS(GammaShadowParams(1.0, -2.0), DomainError);
    CHECK_THROWS_AS(RmsScale(0.0), DomainError);
    CHECK_NOTHROW(AkmParams(2.0, 0.0, 1.0));
}

TEST_CASE("akm_pdf_normalized examples") {
    CHECK(rel(akm_pdf_normalized(AkmParams(2.0, 1e-12, 1.0), 1.0), 2.0 * std::exp(-1.0)) <= 1e-10);
    CHECK(akm_pdf_normalized(AkmParams(2.0, 1.0, 1.5), 0.0) == 0.0);
    const AkmParams p(3.5, 2.0, 2.1);
    CHECK(std::isfinite(akm_pdf_normalized(p, 0.8)));
    CHECK(std::fabs(mass(akm_density(p)) - 1.0) <= 1e-8);
    CHECK_THROWS_AS(akm_pdf_normalized(p, -0.1), DomainError);
}

TEST_CASE("akm_pdf_normalized stays finite for tiny arguments") {
    for (double mu : {0.5, 0.9, 2.0}) {
        for (double rho : {1e-300, 1e-130, 1e-20}) {
            const double v = akm_pdf_normalized(AkmParams(1.3, 2.0, mu), rho);
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("akm reduces to an independent kappa-mu formula at alpha = 2") {
    for (double kappa : {0.3, 1.0, 4.0}) {
        for (double mu : {0.6, 1.0, 2.5}) {
            for (double rho : {0.05, 0.4, 1.0, 1.7, 3.0}) {
                CHECK(rel(akm_pdf_normalized(AkmParams(2.0, kappa, mu), rho), oracle::kappa_mu_pdf(kappa, mu, rho)) <=
                      1e-10);
            }
        }
    }
}

TEST_CASE("kappa limit matches alpha-mu") {
    for (double rho : {0.1, 0.7, 1.3, 2.2}) {
        const double limit = akm_pdf_normalized(AkmParams(2.7, 1e-10, 1.6), rho);
        CHECK(rel(limit, am_pdf(AmParams(2.7, 1.6), RmsScale(1.0), rho)) <= 1e-10);
        const double zero = akm_pdf_normalized(AkmParams(2.7, 0.0, 1.6), rho);
        CHECK(rel(zero, limit) <= 1e-10);
    }
}

TEST_CASE("akm envelope scaling") {
    const AkmParams p(2.0, 1.0, 2.0);
    CHECK(akm_pdf_envelope(p, RmsScale(1.0), 0.7) == akm_pdf_normalized(p, 0.7));
    CHECK(akm_pdf_envelope(p, RmsScale(2.0), 1.0) == akm_pdf_normalized(p, 0.5) / 2.0);
    const AkmParams q(1.5, 3.0, 1.2);
    Density d = akm_density(q, RmsScale(0.9));
    CHECK(std::fabs(mass(d, 0.9) - 1.0) <= 1e-8);
    CHECK_THROWS_AS(akm_pdf_envelope(q, RmsScale(1.0), -1.0), DomainError);
}

TEST_CASE("akm_cdf examples and properties") {
    CHECK(akm_cdf(AkmParams(2.4, 1.2, 0.7), 0.0) == 0.0);
    CHECK(rel(akm_cdf(AkmParams(2.0, 1e-12, 1.0), 1.0), 1.0 - std::exp(-1.0)) <= 1e-10);
    const AkmParams p(2.5, 1.7, 1.8);
    const double q = oracle::tanh_sinh([&](double r) { return akm_pdf_normalized(p, r); }, 0.0, 1.1, 1e-13);
    CHECK(std::fabs(akm_cdf(p, 1.1) - q) <= 1e-7);
    CHECK(akm_cdf(p, 20.0) >= 1.0 - 1e-8);
    for (double rho : {0.3, 0.8, 1.2, 1.9}) {
        const double h = 1e-5 * rho;
        const double derivative = (akm_cdf(p, rho + h) - akm_cdf(p, rho - h)) / (2.0 * h);
        CHECK(rel(derivative, akm_pdf_normalized(p, rho)) <= 1e-5);
    }
    CHECK_THROWS_AS(akm_cdf(p, -1.0), DomainError);
}

TEST_CASE("akm_cdf Marcum and gamma-series forms agree") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> a(1.0, 4.0), k(0.0, 5.0), m(0.5, 4.0), r(0.05, 2.5);
    for (int i = 0; i < 60; ++i) {
        const AkmParams p(a(gen), k(gen), m(gen));
        const double rho = r(gen);
        CHECK(std::fabs(akm_cdf(p, rho) - akm_cdf_gamma_series(p, rho)) <= 1e-9);
    }
}

TEST_CASE("akm_power_pdf") {
    CHECK(rel(akm_power_pdf(AkmParams(2.0, 1e-12, 1.0), 1.0), std::exp(-1.0)) <= 1e-10);
    const AkmParams p(2.0, 2.0, 2.0);
    CHECK(std::fabs(oracle::exp_sinh([&](double w) { return akm_power_pdf(p, w); }, 1.0, 1e-13) - 1.0) <= 1e-8);
    const AkmParams q(3.1, 0.4, 1.3);
    CHECK(akm_power_pdf(q, 4.0) == doctest::Approx(akm_pdf_normalized(q, 2.0) / 4.0).epsilon(1e-15));
    CHECK(akm_power_pdf(q, 0.0) == 0.0);
    CHECK_THROWS_AS(akm_power_pdf(AkmParams(1.0, 1.0, 0.5), 0.0), DomainError);
    CHECK_THROWS_AS(akm_power_pdf(q, -1.0), DomainError);
}

TEST_CASE("akm moments") {
    CHECK(akm_moment(AkmParams(2.7, 3.0, 1.4), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double m : {0.7, 1.0, 3.3}) CHECK(rel(akm_moment(AkmParams(2.0, 0.0, m), 2.0), 1.0) <= 1e-9);
    for (const AkmParams& p : {AkmParams(2.0, 1.5, 2.1), AkmParams(3.3, 0.7, 0.8), AkmParams(1.2, 4.0, 3.0)}) {
        for (double l : {1.0, 2.0, 3.0, 4.0}) {
            const double quad = oracle::exp_sinh([&](double r) { return std::pow(r, l) * akm_pdf_normalized(p, r); },
                                                 1.0, 1e-14);
            CHECK(rel(akm_moment(p, l), quad) <= 1e-6);
        }
    }
    CHECK_THROWS_AS(akm_moment(AkmParams(2.0, 1.0, 1.0), -1.0), DomainError);
}

TEST_CASE("literal moment expression misses the zeroth moment") {
    const AkmParams p(2.0, 1.5, 2.1);
    CHECK(std::fabs(akm_moment_as_printed(p, 0.0) - 1.0) > 1e-3);
}

TEST_CASE("nakagami_m_equiv") {
    CHECK(nakagami_m_equiv(0.0, 2.3) == doctest::Approx(2.3));
    CHECK(nakagami_m_equiv(1.0, 1.0) == doctest::Approx(4.0 / 3.0));
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> k(0.0, 5.0), m(0.5, 4.0);
    for (int i = 0; i < 20; ++i) {
        const AkmParams p(2.0, k(gen), m(gen));
        const double second = akm_moment(p, 2.0);
        const double fourth = akm_moment(p, 4.0);
        CHECK(rel(second * second / (fourth - second * second), nakagami_m_equiv(p.kappa(), p.mu())) <= 1e-6);
    }
    CHECK_THROWS_AS(nakagami_m_equiv(-1.0, 1.0), DomainError);
}

TEST_CASE("extreme density") {
    const ExtremeParams p(2.0, 1.1);
    for (double rho : {0.05, 0.5, 1.0, 2.0}) {
        const double direct = 4.0 * 1.1 * std::exp(-2.0 * 1.1 * (1.0 + rho * rho)) * std::cyl_bessel_i(1.0, 4.0 * 1.1 * rho);
        CHECK(rel(extreme_pdf_continuous(p, rho), direct) <= 1e-10);
    }
    for (double m : {0.5, 1.1, 2.9}) {
        const Density d = extreme_pdf(ExtremeParams(1.4, m));
        REQUIRE(d.atoms.size() == 1);
        CHECK(d.atoms[0].location == 0.0);
        CHECK(d.atoms[0].mass == doctest::Approx(std::exp(-2.0 * m)).epsilon(1e-15));
    }
    const Density d = extreme_pdf(ExtremeParams(1.7, 0.9));
    CHECK(std::fabs(oracle::exp_sinh(d.continuous, 1.0, 1e-13) - (1.0 - std::exp(-1.8))) <= 1e-7);
    CHECK(extreme_cdf(ExtremeParams(1.7, 0.9), 0.0) == doctest::Approx(std::exp(-1.8)));
    CHECK(extreme_cdf(ExtremeParams(1.7, 0.9), 30.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(extreme_pdf_continuous(p, -0.5), DomainError);
}

TEST_CASE("alpha-mu density") {
    CHECK(rel(am_pdf(AmParams(2.0, 1.0), RmsScale(1.0), 1.0), 2.0 * std::exp(-1.0)) <= 1e-13);
    for (double r : {0.2, 0.9, 1.6}) {
        CHECK(rel(am_pdf(AmParams(3.0, 1.0), RmsScale(1.0), r), 3.0 * r * r * std::exp(-r * r * r)) <= 1e-13);
    }
    CHECK(std::fabs(mass(am_density(AmParams(2.4, 1.7), RmsScale(1.1)), 1.1) - 1.0) <= 1e-8);
    const double q = oracle::tanh_sinh([](double r) { return am_pdf(AmParams(1.8, 0.9), RmsScale(1.3), r); }, 0.0, 1.0);
    CHECK(std::fabs(am_cdf(AmParams(1.8, 0.9), RmsScale(1.3), 1.0) - q) <= 1e-9);
    CHECK_THROWS_AS(am_pdf(AmParams(2.0, 1.0), RmsScale(1.0), -1.0), DomainError);
}

TEST_CASE("gamma shadow density") {
    CHECK(gamma_shadow_pdf(GammaShadowParams(1.0, 2.0), 0.0) == 0.5);
    CHECK(gamma_shadow_pdf(GammaShadowParams(2.0, 1.0), 0.0) == 0.0);
    CHECK(rel(gamma_shadow_pdf(GammaShadowParams(2.0, 1.0), 1.0), std::exp(-1.0)) <= 1e-14);
    CHECK(std::fabs(mass(gamma_shadow_density(GammaShadowParams(1.8, 0.7)), 1.26) - 1.0) <= 1e-9);
    CHECK_THROWS_AS(gamma_shadow_pdf(GammaShadowParams(0.6, 1.0), 0.0), DomainError);
    CHECK_THROWS_AS(gamma_shadow_pdf(GammaShadowParams(2.0, 1.0), -1.0), DomainError);
    CHECK(gamma_shadow_cdf(GammaShadowParams(1.0, 2.0), 2.0) == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("specialize") {
    auto s = specialize(AkmParams(2.0, 0.0, 1.0));
    CHECK(s.model == ClassicalModel::rayleigh);
    s = specialize(AkmParams(2.0, 0.0, 3.0));
    CHECK(s.model == ClassicalModel::nakagami_m);
    CHECK(s.parameter == 3.0);
    s = specialize(AkmParams(2.0, 2.5, 1.0));
    CHECK(s.model == ClassicalModel::rice);
    CHECK(s.parameter == 2.5);
    s = specialize(AkmParams(3.2, 0.0, 1.0));
    CHECK(s.model == ClassicalModel::weibull);
    CHECK(s.parameter == 3.2);
    CHECK(specialize(AkmParams(2.0, 1.2, 1.7)).model == ClassicalModel::kappa_mu);
    CHECK(specialize(AkmParams(2.6, 0.0, 1.7)).model == ClassicalModel::alpha_mu);
    CHECK(specialize(AkmParams(2.6, 0.4, 1.7)).model == ClassicalModel::generic);
    CHECK(to_string(ClassicalModel::rice) == "rice");
}

TEST_CASE("normalization over random draws") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> a(1.0, 4.0), k(0.0, 5.0), mu(0.5, 4.0), m(0.5, 3.0);
    for (int i = 0; i < 10; ++i) {
        CHECK(std::fabs(mass(akm_density(AkmParams(a(gen), k(gen), mu(gen)))) - 1.0) <= 1e-6);
        CHECK(std::fabs(mass(am_density(AmParams(a(gen), mu(gen)))) - 1.0) <= 1e-6);
        CHECK(std::fabs(mass(extreme_pdf(ExtremeParams(a(gen), m(gen)))) - 1.0) <= 1e-6);
    }
    CHECK(std::fabs(total_mass(extreme_pdf(ExtremeParams(2.0, 1.1))) - 1.0) <= 1e-8);
}
