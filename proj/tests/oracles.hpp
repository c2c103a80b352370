#pragma once

// Test-only reference routines. Nothing here calls into the library's
// numerics, so agreement with it is meaningful.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// Double-exponential rule on (0, ∞): x = s·exp(π/2·sinh t), step halving
// until two levels agree.
inline double exp_sinh(const std::function<double(double)>& f, double s = 1.0, double rel = 1e-12) {
    const double pi2 = std::numbers::pi / 2.0;
    auto level = [&](double h, bool odd_only) {
        double sum = 0.0;
        const double step = odd_only ? 2.0 * h : h;
        for (int dir : {1, -1}) {
            for (double t = odd_only ? h : (dir == 1 ? 0.0 : h); t <= 4.5; t += step) {
                const double tt = dir * t;
                const double x = s * std::exp(pi2 * std::sinh(tt));
                const double w = s * pi2 * std::cosh(tt) * std::exp(pi2 * std::sinh(tt));
                if (x == 0.0 || !std::isfinite(x) || !std::isfinite(w)) continue;
                const double v = f(x);
                if (std::isfinite(v)) sum += v * w;
            }
        }
        return sum;
    };
    double h = 0.5;
    double total = level(h, false) * h;
    for (int k = 0; k < 10; ++k) {
        const double previous = total;
        h /= 2.0;
        total = total / 2.0 + level(h, true) * h;
        if (std::fabs(total - previous) <= rel * std::fabs(total)) break;
    }
    return total;
}

// Tanh-sinh on [a, b].
inline double tanh_sinh(const std::function<double(double)>& f, double a, double b, double rel = 1e-12) {
    const double c = (a + b) / 2.0;
    const double r = (b - a) / 2.0;
    const double pi2 = std::numbers::pi / 2.0;
    auto level = [&](double h, bool odd_only) {
        double sum = 0.0;
        const double step = odd_only ? 2.0 * h : h;
        for (double t = odd_only ? h : 0.0; t <= 3.5; t += step) {
            for (int dir : {1, -1}) {
                if (t == 0.0 && dir == -1) continue;
                const double u = pi2 * std::sinh(dir * t);
                const double w = pi2 * std::cosh(dir * t) / (std::cosh(u) * std::cosh(u));
                const double complement = 1.0 / (std::exp(2.0 * std::fabs(u)) + 1.0) * 2.0;
                const double x = dir * t >= 0.0 ? b - r * complement : a + r * complement;
                if (!(x > a && x < b) || w == 0.0) continue;
                sum += f(x) * w;
            }
        }
        return sum * r;
    };
    double h = 0.5;
    double total = level(h, false) * h;
    for (int k = 0; k < 10; ++k) {
        const double previous = total;
        h /= 2.0;
        total = total / 2.0 + level(h, true) * h;
        if (std::fabs(total - previous) <= rel * std::fabs(total)) break;
    }
    return total;
}

// I_ν(z) for any real ν, through the reflection formula when ν < 0.
inline double bessel_i(double nu, double z) {
    if (nu >= 0.0) return std::cyl_bessel_i(nu, z);
    const double a = -nu;
    return std::cyl_bessel_i(a, z) + 2.0 / std::numbers::pi * std::sin(a * std::numbers::pi) * std::cyl_bessel_k(a, z);
}

// ln I_ν(z): the standard library below z = 500, Hankel's expansion above.
inline double log_bessel_i(double nu, double z) {
    if (z < 500.0) return std::log(bessel_i(nu, z));
    const double m4 = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 12; ++k) {
        term *= -(m4 - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * z);
        sum += term;
    }
    return z - 0.5 * std::log(2.0 * std::numbers::pi * z) + std::log(sum);
}

// Direct κ-μ envelope density at unit rms.
inline double kappa_mu_pdf(double kappa, double mu, double rho) {
    if (rho == 0.0) return 0.0;
    const double log_pref = std::log(2.0 * mu) + (mu + 1.0) / 2.0 * std::log1p(kappa) - (mu - 1.0) / 2.0 * std::log(kappa) -
                            mu * kappa + mu * std::log(rho) - mu * (1.0 + kappa) * rho * rho;
    const double z = 2.0 * mu * std::sqrt(kappa * (1.0 + kappa)) * rho;
    return std::exp(log_pref + log_bessel_i(mu - 1.0, z));
}

inline double gamma_pdf(double b, double omega, double y) {
    return std::exp((b - 1.0) * std::log(y) - y / omega - std::lgamma(b) - b * std::log(omega));
}

// Rayleigh/gamma (K-distribution) density by nesting two quadratures.
inline double k_distribution_pdf(double b, double omega, double r) {
    return exp_sinh(
        [&](double y) { return 2.0 * r / (y * y) * std::exp(-r * r / (y * y)) * gamma_pdf(b, omega, y); },
        b * omega, 1e-13);
}

}  // namespace oracle
