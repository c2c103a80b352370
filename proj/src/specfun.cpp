#include "compfade/specfun.hpp"

#include "compfade/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace compfade {
namespace detail {

void throw_domain(const std::string& where, const std::string& what) {
    throw DomainError(where + ": " + what);
}

void require_finite(double v, const char* where, const char* name) {
    if (!std::isfinite(v)) {
        throw_domain(where, std::string(name) + " must be finite");
    }
}

void require_positive(double v, const char* where, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw_domain(where, std::string(name) + " must be a finite value > 0 (got " + std::to_string(v) + ")");
    }
}

void require_non_negative(double v, const char* where, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw_domain(where, std::string(name) + " must be a finite value >= 0 (got " + std::to_string(v) + ")");
    }
}

}  // namespace detail

namespace specfun {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogMax = 709.78;  // ln(DBL_MAX)
constexpr int kMaxIterations = 200000;

// ln Σ_{k≥0} t_k with t_0 = 1 and t_{k+1} = t_k · ratio(k). The terms are
// positive; the partial sum is rescaled whenever it grows large so the log
// stays finite for any argument. `ratio` must become and stay decreasing.
template <class Ratio>
double log_positive_series(Ratio ratio, const char* where) {
    constexpr double kRescale = 1e250;
    const double log_rescale = std::log(kRescale);
    double sum = 1.0;
    double term = 1.0;
    double shift = 0.0;
    double prev_ratio = kInf;
    for (int k = 0; k < kMaxIterations; ++k) {
        const double r = ratio(k);
        term *= r;
        sum += term;
        if (sum > kRescale) {
            sum /= kRescale;
            term /= kRescale;
            shift += log_rescale;
        }
        const bool decreasing = r < 1.0 && r <= prev_ratio;
        prev_ratio = r;
        if (decreasing) {
            const double next = ratio(k + 1);
            if (next <= r && term * next / (1.0 - next) <= 0.25 * kEps * sum) {
                return std::log(sum) + shift;
            }
        }
    }
    throw ConvergenceError(std::string(where) + ": series did not converge");
}

// Hankel expansion of e^{-x} I_ν(x); accurate when x ≫ max(ν², 1).
double bessel_i_scaled_asymptotic(double nu, double x) {
    const double four_nu2 = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev = kInf;
    for (int j = 1; j < 500; ++j) {
        const double odd = 2.0 * j - 1.0;
        term *= -(four_nu2 - odd * odd) / (8.0 * j * x);
        const double mag = std::fabs(term);
        if (mag > prev) {
            break;  // series began to diverge; minimal term reached
        }
        sum += term;
        prev = mag;
        if (mag <= 0.25 * kEps * std::fabs(sum)) {
            break;
        }
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

bool use_asymptotic(double nu, double x) {
    return x >= nu + 20.0 && x >= nu * nu;
}

void check_bessel_args(double nu, double x, const char* where) {
    detail::require_finite(nu, where, "order nu");
    if (!(nu > -1.0)) {
        detail::throw_domain(where, "order nu must exceed -1");
    }
    detail::require_non_negative(x, where, "x");
}

// ln I_ν(x) for x > 0 via the power series.
double log_bessel_i_series(double nu, double x) {
    const double q = 0.25 * x * x;
    const double lead = nu * std::log(0.5 * x) - ln_gamma(nu + 1.0);
    const double tail = log_positive_series(
        [q, nu](int k) { return q / ((k + 1.0) * (nu + k + 1.0)); }, "bessel_i");
    return lead + tail;
}

}  // namespace

double ln_gamma(double x) {
    if (!(x > 0.0) || std::isnan(x)) {
        detail::throw_domain("ln_gamma", "argument must be > 0 (got " + std::to_string(x) + ")");
    }
    if (std::isinf(x)) {
        return kInf;
    }
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double log_bessel_i(double nu, double x) {
    check_bessel_args(nu, x, "log_bessel_i");
    if (x == 0.0) {
        if (nu == 0.0) return 0.0;
        return nu > 0.0 ? -kInf : kInf;
    }
    if (use_asymptotic(nu, x)) {
        return x + std::log(bessel_i_scaled_asymptotic(nu, x));
    }
    return log_bessel_i_series(nu, x);
}

double bessel_i_scaled(double nu, double x) {
    check_bessel_args(nu, x, "bessel_i_scaled");
    if (x == 0.0) {
        if (nu == 0.0) return 1.0;
        if (nu > 0.0) return 0.0;
        throw OverflowError("bessel_i_scaled: I_nu(0) is infinite for nu < 0");
    }
    if (use_asymptotic(nu, x)) {
        return bessel_i_scaled_asymptotic(nu, x);
    }
    return std::exp(log_bessel_i_series(nu, x) - x);
}

double bessel_i(double nu, double x) {
    check_bessel_args(nu, x, "bessel_i");
    if (x == 0.0) {
        if (nu == 0.0) return 1.0;
        if (nu > 0.0) return 0.0;
        throw OverflowError("bessel_i: I_nu(0) is infinite for nu < 0");
    }
    const double log_value = log_bessel_i(nu, x);
    if (log_value > kLogMax) {
        throw OverflowError("bessel_i: result exceeds double range at x=" + std::to_string(x));
    }
    return std::exp(log_value);
}

double bessel_i_gross(double nu, double x, int n) {
    check_bessel_args(nu, x, "bessel_i_gross");
    if (n < 1) {
        detail::throw_domain("bessel_i_gross", "polynomial degree n must be >= 1");
    }
    if (x == 0.0) {
        if (nu == 0.0) return 1.0;  // only the l = 0 term survives and its weight is 1
        if (nu > 0.0) return 0.0;
        throw OverflowError("bessel_i_gross: value is infinite at x = 0 for nu < 0");
    }
    const double log_half_x = std::log(0.5 * x);
    const double log_n = std::log(static_cast<double>(n));
    double sum = 0.0;
    for (int l = 0; l <= n; ++l) {
        const double log_term = ln_gamma(n + l) + (1.0 - 2.0 * l) * log_n - ln_gamma(l + 1.0) -
                                ln_gamma(n - l + 1.0) - ln_gamma(nu + l + 1.0) + (nu + 2.0 * l) * log_half_x;
        sum += std::exp(log_term);
    }
    if (!std::isfinite(sum)) {
        throw OverflowError("bessel_i_gross: result exceeds double range");
    }
    return sum;
}

GammaPQ reg_gamma(double a, double x) {
    detail::require_positive(a, "reg_gamma", "a");
    if (std::isnan(x) || x < 0.0) {
        detail::throw_domain("reg_gamma", "x must be >= 0");
    }
    if (x == 0.0) return {0.0, 1.0};
    if (std::isinf(x)) return {1.0, 0.0};

    const double log_prefactor = a * std::log(x) - x - ln_gamma(a);
    if (x < a + 1.0) {
        // P(a,x) = x^a e^{-x}/Γ(a) Σ x^n / (a (a+1) ... (a+n))
        double del = 1.0 / a;
        double sum = del;
        for (int n = 1; n < kMaxIterations; ++n) {
            del *= x / (a + n);
            sum += del;
            if (del < sum * 0.25 * kEps) {
                const double p = std::exp(log_prefactor + std::log(sum));
                return {p, 1.0 - p};
            }
        }
        throw ConvergenceError("reg_gamma: series did not converge");
    }
    // Modified Lentz evaluation of the continued fraction for Q(a,x).
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 0.25 * kEps) {
            const double q = std::exp(log_prefactor + std::log(h));
            return {1.0 - q, q};
        }
    }
    throw ConvergenceError("reg_gamma: continued fraction did not converge");
}

double reg_upper_gamma(double a, double x) {
    return reg_gamma(a, x).q;
}

double reg_lower_gamma(double a, double x) {
    return reg_gamma(a, x).p;
}

namespace {

// ln of the Chernoff bound on Pr[N ≥ n] for N ~ Poisson(lambda), n > lambda.
double log_poisson_upper_tail(double lambda, double n) {
    return -lambda + n * (1.0 + std::log(lambda) - std::log(n));
}

}  // namespace

MarcumPQ marcum_q_pair(double mu, double a, double b) {
    detail::require_positive(mu, "marcum_q", "order mu");
    detail::require_non_negative(a, "marcum_q", "a");
    detail::require_non_negative(b, "marcum_q", "b");

    const double lambda = 0.5 * a * a;
    const double y = 0.5 * b * b;
    if (y == 0.0) return {1.0, 0.0};
    if (lambda == 0.0) {
        const auto g = reg_gamma(mu, y);
        return {g.q, g.p};
    }

    const double log_lambda = std::log(lambda);
    constexpr double kRelTail = 1e-17;
    const int cap = static_cast<int>(lambda + 60.0 * std::sqrt(lambda + 1.0)) + 4000;

    if (y < lambda + mu) {
        // Below the bulk: the complement is the small quantity, summed directly.
        // P(μ+i, y) decreases in i, so the Poisson tail times the current P bounds the rest.
        double log_w = -lambda;
        double sum = 0.0;
        for (int i = 0; i < cap; ++i) {
            const double p_i = reg_gamma(mu + i, y).p;
            sum += std::exp(log_w) * p_i;
            const double n = i + 1.0;
            if (n > lambda) {
                const double tail = std::exp(log_poisson_upper_tail(lambda, n)) * p_i;
                if (tail <= kRelTail * sum) {
                    return {1.0 - sum, sum};
                }
            }
            log_w += log_lambda - std::log(n);
        }
        throw ConvergenceError("marcum_q: complement series did not converge");
    }

    // Above the bulk: sum Q directly with the upward recurrence
    // Q(s+1, y) = Q(s, y) + y^s e^{-y} / Γ(s+1), which only adds positive terms.
    double q_i = reg_gamma(mu, y).q;
    const double log_y = std::log(y);
    double log_w = -lambda;
    double sum = 0.0;
    for (int i = 0; i < cap; ++i) {
        sum += std::exp(log_w) * q_i;
        const double n = i + 1.0;
        if (n > lambda) {
            const double tail = std::exp(log_poisson_upper_tail(lambda, n));
            if (tail <= kRelTail * sum) {
                return {sum, 1.0 - sum};
            }
        }
        const double s = mu + i;
        q_i += std::exp(s * log_y - y - ln_gamma(s + 1.0));
        if (q_i > 1.0) q_i = 1.0;
        log_w += log_lambda - std::log(n);
    }
    throw ConvergenceError("marcum_q: series did not converge");
}

double marcum_q(double mu, double a, double b) {
    return marcum_q_pair(mu, a, b).q;
}

double log_kummer_1f1(double a, double b, double x) {
    detail::require_positive(a, "kummer_1f1", "a");
    detail::require_positive(b, "kummer_1f1", "b");
    detail::require_non_negative(x, "kummer_1f1", "x");
    if (x == 0.0) return 0.0;
    return log_positive_series([a, b, x](int k) { return (a + k) * x / ((b + k) * (k + 1.0)); },
                               "kummer_1f1");
}

double kummer_1f1(double a, double b, double x) {
    const double log_value = log_kummer_1f1(a, b, x);
    if (log_value > kLogMax) {
        throw OverflowError("kummer_1f1: result exceeds double range");
    }
    return std::exp(log_value);
}

}  // namespace specfun
}  // namespace compfade
