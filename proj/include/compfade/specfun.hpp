#pragma once

// Scalar special functions used by the fading models. All functions are pure
// and thread-safe; arguments outside the supported domain raise DomainError.

namespace compfade::specfun {

/// ln Γ(x) for x > 0.
double ln_gamma(double x);

/// Modified Bessel function of the first kind I_ν(x), ν > -1, x ≥ 0.
/// Throws OverflowError if the value exceeds the double range.
double bessel_i(double nu, double x);

/// e^{-x} I_ν(x). Finite for every x ≥ 0 (except ν < 0 at x = 0).
double bessel_i_scaled(double nu, double x);

/// ln I_ν(x); -inf at x = 0 when ν > 0.
double log_bessel_i(double nu, double x);

/// Degree-n polynomial surrogate for I_ν built from Γ(n+l) n^{1-2l}/Γ(n-l+1)
/// weighted series terms. Tends to bessel_i as n grows.
double bessel_i_gross(double nu, double x, int n);

struct GammaPQ {
    double p;  ///< regularized lower incomplete gamma P(a, x)
    double q;  ///< regularized upper incomplete gamma Q(a, x)
};

/// Both regularized incomplete gamma ratios; the smaller one is computed
/// directly so neither suffers from cancellation in its own tail.
GammaPQ reg_gamma(double a, double x);

double reg_upper_gamma(double a, double x);
double reg_lower_gamma(double a, double x);

struct MarcumPQ {
    double q;  ///< Q_μ(a, b)
    double p;  ///< 1 - Q_μ(a, b)
};

/// Generalized Marcum Q-function as a Poisson(a²/2)-weighted sum of
/// regularized upper incomplete gamma functions of order μ+i at b²/2.
double marcum_q(double mu, double a, double b);

/// Marcum Q together with its complement, each accurate in its own tail.
MarcumPQ marcum_q_pair(double mu, double a, double b);

/// Kummer confluent hypergeometric 1F1(a; b; x) for a > 0, b > 0, x ≥ 0.
double kummer_1f1(double a, double b, double x);

/// ln 1F1(a; b; x) on the same domain; never overflows.
double log_kummer_1f1(double a, double b, double x);

}  // namespace compfade::specfun
