#pragma once

#include <cstddef>
#include <functional>

namespace compfade::numerics {

using Integrand = std::function<double(double)>;

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct QuadratureOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::size_t budget = 200000;  // integrand evaluations
    double scale = 1.0;           // u = scale · t/(1-t); put it near the bulk of the integrand
    int initial_intervals = 8;
};

/// ∫₀^∞ f(u) du. The half-line is mapped onto (0,1) by u = s·t/(1-t) and the
/// result refined by globally adaptive 7/15-point Gauss-Kronrod bisection.
/// Never evaluates f at 0 or ∞. A NaN from f raises EvaluationError; running
/// out of budget returns converged == false with the best estimate so far.
QuadratureResult integrate_semi_infinite(const Integrand& f, const QuadratureOptions& options = {});

QuadratureResult integrate_semi_infinite(const Integrand& f, double rel_tol, double abs_tol, std::size_t budget);

/// ∫_a^b f(x) dx on a finite interval with the same adaptive rule.
QuadratureResult integrate_interval(const Integrand& f, double a, double b, const QuadratureOptions& options = {});

/// Throws ConvergenceError naming `what` unless the result converged.
double require_converged(const QuadratureResult& r, const char* what);

struct SeriesResult {
    double value = 0.0;
    std::size_t terms_used = 0;
    double last_term_magnitude = 0.0;
    bool converged = false;
};

using SeriesTerm = std::function<double(std::size_t)>;

/// Σ_{i≥0} term(i), stopping once `consecutive` successive terms each satisfy
/// |term| ≤ rel_tol·|partial sum|. Returns converged == false at max_terms.
SeriesResult sum_adaptive(const SeriesTerm& term, double rel_tol, std::size_t max_terms, int consecutive = 3);

}  // namespace compfade::numerics
