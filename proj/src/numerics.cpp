#include "compfade/numerics.hpp"

#include "compfade/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace compfade::numerics {
namespace {

// 15-point Kronrod abscissae (descending, positive half) and weights; the
// 7-point Gauss rule uses the odd-indexed abscissae.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kMin = std::numeric_limits<double>::min();

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

double checked(const Integrand& f, double x) {
    const double y = f(x);
    if (std::isnan(y)) {
        throw EvaluationError("integrand returned NaN at x=" + std::to_string(x));
    }
    return y;
}

Segment gauss_kronrod(const Integrand& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = checked(f, center);
    double res_g = f_center * kWg[3];
    double res_k = f_center * kWgk[7];
    double res_abs = std::fabs(res_k);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = checked(f, center - dx);
        f2[j] = checked(f, center + dx);
        const double pair = f1[j] + f2[j];
        res_k += kWgk[j] * pair;
        res_abs += kWgk[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
        if (j % 2 == 1) {
            res_g += kWg[j / 2] * pair;
        }
    }
    const double mean = 0.5 * res_k;
    double res_asc = kWgk[7] * std::fabs(f_center - mean);
    for (int j = 0; j < 7; ++j) {
        res_asc += kWgk[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));
    }
    const double scale = std::fabs(half);
    res_asc *= scale;
    res_abs *= scale;
    double err = std::fabs((res_k - res_g) * half);
    if (res_asc != 0.0 && err != 0.0) {
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    }
    if (res_abs > kMin / (50.0 * kEps)) {
        err = std::max(50.0 * kEps * res_abs, err);
    }
    return {a, b, res_k * half, err};
}

QuadratureResult adaptive(const Integrand& f, double a, double b, const QuadratureOptions& opt) {
    if (!(opt.rel_tol >= 0.0) || !(opt.abs_tol >= 0.0) || (opt.rel_tol == 0.0 && opt.abs_tol == 0.0)) {
        throw DomainError("quadrature: tolerances must be non-negative and not both zero");
    }
    constexpr std::size_t kPerRule = 15;
    const int pieces = std::max(1, opt.initial_intervals);
    if (opt.budget < kPerRule * static_cast<std::size_t>(pieces)) {
        throw DomainError("quadrature: budget too small for the initial subdivision");
    }

    std::priority_queue<Segment> heap;
    QuadratureResult result;
    double value = 0.0;
    double error = 0.0;
    const double width = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + i * width;
        const double hi = (i + 1 == pieces) ? b : a + (i + 1) * width;
        Segment s = gauss_kronrod(f, lo, hi);
        result.evaluations += kPerRule;
        value += s.value;
        error += s.error;
        heap.push(s);
    }

    auto tolerance = [&](double v) { return std::max(opt.abs_tol, opt.rel_tol * std::fabs(v)); };

    // Segments too narrow to bisect in double precision keep their error
    // contribution but leave the refinement queue.
    std::vector<Segment> frozen;
    bool converged = error <= tolerance(value);
    while (!converged && !heap.empty()) {
        if (result.evaluations + 2 * kPerRule > opt.budget) break;
        const Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 16.0 * kEps * std::fabs(mid)) {
            heap.pop();
            frozen.push_back(worst);
            continue;
        }
        heap.pop();
        const Segment left = gauss_kronrod(f, worst.a, mid);
        const Segment right = gauss_kronrod(f, mid, worst.b);
        result.evaluations += 2 * kPerRule;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        converged = error <= tolerance(value);
    }

    // Re-accumulate to remove drift from the running updates.
    value = 0.0;
    error = 0.0;
    std::vector<Segment> segments = std::move(frozen);
    segments.reserve(segments.size() + heap.size());
    while (!heap.empty()) {
        segments.push_back(heap.top());
        heap.pop();
    }
    std::sort(segments.begin(), segments.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
    for (const auto& s : segments) {
        value += s.value;
        error += s.error;
    }
    result.value = value;
    result.error_estimate = error;
    result.converged = error <= tolerance(value);
    return result;
}

}  // namespace

QuadratureResult integrate_interval(const Integrand& f, double a, double b, const QuadratureOptions& options) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("integrate_interval: limits must be finite");
    }
    if (a == b) {
        return {0.0, 0.0, 0, true};
    }
    if (b < a) {
        auto r = adaptive(f, b, a, options);
        r.value = -r.value;
        return r;
    }
    return adaptive(f, a, b, options);
}

QuadratureResult integrate_semi_infinite(const Integrand& f, const QuadratureOptions& options) {
    const double s = options.scale;
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw DomainError("integrate_semi_infinite: scale must be finite and > 0");
    }
    const Integrand mapped = [&f, s](double t) {
        const double one_minus = 1.0 - t;
        const double u = s * t / one_minus;
        if (!std::isfinite(u)) return 0.0;
        const double fu = f(u);
        if (fu == 0.0) return 0.0;
        return fu * s / (one_minus * one_minus);
    };
    return adaptive(mapped, 0.0, 1.0, options);
}

QuadratureResult integrate_semi_infinite(const Integrand& f, double rel_tol, double abs_tol, std::size_t budget) {
    QuadratureOptions options;
    options.rel_tol = rel_tol;
    options.abs_tol = abs_tol;
    options.budget = budget;
    return integrate_semi_infinite(f, options);
}

double require_converged(const QuadratureResult& r, const char* what) {
    if (!r.converged) {
        throw ConvergenceError(std::string(what) + ": quadrature did not converge (estimate " +
                               std::to_string(r.value) + ", error " + std::to_string(r.error_estimate) + ", " +
                               std::to_string(r.evaluations) + " evaluations)");
    }
    return r.value;
}

SeriesResult sum_adaptive(const SeriesTerm& term, double rel_tol, std::size_t max_terms, int consecutive) {
    if (!(rel_tol > 0.0)) {
        throw DomainError("sum_adaptive: rel_tol must be > 0");
    }
    if (consecutive < 1) {
        throw DomainError("sum_adaptive: consecutive must be >= 1");
    }
    SeriesResult result;
    double sum = 0.0;
    double compensation = 0.0;
    int small_run = 0;
    for (std::size_t i = 0; i < max_terms; ++i) {
        const double t = term(i);
        if (std::isnan(t)) {
            throw EvaluationError("sum_adaptive: term " + std::to_string(i) + " is NaN");
        }
        // Kahan-Babuska summation keeps long alternating sums honest.
        const double next = sum + t;
        if (std::fabs(sum) >= std::fabs(t)) {
            compensation += (sum - next) + t;
        } else {
            compensation += (t - next) + sum;
        }
        sum = next;
        result.terms_used = i + 1;
        result.last_term_magnitude = std::fabs(t);
        if (std::fabs(t) <= rel_tol * std::fabs(sum + compensation)) {
            if (++small_run >= consecutive) {
                result.value = sum + compensation;
                result.converged = true;
                return result;
            }
        } else {
            small_run = 0;
        }
    }
    result.value = sum + compensation;
    result.converged = false;
    return result;
}

}  // namespace compfade::numerics
