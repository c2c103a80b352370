#include "compfade/mc.hpp"

#include "compfade/errors.hpp"
#include "compfade/numerics.hpp"
#include "compfade/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace compfade::mc {
namespace {

double draw_akm_unit(const AkmParams& p, Rng& rng) {
    const double n = static_cast<double>(rng.poisson(p.mu() * p.kappa()));
    const double g = rng.gamma(p.mu() + n);
    return std::pow(g / (p.mu() * (1.0 + p.kappa())), 1.0 / p.alpha());
}

double draw_am_unit(const AmParams& p, Rng& rng) {
    return std::pow(rng.gamma(p.mu()) / p.mu(), 1.0 / p.alpha());
}

double draw_extreme_unit(const ExtremeParams& p, Rng& rng) {
    const std::uint64_t n = rng.poisson(2.0 * p.m());
    if (n == 0) return 0.0;
    const double g = rng.gamma(static_cast<double>(n)) / (2.0 * p.m());
    return std::pow(g, 1.0 / p.alpha());
}

double draw_unit(const MultipathParams& mp, Rng& rng) {
    return std::visit(
        [&rng](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AkmParams>) {
                return draw_akm_unit(p, rng);
            } else if constexpr (std::is_same_v<T, AmParams>) {
                return draw_am_unit(p, rng);
            } else {
                return draw_extreme_unit(p, rng);
            }
        },
        mp);
}

template <class Draw>
SampleBatch fill(const Model& m, std::size_t count, std::uint64_t seed, Draw draw) {
    SampleBatch batch;
    batch.seed = seed;
    batch.model_descriptor = describe(m).dump();
    batch.values.resize(count);
    Rng rng(seed);
    for (auto& v : batch.values) v = draw(rng);
    return batch;
}

double kolmogorov_cdf_small(double t) {
    // √(2π)/t Σ_k exp(-(2k-1)²π²/(8t²)), accurate for small t.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * t * t);
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
        const double term = std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * c);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return std::sqrt(2.0 * std::numbers::pi) / t * sum;
}

// Cumulative distribution of the continuous part, tabulated at `nodes` by
// segment-wise quadrature and interpolated with cubic Hermite pieces whose
// slopes are the density itself.
class ContinuousCdf {
public:
    ContinuousCdf(const std::function<double(double)>& f, std::vector<double> nodes) : f_(f), x_(std::move(nodes)) {
        numerics::QuadratureOptions opt;
        opt.rel_tol = 1e-11;
        opt.abs_tol = 1e-15;
        opt.initial_intervals = 1;
        opt.budget = 100000;
        c_.resize(x_.size());
        d_.resize(x_.size());
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t j = 0; j < x_.size(); ++j) {
            acc += numerics::require_converged(numerics::integrate_interval(f_, prev, x_[j], opt), "gof cdf segment");
            c_[j] = acc;
            d_[j] = f_(x_[j]);
            prev = x_[j];
        }
        numerics::QuadratureOptions tail_opt;
        tail_opt.rel_tol = 1e-10;
        tail_opt.abs_tol = 1e-15;
        tail_opt.scale = std::max(x_.back(), 1e-300);
        const double last = x_.back();
        const auto shifted = [this, last](double u) { return f_(last + u); };
        tail_ = numerics::require_converged(numerics::integrate_semi_infinite(shifted, tail_opt), "gof cdf tail");
    }

    double mass() const { return c_.back() + tail_; }

    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        if (x < x_.front()) return integrate(0.0, x);
        if (x >= x_.back()) return c_.back() + integrate(x_.back(), x);
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - x_.begin()) - 1;
        const double h = x_[j + 1] - x_[j];
        const double t = (x - x_[j]) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * c_[j] + (t3 - 2 * t2 + t) * h * d_[j] + (-2 * t3 + 3 * t2) * c_[j + 1] +
               (t3 - t2) * h * d_[j + 1];
    }

private:
    double integrate(double a, double b) const {
        numerics::QuadratureOptions opt;
        opt.rel_tol = 1e-11;
        opt.abs_tol = 1e-15;
        opt.initial_intervals = 1;
        return numerics::require_converged(numerics::integrate_interval(f_, a, b, opt), "gof cdf");
    }

    const std::function<double(double)>& f_;
    std::vector<double> x_;
    std::vector<double> c_;
    std::vector<double> d_;
    double tail_ = 0.0;
};

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u;
    double v;
    double s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw DomainError("Rng::gamma: shape must be finite and > 0");
    }
    if (shape < 1.0) {
        // Gamma(a) = Gamma(a+1)·U^{1/a}, combined in logs so tiny shapes underflow to 0 cleanly.
        const double g = gamma(shape + 1.0);
        return std::exp(std::log(g) + std::log(uniform()) / shape);
    }
    // Marsaglia-Tsang squeeze/rejection.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::uint64_t Rng::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw DomainError("Rng::poisson: mean must be finite and >= 0");
    }
    if (mean == 0.0) return 0;
    if (mean <= 30.0) {
        const double u = uniform();
        double p = std::exp(-mean);
        double cumulative = p;
        std::uint64_t k = 0;
        while (u > cumulative) {
            ++k;
            p *= mean / static_cast<double>(k);
            if (p == 0.0) break;
            cumulative += p;
        }
        return k;
    }
    // Hörmann's transformed rejection with squeeze (PTRS).
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - specfun::ln_gamma(k + 1.0)) {
            return static_cast<std::uint64_t>(k);
        }
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SampleBatch sample_akm(const AkmParams& p, std::size_t count, std::uint64_t seed, const RmsScale& s) {
    return sample(MultipathModel{p, s}, count, seed);
}

SampleBatch sample_am(const AmParams& p, std::size_t count, std::uint64_t seed, const RmsScale& s) {
    return sample(MultipathModel{p, s}, count, seed);
}

SampleBatch sample_extreme(const ExtremeParams& p, std::size_t count, std::uint64_t seed, const RmsScale& s) {
    return sample(MultipathModel{p, s}, count, seed);
}

SampleBatch sample_gamma_shadow(const GammaShadowParams& g, std::size_t count, std::uint64_t seed) {
    return sample(g, count, seed);
}

SampleBatch sample_composite(const CompositeModel& m, std::size_t count, std::uint64_t seed) {
    return sample(m, count, seed);
}

SampleBatch sample(const Model& m, std::size_t count, std::uint64_t seed) {
    if (const auto* mm = std::get_if<MultipathModel>(&m)) {
        const double scale = mm->rhat.value();
        const auto& params = mm->params;
        return fill(m, count, seed, [&](Rng& rng) { return scale * draw_unit(params, rng); });
    }
    if (const auto* g = std::get_if<GammaShadowParams>(&m)) {
        const double omega = g->omega();
        const double b = g->b();
        return fill(m, count, seed, [=](Rng& rng) { return omega * rng.gamma(b); });
    }
    const auto& c = std::get<CompositeModel>(m);
    const double omega = c.shadow.omega();
    const double b = c.shadow.b();
    return fill(m, count, seed, [&](Rng& rng) {
        const double y = omega * rng.gamma(b);
        return y * draw_unit(c.multipath, rng);
    });
}

SampleBatch sample_partitioned(const Model& m, std::size_t count, std::uint64_t seed, unsigned partitions,
                               unsigned threads) {
    if (partitions == 0) throw DomainError("sample_partitioned: partitions must be >= 1");
    threads = std::clamp(threads, 1u, partitions);
    std::vector<std::vector<double>> blocks(partitions);
    std::vector<std::exception_ptr> errors(partitions);
    auto work = [&](unsigned first) {
        for (unsigned k = first; k < partitions; k += threads) {
            try {
                const std::size_t size = count / partitions + (k < count % partitions ? 1 : 0);
                blocks[k] = sample(m, size, derive_seed(seed, k)).values;
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
        work(0);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    SampleBatch batch;
    batch.seed = seed;
    batch.model_descriptor = describe(m).dump();
    batch.values.reserve(count);
    for (const auto& block : blocks) batch.values.insert(batch.values.end(), block.begin(), block.end());
    return batch;
}

GofReport gof_compare(const SampleBatch& batch, const Density& density, const GofOptions& options) {
    if (batch.values.empty()) throw DomainError("gof_compare: empty sample batch");
    std::vector<double> nonzero;
    nonzero.reserve(batch.values.size());
    for (const double v : batch.values) {
        if (!(v >= 0.0)) throw DomainError("gof_compare: samples must be >= 0");
        if (v > 0.0) nonzero.push_back(v);
    }
    std::sort(nonzero.begin(), nonzero.end());

    GofReport report;
    report.sample_size = batch.values.size();
    report.nonzero_count = nonzero.size();
    const double n = static_cast<double>(batch.values.size());
    report.atom_frequency_observed = static_cast<double>(batch.values.size() - nonzero.size()) / n;
    report.atom_mass_expected = density.atom_mass();
    const double q = report.atom_mass_expected;
    report.atom_standard_error = std::sqrt(q * (1.0 - q) / n);

    const auto check_mass = [&](double mass) {
        if (options.check_normalization && !(std::fabs(mass - 1.0) <= options.mass_tolerance)) {
            throw DomainError("gof_compare: density mass " + std::to_string(mass) + " is not 1");
        }
    };
    if (nonzero.empty()) {
        check_mass(total_mass(density, options.scale));
        report.ks_defined = false;
        return report;
    }

    const std::size_t nodes = std::max<std::size_t>(2, std::min(options.cdf_nodes, nonzero.size()));
    std::vector<double> grid;
    grid.reserve(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        const std::size_t idx = (nonzero.size() - 1) * j / (nodes - 1);
        if (grid.empty() || nonzero[idx] > grid.back()) grid.push_back(nonzero[idx]);
    }
    const ContinuousCdf cdf(density.continuous, std::move(grid));
    check_mass(cdf.mass() + report.atom_mass_expected);
    const double continuous_mass = 1.0 - report.atom_mass_expected;
    report.ks_statistic = ks_statistic(nonzero, [&](double x) { return cdf(x) / continuous_mass; });
    report.ks_defined = true;
    report.ks_critical = ks_critical_value(1e-3, nonzero.size());
    return report;
}

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return std::min(d, 1.0);
}

double kolmogorov_survival(double t) {
    if (t <= 0.0) return 1.0;
    if (t < 1.0) return 1.0 - kolmogorov_cdf_small(t);
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_value(double level, std::size_t n) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("ks_critical_value: level must be in (0,1)");
    if (n == 0) throw DomainError("ks_critical_value: n must be >= 1");
    double lo = 0.1;
    double hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_survival(mid) > level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

}  // namespace compfade::mc
