#pragma once

#include "compfade/model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace compfade::mc {

/// Seedable generator with its own variate algorithms, so a seed produces
/// the same stream under every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    double normal();
    /// Gamma(shape, rate 1); any shape > 0.
    double gamma(double shape);
    /// Poisson(mean); inversion for mean ≤ 30, PTRS rejection above.
    std::uint64_t poisson(double mean);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 mix of (seed, stream): the seed of partition `stream`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct SampleBatch {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::string model_descriptor;  ///< compact JSON of the model parameters
};

SampleBatch sample_akm(const AkmParams& p, std::size_t count, std::uint64_t seed,
                       const RmsScale& s = RmsScale(1.0));
SampleBatch sample_am(const AmParams& p, std::size_t count, std::uint64_t seed,
                      const RmsScale& s = RmsScale(1.0));
SampleBatch sample_extreme(const ExtremeParams& p, std::size_t count, std::uint64_t seed,
                           const RmsScale& s = RmsScale(1.0));
SampleBatch sample_gamma_shadow(const GammaShadowParams& g, std::size_t count, std::uint64_t seed);
SampleBatch sample_composite(const CompositeModel& m, std::size_t count, std::uint64_t seed);

SampleBatch sample(const Model& m, std::size_t count, std::uint64_t seed);

/// Splits `count` into `partitions` blocks; block k has count/partitions
/// draws, plus one for k < count % partitions, and is generated by
/// sample(m, size_k, derive_seed(seed, k)). Blocks are concatenated in k
/// order, so the result does not depend on `threads`.
SampleBatch sample_partitioned(const Model& m, std::size_t count, std::uint64_t seed, unsigned partitions,
                               unsigned threads = 1);

struct GofReport {
    double ks_statistic = 0.0;
    std::size_t sample_size = 0;     ///< all draws, zeros included
    std::size_t nonzero_count = 0;
    double atom_frequency_observed = 0.0;
    double atom_mass_expected = 0.0;
    double atom_standard_error = 0.0;  ///< √(q(1-q)/n) at the expected mass q
    bool ks_defined = false;           ///< false when every draw hit the atom
    double ks_critical = 0.0;          ///< 0.1% asymptotic critical value for nonzero_count
};

struct GofOptions {
    double scale = 1.0;            ///< typical magnitude, for the normalization check
    double mass_tolerance = 1e-6;
    bool check_normalization = true;
    std::size_t cdf_nodes = 512;
};

/// KS statistic of the nonzero draws against the continuous-part cdf
/// (cumulative quadrature renormalized by 1 - atom mass), plus the observed
/// zero frequency. DomainError if the density is not normalized.
GofReport gof_compare(const SampleBatch& batch, const Density& density, const GofOptions& options = {});

/// sup |F_n - F| for ascending `sorted`.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// Pr[K > t] for the asymptotic Kolmogorov distribution.
double kolmogorov_survival(double t);

/// Critical value of √n·D at significance `level`, divided by √n.
double ks_critical_value(double level, std::size_t n);

}  // namespace compfade::mc
