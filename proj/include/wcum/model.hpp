#ifndef WCUM_MODEL_HPP
#define WCUM_MODEL_HPP

#include "wcum/types.hpp"

namespace wcum {

/// Seeded PRNG for reproducible simulation. All randomness in the library
/// flows through explicit seeds; the same seed always yields the same draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller.
    double gaussian();

    /// Circularly symmetric complex Gaussian CN(0, I), E|x_i|^2 = 1.
    arma::cx_vec cgaussian(arma::uword dim);

    /// Stream derivation so that independent sub-tasks (trials, sample
    /// chunks) get decorrelated seeds: splitmix64 of seed xor stream.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  private:
    std::uint64_t next_u64();
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Achievable rate of one user in bits/sec/Hz for a given true channel:
/// log2(1 + h^H Q_k h / (sum_{l != k} h^H Q_l h + sigma_k^2)).
double rate(const CovarianceSet& covs, const arma::cx_vec& channel,
            arma::uword user_index, const SystemConfig& config);

/// System utility over a vector of per-user rates.
double utility(const arma::vec& rates, const UtilityKind& kind);

/// i.i.d. standard complex Gaussian channel estimates, deterministic per seed.
std::vector<arma::cx_vec> sample_channels(const SystemConfig& config, std::uint64_t seed);

enum class ErrorMode {
    UniformBall,  // uniform over the solid 2*dim-real-dimensional ball
    Boundary      // uniform on the sphere ||e|| = radius
};

arma::cx_vec sample_error(double radius, arma::uword dim, Rng& rng, ErrorMode mode);
arma::cx_vec sample_error(double radius, arma::uword dim, std::uint64_t seed, ErrorMode mode);

}  // namespace wcum

#endif
