#ifndef WCUM_EVAL_HPP
#define WCUM_EVAL_HPP

#include "wcum/algorithm.hpp"
#include "wcum/types.hpp"

namespace wcum {

struct UserWorstCase {
    double exact_worst_sinr = 0.0;
    double exact_worst_rate = 0.0;
    double mc_worst_rate = 0.0;
    arma::uword mc_samples = 0;
};

struct WorstCaseReport {
    std::vector<UserWorstCase> per_user;
    double utility_exact = 0.0;
    double utility_mc = 0.0;

    std::string to_json() const;
};

/// Exact minimum SINR of one user over the error ball, certified through the
/// S-procedure: the largest t admitting a multiplier lambda >= 0 with
/// Phi_k(t, lambda) PSD. Outer bisection on t, inner concave maximization of
/// the smallest eigenvalue over lambda (golden section).
double exact_worst_sinr(const CovarianceSet& covs, const ChannelSet& channels,
                        const SystemConfig& config, arma::uword user_index,
                        double tol = 1e-6);

/// The same quantity by direct minimization over the ball: bisection on the
/// SINR target with an exact trust-region subproblem (quadratic over a norm
/// ball) in the inner loop. Independent of the S-procedure path.
double worst_sinr_ball(const CovarianceSet& covs, const ChannelSet& channels,
                       const SystemConfig& config, arma::uword user_index,
                       double tol = 1e-6);

/// Exact minimum of (center+e)^H x (center+e) over ||e|| <= radius.
double min_quadratic_over_ball(const arma::cx_mat& x, const arma::cx_vec& center, double radius);

/// Monte Carlo worst-case rate: minimum achieved rate over boundary-sampled
/// errors plus deterministic adversarial candidates (the zero error and the
/// two errors aligned with +-the Q_k-weighted estimate direction).
/// Deterministic per seed; sampling is chunked so a larger n_samples extends
/// the same stream.
double mc_worst_rate(const CovarianceSet& covs, const ChannelSet& channels,
                     const SystemConfig& config, arma::uword user_index,
                     arma::uword n_samples, std::uint64_t seed);

WorstCaseReport evaluate_worst_case(const CovarianceSet& covs, const ChannelSet& channels,
                                    const SystemConfig& config, arma::uword mc_samples,
                                    std::uint64_t seed);

/// Perfect-CSI baseline: the design the alternating algorithm produces when
/// every radius is forced to zero (estimates treated as the true channels).
CovarianceSet naive_design(const ChannelSet& channels, const SystemConfig& config,
                           const RunOptions& options = {});

struct GridDesign {
    CovarianceSet covs;
    double utility = 0.0;
};

/// Exhaustive rank-one search on a phase/amplitude grid (with local pattern
/// refinement), scored by the exact worst-case SINR of every candidate.
/// Only for desk-scale instances: n_tx <= 2 and n_users <= 2.
GridDesign oracle_grid_design(const ChannelSet& channels, const SystemConfig& config,
                              arma::uword grid_resolution = 6);

}  // namespace wcum

#endif
