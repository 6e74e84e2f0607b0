#ifndef WCUM_LMI_HPP
#define WCUM_LMI_HPP

#include "wcum/types.hpp"

namespace wcum {

/// Raised when an eigenvalue bisection bracket does not contain the boundary;
/// the caller may widen the bracket and retry.
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The assembled S-procedure matrix for one user: an (n_tx+1) x (n_tx+1)
/// Hermitian block whose positive semidefiniteness certifies that user's
/// SINR target t against every channel error in the radius-r ball.
struct LmiBlock {
    arma::cx_mat matrix;
    arma::uword user_index = 0;
    double t = 0.0;
    double lambda = 0.0;
};

/// [I; h^H] Q [I; h^H]^H — lifts an n x n Hermitian matrix to (n+1) x (n+1).
/// PSD whenever q is PSD.
arma::cx_mat build_y(const arma::cx_mat& q, const arma::cx_vec& estimate);

/// Phi_k(t, lambda, {Q_i}) = build_y(Q_k - t * sum_{l != k} Q_l, \hat h_k)
///                           + diag(lambda * I, -lambda r_k^2 - t sigma_k^2).
LmiBlock build_phi(double t, double lambda, const CovarianceSet& covs,
                   const ChannelSet& channels, const SystemConfig& config,
                   arma::uword user_index);

struct EigPair {
    double value = 0.0;
    arma::cx_vec vector;
};

/// Smallest eigenvalue and a unit-norm eigenvector of a Hermitian matrix.
EigPair min_eig_hermitian(const arma::cx_mat& m);
EigPair min_eig(const LmiBlock& block);

struct FeasibleT {
    double t = 0.0;
    bool infeasible_at_zero = false;
};

/// Upper bracket for the per-user SINR bisection: full power on the best
/// channel in the uncertainty ball with zero interference,
/// P * (||h_k|| + r_k)^2 / sigma_k^2.
double default_t_upper(const ChannelSet& channels, const SystemConfig& config,
                       arma::uword user_index);

/// Largest t in [0, t_hi] with min_eig(Phi_k(t)) >= 0, to absolute precision
/// tol. Valid because every eigenvalue of Phi_k is nonincreasing in t.
/// Throws BracketError if Phi_k(t_hi) is still PSD (caller should widen).
FeasibleT max_feasible_t(double lambda, const CovarianceSet& covs,
                         const ChannelSet& channels, const SystemConfig& config,
                         arma::uword user_index, double t_hi, double tol);

/// max_feasible_t with bounded geometric bracket widening.
FeasibleT max_feasible_t_auto(double lambda, const CovarianceSet& covs,
                              const ChannelSet& channels, const SystemConfig& config,
                              arma::uword user_index, double tol);

}  // namespace wcum

#endif
