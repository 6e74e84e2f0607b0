#ifndef WCUM_SRC_IPM_HPP
#define WCUM_SRC_IPM_HPP

#include <armadillo>
#include <utility>
#include <vector>

namespace wcum::detail {

/// Linear SDP in inequality form over a block-diagonal cone:
///   minimize   cost . x
///   subject to G(x) = constant + sum_i x_i * coeff[i]  PSD (per block).
/// Blocks are dense real symmetric; scalar inequalities are 1x1 blocks.
struct ConeProgram {
    arma::uword n_vars = 0;
    std::vector<arma::uword> block_dims;
    // coeff[i] lists (block, matrix) pairs for variable i; blocks not listed
    // have a zero coefficient.
    std::vector<std::vector<std::pair<arma::uword, arma::mat>>> coeff;
    std::vector<std::pair<arma::uword, arma::mat>> constant;
    arma::vec cost;
};

struct IpmResult {
    arma::vec x;
    double objective = 0.0;
    arma::uword iterations = 0;
    double primal_infeasibility = 0.0;  // ||G(x) - X||_F / (1 + ||constant||_F)
    double dual_infeasibility = 0.0;    // ||c - A*(Y)|| / (1 + ||c||)
    double duality_gap = 0.0;           // tr(XY) / (1 + |primal| + |dual|)
    bool converged = false;
    bool near_optimal = false;
    bool infeasible = false;
};

/// Infeasible-start primal-dual interior-point method (predictor-corrector,
/// HKM-style scaling). Sized for small dense problems: tens of variables,
/// blocks of dimension at most a few dozen.
IpmResult solve_ipm(const ConeProgram& program, double tolerance, arma::uword max_iterations);

}  // namespace wcum::detail

#endif
