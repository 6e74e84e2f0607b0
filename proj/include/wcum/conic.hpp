#ifndef WCUM_CONIC_HPP
#define WCUM_CONIC_HPP

#include <iosfwd>

#include "wcum/types.hpp"

namespace wcum {

/// [[Re H, -Im H], [Im H, Re H]] — real symmetric 2n x 2n embedding of a
/// Hermitian matrix. PSD iff h is PSD; every eigenvalue of h appears twice.
arma::mat embed_hermitian(const arma::cx_mat& h);

/// A linear SDP over Hermitian matrix variables and real scalar variables:
///   maximize    sum_j obj_scalar_j * s_j + sum_k tr(obj_mat_k^H Q_k)
///   subject to  each LmiConstraint's affine Hermitian map is PSD,
///               each LinearConstraint holds (<= 0, or == 0).
/// Scalar sign restrictions (s >= 0) are expressed as LinearConstraints.
struct SdpProblem {
    struct MatrixVar {
        arma::uword dim;
        std::string name;
    };
    struct ScalarVar {
        std::string name;
    };

    /// One additive term of an affine Hermitian-valued map:
    ///   matrix_var >= 0: weight * E Q E^H with E = congruence;
    ///   scalar_var >= 0: s * coeff;
    ///   neither:         constant coeff.
    struct LmiTerm {
        int matrix_var = -1;
        int scalar_var = -1;
        arma::cx_mat congruence;
        double weight = 1.0;
        arma::cx_mat coeff;
    };
    struct LmiConstraint {
        arma::uword dim = 0;
        std::vector<LmiTerm> terms;
        std::string name;
    };

    /// sum_i tr(coeff_i^H Q_{var_i}) + sum_j b_j s_j + constant <= 0 (or == 0).
    struct LinearConstraint {
        std::vector<std::pair<int, arma::cx_mat>> matrix_terms;
        std::vector<std::pair<int, double>> scalar_terms;
        double constant = 0.0;
        bool equality = false;
        std::string name;
    };

    std::vector<MatrixVar> matrix_vars;
    std::vector<ScalarVar> scalar_vars;
    std::vector<std::pair<int, double>> objective_scalars;
    std::vector<std::pair<int, arma::cx_mat>> objective_matrices;
    std::vector<LmiConstraint> lmis;
    std::vector<LinearConstraint> linears;

    int add_matrix_var(arma::uword dim, std::string name);
    int add_scalar_var(std::string name);
    void validate() const;
    arma::uword n_real_parameters() const;
};

enum class SolveStatus { Optimal, NearOptimal, Infeasible, NumericalFailure };

const char* to_string(SolveStatus status);

struct SolverStats {
    arma::uword iterations = 0;
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    double duality_gap = 0.0;
};

struct SdpSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    std::vector<arma::cx_mat> matrix_values;  // re-symmetrized, eigenvalue-clipped
    arma::vec scalar_values;
    double objective_value = 0.0;
    SolverStats stats;
};

struct SolverSettings {
    double tolerance = 1e-8;
    arma::uword max_iterations = 200;
    std::string backend = "ipm";  // the in-tree interior-point backend
};

/// Solve through the selected backend. Complex LMIs are lowered to real
/// symmetric cones via embed_hermitian inside this call; callers never see
/// the embedding.
SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings = {});

/// The per-iteration covariance subproblem: maximize the total eigenvalue
/// slack Psi = sum_k z_k over {Q_k, lambda_k, z_k} subject to
/// Phi_k(t_prev_k, lambda_k, {Q_i}) - z_k I >= 0, sum tr(Q_k) <= P,
/// Q_k >= 0, lambda_k >= 0, z_k >= 0.
/// Users with r_k = 0 contribute the exact 1x1 collapsed constraint instead
/// of the (n_tx+1) LMI (the multiplier lambda_k is meaningless at r = 0).
SdpProblem build_subproblem_q(const arma::vec& t_prev, const ChannelSet& channels,
                              const SystemConfig& config);

struct SubproblemSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    CovarianceSet covs;
    arma::vec lambdas;
    arma::vec slacks;
    double psi = 0.0;
    SolverStats stats;
};

/// Map a raw solution of build_subproblem_q back to domain objects.
SubproblemSolution extract_subproblem_q(const SdpProblem& problem, const SdpSolution& solution,
                                        const SystemConfig& config);

/// Self-describing sparse text dump of the lowered conic program, for
/// cross-checking with external tools.
void dump_conic_program(const SdpProblem& problem, std::ostream& os);

}  // namespace wcum

#endif
