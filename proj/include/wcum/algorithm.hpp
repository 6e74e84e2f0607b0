#ifndef WCUM_ALGORITHM_HPP
#define WCUM_ALGORITHM_HPP

#include "wcum/conic.hpp"
#include "wcum/types.hpp"

namespace wcum {

/// One iterate of the alternating design loop.
struct WcumState {
    arma::uword iteration = 0;
    arma::vec t;             // per-user worst-case SINR targets
    arma::vec lambdas;       // S-procedure multipliers
    arma::vec slacks;        // per-user eigenvalue slacks z_k
    CovarianceSet covs;
    double utility_value = 0.0;  // U(log2(1 + t_1), ..., log2(1 + t_K))
    double psi = 0.0;            // sum of slacks from the covariance subproblem
};

enum class StopReason { EpsilonCriterion, IterationCap, SolverFailure };

const char* to_string(StopReason reason);

struct IterationTrace {
    std::vector<WcumState> states;  // states[0] is the initialization
    bool converged = false;
    StopReason stop_reason = StopReason::IterationCap;

    const WcumState& final_state() const;
    /// One JSON record per line: {"m":..,"t":[..],"lambda":[..],"z":[..],"psi":..,"utility":..}
    std::string to_jsonl() const;
};

struct RunOptions {
    double epsilon = 1e-3;          // |U^(m) - U^(m-1)| stopping accuracy
    arma::uword max_iters = 200;
    double zero_slack_tol = 1e-5;   // "zero" threshold for Psi and z_k
    double bisection_tol = 1e-6;    // absolute accuracy of the per-user t search
    SolverSettings solver;
};

/// Feasible SINR targets for arbitrary rank-one beamformers w_k:
/// ([|h_k^H w_k| - r_k ||w_k||]^+)^2 / (sum_{l != k} (|h_k^H w_l| + r_k ||w_l||)^2 + sigma_k^2).
arma::vec init_t_for_beamformers(const std::vector<arma::cx_vec>& beamformers,
                                 const ChannelSet& channels, const SystemConfig& config);

/// The closed-form initialization: maximum-ratio beamformers at equal power
/// split, w_k = sqrt(P/K) h_k / ||h_k||.
arma::vec init_t(const ChannelSet& channels, const SystemConfig& config);

struct StepQResult {
    CovarianceSet covs;
    arma::vec lambdas;
    arma::vec slacks;
    double psi = 0.0;
    SolveStatus status = SolveStatus::NumericalFailure;
    SolverStats stats;
};

/// Covariance update: solve the max-slack subproblem at the state's t.
StepQResult step_q(const WcumState& state, const ChannelSet& channels,
                   const SystemConfig& config, const SolverSettings& solver = {});

struct StepTResult {
    arma::vec t;
    double utility_value = 0.0;
};

/// Target update: per-user largest feasible t at the state's covariances and
/// multipliers (independent bisections; exact nominal SINR for r_k = 0).
StepTResult step_t(const WcumState& state, const ChannelSet& channels,
                   const SystemConfig& config, double bisection_tol = 1e-6);

/// Full alternating loop from the closed-form initialization.
IterationTrace run(const ChannelSet& channels, const SystemConfig& config,
                   const RunOptions& options = {});
IterationTrace run(const ChannelSet& channels, const SystemConfig& config, double epsilon,
                   arma::uword max_iters);

/// Post-convergence certificate:
///  (a) feasibility of (t*, lambda*, Q*) including power and PSD margins,
///  (b) zero slack |z_k*| <= tol,
///  (c) Pareto stationarity: re-solving the slack subproblem at t* gives
///      Psi <= tol (no user's target can strictly increase).
struct CertificateReport {
    bool feasible = false;
    double min_phi_eig = 0.0;
    double trace_margin = 0.0;  // P - sum tr(Q*)
    double min_cov_eig = 0.0;
    double min_lambda = 0.0;
    bool zero_slack = false;
    double max_abs_slack = 0.0;
    bool pareto_stationary = false;
    double probe_psi = 0.0;
    bool passed = false;

    std::string to_json() const;
};

CertificateReport certify_limit(const WcumState& final_state, const ChannelSet& channels,
                                const SystemConfig& config, const RunOptions& options = {});

}  // namespace wcum

#endif
