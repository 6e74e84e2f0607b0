#include "wcum/algorithm.hpp"

#include <json.hpp>

#include "wcum/lmi.hpp"
#include "wcum/model.hpp"

namespace wcum {

namespace {

arma::vec rates_from_targets(const arma::vec& t) {
    arma::vec r(t.n_elem);
    for (arma::uword k = 0; k < t.n_elem; ++k) r[k] = std::log2(1.0 + t[k]);
    return r;
}

double utility_from_targets(const arma::vec& t, const SystemConfig& config) {
    return utility(rates_from_targets(t), config.utility);
}

// Nominal SINR of user k at the channel estimate (exact worst case for r = 0).
double nominal_sinr(const CovarianceSet& covs, const ChannelSet& channels,
                    const SystemConfig& config, arma::uword k) {
    const arma::cx_vec& h = channels.estimates[k];
    double signal = 0.0, interference = 0.0;
    for (arma::uword l = 0; l < config.n_users; ++l) {
        const double p = std::max(0.0, std::real(arma::cdot(h, covs.matrices[l] * h)));
        (l == k ? signal : interference) += p;
    }
    return signal / (interference + config.noise_powers[k]);
}

}  // namespace

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::EpsilonCriterion: return "epsilon-criterion";
        case StopReason::IterationCap: return "iteration-cap";
        case StopReason::SolverFailure: return "solver-failure";
    }
    return "unknown";
}

const WcumState& IterationTrace::final_state() const {
    if (states.empty())
        throw std::logic_error("IterationTrace: empty trace");
    return states.back();
}

std::string IterationTrace::to_jsonl() const {
    std::string out;
    for (const auto& s : states) {
        nlohmann::json rec;
        rec["m"] = s.iteration;
        rec["t"] = std::vector<double>(s.t.begin(), s.t.end());
        rec["lambda"] = std::vector<double>(s.lambdas.begin(), s.lambdas.end());
        rec["z"] = std::vector<double>(s.slacks.begin(), s.slacks.end());
        rec["psi"] = s.psi;
        rec["utility"] = s.utility_value;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

arma::vec init_t_for_beamformers(const std::vector<arma::cx_vec>& beamformers,
                                 const ChannelSet& channels, const SystemConfig& config) {
    config.validate();
    channels.validate(config);
    if (beamformers.size() != config.n_users)
        throw std::invalid_argument("init_t_for_beamformers: need one beamformer per user");

    arma::vec t(config.n_users);
    for (arma::uword k = 0; k < config.n_users; ++k) {
        const arma::cx_vec& h = channels.estimates[k];
        const double r = channels.radii[k];
        const double num_root =
            std::max(std::abs(arma::cdot(h, beamformers[k])) - r * arma::norm(beamformers[k]), 0.0);
        double denom = config.noise_powers[k];
        for (arma::uword l = 0; l < config.n_users; ++l) {
            if (l == k) continue;
            const double d = std::abs(arma::cdot(h, beamformers[l])) + r * arma::norm(beamformers[l]);
            denom += d * d;
        }
        t[k] = num_root * num_root / denom;
    }
    return t;
}

arma::vec init_t(const ChannelSet& channels, const SystemConfig& config) {
    config.validate();
    channels.validate(config);
    for (const auto& h : channels.estimates)
        if (arma::norm(h) == 0.0)
            throw std::invalid_argument("init_t: zero channel estimate");

    const double per_user = std::sqrt(config.power_budget / static_cast<double>(config.n_users));
    std::vector<arma::cx_vec> w;
    w.reserve(config.n_users);
    for (const auto& h : channels.estimates) w.push_back(per_user * h / arma::norm(h));
    return init_t_for_beamformers(w, channels, config);
}

StepQResult step_q(const WcumState& state, const ChannelSet& channels,
                   const SystemConfig& config, const SolverSettings& solver) {
    const SdpProblem prob = build_subproblem_q(state.t, channels, config);
    const SdpSolution sol = solve(prob, solver);
    const SubproblemSolution sub = extract_subproblem_q(prob, sol, config);

    StepQResult out;
    out.status = sub.status;
    out.stats = sub.stats;
    out.covs = sub.covs;
    out.lambdas = sub.lambdas;
    out.slacks = sub.slacks;
    out.psi = sub.psi;
    return out;
}

StepTResult step_t(const WcumState& state, const ChannelSet& channels,
                   const SystemConfig& config, double bisection_tol) {
    StepTResult out;
    out.t = arma::vec(config.n_users, arma::fill::zeros);
    for (arma::uword k = 0; k < config.n_users; ++k) {
        if (channels.radii[k] > 0.0) {
            const FeasibleT ft = max_feasible_t_auto(state.lambdas[k], state.covs, channels,
                                                     config, k, bisection_tol);
            out.t[k] = ft.t;
        } else {
            out.t[k] = nominal_sinr(state.covs, channels, config, k);
        }
        // A feasible previous target never regresses (Phi at t_prev is PSD up
        // to solver tolerance), so keep the monotone envelope.
        out.t[k] = std::max(out.t[k], state.t[k]);
    }
    out.utility_value = utility_from_targets(out.t, config);
    return out;
}

IterationTrace run(const ChannelSet& channels, const SystemConfig& config,
                   const RunOptions& options) {
    config.validate();
    channels.validate(config);
    if (!(options.epsilon > 0.0))
        throw std::invalid_argument("run: epsilon must be > 0");
    if (options.max_iters < 1)
        throw std::invalid_argument("run: max_iters must be >= 1");

    IterationTrace trace;

    WcumState state;
    state.iteration = 0;
    state.t = init_t(channels, config);
    state.lambdas = arma::vec(config.n_users, arma::fill::zeros);
    state.slacks = arma::vec(config.n_users, arma::fill::zeros);
    state.covs = CovarianceSet::zeros(config);
    state.psi = 0.0;
    state.utility_value = utility_from_targets(state.t, config);
    trace.states.push_back(state);

    for (arma::uword m = 1; m <= options.max_iters; ++m) {
        const StepQResult q = step_q(state, channels, config, options.solver);
        if (q.status != SolveStatus::Optimal && q.status != SolveStatus::NearOptimal) {
            trace.converged = false;
            trace.stop_reason = StopReason::SolverFailure;
            return trace;
        }

        WcumState next;
        next.iteration = m;
        next.covs = q.covs;
        next.lambdas = q.lambdas;
        next.slacks = q.slacks;
        next.psi = q.psi;
        next.t = state.t;

        const StepTResult ts = step_t(next, channels, config, options.bisection_tol);
        next.t = ts.t;
        next.utility_value = ts.utility_value;

        const double delta = std::abs(next.utility_value - state.utility_value);
        trace.states.push_back(next);
        state = next;

        // The epsilon criterion alone can stop with leftover slack; requiring
        // Psi at the zero threshold as well makes the final state certifiable
        // (Psi is nonincreasing along the iterations, so the certificate
        // re-solve at the final t cannot exceed it).
        if (delta <= options.epsilon && q.psi <= options.zero_slack_tol) {
            trace.converged = true;
            trace.stop_reason = StopReason::EpsilonCriterion;
            return trace;
        }
    }

    trace.converged = false;
    trace.stop_reason = StopReason::IterationCap;
    return trace;
}

IterationTrace run(const ChannelSet& channels, const SystemConfig& config, double epsilon,
                   arma::uword max_iters) {
    RunOptions options;
    options.epsilon = epsilon;
    options.max_iters = max_iters;
    return run(channels, config, options);
}

std::string CertificateReport::to_json() const {
    nlohmann::json j;
    j["feasible"] = feasible;
    j["min_phi_eig"] = min_phi_eig;
    j["trace_margin"] = trace_margin;
    j["min_cov_eig"] = min_cov_eig;
    j["min_lambda"] = min_lambda;
    j["zero_slack"] = zero_slack;
    j["max_abs_slack"] = max_abs_slack;
    j["pareto_stationary"] = pareto_stationary;
    j["probe_psi"] = probe_psi;
    j["passed"] = passed;
    return j.dump();
}

CertificateReport certify_limit(const WcumState& final_state, const ChannelSet& channels,
                                const SystemConfig& config, const RunOptions& options) {
    config.validate();
    channels.validate(config);

    CertificateReport rep;

    // (a) feasibility of the limit point.
    rep.min_phi_eig = arma::datum::inf;
    for (arma::uword k = 0; k < config.n_users; ++k) {
        double eig = 0.0;
        if (channels.radii[k] > 0.0) {
            eig = min_eig(build_phi(final_state.t[k], final_state.lambdas[k], final_state.covs,
                                    channels, config, k))
                      .value;
        } else {
            const double s = nominal_sinr(final_state.covs, channels, config, k);
            double denom = config.noise_powers[k];
            const arma::cx_vec& h = channels.estimates[k];
            for (arma::uword l = 0; l < config.n_users; ++l)
                if (l != k)
                    denom += std::max(0.0, std::real(arma::cdot(h, final_state.covs.matrices[l] * h)));
            eig = (s - final_state.t[k]) * denom;  // the collapsed 1x1 block value
        }
        rep.min_phi_eig = std::min(rep.min_phi_eig, eig);
    }
    rep.trace_margin = config.power_budget - final_state.covs.total_trace();
    rep.min_cov_eig = arma::datum::inf;
    for (const auto& q : final_state.covs.matrices)
        rep.min_cov_eig = std::min(rep.min_cov_eig, arma::eig_sym(arma::cx_mat(0.5 * (q + q.t()))).min());
    rep.min_lambda = final_state.lambdas.min();
    rep.feasible = rep.min_phi_eig >= -1e-6 && rep.trace_margin >= -kPowerTol &&
                   rep.min_cov_eig >= -kPsdEigTol && rep.min_lambda >= 0.0;

    // (b) zero slack at the limit.
    rep.max_abs_slack = arma::abs(final_state.slacks).max();
    rep.zero_slack = rep.max_abs_slack <= options.zero_slack_tol;

    // (c) Pareto stationarity probe: no user's target can strictly improve.
    WcumState probe = final_state;
    const StepQResult q = step_q(probe, channels, config, options.solver);
    rep.probe_psi = (q.status == SolveStatus::Optimal || q.status == SolveStatus::NearOptimal)
                        ? q.psi
                        : arma::datum::inf;
    rep.pareto_stationary = rep.probe_psi <= options.zero_slack_tol;

    rep.passed = rep.feasible && rep.zero_slack && rep.pareto_stationary;
    return rep;
}

}  // namespace wcum
