#include "wcum.h"

#include <cstring>
#include <string>

#include "wcum/algorithm.hpp"
#include "wcum/eval.hpp"
#include "wcum/lmi.hpp"
#include "wcum/model.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Translate C++ failures to status codes; every API body runs inside this.
template <typename Fn>
wcum_status guarded(Fn&& fn) {
    try {
        fn();
        return WCUM_OK;
    } catch (const wcum::BracketError& e) {
        g_last_error = e.what();
        return WCUM_ERR_BRACKET;
    } catch (const std::domain_error& e) {
        g_last_error = e.what();
        return WCUM_ERR_DOMAIN;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        if (g_last_error.find("too large") != std::string::npos) return WCUM_ERR_TOO_LARGE;
        return WCUM_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        if (g_last_error.find("solver") != std::string::npos) return WCUM_ERR_SOLVER;
        return WCUM_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return WCUM_ERR_INTERNAL;
    }
}

arma::cx_vec vec_from_interleaved(const double* data, arma::uword n) {
    arma::cx_vec v(n);
    for (arma::uword i = 0; i < n; ++i) v[i] = {data[2 * i], data[2 * i + 1]};
    return v;
}

void vec_to_interleaved(const arma::cx_vec& v, double* out) {
    for (arma::uword i = 0; i < v.n_elem; ++i) {
        out[2 * i] = v[i].real();
        out[2 * i + 1] = v[i].imag();
    }
}

arma::cx_mat mat_from_interleaved(const double* data, arma::uword n) {
    arma::cx_mat m(n, n);
    arma::uword p = 0;
    for (arma::uword c = 0; c < n; ++c)
        for (arma::uword r = 0; r < n; ++r, ++p) m(r, c) = {data[2 * p], data[2 * p + 1]};
    return m;
}

void mat_to_interleaved(const arma::cx_mat& m, double* out) {
    arma::uword p = 0;
    for (arma::uword c = 0; c < m.n_cols; ++c)
        for (arma::uword r = 0; r < m.n_rows; ++r, ++p) {
            out[2 * p] = m(r, c).real();
            out[2 * p + 1] = m(r, c).imag();
        }
}

}  // namespace

struct wcum_config {
    wcum::SystemConfig cfg;
};

struct wcum_channels {
    wcum::ChannelSet set;
};

struct wcum_result {
    wcum::IterationTrace trace;
};

namespace {

wcum::CovarianceSet covs_from_buffer(const wcum_config* config, const double* data) {
    if (!data) throw std::invalid_argument("covariances buffer is null");
    const arma::uword n = config->cfg.n_tx;
    wcum::CovarianceSet covs;
    covs.matrices.reserve(config->cfg.n_users);
    for (arma::uword k = 0; k < config->cfg.n_users; ++k)
        covs.matrices.push_back(mat_from_interleaved(data + 2 * n * n * k, n));
    return covs;
}

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

extern "C" {

const char* wcum_version(void) { return "0.1.0"; }

const char* wcum_last_error(void) { return g_last_error.c_str(); }

void wcum_string_free(char* s) { std::free(s); }

uint64_t wcum_derive_seed(uint64_t seed, uint64_t stream) {
    return wcum::Rng::derive(seed, stream);
}

wcum_status wcum_config_create(int n_tx, int n_users, double power_budget,
                               const double* noise_powers, wcum_utility_kind utility,
                               const double* weights, wcum_config** out) {
    return guarded([&] {
        require(out != nullptr, "config out pointer is null");
        require(noise_powers != nullptr, "noise_powers is null");
        require(n_tx >= 1 && n_users >= 1, "n_tx and n_users must be >= 1");
        wcum::SystemConfig cfg;
        cfg.n_tx = static_cast<arma::uword>(n_tx);
        cfg.n_users = static_cast<arma::uword>(n_users);
        cfg.power_budget = power_budget;
        cfg.noise_powers = arma::vec(noise_powers, static_cast<arma::uword>(n_users));
        switch (utility) {
            case WCUM_UTILITY_SUM_RATE:
                cfg.utility = wcum::UtilityKind::sum_rate();
                break;
            case WCUM_UTILITY_WEIGHTED_SUM_RATE:
                require(weights != nullptr, "weights is null for weighted sum rate");
                cfg.utility = wcum::UtilityKind::weighted_sum_rate(
                    arma::vec(weights, static_cast<arma::uword>(n_users)));
                break;
            case WCUM_UTILITY_PROPORTIONAL_FAIR:
                cfg.utility = wcum::UtilityKind::proportional_fair();
                break;
            default:
                throw std::invalid_argument("unknown utility kind");
        }
        cfg.validate();
        *out = new wcum_config{std::move(cfg)};
    });
}

void wcum_config_free(wcum_config* config) { delete config; }

int wcum_config_n_tx(const wcum_config* config) {
    return config ? static_cast<int>(config->cfg.n_tx) : 0;
}

int wcum_config_n_users(const wcum_config* config) {
    return config ? static_cast<int>(config->cfg.n_users) : 0;
}

wcum_status wcum_channels_create(const wcum_config* config, const double* estimates,
                                 const double* radii, wcum_channels** out) {
    return guarded([&] {
        require(config && estimates && radii && out, "null argument");
        wcum::ChannelSet set;
        const arma::uword n = config->cfg.n_tx;
        for (arma::uword k = 0; k < config->cfg.n_users; ++k)
            set.estimates.push_back(vec_from_interleaved(estimates + 2 * n * k, n));
        set.radii = arma::vec(radii, config->cfg.n_users);
        set.validate(config->cfg);
        *out = new wcum_channels{std::move(set)};
    });
}

wcum_status wcum_channels_sample(const wcum_config* config, uint64_t seed, double radius,
                                 wcum_channels** out) {
    return guarded([&] {
        require(config && out, "null argument");
        require(radius >= 0.0, "radius must be >= 0");
        wcum::ChannelSet set;
        set.estimates = wcum::sample_channels(config->cfg, seed);
        set.radii = arma::vec(config->cfg.n_users);
        set.radii.fill(radius);
        *out = new wcum_channels{std::move(set)};
    });
}

wcum_status wcum_channels_set_radii(wcum_channels* channels, const double* radii) {
    return guarded([&] {
        require(channels && radii, "null argument");
        channels->set.radii = arma::vec(radii, channels->set.radii.n_elem);
        for (double r : channels->set.radii)
            require(r >= 0.0 && std::isfinite(r), "radii must be finite and >= 0");
    });
}

wcum_status wcum_channels_get_estimate(const wcum_channels* channels, int user,
                                       double* estimate_out) {
    return guarded([&] {
        require(channels && estimate_out, "null argument");
        require(user >= 0 && static_cast<std::size_t>(user) < channels->set.estimates.size(),
                "user out of range");
        vec_to_interleaved(channels->set.estimates[static_cast<std::size_t>(user)], estimate_out);
    });
}

wcum_status wcum_channels_get_radii(const wcum_channels* channels, double* radii_out) {
    return guarded([&] {
        require(channels && radii_out, "null argument");
        for (arma::uword k = 0; k < channels->set.radii.n_elem; ++k)
            radii_out[k] = channels->set.radii[k];
    });
}

void wcum_channels_free(wcum_channels* channels) { delete channels; }

wcum_status wcum_solve(const wcum_config* config, const wcum_channels* channels,
                       double epsilon, int max_iters, wcum_result** out) {
    return guarded([&] {
        require(config && channels && out, "null argument");
        require(max_iters >= 1, "max_iters must be >= 1");
        wcum::IterationTrace trace = wcum::run(channels->set, config->cfg, epsilon,
                                               static_cast<arma::uword>(max_iters));
        if (trace.stop_reason == wcum::StopReason::SolverFailure)
            throw std::runtime_error("solver failure in the covariance subproblem");
        *out = new wcum_result{std::move(trace)};
    });
}

wcum_status wcum_solve_naive(const wcum_config* config, const wcum_channels* channels,
                             double epsilon, int max_iters, wcum_result** out) {
    return guarded([&] {
        require(config && channels && out, "null argument");
        require(max_iters >= 1, "max_iters must be >= 1");
        wcum::ChannelSet nominal = channels->set;
        nominal.radii.zeros();
        wcum::IterationTrace trace = wcum::run(nominal, config->cfg, epsilon,
                                               static_cast<arma::uword>(max_iters));
        if (trace.stop_reason == wcum::StopReason::SolverFailure)
            throw std::runtime_error("solver failure in the covariance subproblem");
        *out = new wcum_result{std::move(trace)};
    });
}

int wcum_result_converged(const wcum_result* result) {
    return result && result->trace.converged ? 1 : 0;
}

int wcum_result_iterations(const wcum_result* result) {
    return result ? static_cast<int>(result->trace.states.size()) - 1 : 0;
}

const char* wcum_result_stop_reason(const wcum_result* result) {
    return result ? wcum::to_string(result->trace.stop_reason) : "null";
}

double wcum_result_utility(const wcum_result* result) {
    return result ? result->trace.final_state().utility_value : 0.0;
}

double wcum_result_psi(const wcum_result* result) {
    return result ? result->trace.final_state().psi : 0.0;
}

wcum_status wcum_result_targets(const wcum_result* result, double* t_out) {
    return guarded([&] {
        require(result && t_out, "null argument");
        const auto& t = result->trace.final_state().t;
        for (arma::uword k = 0; k < t.n_elem; ++k) t_out[k] = t[k];
    });
}

wcum_status wcum_result_multipliers(const wcum_result* result, double* lambda_out) {
    return guarded([&] {
        require(result && lambda_out, "null argument");
        const auto& l = result->trace.final_state().lambdas;
        for (arma::uword k = 0; k < l.n_elem; ++k) lambda_out[k] = l[k];
    });
}

wcum_status wcum_result_slacks(const wcum_result* result, double* z_out) {
    return guarded([&] {
        require(result && z_out, "null argument");
        const auto& z = result->trace.final_state().slacks;
        for (arma::uword k = 0; k < z.n_elem; ++k) z_out[k] = z[k];
    });
}

wcum_status wcum_result_covariance(const wcum_result* result, int user, double* q_out) {
    return guarded([&] {
        require(result && q_out, "null argument");
        const auto& covs = result->trace.final_state().covs;
        require(user >= 0 && static_cast<std::size_t>(user) < covs.matrices.size(),
                "user out of range");
        mat_to_interleaved(covs.matrices[static_cast<std::size_t>(user)], q_out);
    });
}

wcum_status wcum_result_trace_jsonl(const wcum_result* result, char** out) {
    return guarded([&] {
        require(result && out, "null argument");
        *out = dup_string(result->trace.to_jsonl());
        require(*out != nullptr, "allocation failure");
    });
}

void wcum_result_free(wcum_result* result) { delete result; }

wcum_status wcum_certify(const wcum_config* config, const wcum_channels* channels,
                         const double* covariances, const double* t, const double* lambdas,
                         const double* slacks, int* passed, char** report_json) {
    return guarded([&] {
        require(config && channels && covariances && t && lambdas && slacks && passed,
                "null argument");
        wcum::WcumState state;
        state.covs = covs_from_buffer(config, covariances);
        state.t = arma::vec(t, config->cfg.n_users);
        state.lambdas = arma::vec(lambdas, config->cfg.n_users);
        state.slacks = arma::vec(slacks, config->cfg.n_users);
        const wcum::CertificateReport rep =
            wcum::certify_limit(state, channels->set, config->cfg);
        *passed = rep.passed ? 1 : 0;
        if (report_json) {
            *report_json = dup_string(rep.to_json());
            require(*report_json != nullptr, "allocation failure");
        }
    });
}

wcum_status wcum_evaluate(const wcum_config* config, const wcum_channels* channels,
                          const double* covariances, int mc_samples, uint64_t seed,
                          char** report_json) {
    return guarded([&] {
        require(config && channels && covariances && report_json, "null argument");
        require(mc_samples >= 1, "mc_samples must be >= 1");
        const wcum::WorstCaseReport rep =
            wcum::evaluate_worst_case(covs_from_buffer(config, covariances), channels->set,
                                      config->cfg, static_cast<arma::uword>(mc_samples), seed);
        *report_json = dup_string(rep.to_json());
        require(*report_json != nullptr, "allocation failure");
    });
}

wcum_status wcum_rate(const wcum_config* config, const double* covariances,
                      const double* channel, int user, double* rate_out) {
    return guarded([&] {
        require(config && covariances && channel && rate_out, "null argument");
        require(user >= 0, "user out of range");
        *rate_out = wcum::rate(covs_from_buffer(config, covariances),
                               vec_from_interleaved(channel, config->cfg.n_tx),
                               static_cast<arma::uword>(user), config->cfg);
    });
}

wcum_status wcum_exact_worst_sinr(const wcum_config* config, const wcum_channels* channels,
                                  const double* covariances, int user, double* sinr_out) {
    return guarded([&] {
        require(config && channels && covariances && sinr_out, "null argument");
        require(user >= 0, "user out of range");
        *sinr_out = wcum::exact_worst_sinr(covs_from_buffer(config, covariances), channels->set,
                                           config->cfg, static_cast<arma::uword>(user));
    });
}

wcum_status wcum_mc_worst_rate(const wcum_config* config, const wcum_channels* channels,
                               const double* covariances, int user, int n_samples,
                               uint64_t seed, double* rate_out) {
    return guarded([&] {
        require(config && channels && covariances && rate_out, "null argument");
        require(user >= 0 && n_samples >= 1, "bad user or n_samples");
        *rate_out = wcum::mc_worst_rate(covs_from_buffer(config, covariances), channels->set,
                                        config->cfg, static_cast<arma::uword>(user),
                                        static_cast<arma::uword>(n_samples), seed);
    });
}

wcum_status wcum_oracle_grid(const wcum_config* config, const wcum_channels* channels,
                             int grid_resolution, double* covariances_out,
                             double* utility_out) {
    return guarded([&] {
        require(config && channels && covariances_out && utility_out, "null argument");
        require(grid_resolution >= 2, "grid_resolution must be >= 2");
        const wcum::GridDesign d =
            wcum::oracle_grid_design(channels->set, config->cfg,
                                     static_cast<arma::uword>(grid_resolution));
        const arma::uword n = config->cfg.n_tx;
        for (arma::uword k = 0; k < config->cfg.n_users; ++k)
            mat_to_interleaved(d.covs.matrices[k], covariances_out + 2 * n * n * k);
        *utility_out = d.utility;
    });
}

}  // extern "C"
