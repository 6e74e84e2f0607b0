#include "wcum/eval.hpp"

#include <json.hpp>

#include "wcum/lmi.hpp"
#include "wcum/model.hpp"

namespace wcum {

namespace {

double nominal_sinr_of(const CovarianceSet& covs, const ChannelSet& channels,
                       const SystemConfig& config, arma::uword k) {
    const arma::cx_vec& h = channels.estimates[k];
    double signal = 0.0, interference = 0.0;
    for (arma::uword l = 0; l < config.n_users; ++l) {
        const double p = std::max(0.0, std::real(arma::cdot(h, covs.matrices[l] * h)));
        (l == k ? signal : interference) += p;
    }
    return signal / (interference + config.noise_powers[k]);
}

// max over lambda >= 0 of min_eig(Phi_k(t, lambda)). Concave in lambda:
// geometric bracket growth, then golden section.
double best_multiplier_eig(double t, const CovarianceSet& covs, const ChannelSet& channels,
                           const SystemConfig& config, arma::uword k) {
    const auto f = [&](double lambda) {
        return min_eig(build_phi(t, lambda, covs, channels, config, k)).value;
    };

    double a = 0.0, fa = f(a);
    double b = std::max(1.0, config.power_budget);
    double fb = f(b);
    // Grow until the curve turns down; -lambda r^2 guarantees it eventually does.
    double c = b, fc = fb;
    int guard = 0;
    while (fc >= fb && guard++ < 200) {
        b = c;
        fb = fc;
        c *= 4.0;
        fc = f(c);
        if (c > 1e18) break;
    }
    if (fa >= fb) {  // maximum in [0, b]
        c = b;
        fc = fb;
        b = 0.5 * (a + c);
        fb = f(b);
    }

    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && (c - a) > 1e-10 * (1.0 + c); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (c - a);
            f2 = f(x2);
        } else {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - gr * (c - a);
            f1 = f(x1);
        }
    }
    return std::max({fa, fb, f1, f2});
}

}  // namespace

double exact_worst_sinr(const CovarianceSet& covs, const ChannelSet& channels,
                        const SystemConfig& config, arma::uword user_index, double tol) {
    config.validate();
    channels.validate(config);
    if (user_index >= config.n_users)
        throw std::invalid_argument("exact_worst_sinr: user_index out of range");

    if (channels.radii[user_index] == 0.0)
        return nominal_sinr_of(covs, channels, config, user_index);

    const auto feasible = [&](double t) {
        return best_multiplier_eig(t, covs, channels, config, user_index) >= 0.0;
    };

    double hi = default_t_upper(channels, config, user_index);
    int widen = 0;
    while (feasible(hi)) {
        hi *= 2.0;
        if (++widen > 64)
            throw BracketError("exact_worst_sinr: bracket widening exhausted");
    }
    double lo = 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double min_quadratic_over_ball(const arma::cx_mat& x, const arma::cx_vec& center, double radius) {
    if (x.n_rows != x.n_cols || x.n_rows != center.n_elem)
        throw std::invalid_argument("min_quadratic_over_ball: dimension mismatch");
    if (radius < 0.0)
        throw std::invalid_argument("min_quadratic_over_ball: radius must be >= 0");

    const arma::cx_mat h = 0.5 * (x + x.t());
    if (radius == 0.0)
        return std::real(arma::cdot(center, h * center));

    arma::vec lam;
    arma::cx_mat v;
    if (!arma::eig_sym(lam, v, h))
        throw std::runtime_error("min_quadratic_over_ball: eigendecomposition failed");
    const arma::cx_vec c = v.t() * center;
    const arma::vec c2 = arma::square(arma::abs(c));
    const double lam_min = lam.min();

    // Value of the stationary point e(nu): sum_i lam_i |c_i|^2 nu^2/(lam_i+nu)^2,
    // with squared norm n(nu) = sum_i lam_i^2 |c_i|^2 / (lam_i+nu)^2.
    const auto norm2_at = [&](double nu) {
        double s = 0.0;
        for (arma::uword i = 0; i < lam.n_elem; ++i) {
            const double d = lam[i] + nu;
            if (d != 0.0) s += lam[i] * lam[i] * c2[i] / (d * d);
        }
        return s;
    };
    const auto value_at = [&](double nu) {
        double s = 0.0;
        for (arma::uword i = 0; i < lam.n_elem; ++i) {
            const double d = lam[i] + nu;
            if (d != 0.0) s += lam[i] * c2[i] * (nu / d) * (nu / d);
        }
        return s;
    };

    const double r2 = radius * radius;

    if (lam_min >= 0.0) {
        // Interior solution e = -P_{lam>0} center reaches value 0 if it fits.
        double fit = 0.0;
        for (arma::uword i = 0; i < lam.n_elem; ++i)
            if (lam[i] > 0.0) fit += c2[i];
        if (fit <= r2) return 0.0;
    }

    // Boundary: solve n(nu) = r^2 for nu > max(0, -lam_min); n is decreasing.
    const double nu_floor = std::max(0.0, -lam_min);
    const double eps = 1e-13 * (1.0 + std::abs(lam_min));
    double lo = nu_floor + eps;
    if (norm2_at(lo) < r2) {
        // Hard case: the stationary branch never reaches the sphere; pad with
        // the bottom eigenspace, which contributes lam_min per unit of norm.
        return value_at(lo) + lam_min * (r2 - norm2_at(lo));
    }
    double hi = std::max(1.0, 2.0 * nu_floor);
    while (norm2_at(hi) >= r2) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (norm2_at(mid) >= r2)
            lo = mid;
        else
            hi = mid;
    }
    const double nu = 0.5 * (lo + hi);
    return value_at(nu);
}

double worst_sinr_ball(const CovarianceSet& covs, const ChannelSet& channels,
                       const SystemConfig& config, arma::uword user_index, double tol) {
    config.validate();
    channels.validate(config);
    if (user_index >= config.n_users)
        throw std::invalid_argument("worst_sinr_ball: user_index out of range");

    const double r = channels.radii[user_index];
    if (r == 0.0)
        return nominal_sinr_of(covs, channels, config, user_index);

    const arma::cx_vec& h = channels.estimates[user_index];
    const double sigma2 = config.noise_powers[user_index];
    arma::cx_mat interf(config.n_tx, config.n_tx, arma::fill::zeros);
    for (arma::uword l = 0; l < config.n_users; ++l)
        if (l != user_index) interf += covs.matrices[l];
    const arma::cx_mat& own = covs.matrices[user_index];

    // worst SINR >= s  iff  min over the ball of (h+e)^H (Q_k - s*sum Q_l) (h+e) >= s sigma^2.
    const auto feasible = [&](double s) {
        return min_quadratic_over_ball(own - s * interf, h, r) - s * sigma2 >= 0.0;
    };

    double hi = default_t_upper(channels, config, user_index);
    int widen = 0;
    while (feasible(hi)) {
        hi *= 2.0;
        if (++widen > 64)
            throw BracketError("worst_sinr_ball: bracket widening exhausted");
    }
    double lo = 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double mc_worst_rate(const CovarianceSet& covs, const ChannelSet& channels,
                     const SystemConfig& config, arma::uword user_index,
                     arma::uword n_samples, std::uint64_t seed) {
    config.validate();
    channels.validate(config);
    if (user_index >= config.n_users)
        throw std::invalid_argument("mc_worst_rate: user_index out of range");
    if (n_samples < 1)
        throw std::invalid_argument("mc_worst_rate: n_samples must be >= 1");

    const arma::cx_vec& h = channels.estimates[user_index];
    const double r = channels.radii[user_index];

    double worst = rate(covs, h, user_index, config);  // zero-error candidate
    const arma::cx_vec weighted = covs.matrices[user_index] * h;
    const double wn = arma::norm(weighted);
    if (r > 0.0 && wn > 0.0) {
        const arma::cx_vec dir = weighted / wn;
        worst = std::min(worst, rate(covs, h + r * dir, user_index, config));
        worst = std::min(worst, rate(covs, h - r * dir, user_index, config));
    }
    if (r == 0.0)
        return worst;

    constexpr arma::uword kChunk = 8192;
    arma::uword produced = 0;
    for (arma::uword chunk = 0; produced < n_samples; ++chunk) {
        Rng rng(Rng::derive(seed, 0xE770'0000ULL + chunk));
        const arma::uword take = std::min(kChunk, n_samples - produced);
        for (arma::uword i = 0; i < take; ++i) {
            const arma::cx_vec e = sample_error(r, config.n_tx, rng, ErrorMode::Boundary);
            worst = std::min(worst, rate(covs, h + e, user_index, config));
        }
        produced += take;
    }
    return worst;
}

std::string WorstCaseReport::to_json() const {
    nlohmann::json j;
    j["per_user"] = nlohmann::json::array();
    for (const auto& u : per_user) {
        j["per_user"].push_back({{"exact_worst_sinr", u.exact_worst_sinr},
                                 {"exact_worst_rate", u.exact_worst_rate},
                                 {"mc_worst_rate", u.mc_worst_rate},
                                 {"mc_samples", u.mc_samples}});
    }
    j["utility_exact"] = utility_exact;
    j["utility_mc"] = utility_mc;
    return j.dump();
}

WorstCaseReport evaluate_worst_case(const CovarianceSet& covs, const ChannelSet& channels,
                                    const SystemConfig& config, arma::uword mc_samples,
                                    std::uint64_t seed) {
    WorstCaseReport rep;
    arma::vec exact_rates(config.n_users), mc_rates(config.n_users);
    for (arma::uword k = 0; k < config.n_users; ++k) {
        UserWorstCase u;
        u.exact_worst_sinr = exact_worst_sinr(covs, channels, config, k);
        u.exact_worst_rate = std::log2(1.0 + u.exact_worst_sinr);
        u.mc_worst_rate = mc_worst_rate(covs, channels, config, k, mc_samples,
                                        Rng::derive(seed, 0xA11CE000ULL + k));
        u.mc_samples = mc_samples;
        exact_rates[k] = u.exact_worst_rate;
        mc_rates[k] = u.mc_worst_rate;
        rep.per_user.push_back(u);
    }
    rep.utility_exact = utility(exact_rates, config.utility);
    rep.utility_mc = utility(mc_rates, config.utility);
    return rep;
}

CovarianceSet naive_design(const ChannelSet& channels, const SystemConfig& config,
                           const RunOptions& options) {
    ChannelSet nominal = channels;
    nominal.radii.zeros();
    const IterationTrace trace = run(nominal, config, options);
    if (trace.stop_reason == StopReason::SolverFailure)
        throw std::runtime_error("naive_design: solver failure in the perfect-CSI run");
    return trace.final_state().covs;
}

namespace {

arma::cx_vec direction_on_grid(arma::uword n_tx, double alpha, double phase) {
    if (n_tx == 1) return arma::cx_vec{std::complex<double>(1.0, 0.0)};
    arma::cx_vec d(2);
    d[0] = std::cos(alpha);
    d[1] = std::polar(std::sin(alpha), phase);
    return d;
}

double score_rank_one(const std::vector<arma::cx_vec>& w, const ChannelSet& channels,
                      const SystemConfig& config) {
    CovarianceSet covs;
    covs.matrices.reserve(config.n_users);
    for (const auto& wk : w) covs.matrices.push_back(wk * wk.t());
    arma::vec rates(config.n_users);
    for (arma::uword k = 0; k < config.n_users; ++k)
        rates[k] = std::log2(1.0 + worst_sinr_ball(covs, channels, config, k, 1e-7));
    return utility(rates, config.utility);
}

}  // namespace

GridDesign oracle_grid_design(const ChannelSet& channels, const SystemConfig& config,
                              arma::uword grid_resolution) {
    config.validate();
    channels.validate(config);
    if (config.n_tx > 2 || config.n_users > 2)
        throw std::invalid_argument("oracle_grid_design: instance too large (needs n_tx <= 2, n_users <= 2)");
    if (grid_resolution < 2)
        throw std::invalid_argument("oracle_grid_design: grid_resolution must be >= 2");

    const arma::uword k_users = config.n_users;
    const double p_total = config.power_budget;

    const arma::uword na = grid_resolution + 1;     // alpha in [0, pi/2]
    const arma::uword np = 2 * grid_resolution;     // phase in [0, 2pi)
    const arma::uword nb = grid_resolution + 1;     // power split in [0, 1]

    const auto build = [&](const arma::vec& params) {
        // params: alpha_k, phase_k per user, then the power split (K = 2 only).
        std::vector<arma::cx_vec> w(k_users);
        for (arma::uword k = 0; k < k_users; ++k) {
            const double share = (k_users == 1) ? 1.0 : (k == 0 ? params[2 * k_users] : 1.0 - params[2 * k_users]);
            w[k] = std::sqrt(p_total * std::max(share, 0.0)) *
                   direction_on_grid(config.n_tx, params[2 * k], params[2 * k + 1]);
        }
        return w;
    };

    const arma::uword n_params = 2 * k_users + (k_users == 2 ? 1 : 0);
    arma::vec best_params(n_params, arma::fill::zeros);
    double best = -arma::datum::inf;

    const double alpha_step = (config.n_tx == 1) ? 0.0 : (0.5 * arma::datum::pi) / grid_resolution;
    const double phase_step = (config.n_tx == 1) ? 0.0 : (2.0 * arma::datum::pi) / np;
    const double beta_step = 1.0 / grid_resolution;

    const arma::uword na_eff = config.n_tx == 1 ? 1 : na;
    const arma::uword np_eff = config.n_tx == 1 ? 1 : np;
    const arma::uword nb_eff = k_users == 2 ? nb : 1;

    arma::vec params(n_params, arma::fill::zeros);
    for (arma::uword b = 0; b < nb_eff; ++b) {
        if (k_users == 2) params[4] = b * beta_step;
        for (arma::uword a0 = 0; a0 < na_eff; ++a0) {
            params[0] = a0 * alpha_step;
            for (arma::uword p0 = 0; p0 < np_eff; ++p0) {
                // phase is irrelevant when sin(alpha) = 0
                if (a0 == 0 && p0 > 0) continue;
                params[1] = p0 * phase_step;
                if (k_users == 1) {
                    const double u = score_rank_one(build(params), channels, config);
                    if (u > best) {
                        best = u;
                        best_params = params;
                    }
                    continue;
                }
                for (arma::uword a1 = 0; a1 < na_eff; ++a1) {
                    params[2] = a1 * alpha_step;
                    for (arma::uword p1 = 0; p1 < np_eff; ++p1) {
                        if (a1 == 0 && p1 > 0) continue;
                        params[3] = p1 * phase_step;
                        const double u = score_rank_one(build(params), channels, config);
                        if (u > best) {
                            best = u;
                            best_params = params;
                        }
                    }
                }
            }
        }
    }

    // Local pattern refinement around the best grid point.
    arma::vec step(n_params, arma::fill::zeros);
    for (arma::uword k = 0; k < k_users; ++k) {
        step[2 * k] = alpha_step;
        step[2 * k + 1] = phase_step;
    }
    if (k_users == 2) step[4] = beta_step;

    arma::vec lo(n_params, arma::fill::zeros), hi(n_params);
    for (arma::uword k = 0; k < k_users; ++k) {
        hi[2 * k] = 0.5 * arma::datum::pi;
        hi[2 * k + 1] = 2.0 * arma::datum::pi;
    }
    if (k_users == 2) hi[4] = 1.0;

    for (int round = 0; round < 7; ++round) {
        step *= 0.5;
        bool improved = true;
        while (improved) {
            improved = false;
            for (arma::uword i = 0; i < n_params; ++i) {
                if (step[i] == 0.0) continue;
                for (const double s : {+1.0, -1.0}) {
                    arma::vec cand = best_params;
                    cand[i] = std::clamp(cand[i] + s * step[i], lo[i], hi[i]);
                    const double u = score_rank_one(build(cand), channels, config);
                    if (u > best + 1e-12) {
                        best = u;
                        best_params = cand;
                        improved = true;
                    }
                }
            }
        }
    }

    GridDesign out;
    const std::vector<arma::cx_vec> w = build(best_params);
    out.covs.matrices.reserve(k_users);
    for (const auto& wk : w) out.covs.matrices.push_back(wk * wk.t());

    // Report the utility through the S-procedure evaluator (the certified path).
    arma::vec rates(k_users);
    for (arma::uword k = 0; k < k_users; ++k)
        rates[k] = std::log2(1.0 + exact_worst_sinr(out.covs, channels, config, k));
    out.utility = utility(rates, config.utility);
    return out;
}

}  // namespace wcum
