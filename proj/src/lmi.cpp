#include "wcum/lmi.hpp"

namespace wcum {

arma::cx_mat build_y(const arma::cx_mat& q, const arma::cx_vec& estimate) {
    const arma::uword n = estimate.n_elem;
    if (q.n_rows != n || q.n_cols != n)
        throw std::invalid_argument("build_y: matrix/estimate dimension mismatch");

    // [I; h^H] Q [I; h^H]^H = [[Q, Q h], [h^H Q, h^H Q h]]
    arma::cx_mat y(n + 1, n + 1);
    y.submat(0, 0, n - 1, n - 1) = q;
    const arma::cx_vec qh = q * estimate;
    y.submat(0, n, n - 1, n) = qh;
    y.submat(n, 0, n, n - 1) = qh.t();
    y(n, n) = arma::cdot(estimate, qh);
    return 0.5 * (y + y.t());
}

LmiBlock build_phi(double t, double lambda, const CovarianceSet& covs,
                   const ChannelSet& channels, const SystemConfig& config,
                   arma::uword user_index) {
    if (t < 0.0 || !std::isfinite(t))
        throw std::invalid_argument("build_phi: t must be finite and >= 0");
    if (lambda < 0.0 || !std::isfinite(lambda))
        throw std::invalid_argument("build_phi: lambda must be finite and >= 0");
    if (user_index >= config.n_users)
        throw std::invalid_argument("build_phi: user_index out of range");
    channels.validate(config);

    const arma::uword n = config.n_tx;
    arma::cx_mat q_eff = covs.matrices[user_index];
    for (arma::uword l = 0; l < config.n_users; ++l)
        if (l != user_index) q_eff -= t * covs.matrices[l];

    LmiBlock block;
    block.matrix = build_y(q_eff, channels.estimates[user_index]);
    const double r = channels.radii[user_index];
    for (arma::uword i = 0; i < n; ++i)
        block.matrix(i, i) += lambda;
    block.matrix(n, n) += -lambda * r * r - t * config.noise_powers[user_index];
    block.user_index = user_index;
    block.t = t;
    block.lambda = lambda;
    return block;
}

EigPair min_eig_hermitian(const arma::cx_mat& m) {
    if (m.n_rows != m.n_cols)
        throw std::invalid_argument("min_eig: matrix must be square");
    const double scale = std::max(1.0, arma::abs(m).max());
    if (arma::abs(m - m.t()).max() > 1e-8 * scale)
        throw std::invalid_argument("min_eig: matrix not Hermitian within tolerance");

    arma::vec values;
    arma::cx_mat vectors;
    if (!arma::eig_sym(values, vectors, arma::cx_mat(0.5 * (m + m.t()))))
        throw std::runtime_error("min_eig: eigendecomposition failed");
    EigPair out;
    out.value = values[0];  // eig_sym sorts ascending
    out.vector = vectors.col(0);
    out.vector /= arma::norm(out.vector);
    return out;
}

EigPair min_eig(const LmiBlock& block) {
    return min_eig_hermitian(block.matrix);
}

double default_t_upper(const ChannelSet& channels, const SystemConfig& config,
                       arma::uword user_index) {
    const double hn = arma::norm(channels.estimates[user_index]);
    const double r = channels.radii[user_index];
    const double s = config.noise_powers[user_index];
    return std::max(config.power_budget * (hn + r) * (hn + r) / s, 1.0);
}

FeasibleT max_feasible_t(double lambda, const CovarianceSet& covs,
                         const ChannelSet& channels, const SystemConfig& config,
                         arma::uword user_index, double t_hi, double tol) {
    if (!(t_hi > 0.0) || !(tol > 0.0))
        throw std::invalid_argument("max_feasible_t: t_hi and tol must be > 0");

    const auto eig_at = [&](double t) {
        return min_eig(build_phi(t, lambda, covs, channels, config, user_index)).value;
    };

    if (eig_at(0.0) < -tol)
        return {0.0, true};
    if (eig_at(t_hi) >= 0.0)
        throw BracketError("max_feasible_t: Phi still PSD at t_hi; widen the bracket");

    // Every eigenvalue of Phi is nonincreasing in t, so the feasible set is
    // an interval [0, t*]; plain bisection, ties resolved toward larger t.
    double lo = 0.0, hi = t_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (eig_at(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return {lo, false};
}

FeasibleT max_feasible_t_auto(double lambda, const CovarianceSet& covs,
                              const ChannelSet& channels, const SystemConfig& config,
                              arma::uword user_index, double tol) {
    double t_hi = default_t_upper(channels, config, user_index);
    for (int attempt = 0; attempt < 64; ++attempt) {
        try {
            return max_feasible_t(lambda, covs, channels, config, user_index, t_hi, tol);
        } catch (const BracketError&) {
            t_hi *= 2.0;
        }
    }
    throw BracketError("max_feasible_t_auto: bracket widening exhausted");
}

}  // namespace wcum
