#ifndef WCUM_TESTS_COMMON_HPP
#define WCUM_TESTS_COMMON_HPP

#include <armadillo>

#include "wcum/model.hpp"
#include "wcum/types.hpp"

namespace testutil {

// Independent eigenvalue oracle: cyclic Jacobi on the real symmetric
// embedding, so eigenvalue assertions do not ride on the same LAPACK path
// the library uses.
inline arma::vec jacobi_eigenvalues(const arma::mat& sym, int sweeps = 60) {
    arma::mat a = 0.5 * (sym + sym.t());
    const arma::uword n = a.n_rows;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (arma::uword p = 0; p < n; ++p)
            for (arma::uword q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-26 * std::max(1.0, arma::accu(arma::square(a.diag())))) break;
        for (arma::uword p = 0; p < n; ++p) {
            for (arma::uword q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
                const double c = std::cos(theta), s = std::sin(theta);
                arma::mat rot = arma::eye(n, n);
                rot(p, p) = c;
                rot(q, q) = c;
                rot(p, q) = s;
                rot(q, p) = -s;
                a = rot.t() * a * rot;
            }
        }
    }
    return arma::sort(a.diag());
}

inline arma::mat embed_for_oracle(const arma::cx_mat& h) {
    const arma::uword n = h.n_rows;
    arma::mat e(2 * n, 2 * n);
    e.submat(0, 0, n - 1, n - 1) = arma::real(h);
    e.submat(0, n, n - 1, 2 * n - 1) = -arma::imag(h);
    e.submat(n, 0, 2 * n - 1, n - 1) = arma::imag(h);
    e.submat(n, n, 2 * n - 1, 2 * n - 1) = arma::real(h);
    return e;
}

// Sorted eigenvalues of a Hermitian matrix via the Jacobi oracle (each
// eigenvalue appears twice in the embedding; take every other one).
inline arma::vec hermitian_eigs_oracle(const arma::cx_mat& h) {
    const arma::vec doubled = jacobi_eigenvalues(embed_for_oracle(h));
    arma::vec out(h.n_rows);
    for (arma::uword i = 0; i < h.n_rows; ++i) out[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
    return out;
}

inline arma::cx_mat random_hermitian(wcum::Rng& rng, arma::uword n, double scale = 1.0) {
    arma::cx_mat a(n, n);
    for (arma::uword c = 0; c < n; ++c)
        for (arma::uword r = 0; r < n; ++r)
            a(r, c) = std::complex<double>(rng.gaussian(), rng.gaussian());
    return scale * 0.5 * (a + a.t());
}

inline arma::cx_mat random_psd(wcum::Rng& rng, arma::uword n, double scale = 1.0) {
    arma::cx_mat a(n, n);
    for (arma::uword c = 0; c < n; ++c)
        for (arma::uword r = 0; r < n; ++r)
            a(r, c) = std::complex<double>(rng.gaussian(), rng.gaussian());
    return scale * (a * a.t()) / static_cast<double>(n);
}

// Random covariance set scaled to use a fraction of the power budget.
inline wcum::CovarianceSet random_covariances(wcum::Rng& rng, const wcum::SystemConfig& config,
                                              double power_fraction = 0.9) {
    wcum::CovarianceSet covs;
    double total = 0.0;
    for (arma::uword k = 0; k < config.n_users; ++k) {
        covs.matrices.push_back(random_psd(rng, config.n_tx));
        total += arma::trace(covs.matrices[k]).real();
    }
    const double target = power_fraction * config.power_budget;
    for (auto& q : covs.matrices) q *= target / total;
    return covs;
}

inline wcum::SystemConfig paper_config(arma::uword n_tx = 4, arma::uword n_users = 2,
                                       double power = 10.0, double sigma2 = 0.01) {
    wcum::SystemConfig cfg;
    cfg.n_tx = n_tx;
    cfg.n_users = n_users;
    cfg.power_budget = power;
    cfg.noise_powers = arma::vec(n_users);
    cfg.noise_powers.fill(sigma2);
    cfg.utility = wcum::UtilityKind::sum_rate();
    return cfg;
}

inline wcum::ChannelSet sampled_channels(const wcum::SystemConfig& cfg, std::uint64_t seed,
                                         double radius) {
    wcum::ChannelSet ch;
    ch.estimates = wcum::sample_channels(cfg, seed);
    ch.radii = arma::vec(cfg.n_users);
    ch.radii.fill(radius);
    return ch;
}

}  // namespace testutil

#endif
