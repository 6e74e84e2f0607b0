#include <doctest.h>

#include "common.hpp"
#include "wcum/model.hpp"

using namespace wcum;

namespace {

// Independent rate oracle: explicit scalar loops over the quadratic forms.
double rate_by_loops(const CovarianceSet& covs, const arma::cx_vec& h, arma::uword k,
                     const SystemConfig& cfg) {
    const arma::uword n = cfg.n_tx;
    double signal = 0.0, interference = 0.0;
    for (arma::uword l = 0; l < cfg.n_users; ++l) {
        std::complex<double> quad = 0.0;
        for (arma::uword i = 0; i < n; ++i)
            for (arma::uword j = 0; j < n; ++j)
                quad += std::conj(h[i]) * covs.matrices[l](i, j) * h[j];
        if (l == k)
            signal = quad.real();
        else
            interference += quad.real();
    }
    return std::log2(1.0 + signal / (interference + cfg.noise_powers[k]));
}

}  // namespace

TEST_CASE("rate: single user direct plug-in") {
    SystemConfig cfg = testutil::paper_config(2, 1);
    cfg.noise_powers = arma::vec{0.01};
    arma::cx_vec h{std::complex<double>(1, 0), std::complex<double>(0, 0)};
    CovarianceSet covs;
    covs.matrices.push_back(10.0 * h * h.t());
    const double r = rate(covs, h, 0, cfg);
    CHECK(r == doctest::Approx(std::log2(1.0 + 1000.0)).epsilon(1e-12));
    CHECK(r == doctest::Approx(9.9673).epsilon(1e-4));
}

TEST_CASE("rate: zero covariances give zero rate") {
    SystemConfig cfg = testutil::paper_config(3, 2, 5.0, 0.1);
    CovarianceSet covs = CovarianceSet::zeros(cfg);
    Rng rng(7);
    for (int i = 0; i < 5; ++i) {
        const arma::cx_vec h = rng.cgaussian(3);
        CHECK(rate(covs, h, 0, cfg) == 0.0);
        CHECK(rate(covs, h, 1, cfg) == 0.0);
    }
}

TEST_CASE("rate: matches independent loop evaluation") {
    SystemConfig cfg = testutil::paper_config(2, 2);
    Rng rng(100);
    for (int trial = 0; trial < 20; ++trial) {
        const CovarianceSet covs = testutil::random_covariances(rng, cfg);
        const arma::cx_vec h = rng.cgaussian(2);
        for (arma::uword k = 0; k < 2; ++k)
            CHECK(rate(covs, h, k, cfg) ==
                  doctest::Approx(rate_by_loops(covs, h, k, cfg)).epsilon(1e-12));
    }
}

TEST_CASE("rate: dimension and index errors") {
    SystemConfig cfg = testutil::paper_config(2, 1);
    CovarianceSet covs = CovarianceSet::zeros(cfg);
    CHECK_THROWS_AS(rate(covs, arma::cx_vec(3, arma::fill::zeros), 0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(rate(covs, arma::cx_vec(2, arma::fill::zeros), 1, cfg), std::invalid_argument);
}

TEST_CASE("rate: monotone in own and cross covariance increments") {
    SystemConfig cfg = testutil::paper_config(3, 2, 100.0);
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        CovarianceSet covs = testutil::random_covariances(rng, cfg, 0.3);
        const arma::cx_vec h = rng.cgaussian(3);
        const arma::cx_mat bump = testutil::random_psd(rng, 3, 0.2);
        const double base = rate(covs, h, 0, cfg);

        CovarianceSet own = covs;
        own.matrices[0] += bump;
        CHECK(rate(own, h, 0, cfg) >= base - 1e-12);

        CovarianceSet cross = covs;
        cross.matrices[1] += bump;
        CHECK(rate(cross, h, 0, cfg) <= base + 1e-12);
    }
}

TEST_CASE("utility: definitions") {
    CHECK(utility(arma::vec{3.0, 5.0}, UtilityKind::sum_rate()) == doctest::Approx(4.0));
    CHECK(utility(arma::vec{3.0, 5.0}, UtilityKind::weighted_sum_rate(arma::vec{1.0, 1.0})) ==
          doctest::Approx(8.0));
    CHECK(utility(arma::vec{2.0, 8.0}, UtilityKind::proportional_fair()) ==
          doctest::Approx(std::log(2.0) + std::log(8.0)));
    CHECK(utility(arma::vec{2.0, 8.0}, UtilityKind::proportional_fair()) ==
          doctest::Approx(2.7726).epsilon(1e-4));
}

TEST_CASE("utility: proportional fair rejects zero rates") {
    CHECK_THROWS_AS(utility(arma::vec{0.0, 1.0}, UtilityKind::proportional_fair()),
                    std::domain_error);
}

TEST_CASE("utility: strictly increasing in every argument") {
    const arma::vec rates{1.3, 0.7, 2.1};
    const double h = 1e-6;
    for (const auto& kind : {UtilityKind::sum_rate(),
                             UtilityKind::weighted_sum_rate(arma::vec{0.5, 1.5, 2.0}),
                             UtilityKind::proportional_fair()}) {
        const double base = utility(rates, kind);
        for (arma::uword k = 0; k < rates.n_elem; ++k) {
            arma::vec up = rates;
            up[k] += h;
            CHECK(utility(up, kind) > base);
        }
    }
}

TEST_CASE("utility: sum rate is permutation symmetric") {
    const arma::vec rates{0.3, 1.9, 0.8, 2.2};
    const double base = utility(rates, UtilityKind::sum_rate());
    arma::vec perm{2.2, 0.3, 0.8, 1.9};
    CHECK(utility(perm, UtilityKind::sum_rate()) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("sample_channels: deterministic per seed") {
    SystemConfig cfg = testutil::paper_config(4, 2);
    const auto a = sample_channels(cfg, 123);
    const auto b = sample_channels(cfg, 123);
    const auto c = sample_channels(cfg, 124);
    for (arma::uword k = 0; k < 2; ++k) {
        CHECK(arma::norm(a[k] - b[k]) == 0.0);
        CHECK(arma::norm(a[k] - c[k]) > 0.0);
    }
}

TEST_CASE("sample_channels: standard complex Gaussian statistics") {
    SystemConfig cfg = testutil::paper_config(4, 1);
    const arma::uword n_draws = 100000;
    arma::cx_vec mean(4, arma::fill::zeros);
    double sq = 0.0;
    for (arma::uword d = 0; d < n_draws; ++d) {
        const auto h = sample_channels(cfg, 50000 + d);
        mean += h[0];
        sq += arma::dot(arma::abs(h[0]), arma::abs(h[0]));
    }
    mean /= static_cast<double>(n_draws);
    const double var_per_comp = sq / static_cast<double>(n_draws * 4);
    for (arma::uword i = 0; i < 4; ++i) CHECK(std::abs(mean[i]) <= 0.02);
    CHECK(var_per_comp == doctest::Approx(1.0).epsilon(0.05));
    CHECK(sq / static_cast<double>(n_draws) == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("sample_error: degenerate and boundary modes") {
    CHECK(arma::norm(sample_error(0.0, 3, 42, ErrorMode::Boundary)) == 0.0);
    CHECK(arma::norm(sample_error(0.0, 3, 42, ErrorMode::UniformBall)) == 0.0);
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const arma::cx_vec e = sample_error(0.1, 4, rng, ErrorMode::Boundary);
        CHECK(std::abs(arma::norm(e) - 0.1) <= 1e-12);
    }
}

TEST_CASE("sample_error: every draw stays inside the ball") {
    Rng rng(6);
    for (int i = 0; i < 2000; ++i) {
        const arma::cx_vec e = sample_error(0.7, 3, rng, ErrorMode::UniformBall);
        CHECK(arma::norm(e) <= 0.7);
    }
}

TEST_CASE("sample_error: uniform ball radial CDF") {
    // P(||e|| <= rho) = (rho/r)^(2*dim) for the uniform ball.
    const double r = 0.8, rho = 0.4;
    const arma::uword dim = 2, n_draws = 100000;
    Rng rng(77);
    arma::uword hits = 0;
    for (arma::uword i = 0; i < n_draws; ++i)
        if (arma::norm(sample_error(r, dim, rng, ErrorMode::UniformBall)) <= rho) ++hits;
    const double expected = std::pow(rho / r, 2.0 * dim);
    const double observed = static_cast<double>(hits) / n_draws;
    CHECK(observed == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("rng: deterministic streams and derivation") {
    Rng a(9), b(9);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    CHECK(Rng::derive(1, 2) == Rng::derive(1, 2));
    CHECK(Rng::derive(1, 2) != Rng::derive(1, 3));
    CHECK(Rng::derive(1, 2) != Rng::derive(2, 2));
}
