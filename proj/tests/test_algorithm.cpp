#include <doctest.h>

#include <json.hpp>

#include "common.hpp"
#include "wcum/algorithm.hpp"
#include "wcum/eval.hpp"
#include "wcum/lmi.hpp"

using namespace wcum;
using cd = std::complex<double>;

namespace {

RunOptions fast_options() {
    RunOptions o;
    o.epsilon = 1e-3;
    o.max_iters = 1500;
    return o;
}

}  // namespace

TEST_CASE("init_t: orthogonal two-user symmetry") {
    SystemConfig cfg = testutil::paper_config(2, 2);
    ChannelSet ch;
    ch.estimates = {arma::cx_vec{cd(1, 0), cd(0, 0)}, arma::cx_vec{cd(0, 0), cd(1, 0)}};
    ch.radii = arma::vec{0.1, 0.1};
    const arma::vec t0 = init_t(ch, cfg);
    CHECK(t0[0] == doctest::Approx(67.5).epsilon(1e-12));
    CHECK(t0[1] == doctest::Approx(67.5).epsilon(1e-12));
}

TEST_CASE("init_t: radius at or above the estimate norm clamps to zero") {
    SystemConfig cfg = testutil::paper_config(2, 2);
    ChannelSet ch;
    ch.estimates = {arma::cx_vec{cd(0.5, 0), cd(0, 0)}, arma::cx_vec{cd(0, 0), cd(1, 0)}};
    ch.radii = arma::vec{0.5, 0.1};
    const arma::vec t0 = init_t(ch, cfg);
    CHECK(t0[0] == 0.0);
    CHECK(t0[1] > 0.0);
}

TEST_CASE("init_t: zero estimate rejected") {
    SystemConfig cfg = testutil::paper_config(2, 1);
    ChannelSet ch;
    ch.estimates = {arma::cx_vec(2, arma::fill::zeros)};
    ch.radii = arma::vec{0.1};
    CHECK_THROWS_AS(init_t(ch, cfg), std::invalid_argument);
}

TEST_CASE("init_t: closed form equals the general beamformer formula") {
    SystemConfig cfg = testutil::paper_config(4, 2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ChannelSet ch = testutil::sampled_channels(cfg, seed, 0.1);
        const double scale = std::sqrt(cfg.power_budget / 2.0);
        std::vector<arma::cx_vec> w;
        for (const auto& h : ch.estimates) w.push_back(scale * h / arma::norm(h));
        const arma::vec a = init_t(ch, cfg);
        const arma::vec b = init_t_for_beamformers(w, ch, cfg);
        CHECK(arma::abs(a - b).max() <= 1e-12 * (1.0 + arma::abs(a).max()));
    }
}

TEST_CASE("init_t: ratio of sampled ball extrema confirms the closed form") {
    // The closed form extremizes numerator and denominator separately over
    // the ball; sampled extrema can only be less extreme, so the sampled
    // ratio upper-bounds it and tightly so.
    SystemConfig cfg = testutil::paper_config(2, 2);
    ChannelSet ch = testutil::sampled_channels(cfg, 31, 0.1);
    const double scale = std::sqrt(cfg.power_budget / 2.0);
    std::vector<arma::cx_vec> w;
    for (const auto& h : ch.estimates) w.push_back(scale * h / arma::norm(h));
    const arma::vec t0 = init_t_for_beamformers(w, ch, cfg);

    Rng rng(32);
    for (arma::uword k = 0; k < 2; ++k) {
        double num_min = arma::datum::inf, den_max = 0.0;
        for (int s = 0; s < 100000; ++s) {
            const arma::cx_vec e = sample_error(ch.radii[k], 2, rng, ErrorMode::Boundary);
            const arma::cx_vec h = ch.estimates[k] + e;
            const double num = std::norm(arma::cdot(h, w[k]));
            double den = cfg.noise_powers[k];
            for (arma::uword l = 0; l < 2; ++l)
                if (l != k) den += std::norm(arma::cdot(h, w[l]));
            num_min = std::min(num_min, num);
            den_max = std::max(den_max, den);
        }
        const double sampled = num_min / den_max;
        CHECK(t0[k] <= sampled + 1e-12);
        CHECK(sampled - t0[k] <= 0.01 * t0[k]);
    }
}

TEST_CASE("step_q: zero slack at the single-user optimum") {
    SystemConfig cfg = testutil::paper_config(2, 1);
    ChannelSet ch;
    ch.estimates = {arma::cx_vec{cd(1, 0), cd(0, 0)}};
    ch.radii = arma::vec{0.1};
    WcumState st;
    st.t = arma::vec{810.0};  // P (|h| - r)^2 / sigma^2
    st.covs = CovarianceSet::zeros(cfg);
    st.lambdas = arma::vec{0.0};
    st.slacks = arma::vec{0.0};
    const StepQResult q = step_q(st, ch, cfg);
    REQUIRE((q.status == SolveStatus::Optimal || q.status == SolveStatus::NearOptimal));
    CHECK(q.psi <= 1e-5);
}

TEST_CASE("step_q: positive slack from the initialization, full power single user") {
    SystemConfig cfg = testutil::paper_config(4, 2);
    ChannelSet ch = testutil::sampled_channels(cfg, 77, 0.1);
    WcumState st;
    st.t = init_t(ch, cfg);
    st.covs = CovarianceSet::zeros(cfg);
    st.lambdas = arma::vec(2, arma::fill::zeros);
    st.slacks = arma::vec(2, arma::fill::zeros);
    const StepQResult q = step_q(st, ch, cfg);
    REQUIRE(q.status == SolveStatus::Optimal);
    WARN(q.psi > 0.0);  // strict interior expected from the lower-bound start
    CHECK(q.psi >= 0.0);

    SystemConfig single = testutil::paper_config(3, 1);
    ChannelSet sch = testutil::sampled_channels(single, 78, 0.1);
    WcumState sst;
    sst.t = arma::vec{0.0};
    sst.covs = CovarianceSet::zeros(single);
    sst.lambdas = arma::vec{0.0};
    sst.slacks = arma::vec{0.0};
    const StepQResult sq = step_q(sst, sch, single);
    REQUIRE(sq.status == SolveStatus::Optimal);
    CHECK(sq.covs.total_trace() == doctest::Approx(single.power_budget).epsilon(1e-6));
}

TEST_CASE("step_t: zero slack leaves the targets in place, slack raises the utility") {
    SystemConfig cfg = testutil::paper_config(2, 1);
    ChannelSet ch;
    ch.estimates = {arma::cx_vec{cd(1, 0), cd(0, 0)}};
    ch.radii = arma::vec{0.1};

    WcumState st;
    st.t = arma::vec{810.0};
    st.covs = CovarianceSet::zeros(cfg);
    st.lambdas = arma::vec{0.0};
    st.slacks = arma::vec{0.0};
    const StepQResult q = step_q(st, ch, cfg);
    WcumState after = st;
    after.covs = q.covs;
    after.lambdas = q.lambdas;
    after.slacks = q.slacks;
    const StepTResult ts = step_t(after, ch, cfg);
    CHECK(std::abs(ts.t[0] - 810.0) <= 810.0 * 1e-5 + 1e-5);

    // A strictly interior start must strictly improve.
    SystemConfig cfg2 = testutil::paper_config(4, 2);
    ChannelSet ch2 = testutil::sampled_channels(cfg2, 79, 0.1);
    WcumState st2;
    st2.t = init_t(ch2, cfg2);
    st2.covs = CovarianceSet::zeros(cfg2);
    st2.lambdas = arma::vec(2, arma::fill::zeros);
    st2.slacks = arma::vec(2, arma::fill::zeros);
    const double u0 = utility(arma::vec{std::log2(1 + st2.t[0]), std::log2(1 + st2.t[1])},
                              cfg2.utility);
    const StepQResult q2 = step_q(st2, ch2, cfg2);
    REQUIRE(q2.psi > 1e-5);
    WcumState after2 = st2;
    after2.covs = q2.covs;
    after2.lambdas = q2.lambdas;
    after2.slacks = q2.slacks;
    const StepTResult ts2 = step_t(after2, ch2, cfg2);
    CHECK(ts2.utility_value > u0);
}

TEST_CASE("step_t: per-user searches decouple") {
    SystemConfig cfg = testutil::paper_config(2, 2);
    Rng rng(80);
    ChannelSet ch = testutil::sampled_channels(cfg, 80, 0.1);
    WcumState st;
    st.covs = testutil::random_covariances(rng, cfg);
    st.lambdas = arma::vec{0.4, 0.9};
    st.slacks = arma::vec(2, arma::fill::zeros);
    st.t = arma::vec(2, arma::fill::zeros);
    const StepTResult ts = step_t(st, ch, cfg, 1e-6);

    const auto feasible = [&](double t0, double t1) {
        return min_eig(build_phi(t0, st.lambdas[0], st.covs, ch, cfg, 0)).value >= 0.0 &&
               min_eig(build_phi(t1, st.lambdas[1], st.covs, ch, cfg, 1)).value >= 0.0;
    };
    const double d = 1e-4;
    CHECK(feasible(std::max(0.0, ts.t[0] - d), std::max(0.0, ts.t[1] - d)));
    CHECK_FALSE(feasible(ts.t[0] + d, ts.t[1]));
    CHECK_FALSE(feasible(ts.t[0], ts.t[1] + d));
}

TEST_CASE("run: single user without uncertainty reaches capacity") {
    SystemConfig cfg = testutil::paper_config(3, 1);
    ChannelSet ch = testutil::sampled_channels(cfg, 91, 0.0);
    const IterationTrace trace = run(ch, cfg, fast_options());
    REQUIRE(trace.converged);
    const double capacity =
        std::log2(1.0 + cfg.power_budget * std::pow(arma::norm(ch.estimates[0]), 2) / 0.01);
    CHECK(trace.final_state().utility_value == doctest::Approx(capacity).epsilon(1e-3));
}

TEST_CASE("run: paper configuration instance converges with monotone audit trail") {
    SystemConfig cfg = testutil::paper_config(4, 2);
    ChannelSet ch = testutil::sampled_channels(cfg, 1, 0.1);
    const IterationTrace trace = run(ch, cfg, fast_options());
    REQUIRE(trace.converged);
    CHECK(trace.stop_reason == StopReason::EpsilonCriterion);
    CHECK(trace.final_state().psi <= 1e-5);

    double bound = 0.0;
    for (arma::uword k = 0; k < 2; ++k)
        bound += 0.5 * std::log2(1.0 + default_t_upper(ch, cfg, k));
    for (std::size_t i = 1; i < trace.states.size(); ++i) {
        CHECK(trace.states[i].utility_value >= trace.states[i - 1].utility_value - 1e-6);
        CHECK(arma::all(trace.states[i].t - trace.states[i - 1].t >= -1e-6));
        if (i >= 2) CHECK(trace.states[i].psi <= trace.states[i - 1].psi + 1e-6);
        CHECK(trace.states[i].utility_value <= bound);
    }

    // Deterministic replay.
    const IterationTrace again = run(ch, cfg, fast_options());
    CHECK(again.to_jsonl() == trace.to_jsonl());
}

TEST_CASE("run: trace exports one JSON record per iteration") {
    SystemConfig cfg = testutil::paper_config(2, 1);
    ChannelSet ch = testutil::sampled_channels(cfg, 92, 0.1);
    const IterationTrace trace = run(ch, cfg, fast_options());
    std::istringstream is(trace.to_jsonl());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(is, line)) {
        const auto rec = nlohmann::json::parse(line);
        CHECK(rec.contains("m"));
        CHECK(rec.contains("t"));
        CHECK(rec.contains("lambda"));
        CHECK(rec.contains("z"));
        CHECK(rec.contains("psi"));
        CHECK(rec.contains("utility"));
        CHECK(rec["m"].get<arma::uword>() == lines);
        ++lines;
    }
    CHECK(lines == trace.states.size());
}

TEST_CASE("run: proportional fairness with a hopeless user fails at reporting") {
    SystemConfig cfg = testutil::paper_config(2, 2);
    cfg.utility = UtilityKind::proportional_fair();
    ChannelSet ch;
    ch.estimates = {arma::cx_vec{cd(0.3, 0), cd(0, 0)}, arma::cx_vec{cd(0, 0), cd(1, 0)}};
    ch.radii = arma::vec{0.5, 0.1};  // radius exceeds the first user's norm
    CHECK_THROWS_AS(run(ch, cfg, fast_options()), std::domain_error);
}

TEST_CASE("certify_limit: converged point passes, perturbed points fail") {
    SystemConfig cfg = testutil::paper_config(2, 2);
    ChannelSet ch = testutil::sampled_channels(cfg, 93, 0.1);
    const IterationTrace trace = run(ch, cfg, fast_options());
    REQUIRE(trace.converged);

    const CertificateReport ok = certify_limit(trace.final_state(), ch, cfg);
    CHECK(ok.feasible);
    CHECK(ok.zero_slack);
    CHECK(ok.pareto_stationary);
    CHECK(ok.passed);

    WcumState bumped = trace.final_state();
    bumped.t[0] += 0.1;
    const CertificateReport bad = certify_limit(bumped, ch, cfg);
    CHECK_FALSE(bad.feasible);
    CHECK_FALSE(bad.passed);

    // A truncated run still has slack to give: the stationarity probe fails.
    RunOptions one;
    one.epsilon = 1e-3;
    one.max_iters = 1;
    const IterationTrace early = run(ch, cfg, one);
    REQUIRE_FALSE(early.converged);
    REQUIRE(early.final_state().psi > 1e-5);
    const CertificateReport probe = certify_limit(early.final_state(), ch, cfg);
    CHECK_FALSE(probe.pareto_stationary);
    CHECK_FALSE(probe.passed);

    const auto parsed = nlohmann::json::parse(ok.to_json());
    CHECK(parsed.contains("probe_psi"));
    CHECK(parsed["passed"].get<bool>());
}

TEST_CASE("run: invalid arguments") {
    SystemConfig cfg = testutil::paper_config(2, 1);
    ChannelSet ch = testutil::sampled_channels(cfg, 94, 0.1);
    CHECK_THROWS_AS(run(ch, cfg, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(run(ch, cfg, 1e-3, 0), std::invalid_argument);
}
