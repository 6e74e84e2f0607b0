#include "ipm.hpp"

#include <cmath>

namespace wcum::detail {

namespace {

using BlockMat = std::vector<arma::mat>;

BlockMat zeros_like(const std::vector<arma::uword>& dims) {
    BlockMat m;
    m.reserve(dims.size());
    for (arma::uword d : dims) m.emplace_back(d, d, arma::fill::zeros);
    return m;
}

BlockMat identity_like(const std::vector<arma::uword>& dims, double scale) {
    BlockMat m;
    m.reserve(dims.size());
    for (arma::uword d : dims) m.push_back(scale * arma::eye(d, d));
    return m;
}

double frob(const BlockMat& m) {
    double s = 0.0;
    for (const auto& b : m) s += arma::accu(arma::square(b));
    return std::sqrt(s);
}

double inner(const BlockMat& a, const BlockMat& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += arma::accu(a[i] % b[i]);
    return s;
}

// Per-block vectorized view of the coefficients: column j of `stack` is
// vec(G_i) for the j-th variable active on this block, so every contraction
// the iteration needs becomes one dense BLAS product per block.
struct BlockData {
    arma::uword dim = 0;
    std::vector<arma::uword> active;
    arma::mat stack;          // dim^2 x active.size()
    arma::vec constant_vec;   // vec(G_0 block)
    arma::mat constant;       // G_0 block
};

std::vector<BlockData> build_blocks(const ConeProgram& p) {
    std::vector<BlockData> blocks(p.block_dims.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        blocks[b].dim = p.block_dims[b];
        blocks[b].constant = arma::mat(p.block_dims[b], p.block_dims[b], arma::fill::zeros);
    }
    for (const auto& [b, g0] : p.constant) blocks[b].constant += g0;
    for (arma::uword i = 0; i < p.n_vars; ++i)
        for (const auto& [b, gi] : p.coeff[i]) blocks[b].active.push_back(i);
    for (auto& blk : blocks) {
        blk.stack = arma::mat(blk.dim * blk.dim, blk.active.size(), arma::fill::zeros);
        blk.constant_vec = arma::vectorise(blk.constant);
    }
    std::vector<arma::uword> cursor(blocks.size(), 0);
    for (arma::uword i = 0; i < p.n_vars; ++i)
        for (const auto& [b, gi] : p.coeff[i]) blocks[b].stack.col(cursor[b]++) = arma::vectorise(gi);
    return blocks;
}

// Largest alpha in (0, 1] with M + alpha * dM staying positive definite,
// damped by a fraction-to-boundary factor.
double max_step(const BlockMat& m, const BlockMat& dm) {
    double alpha = 1.0;
    for (std::size_t b = 0; b < m.size(); ++b) {
        arma::mat l;
        if (!arma::chol(l, m[b], "lower"))
            return 0.0;
        const arma::mat w = arma::solve(arma::trimatl(l), dm[b]);
        const arma::mat s = arma::solve(arma::trimatl(l), w.t()).t();  // L^-1 dM L^-T
        const double lo = arma::eig_sym(0.5 * (s + s.t())).min();
        if (lo < 0.0)
            alpha = std::min(alpha, -1.0 / lo);
    }
    return std::min(1.0, 0.985 * alpha);
}

// Solve the (generally nonsymmetric) Schur system robustly: plain LU first,
// then growing ridge regularization once the system turns singular near a
// degenerate optimum, with one step of iterative refinement.
bool solve_schur(const arma::mat& schur, const arma::vec& rhs, arma::vec& dx) {
    const double scale = std::max(1.0, arma::abs(schur).max());
    const auto acceptable = [&](const arma::vec& v) {
        if (!v.is_finite()) return false;
        return arma::norm(schur * v - rhs) <= 1e-8 * (arma::norm(rhs) + scale * arma::norm(v)) + 1e-12;
    };
    if (arma::solve(dx, schur, rhs, arma::solve_opts::no_approx) && acceptable(dx))
        return true;
    for (double ridge = 1e-14 * scale; ridge <= 1e-6 * scale; ridge *= 100.0) {
        const arma::mat reg = schur + ridge * arma::eye(schur.n_rows, schur.n_cols);
        if (!arma::solve(dx, reg, rhs, arma::solve_opts::no_approx))
            continue;
        arma::vec refine;
        if (arma::solve(refine, reg, rhs - schur * dx, arma::solve_opts::no_approx))
            dx += refine;
        if (dx.is_finite()) return true;
    }
    return false;
}

}  // namespace

IpmResult solve_ipm(const ConeProgram& p, double tolerance, arma::uword max_iterations) {
    const arma::uword m = p.n_vars;
    const std::size_t nb = p.block_dims.size();
    arma::uword cone_dim = 0;
    for (arma::uword d : p.block_dims) cone_dim += d;

    const std::vector<BlockData> blocks = build_blocks(p);

    double data_norm = 1.0;
    double g0_sq = 0.0;
    for (const auto& blk : blocks) {
        if (blk.stack.n_elem > 0) data_norm = std::max(data_norm, arma::abs(blk.stack).max());
        if (blk.constant.n_elem > 0) {
            data_norm = std::max(data_norm, arma::abs(blk.constant).max());
            g0_sq += arma::accu(arma::square(blk.constant));
        }
    }
    const double g0_frob = std::sqrt(g0_sq);
    const double c_norm = arma::norm(p.cost);

    arma::vec x(m, arma::fill::zeros);
    BlockMat big_x = identity_like(p.block_dims, std::max(10.0, data_norm));
    BlockMat big_y = identity_like(p.block_dims, std::max(10.0, c_norm));

    const auto gather = [&](const BlockData& blk, const arma::vec& full) {
        arma::vec out(blk.active.size());
        for (std::size_t j = 0; j < blk.active.size(); ++j) out[j] = full[blk.active[j]];
        return out;
    };
    const auto scatter_add = [&](const BlockData& blk, const arma::vec& contrib, arma::vec& full) {
        for (std::size_t j = 0; j < blk.active.size(); ++j) full[blk.active[j]] += contrib[j];
    };

    // G(x) - X per block.
    const auto primal_residual = [&](BlockMat& rp) {
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& blk = blocks[b];
            arma::vec v = blk.constant_vec;
            if (!blk.active.empty()) v += blk.stack * gather(blk, x);
            rp[b] = arma::reshape(v, blk.dim, blk.dim) - big_x[b];
        }
    };

    // A*(Y)_i = tr(G_i Y).
    const auto adjoint_y = [&](const BlockMat& y) {
        arma::vec out(m, arma::fill::zeros);
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& blk = blocks[b];
            if (blk.active.empty()) continue;
            scatter_add(blk, blk.stack.t() * arma::vectorise(y[b]), out);
        }
        return out;
    };

    IpmResult res;
    res.x = x;

    const auto measure = [&](const BlockMat& rp) {
        const arma::vec rd = p.cost - adjoint_y(big_y);
        const double xy = inner(big_x, big_y);
        const double primal_obj = arma::dot(p.cost, x);
        double dual_obj = 0.0;
        for (std::size_t b = 0; b < nb; ++b) dual_obj -= arma::accu(blocks[b].constant % big_y[b]);
        res.primal_infeasibility = frob(rp) / (1.0 + g0_frob);
        res.dual_infeasibility = arma::norm(rd) / (1.0 + c_norm);
        res.duality_gap = std::abs(xy) / (1.0 + std::abs(primal_obj) + std::abs(dual_obj));
        res.x = x;
        res.objective = primal_obj;
        return dual_obj;
    };

    // The endgame of degenerate instances (optimal face without strict
    // complementarity) stalls rather than converging; keep the best iterate
    // seen and return it when progress dies out.
    IpmResult best = res;
    double best_err = arma::datum::inf;
    arma::uword since_best = 0;

    const auto finish = [&]() -> IpmResult& {
        const double err = std::max({res.primal_infeasibility, res.dual_infeasibility,
                                     res.duality_gap});
        if (best_err < err) res = best;
        res.near_optimal = res.primal_infeasibility <= std::max(1e-6, tolerance) &&
                           res.dual_infeasibility <= std::max(1e-5, 10.0 * tolerance) &&
                           res.duality_gap <= std::max(1e-4, 10.0 * tolerance);
        return res;
    };

    BlockMat rp = zeros_like(p.block_dims);

    for (arma::uword iter = 0; iter < max_iterations; ++iter) {
        primal_residual(rp);
        const double mu = inner(big_x, big_y) / static_cast<double>(cone_dim);
        const double dual_obj = measure(rp);
        res.iterations = iter;

        const double err = std::max({res.primal_infeasibility, res.dual_infeasibility, res.duality_gap});
        if (err <= tolerance) {
            res.converged = true;
            return res;
        }
        if (err < best_err) {
            best_err = err;
            best = res;
            since_best = 0;
        } else if (++since_best >= 30) {
            return finish();
        }

        // Farkas-style certificate of primal infeasibility: a PSD ray Y with
        // A*(Y) ~ 0 and dual objective -tr(G0 Y) growing without bound.
        {
            const double ynorm = frob(big_y);
            if (ynorm > 1e8) {
                const double ray_adj = arma::norm(adjoint_y(big_y)) / ynorm;
                const double ray_obj = dual_obj / ynorm;
                if (ray_adj < 1e-9 && ray_obj > 1e-9) {
                    res.infeasible = true;
                    return res;
                }
            }
        }

        // Per-block X^-1 and the Schur matrix M_ij = tr(G_i X^-1 G_j Y),
        // assembled as stack^T (Y kron X^-1) stack per block.
        std::vector<arma::mat> xinv(nb);
        arma::mat schur(m, m, arma::fill::zeros);
        for (std::size_t b = 0; b < nb; ++b) {
            arma::mat l;
            if (!arma::chol(l, big_x[b], "lower"))
                return finish();
            const arma::mat linv = arma::inv(arma::trimatl(l));
            xinv[b] = linv.t() * linv;
            const auto& blk = blocks[b];
            if (blk.active.empty()) continue;
            const arma::mat kxy = arma::kron(big_y[b], xinv[b]);
            const arma::mat mb = blk.stack.t() * (kxy * blk.stack);
            for (std::size_t cj = 0; cj < blk.active.size(); ++cj)
                for (std::size_t ci = 0; ci < blk.active.size(); ++ci)
                    schur(blk.active[ci], blk.active[cj]) += mb(ci, cj);
        }

        const auto solve_direction = [&](double sigma_mu, const BlockMat* corr)
            -> std::tuple<bool, arma::vec, BlockMat, BlockMat> {
            // rhs_i = sigma mu tr(Gi X^-1) - tr(Gi X^-1 C) - tr(Gi X^-1 Rp Y) - c_i,
            // via tr(G A) = vec(G) . vec(A) for symmetric G.
            arma::vec rhs = -p.cost;
            for (std::size_t b = 0; b < nb; ++b) {
                const auto& blk = blocks[b];
                if (blk.active.empty()) continue;
                arma::mat s = xinv[b] * (rp[b] * big_y[b]);
                if (corr) s += xinv[b] * (*corr)[b];
                arma::vec v = arma::vectorise(s);
                if (sigma_mu != 0.0) v -= sigma_mu * arma::vectorise(xinv[b]);
                scatter_add(blk, -(blk.stack.t() * v), rhs);
            }
            arma::vec dx;
            if (!solve_schur(schur, rhs, dx))
                return {false, {}, {}, {}};

            BlockMat d_big_x = zeros_like(p.block_dims);
            for (std::size_t b = 0; b < nb; ++b) {
                const auto& blk = blocks[b];
                d_big_x[b] = rp[b];
                if (!blk.active.empty())
                    d_big_x[b] += arma::reshape(blk.stack * gather(blk, dx), blk.dim, blk.dim);
            }

            BlockMat d_big_y = zeros_like(p.block_dims);
            for (std::size_t b = 0; b < nb; ++b) {
                arma::mat dy = -big_y[b] - xinv[b] * (d_big_x[b] * big_y[b]);
                if (sigma_mu != 0.0) dy += sigma_mu * xinv[b];
                if (corr) dy -= xinv[b] * (*corr)[b];
                d_big_y[b] = 0.5 * (dy + dy.t());
            }
            return {true, dx, d_big_x, d_big_y};
        };

        // Predictor (affine-scaling) step.
        auto [ok_aff, dx_aff, dxm_aff, dym_aff] = solve_direction(0.0, nullptr);
        if (!ok_aff) return finish();
        const double ap_aff = max_step(big_x, dxm_aff);
        const double ad_aff = max_step(big_y, dym_aff);

        double mu_aff = 0.0;
        for (std::size_t b = 0; b < nb; ++b)
            mu_aff += arma::accu((big_x[b] + ap_aff * dxm_aff[b]) % (big_y[b] + ad_aff * dym_aff[b]));
        mu_aff /= static_cast<double>(cone_dim);
        double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
        sigma = std::clamp(sigma, 1e-8, 1.0);

        // Corrector with the second-order term dX_aff dY_aff.
        BlockMat corr = zeros_like(p.block_dims);
        for (std::size_t b = 0; b < nb; ++b) corr[b] = dxm_aff[b] * dym_aff[b];

        auto [ok, dx, dxm, dym] = solve_direction(sigma * mu, &corr);
        if (!ok) return finish();

        double ap = max_step(big_x, dxm);
        double ad = max_step(big_y, dym);
        if (std::max(ap, ad) < 1e-8) {
            // Predictor-corrector collapsed; fall back to a pure centering step.
            auto [okc, dxc, dxmc, dymc] = solve_direction(0.9 * mu, nullptr);
            if (okc) {
                dx = dxc;
                dxm = dxmc;
                dym = dymc;
                ap = max_step(big_x, dxm);
                ad = max_step(big_y, dym);
            }
        }
        if (ap <= 1e-14 && ad <= 1e-14) return finish();  // stalled

        x += ap * dx;
        for (std::size_t b = 0; b < nb; ++b) {
            big_x[b] += ap * dxm[b];
            big_x[b] = 0.5 * (big_x[b] + big_x[b].t());
            big_y[b] += ad * dym[b];
            big_y[b] = 0.5 * (big_y[b] + big_y[b].t());
        }
    }

    res.iterations = max_iterations;
    primal_residual(rp);
    measure(rp);
    return finish();
}

}  // namespace wcum::detail
