#include "wcum/conic.hpp"

#include <ostream>

#include "ipm.hpp"
#include "wcum/lmi.hpp"

namespace wcum {

arma::mat embed_hermitian(const arma::cx_mat& h) {
    if (h.n_rows != h.n_cols)
        throw std::invalid_argument("embed_hermitian: matrix must be square");
    const arma::uword n = h.n_rows;
    arma::mat e(2 * n, 2 * n);
    e.submat(0, 0, n - 1, n - 1) = arma::real(h);
    e.submat(0, n, n - 1, 2 * n - 1) = -arma::imag(h);
    e.submat(n, 0, 2 * n - 1, n - 1) = arma::imag(h);
    e.submat(n, n, 2 * n - 1, 2 * n - 1) = arma::real(h);
    return 0.5 * (e + e.t());
}

int SdpProblem::add_matrix_var(arma::uword dim, std::string name) {
    matrix_vars.push_back({dim, std::move(name)});
    return static_cast<int>(matrix_vars.size()) - 1;
}

int SdpProblem::add_scalar_var(std::string name) {
    scalar_vars.push_back({std::move(name)});
    return static_cast<int>(scalar_vars.size()) - 1;
}

arma::uword SdpProblem::n_real_parameters() const {
    arma::uword n = scalar_vars.size();
    for (const auto& v : matrix_vars) n += v.dim * v.dim;
    return n;
}

void SdpProblem::validate() const {
    const auto check_herm = [](const arma::cx_mat& c, const std::string& where) {
        if (c.n_rows != c.n_cols)
            throw std::invalid_argument("SdpProblem: non-square coefficient in " + where);
        const double scale = std::max(1.0, arma::abs(c).max());
        if (arma::abs(c - c.t()).max() > 1e-12 * scale)
            throw std::invalid_argument("SdpProblem: non-Hermitian coefficient in " + where);
    };
    for (const auto& lmi : lmis) {
        if (lmi.dim == 0)
            throw std::invalid_argument("SdpProblem: LMI with zero dimension");
        for (const auto& term : lmi.terms) {
            if (term.matrix_var >= 0) {
                const auto& v = matrix_vars.at(static_cast<std::size_t>(term.matrix_var));
                if (term.congruence.n_cols != v.dim || term.congruence.n_rows != lmi.dim)
                    throw std::invalid_argument("SdpProblem: congruence shape mismatch in " + lmi.name);
            } else {
                if (term.coeff.n_rows != lmi.dim)
                    throw std::invalid_argument("SdpProblem: coefficient shape mismatch in " + lmi.name);
                check_herm(term.coeff, lmi.name);
                if (term.scalar_var >= 0 &&
                    static_cast<std::size_t>(term.scalar_var) >= scalar_vars.size())
                    throw std::invalid_argument("SdpProblem: scalar var out of range in " + lmi.name);
            }
        }
    }
    for (const auto& lin : linears)
        for (const auto& [v, c] : lin.matrix_terms) {
            const auto& var = matrix_vars.at(static_cast<std::size_t>(v));
            if (c.n_rows != var.dim || c.n_cols != var.dim)
                throw std::invalid_argument("SdpProblem: linear coefficient shape mismatch in " + lin.name);
            check_herm(c, lin.name);
        }
}

namespace {

// Hermitian basis element for one real parameter of a matrix variable.
// Parameter order per variable: n diagonal entries, then (re, im) pairs for
// each upper-triangular position in column-major order.
arma::cx_mat hermitian_basis(arma::uword dim, arma::uword param) {
    arma::cx_mat b(dim, dim, arma::fill::zeros);
    if (param < dim) {
        b(param, param) = 1.0;
        return b;
    }
    arma::uword p = param - dim;
    const arma::uword pair = p / 2;
    const bool imag_part = (p % 2) == 1;
    arma::uword idx = 0;
    for (arma::uword j = 1; j < dim; ++j)
        for (arma::uword i = 0; i < j; ++i) {
            if (idx == pair) {
                if (imag_part) {
                    b(i, j) = std::complex<double>(0.0, 1.0);
                    b(j, i) = std::complex<double>(0.0, -1.0);
                } else {
                    b(i, j) = 1.0;
                    b(j, i) = 1.0;
                }
                return b;
            }
            ++idx;
        }
    throw std::logic_error("hermitian_basis: parameter out of range");
}

struct Lowering {
    detail::ConeProgram program;
    std::vector<arma::uword> matrix_offsets;  // first parameter index per matrix var
    arma::uword scalar_offset = 0;            // first parameter index of scalar vars
};

// Real symmetric block for a complex LMI: the 2n x 2n embedding, except that
// 1x1 LMIs stay 1x1 (their imaginary part is identically zero).
arma::mat lower_block(const arma::cx_mat& c) {
    if (c.n_rows == 1) return arma::mat{c(0, 0).real()};
    return embed_hermitian(c);
}

Lowering lower(const SdpProblem& problem) {
    problem.validate();

    Lowering lw;
    auto& cp = lw.program;

    lw.matrix_offsets.resize(problem.matrix_vars.size());
    arma::uword next = 0;
    for (std::size_t v = 0; v < problem.matrix_vars.size(); ++v) {
        lw.matrix_offsets[v] = next;
        next += problem.matrix_vars[v].dim * problem.matrix_vars[v].dim;
    }
    lw.scalar_offset = next;
    cp.n_vars = next + problem.scalar_vars.size();
    cp.coeff.resize(cp.n_vars);
    cp.cost = arma::vec(cp.n_vars, arma::fill::zeros);

    // Objective (maximize) becomes the cone program's cost (minimize).
    for (const auto& [s, w] : problem.objective_scalars) cp.cost[lw.scalar_offset + s] -= w;
    for (const auto& [v, c] : problem.objective_matrices) {
        const arma::uword dim = problem.matrix_vars[v].dim;
        for (arma::uword p = 0; p < dim * dim; ++p)
            cp.cost[lw.matrix_offsets[v] + p] -=
                std::real(arma::trace(c.t() * hermitian_basis(dim, p)));
    }

    const auto add_entry = [&](arma::sword var, arma::uword block, const arma::mat& m) {
        if (arma::abs(m).max() == 0.0) return;
        if (var < 0)
            cp.constant.emplace_back(block, m);
        else
            cp.coeff[static_cast<arma::uword>(var)].emplace_back(block, m);
    };

    for (const auto& lmi : problem.lmis) {
        const arma::uword block = cp.block_dims.size();
        cp.block_dims.push_back(lmi.dim == 1 ? 1 : 2 * lmi.dim);
        for (const auto& term : lmi.terms) {
            if (term.matrix_var >= 0) {
                const arma::uword v = static_cast<arma::uword>(term.matrix_var);
                const arma::uword dim = problem.matrix_vars[v].dim;
                for (arma::uword p = 0; p < dim * dim; ++p) {
                    const arma::cx_mat contrib =
                        term.weight * term.congruence * hermitian_basis(dim, p) * term.congruence.t();
                    add_entry(static_cast<arma::sword>(lw.matrix_offsets[v] + p), block,
                              lower_block(contrib));
                }
            } else if (term.scalar_var >= 0) {
                add_entry(static_cast<arma::sword>(lw.scalar_offset +
                                                   static_cast<arma::uword>(term.scalar_var)),
                          block, lower_block(term.coeff));
            } else {
                add_entry(-1, block, lower_block(term.coeff));
            }
        }
    }

    // Scalar linear constraint lhs <= 0 becomes the 1x1 block [-lhs] >= 0;
    // equalities contribute both directions.
    const auto add_linear = [&](const SdpProblem::LinearConstraint& lin, double sign) {
        const arma::uword block = cp.block_dims.size();
        cp.block_dims.push_back(1);
        add_entry(-1, block, arma::mat{-sign * lin.constant});
        for (const auto& [s, w] : lin.scalar_terms)
            add_entry(static_cast<arma::sword>(lw.scalar_offset + static_cast<arma::uword>(s)),
                      block, arma::mat{-sign * w});
        for (const auto& [v, c] : lin.matrix_terms) {
            const arma::uword dim = problem.matrix_vars[static_cast<std::size_t>(v)].dim;
            for (arma::uword p = 0; p < dim * dim; ++p) {
                const double w = std::real(arma::trace(c.t() * hermitian_basis(dim, p)));
                add_entry(static_cast<arma::sword>(lw.matrix_offsets[static_cast<std::size_t>(v)] + p),
                          block, arma::mat{-sign * w});
            }
        }
    };
    for (const auto& lin : problem.linears) {
        add_linear(lin, 1.0);
        if (lin.equality) add_linear(lin, -1.0);
    }

    return lw;
}

arma::cx_mat rebuild_matrix(const arma::vec& x, arma::uword offset, arma::uword dim) {
    arma::cx_mat q(dim, dim, arma::fill::zeros);
    for (arma::uword p = 0; p < dim * dim; ++p)
        q += x[offset + p] * hermitian_basis(dim, p);
    return q;
}

// Re-symmetrize and zero out slightly negative eigenvalues (solver noise).
arma::cx_mat clean_hermitian(const arma::cx_mat& q) {
    arma::cx_mat h = 0.5 * (q + q.t());
    arma::vec ev;
    arma::cx_mat vecs;
    if (!arma::eig_sym(ev, vecs, h)) return h;
    const double floor = -1e-9 * std::max(1.0, std::abs(arma::trace(h).real()));
    if (ev.min() >= 0.0) return h;
    if (ev.min() < floor) return h;  // genuine violation, leave visible
    arma::vec clipped = arma::clamp(ev, 0.0, arma::datum::inf);
    return vecs * arma::diagmat(arma::cx_vec(clipped, arma::vec(ev.n_elem, arma::fill::zeros))) * vecs.t();
}

}  // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::NearOptimal: return "near-optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

SdpSolution solve(const SdpProblem& problem, const SolverSettings& settings) {
    if (settings.backend != "ipm")
        throw std::invalid_argument("solve: unknown backend '" + settings.backend + "'");

    const Lowering lw = lower(problem);
    const detail::IpmResult r =
        detail::solve_ipm(lw.program, settings.tolerance, settings.max_iterations);

    SdpSolution sol;
    sol.stats.iterations = r.iterations;
    sol.stats.primal_infeasibility = r.primal_infeasibility;
    sol.stats.dual_infeasibility = r.dual_infeasibility;
    sol.stats.duality_gap = r.duality_gap;
    if (r.converged)
        sol.status = SolveStatus::Optimal;
    else if (r.infeasible)
        sol.status = SolveStatus::Infeasible;
    else if (r.near_optimal)
        sol.status = SolveStatus::NearOptimal;
    else
        sol.status = SolveStatus::NumericalFailure;

    sol.objective_value = -r.objective;  // cone program minimizes the negated objective
    sol.scalar_values = arma::vec(problem.scalar_vars.size(), arma::fill::zeros);
    for (std::size_t s = 0; s < problem.scalar_vars.size(); ++s)
        sol.scalar_values[s] = r.x[lw.scalar_offset + s];
    sol.matrix_values.reserve(problem.matrix_vars.size());
    for (std::size_t v = 0; v < problem.matrix_vars.size(); ++v)
        sol.matrix_values.push_back(clean_hermitian(
            rebuild_matrix(r.x, lw.matrix_offsets[v], problem.matrix_vars[v].dim)));
    return sol;
}

SdpProblem build_subproblem_q(const arma::vec& t_prev, const ChannelSet& channels,
                              const SystemConfig& config) {
    config.validate();
    channels.validate(config);
    if (t_prev.n_elem != config.n_users)
        throw std::invalid_argument("build_subproblem_q: t_prev must have length n_users");
    for (double t : t_prev)
        if (t < 0.0 || !std::isfinite(t))
            throw std::invalid_argument("build_subproblem_q: t_prev must be finite and >= 0");

    const arma::uword n = config.n_tx;
    const arma::uword k_users = config.n_users;

    SdpProblem prob;
    std::vector<int> q_vars(k_users), z_vars(k_users), lambda_vars(k_users, -1);
    for (arma::uword k = 0; k < k_users; ++k)
        q_vars[k] = prob.add_matrix_var(n, "Q_" + std::to_string(k));
    for (arma::uword k = 0; k < k_users; ++k) {
        if (channels.radii[k] > 0.0)
            lambda_vars[k] = prob.add_scalar_var("lambda_" + std::to_string(k));
        z_vars[k] = prob.add_scalar_var("z_" + std::to_string(k));
    }

    for (arma::uword k = 0; k < k_users; ++k)
        prob.objective_scalars.emplace_back(z_vars[k], 1.0);

    const arma::cx_mat eye_n(arma::eye(n, n), arma::mat(n, n, arma::fill::zeros));

    for (arma::uword k = 0; k < k_users; ++k) {
        const arma::cx_vec& h = channels.estimates[k];
        const double r = channels.radii[k];
        const double sigma2 = config.noise_powers[k];

        SdpProblem::LmiConstraint lmi;
        lmi.name = "phi_" + std::to_string(k);

        if (r > 0.0) {
            // Full S-procedure block of size n+1.
            lmi.dim = n + 1;
            arma::cx_mat lift(n + 1, n, arma::fill::zeros);
            lift.submat(0, 0, n - 1, n - 1) = eye_n;
            lift.row(n) = h.t();

            for (arma::uword l = 0; l < k_users; ++l) {
                SdpProblem::LmiTerm term;
                term.matrix_var = q_vars[l];
                term.congruence = lift;
                term.weight = (l == k) ? 1.0 : -t_prev[k];
                lmi.terms.push_back(std::move(term));
            }
            {
                SdpProblem::LmiTerm term;  // lambda * diag(I, -r^2)
                term.scalar_var = lambda_vars[k];
                term.coeff = arma::cx_mat(n + 1, n + 1, arma::fill::zeros);
                term.coeff.submat(0, 0, n - 1, n - 1) = eye_n;
                term.coeff(n, n) = -r * r;
                lmi.terms.push_back(std::move(term));
            }
            {
                SdpProblem::LmiTerm term;  // -z * I
                term.scalar_var = z_vars[k];
                term.coeff = arma::cx_mat(n + 1, n + 1, arma::fill::zeros);
                term.coeff.diag() += std::complex<double>(-1.0, 0.0);
                lmi.terms.push_back(std::move(term));
            }
            {
                SdpProblem::LmiTerm term;  // constant diag(0, ..., -t sigma^2)
                term.coeff = arma::cx_mat(n + 1, n + 1, arma::fill::zeros);
                term.coeff(n, n) = -t_prev[k] * sigma2;
                lmi.terms.push_back(std::move(term));
            }
        } else {
            // Degenerate ball: the robust constraint collapses to the nominal
            // SINR inequality, a 1x1 block; no S-procedure multiplier exists.
            lmi.dim = 1;
            const arma::cx_mat lift = h.t();  // 1 x n
            for (arma::uword l = 0; l < k_users; ++l) {
                SdpProblem::LmiTerm term;
                term.matrix_var = q_vars[l];
                term.congruence = lift;
                term.weight = (l == k) ? 1.0 : -t_prev[k];
                lmi.terms.push_back(std::move(term));
            }
            {
                SdpProblem::LmiTerm term;
                term.scalar_var = z_vars[k];
                term.coeff = arma::cx_mat{std::complex<double>(-1.0, 0.0)};
                lmi.terms.push_back(std::move(term));
            }
            {
                SdpProblem::LmiTerm term;
                term.coeff = arma::cx_mat{std::complex<double>(-t_prev[k] * sigma2, 0.0)};
                lmi.terms.push_back(std::move(term));
            }
        }
        prob.lmis.push_back(std::move(lmi));
    }

    // Q_k >= 0 cones.
    for (arma::uword k = 0; k < k_users; ++k) {
        SdpProblem::LmiConstraint psd;
        psd.dim = n;
        psd.name = "psd_Q_" + std::to_string(k);
        SdpProblem::LmiTerm term;
        term.matrix_var = q_vars[k];
        term.congruence = eye_n;
        psd.terms.push_back(std::move(term));
        prob.lmis.push_back(std::move(psd));
    }

    // sum_k tr(Q_k) <= P.
    {
        SdpProblem::LinearConstraint power;
        power.name = "total_power";
        for (arma::uword k = 0; k < k_users; ++k) power.matrix_terms.emplace_back(q_vars[k], eye_n);
        power.constant = -config.power_budget;
        prob.linears.push_back(std::move(power));
    }

    // lambda_k >= 0 and z_k >= 0.
    for (arma::uword k = 0; k < k_users; ++k) {
        if (lambda_vars[k] >= 0) {
            SdpProblem::LinearConstraint lb;
            lb.name = "lambda_" + std::to_string(k) + "_nonneg";
            lb.scalar_terms.emplace_back(lambda_vars[k], -1.0);
            prob.linears.push_back(std::move(lb));
        }
        SdpProblem::LinearConstraint zb;
        zb.name = "z_" + std::to_string(k) + "_nonneg";
        zb.scalar_terms.emplace_back(z_vars[k], -1.0);
        prob.linears.push_back(std::move(zb));
    }

    return prob;
}

SubproblemSolution extract_subproblem_q(const SdpProblem& problem, const SdpSolution& solution,
                                        const SystemConfig& config) {
    SubproblemSolution out;
    out.status = solution.status;
    out.stats = solution.stats;
    out.lambdas = arma::vec(config.n_users, arma::fill::zeros);
    out.slacks = arma::vec(config.n_users, arma::fill::zeros);
    out.covs.matrices = solution.matrix_values;

    for (std::size_t s = 0; s < problem.scalar_vars.size(); ++s) {
        const std::string& name = problem.scalar_vars[s].name;
        const auto sep = name.find('_');
        if (sep == std::string::npos) continue;
        const arma::uword k = static_cast<arma::uword>(std::stoul(name.substr(sep + 1)));
        const double value = std::max(0.0, solution.scalar_values[s]);
        if (name.rfind("lambda_", 0) == 0)
            out.lambdas[k] = value;
        else if (name.rfind("z_", 0) == 0)
            out.slacks[k] = value;
    }
    out.psi = arma::sum(out.slacks);
    return out;
}

void dump_conic_program(const SdpProblem& problem, std::ostream& os) {
    const Lowering lw = lower(problem);
    const auto& cp = lw.program;
    os << "# conic program dump v1\n";
    os << "# minimize cost . x  s.t.  constant + sum_i x[i] * coeff[i]  PSD per block\n";
    os << "# entry lines: var block row col value   (var = -1 is the constant part)\n";
    os << "nvars " << cp.n_vars << "\n";
    os << "nblocks " << cp.block_dims.size() << "\n";
    os << "dims";
    for (arma::uword d : cp.block_dims) os << " " << d;
    os << "\n";
    os.precision(17);
    for (arma::uword i = 0; i < cp.n_vars; ++i)
        if (cp.cost[i] != 0.0) os << "cost " << i << " " << cp.cost[i] << "\n";
    const auto dump_entries = [&](arma::sword var, arma::uword block, const arma::mat& m) {
        for (arma::uword c = 0; c < m.n_cols; ++c)
            for (arma::uword r = 0; r <= c; ++r)
                if (m(r, c) != 0.0)
                    os << "entry " << var << " " << block << " " << r << " " << c << " "
                       << m(r, c) << "\n";
    };
    for (const auto& [b, m] : cp.constant) dump_entries(-1, b, m);
    for (arma::uword i = 0; i < cp.n_vars; ++i)
        for (const auto& [b, m] : cp.coeff[i]) dump_entries(static_cast<arma::sword>(i), b, m);
}

}  // namespace wcum
