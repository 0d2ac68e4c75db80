#include "eivsel/selector.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "eivsel/errors.hpp"
#include "eivsel/format.hpp"

namespace eiv {

namespace {

// Internal solver iterations never get near this; it only bounds a stall.
constexpr int kIpmIterationCap = 200;

struct Layout {
    Index p = 0;
    Index t = -1;  // column of t, -1 when absent
    Index u = -1;
    Index cols = 0;
};

Layout layout_of(const SelectorProgram& prog) {
    Layout l;
    l.p = prog.p();
    l.cols = 2 * l.p;
    if (prog.use_t_cone) l.t = l.cols++;
    if (prog.use_u_cone) l.u = l.cols++;
    return l;
}

void check_coeff(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
        throw SpecError(std::string("program coefficient ") + name +
                        " must be finite and nonnegative, got " + fmt_g(v));
}

}  // namespace

void SelectorProgram::validate() const {
    const Index n = r.size();
    if (n < 1) throw DimensionError("r", "program needs p >= 1");
    if (a.rows() != n || a.cols() != n)
        throw DimensionError("a", "operator is " + std::to_string(a.rows()) + "x" +
                                      std::to_string(a.cols()) + " but r has length " +
                                      std::to_string(n));
    for (Index j = 0; j < n; ++j) {
        if (!std::isfinite(r(j))) throw NonFiniteError("r", static_cast<std::size_t>(j), 0);
        for (Index i = 0; i < n; ++i)
            if (!std::isfinite(a(i, j)))
                throw NonFiniteError("a", static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    check_coeff(mu_t, "mu_t");
    check_coeff(mu_u, "mu_u");
    check_coeff(mu_1, "mu_1");
    check_coeff(tau, "tau");
    check_coeff(lambda, "lambda");
    check_coeff(nu, "nu");
    if ((lambda > 0 || mu_t > 0) && !use_t_cone)
        throw SpecError("lambda > 0 or mu_t > 0 requires the t cone");
    if ((nu > 0 || mu_u > 0) && !use_u_cone)
        throw SpecError("nu > 0 or mu_u > 0 requires the u cone");
    if (mu_1 > 0 && (lambda > 0 || nu > 0))
        throw SpecError("mu_1 > 0 (MU-selector shape) requires lambda = nu = 0");
    if (safeguards && !use_t_cone && !use_u_cone)
        throw SpecError("safeguards need at least one auxiliary variable (t or u)");
    if (theta_set.is_box() && theta_set.lower().size() != n)
        throw DimensionError("theta_set", "box bounds do not have length p");
}

void SolverOptions::validate() const {
    if (!(eps_feas > 0 && eps_opt > 0)) throw SpecError("solver tolerances must be positive");
    if (max_iterations < 1) throw SpecError("max_iterations must be >= 1");
}

ipm::ConicProblem to_conic(const SelectorProgram& prog) {
    const Layout l = layout_of(prog);
    const Index p = l.p;

    std::vector<std::pair<Index, double>> box_rows;  // (index, +1 upper / -1 lower)
    if (prog.theta_set.is_box()) {
        for (Index j = 0; j < p; ++j) {
            if (std::isfinite(prog.theta_set.upper()(j))) box_rows.emplace_back(j, 1.0);
            if (std::isfinite(prog.theta_set.lower()(j))) box_rows.emplace_back(j, -1.0);
        }
    }
    const Index n_u = l.u >= 0 ? 2 * p : 0;
    const Index n_box = static_cast<Index>(box_rows.size());
    const Index n_safe = prog.safeguards ? (l.t >= 0) + (l.u >= 0) : 0;
    const Index n_lin = 2 * p + 2 * p + n_u + n_box + n_safe;
    const Index n_soc = l.t >= 0 ? p + 1 : 0;

    ipm::ConicProblem cp;
    cp.cones.nonneg = n_lin;
    if (n_soc) cp.cones.soc.push_back(n_soc);
    cp.g = MatrixXd::Zero(n_lin + n_soc, l.cols);
    cp.h = VectorXd::Zero(n_lin + n_soc);
    cp.c = VectorXd::Zero(l.cols);
    cp.c.head(2 * p).setOnes();
    if (l.t >= 0) cp.c(l.t) = prog.lambda;
    if (l.u >= 0) cp.c(l.u) = prog.nu;

    auto theta_cols = [&](Index row) { return cp.g.row(row); };
    Index row = 0;
    // |r - A theta|_inf <= rhs, one row per sign.
    for (int sign : {1, -1}) {
        for (Index k = 0; k < p; ++k, ++row) {
            auto gr = theta_cols(row);
            gr.head(p) = -sign * prog.a.row(k);
            gr.segment(p, p) = sign * prog.a.row(k);
            gr.head(2 * p).array() -= prog.mu_1;
            if (l.t >= 0) gr(l.t) = -prog.mu_t;
            if (l.u >= 0) gr(l.u) = -prog.mu_u;
            cp.h(row) = prog.tau - sign * prog.r(k);
        }
    }
    for (Index j = 0; j < 2 * p; ++j, ++row) cp.g(row, j) = -1.0;
    if (l.u >= 0) {
        for (int sign : {1, -1}) {
            for (Index j = 0; j < p; ++j, ++row) {
                cp.g(row, j) = sign;
                cp.g(row, p + j) = -sign;
                cp.g(row, l.u) = -1.0;
            }
        }
    }
    for (const auto& [j, sign] : box_rows) {
        cp.g(row, j) = sign;
        cp.g(row, p + j) = -sign;
        cp.h(row) = sign > 0 ? prog.theta_set.upper()(j) : -prog.theta_set.lower()(j);
        ++row;
    }
    if (prog.safeguards) {
        for (Index aux : {l.t, l.u}) {
            if (aux < 0) continue;
            cp.g.row(row).head(2 * p).setConstant(-1.0);
            cp.g(row, aux) = 1.0;
            ++row;
        }
    }
    if (n_soc) {
        cp.g(row, l.t) = -1.0;
        ++row;
        for (Index j = 0; j < p; ++j, ++row) {
            cp.g(row, j) = -1.0;
            cp.g(row, p + j) = 1.0;
        }
    }
    return cp;
}

double feasibility_residual(const SelectorProgram& prog, const VectorXd& theta, double t, double u) {
    if (theta.size() != prog.p())
        throw DimensionError("theta", "theta length does not match the program");
    const double l1 = theta.lpNorm<1>();
    if (!prog.use_t_cone) t = 0.0;
    if (!prog.use_u_cone) u = 0.0;
    const double rhs = prog.mu_t * t + prog.mu_u * u + prog.mu_1 * l1 + prog.tau;
    double v = (prog.r - prog.a * theta).lpNorm<Eigen::Infinity>() - rhs;
    if (prog.use_t_cone) v = std::max({v, theta.norm() - t, -t});
    if (prog.use_u_cone) v = std::max({v, theta.lpNorm<Eigen::Infinity>() - u, -u});
    v = std::max(v, prog.theta_set.violation(theta));
    if (prog.safeguards) {
        if (prog.use_t_cone) v = std::max(v, t - l1);
        if (prog.use_u_cone) v = std::max(v, u - l1);
    }
    return std::max(v, 0.0);
}

namespace {

// Lower bound on the optimal value from a (possibly slightly infeasible)
// dual point: for every primal-feasible x >= 0 in the level set
// {c'x <= level}, c'x >= -h'z + sum_j min(0, rd_j) * ub_j with rd = G'z + c.
// Every variable is nonnegative, and x_j <= level / c_j when c_j > 0.
double dual_bound(const ipm::ConicProblem& cp, const VectorXd& z, const VectorXd& x, double level) {
    const VectorXd rd = cp.g.transpose() * z + cp.c;
    double bound = -cp.h.dot(z);
    for (Index j = 0; j < rd.size(); ++j) {
        if (rd(j) >= 0.0) continue;
        // Zero-cost columns (t or u with a zero weight) have no level-set bound;
        // fall back to a multiple of the iterate.
        const double ub = cp.c(j) > 0.0 ? level / cp.c(j) : 2.0 * std::max(1.0, std::abs(x(j)));
        bound += rd(j) * ub;
    }
    return bound;
}

}  // namespace

Solution solve(const SelectorProgram& prog, const SolverOptions& opts) {
    prog.validate();
    opts.validate();
    const Layout l = layout_of(prog);
    const ipm::ConicProblem cp = to_conic(prog);

    ipm::Settings st;
    st.feastol = 1e-2 * opts.eps_feas;
    st.dualtol = 1e-2 * opts.eps_opt;
    st.gaptol = 1e-2 * opts.eps_opt;
    st.max_iterations = std::min(opts.max_iterations, kIpmIterationCap);
    st.verbose = opts.verbose;
    const ipm::Result res = ipm::solve(cp, st);

    Solution sol;
    sol.iterations = res.iterations;
    const Index p = l.p;
    if (res.status == ipm::Status::primal_infeasible) {
        sol.status = SolveStatus::infeasible;
        sol.theta_hat = VectorXd::Zero(p);
        sol.feasibility_residual = feasibility_residual(prog, sol.theta_hat, 0.0, 0.0);
        sol.optimality_gap = HUGE_VAL;
        sol.objective = HUGE_VAL;
        return sol;
    }

    const VectorXd& x = res.x;
    sol.theta_hat = x.head(p) - x.segment(p, p);
    sol.w_hat = x.head(2 * p).sum();
    sol.t_hat = l.t >= 0 ? x(l.t) : 0.0;
    sol.u_hat = l.u >= 0 ? x(l.u) : 0.0;
    sol.objective = cp.c.dot(x);
    sol.feasibility_residual = feasibility_residual(prog, sol.theta_hat, sol.t_hat, sol.u_hat);
    sol.optimality_gap =
        std::max(0.0, sol.objective - dual_bound(cp, res.z, x, sol.objective + 1.0));

    // The certificate decides; the solver's own verdict only picks the
    // failure label when the certificate does not hold.
    if (res.status != ipm::Status::dual_infeasible && sol.theta_hat.allFinite() &&
        sol.feasibility_residual <= opts.eps_feas && sol.optimality_gap <= opts.eps_opt)
        sol.status = SolveStatus::optimal;
    else if (res.status == ipm::Status::max_iterations)
        sol.status = SolveStatus::max_iterations;
    else
        sol.status = SolveStatus::numerical_failure;
    return sol;
}

void dump_program(std::ostream& os, const SelectorProgram& prog, const Solution* sol) {
    const Index p = prog.p();
    os << "[program]\n"
       << "p = " << p << '\n'
       << "mu_t = " << fmt_exact(prog.mu_t) << '\n'
       << "mu_u = " << fmt_exact(prog.mu_u) << '\n'
       << "mu_1 = " << fmt_exact(prog.mu_1) << '\n'
       << "tau = " << fmt_exact(prog.tau) << '\n'
       << "lambda = " << fmt_exact(prog.lambda) << '\n'
       << "nu = " << fmt_exact(prog.nu) << '\n'
       << "use_t_cone = " << prog.use_t_cone << '\n'
       << "use_u_cone = " << prog.use_u_cone << '\n'
       << "safeguards = " << prog.safeguards << "\n\n";
    os << "[residual_operator]\n";
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) os << (j ? "," : "") << fmt_exact(prog.a(i, j));
        os << '\n';
    }
    os << "\n[residual_target]\n";
    for (Index j = 0; j < p; ++j) os << fmt_exact(prog.r(j)) << '\n';
    if (prog.theta_set.is_box()) {
        os << "\n[box]\n";
        for (Index j = 0; j < p; ++j)
            os << fmt_exact(prog.theta_set.lower()(j)) << ',' << fmt_exact(prog.theta_set.upper()(j))
               << '\n';
    }
    if (sol) {
        os << "\n[solution]\n"
           << "status = " << to_string(sol->status) << '\n'
           << "objective = " << fmt_exact(sol->objective) << '\n'
           << "t_hat = " << fmt_exact(sol->t_hat) << '\n'
           << "u_hat = " << fmt_exact(sol->u_hat) << '\n'
           << "w_hat = " << fmt_exact(sol->w_hat) << '\n'
           << "feasibility_residual = " << fmt_exact(sol->feasibility_residual) << '\n'
           << "optimality_gap = " << fmt_exact(sol->optimality_gap) << '\n'
           << "iterations = " << sol->iterations << '\n'
           << "\n[theta_hat]\n";
        for (Index j = 0; j < p; ++j) os << fmt_exact(sol->theta_hat(j)) << '\n';
    }
}

}  // namespace eiv
