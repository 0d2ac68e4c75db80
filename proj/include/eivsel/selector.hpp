#ifndef EIVSEL_SELECTOR_HPP_
#define EIVSEL_SELECTOR_HPP_

#include <iosfwd>

#include "eivsel/conic_ipm.hpp"
#include "eivsel/model.hpp"

namespace eiv {

/// The generalized selector program
///
///   minimize    |theta|_1 + lambda t + nu u
///   subject to  |r - A theta|_inf <= mu_t t + mu_u u + mu_1 |theta|_1 + tau
///               |theta|_2 <= t          (use_t_cone)
///               |theta|_inf <= u        (use_u_cone)
///               theta in theta_set
///               t <= w, u <= w          (safeguards)
///
/// solved over the split theta = theta+ - theta-, theta+/- >= 0, with
/// w = sum(theta+ + theta-) standing for |theta|_1 in the objective, the
/// mu_1 term and the safeguards.
struct SelectorProgram {
    MatrixXd a;
    VectorXd r;
    double mu_t = 0.0;
    double mu_u = 0.0;
    double mu_1 = 0.0;
    double tau = 0.0;
    double lambda = 0.0;
    double nu = 0.0;
    ThetaSet theta_set;
    bool use_t_cone = false;
    bool use_u_cone = false;
    bool safeguards = false;

    Index p() const { return r.size(); }

    /// Throws DimensionError/NonFiniteError/SpecError when an invariant fails.
    void validate() const;
};

struct SolverOptions {
    double eps_feas = 1e-7;
    double eps_opt = 1e-7;
    int max_iterations = 50000;
    bool verbose = false;

    void validate() const;
};

/// Solves the program with the conic interior-point method and certifies
/// the result against the raw program data. `optimal` is reported only when
/// the recomputed feasibility residual is within eps_feas and the dual bound
/// leaves a gap within eps_opt.
Solution solve(const SelectorProgram& prog, const SolverOptions& opts = {});

/// Largest constraint violation of (theta, t, u), with |theta|_1 in place of w.
/// Cone constraints that are switched off are skipped.
double feasibility_residual(const SelectorProgram& prog, const VectorXd& theta, double t, double u);

/// Conic form of the program over x = (theta+, theta-, [t], [u]).
ipm::ConicProblem to_conic(const SelectorProgram& prog);

/// Debug dump: one section per constraint block, matrices row-major.
void dump_program(std::ostream& os, const SelectorProgram& prog, const Solution* sol = nullptr);

}  // namespace eiv

#endif  // EIVSEL_SELECTOR_HPP_
