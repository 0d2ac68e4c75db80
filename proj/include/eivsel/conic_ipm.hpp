#ifndef EIVSEL_CONIC_IPM_HPP_
#define EIVSEL_CONIC_IPM_HPP_

#include <vector>

#include "eivsel/model.hpp"

namespace eiv::ipm {

/// Product cone: `nonneg` nonnegative orthant coordinates followed by one
/// second-order cone per entry of `soc` (given as its dimension, head first).
struct Cones {
    Index nonneg = 0;
    std::vector<Index> soc;

    Index size() const;
    Index degree() const { return nonneg + static_cast<Index>(soc.size()); }
};

/// minimize c'x  subject to  h - Gx in K.
struct ConicProblem {
    VectorXd c;
    MatrixXd g;
    VectorXd h;
    Cones cones;
};

struct Settings {
    double feastol = 1e-9;  ///< absolute, on the inf-norm of the primal residual
    double dualtol = 1e-9;  ///< relative to 1 + |c|_inf
    double gaptol = 1e-9;   ///< absolute duality gap
    int max_iterations = 100;
    bool verbose = false;
};

enum class Status { optimal, primal_infeasible, dual_infeasible, max_iterations, numerical_failure };

/// Primal-dual point rescaled by the homogenizing variable. For the two
/// infeasibility outcomes, `z` (resp. `x`) holds the normalized certificate.
struct Result {
    VectorXd x;
    VectorXd s;
    VectorXd z;
    Status status = Status::numerical_failure;
    int iterations = 0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

/// Mehrotra predictor-corrector on the homogeneous self-dual embedding with
/// Nesterov-Todd scaling. Dense normal equations with iterative refinement.
Result solve(const ConicProblem& prob, const Settings& settings = {});

}  // namespace eiv::ipm

#endif  // EIVSEL_CONIC_IPM_HPP_
