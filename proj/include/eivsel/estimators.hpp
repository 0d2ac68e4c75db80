#ifndef EIVSEL_ESTIMATORS_HPP_
#define EIVSEL_ESTIMATORS_HPP_

#include <string>

#include "eivsel/model.hpp"
#include "eivsel/selector.hpp"

namespace eiv {

enum class DesignSource { use_z, use_x };

/// One estimator together with its tuning. Fields that a kind does not use
/// are ignored:
///
///   dantzig        tau
///   mu             mu (times |theta|_1), tau
///   compensated_mu mu (times |theta|_1), tau, d_hat
///   conic          lambda, mu (times t), tau, d_hat
///   l1l2linf_mu    lambda, nu, mu (times t), delta_bar^2 (times u), tau
///   l1l2linf_cmu   lambda, nu, mu (times t), beta (times u), tau, d_hat
///
/// An empty d_hat means D-hat = 0.
struct EstimatorSpec {
    EstimatorKind kind;
    double lambda = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    double tau = 0.0;
    double beta = 0.0;
    double delta_bar = 0.0;
    VectorXd d_hat;
    ThetaSet theta_set;
    DesignSource design_source = DesignSource::use_z;
    std::string label;

    /// Throws SpecError when the spec cannot describe a program on p coordinates.
    void validate(Index p) const;
};

/// True when the kind subtracts diag(d_hat) from the Gram matrix.
bool is_compensated(EstimatorTag tag);

/// Default table label, e.g. "cMU", "Conic(0.5)", "l1l2linf*(1,0.5)".
std::string default_label(const EstimatorSpec& spec);

/// Encodes the estimator as a selector program on the given data.
/// Throws SpecError for an inconsistent spec or missing true design.
SelectorProgram build_program(const EstimatorSpec& spec, const EivDataset& d);

/// build_program followed by solve.
Solution estimate(const EstimatorSpec& spec, const EivDataset& d, const SolverOptions& opts = {});

}  // namespace eiv

#endif  // EIVSEL_ESTIMATORS_HPP_
