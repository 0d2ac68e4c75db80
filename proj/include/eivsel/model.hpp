#ifndef EIVSEL_MODEL_HPP_
#define EIVSEL_MODEL_HPP_

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace eiv {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Observed response `y`, noisy design `z` and, for simulated data, the
/// true design `x` and coefficient vector `theta_star`.
struct EivDataset {
    VectorXd y;
    MatrixXd z;
    std::optional<MatrixXd> x;
    std::optional<VectorXd> theta_star;

    Index n() const { return z.rows(); }
    Index p() const { return z.cols(); }
};

/// Checks shapes and finiteness. Returns the argument unchanged on success.
/// Throws DimensionError or NonFiniteError.
const EivDataset& validate_dataset(const EivDataset& d);

/// Feasible set for the coefficient vector: all of R^p or an axis-aligned box.
/// Box bounds may be infinite on either side.
class ThetaSet {
 public:
    enum class Kind { all_of_rp, box };

    ThetaSet() = default;
    static ThetaSet all() { return {}; }
    /// Throws SpecError unless lower <= upper componentwise and the box is nonempty.
    static ThetaSet box(VectorXd lower, VectorXd upper);

    Kind kind() const { return kind_; }
    bool is_box() const { return kind_ == Kind::box; }
    const VectorXd& lower() const { return lower_; }
    const VectorXd& upper() const { return upper_; }

    /// Largest bound violation of `theta` (0 when inside).
    double violation(const VectorXd& theta) const;
    bool contains(const VectorXd& theta, double tol = 0.0) const { return violation(theta) <= tol; }
    VectorXd project(const VectorXd& theta) const;

 private:
    Kind kind_ = Kind::all_of_rp;
    VectorXd lower_;
    VectorXd upper_;
};

enum class SolveStatus { optimal, infeasible, max_iterations, numerical_failure };

std::string_view to_string(SolveStatus s);

/// Result of one selector solve. `w_hat` is the l1 surrogate sum(theta+ + theta-)
/// carried by the split formulation; it equals |theta_hat|_1 at a tight optimum.
struct Solution {
    VectorXd theta_hat;
    double t_hat = 0.0;
    double u_hat = 0.0;
    double w_hat = 0.0;
    double objective = 0.0;
    SolveStatus status = SolveStatus::numerical_failure;
    double feasibility_residual = 0.0;
    double optimality_gap = 0.0;
    int iterations = 0;

    bool optimal() const { return status == SolveStatus::optimal; }
};

enum class EstimatorTag { dantzig, mu, compensated_mu, conic, l1l2linf_mu, l1l2linf_cmu };

struct EstimatorKind {
    EstimatorTag tag = EstimatorTag::dantzig;
    bool safeguards = false;

    /// True for the variants whose program carries the auxiliary (t, u) variables.
    bool has_aux() const {
        return tag == EstimatorTag::conic || tag == EstimatorTag::l1l2linf_mu ||
               tag == EstimatorTag::l1l2linf_cmu;
    }
};

std::string_view to_string(EstimatorTag tag);
/// Accepts the canonical names (dantzig, mu, cmu, conic, l1l2linf-mu, l1l2linf-cmu)
/// with '-' and '_' interchangeable, plus "compensated-mu". Throws SpecError.
EstimatorTag parse_estimator_tag(std::string_view name);

}  // namespace eiv

#endif  // EIVSEL_MODEL_HPP_
