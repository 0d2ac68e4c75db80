#include "eivsel/model.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "eivsel/errors.hpp"

namespace eiv {

NonFiniteError::NonFiniteError(std::string field, std::size_t row, std::size_t col)
    : Error("non-finite value in " + field + " at (" + std::to_string(row) + "," +
            std::to_string(col) + ")"),
      field_(std::move(field)),
      row_(row),
      col_(col) {}

namespace {

void require_finite(const MatrixXd& m, const char* field) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j)))
                throw NonFiniteError(field, static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(j));
}

void require_finite(const VectorXd& v, const char* field) {
    for (Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i))) throw NonFiniteError(field, static_cast<std::size_t>(i), 0);
}

std::string shape(Index r, Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

const EivDataset& validate_dataset(const EivDataset& d) {
    if (d.z.rows() < 1 || d.z.cols() < 1)
        throw DimensionError("z", "design z must have n >= 1 rows and p >= 1 columns, got " +
                                      shape(d.z.rows(), d.z.cols()));
    if (d.y.size() != d.z.rows())
        throw DimensionError("y", "y has length " + std::to_string(d.y.size()) +
                                      " but z has " + std::to_string(d.z.rows()) + " rows");
    if (d.x && (d.x->rows() != d.z.rows() || d.x->cols() != d.z.cols()))
        throw DimensionError("x", "x is " + shape(d.x->rows(), d.x->cols()) + " but z is " +
                                      shape(d.z.rows(), d.z.cols()));
    if (d.theta_star && d.theta_star->size() != d.z.cols())
        throw DimensionError("theta_star", "theta_star has length " +
                                               std::to_string(d.theta_star->size()) +
                                               " but p = " + std::to_string(d.z.cols()));
    require_finite(d.y, "y");
    require_finite(d.z, "z");
    if (d.x) require_finite(*d.x, "x");
    if (d.theta_star) require_finite(*d.theta_star, "theta_star");
    return d;
}

ThetaSet ThetaSet::box(VectorXd lower, VectorXd upper) {
    if (lower.size() != upper.size())
        throw SpecError("box bounds have different lengths");
    for (Index j = 0; j < lower.size(); ++j) {
        if (std::isnan(lower(j)) || std::isnan(upper(j)))
            throw SpecError("box bound is NaN at index " + std::to_string(j));
        if (lower(j) > upper(j) || lower(j) == HUGE_VAL || upper(j) == -HUGE_VAL)
            throw SpecError("empty box at index " + std::to_string(j));
    }
    ThetaSet s;
    s.kind_ = Kind::box;
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
}

double ThetaSet::violation(const VectorXd& theta) const {
    if (kind_ == Kind::all_of_rp) return 0.0;
    double v = 0.0;
    for (Index j = 0; j < theta.size(); ++j) {
        v = std::max(v, lower_(j) - theta(j));
        v = std::max(v, theta(j) - upper_(j));
    }
    return v;
}

VectorXd ThetaSet::project(const VectorXd& theta) const {
    if (kind_ == Kind::all_of_rp) return theta;
    return theta.cwiseMax(lower_).cwiseMin(upper_);
}

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::max_iterations: return "max_iterations";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

std::string_view to_string(EstimatorTag tag) {
    switch (tag) {
        case EstimatorTag::dantzig: return "dantzig";
        case EstimatorTag::mu: return "mu";
        case EstimatorTag::compensated_mu: return "cmu";
        case EstimatorTag::conic: return "conic";
        case EstimatorTag::l1l2linf_mu: return "l1l2linf-mu";
        case EstimatorTag::l1l2linf_cmu: return "l1l2linf-cmu";
    }
    return "unknown";
}

EstimatorTag parse_estimator_tag(std::string_view name) {
    std::string key;
    for (char c : name) key += c == '_' ? '-' : static_cast<char>(std::tolower(c));
    if (key == "dantzig") return EstimatorTag::dantzig;
    if (key == "mu") return EstimatorTag::mu;
    if (key == "cmu" || key == "compensated-mu") return EstimatorTag::compensated_mu;
    if (key == "conic") return EstimatorTag::conic;
    if (key == "l1l2linf-mu") return EstimatorTag::l1l2linf_mu;
    if (key == "l1l2linf-cmu") return EstimatorTag::l1l2linf_cmu;
    throw SpecError("unknown estimator kind '" + std::string(name) + "'");
}

}  // namespace eiv
