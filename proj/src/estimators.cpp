#include "eivsel/estimators.hpp"

#include <cmath>

#include "eivsel/errors.hpp"
#include "eivsel/format.hpp"

namespace eiv {

namespace {

bool nonneg_finite(double v) { return std::isfinite(v) && v >= 0.0; }

void require(bool ok, const std::string& what) {
    if (!ok) throw SpecError(what);
}

}  // namespace

bool is_compensated(EstimatorTag tag) {
    return tag == EstimatorTag::compensated_mu || tag == EstimatorTag::conic ||
           tag == EstimatorTag::l1l2linf_cmu;
}

void EstimatorSpec::validate(Index p) const {
    const std::string name(to_string(kind.tag));
    require(nonneg_finite(lambda), name + ": lambda must be finite and >= 0");
    require(nonneg_finite(nu), name + ": nu must be finite and >= 0");
    require(nonneg_finite(mu), name + ": mu must be finite and >= 0");
    require(nonneg_finite(tau), name + ": tau must be finite and >= 0");
    require(nonneg_finite(beta), name + ": beta must be finite and >= 0");
    require(nonneg_finite(delta_bar), name + ": delta_bar must be finite and >= 0");
    require(!kind.safeguards || kind.has_aux(),
            name + ": safeguards need the auxiliary t/u variables (conic or l1l2linf)");
    if (d_hat.size() != 0) {
        require(d_hat.size() == p, name + ": d_hat has length " + std::to_string(d_hat.size()) +
                                       ", expected " + std::to_string(p));
        require(d_hat.allFinite() && (d_hat.array() >= 0.0).all(),
                name + ": d_hat entries must be finite and >= 0");
    }
    require(design_source == DesignSource::use_z || kind.tag == EstimatorTag::dantzig,
            name + ": only dantzig may use the true design");
    if (theta_set.is_box())
        require(theta_set.lower().size() == p, name + ": theta box has the wrong length");
    switch (kind.tag) {
        case EstimatorTag::conic:
            require(lambda > 0.0 || mu == 0.0,
                    "conic: lambda = 0 drops the t cone, which needs mu = 0");
            break;
        case EstimatorTag::l1l2linf_mu:
        case EstimatorTag::l1l2linf_cmu:
            require(lambda > 0.0 && nu > 0.0, name + ": lambda and nu must both be > 0");
            break;
        default:
            break;
    }
}

std::string default_label(const EstimatorSpec& spec) {
    const std::string star = spec.kind.safeguards ? "*" : "";
    switch (spec.kind.tag) {
        case EstimatorTag::dantzig:
            return spec.design_source == DesignSource::use_x ? "Dantzig X" : "Dantzig Z";
        case EstimatorTag::mu:
            return "MU";
        case EstimatorTag::compensated_mu:
            return "cMU";
        case EstimatorTag::conic:
            return "Conic" + star + "(" + fmt_g(spec.lambda) + ")";
        case EstimatorTag::l1l2linf_mu:
            return "l1l2linf-MU" + star + "(" + fmt_g(spec.lambda) + "," + fmt_g(spec.nu) + ")";
        case EstimatorTag::l1l2linf_cmu:
            return "l1l2linf" + star + "(" + fmt_g(spec.lambda) + "," + fmt_g(spec.nu) + ")";
    }
    return "?";
}

SelectorProgram build_program(const EstimatorSpec& spec, const EivDataset& d) {
    validate_dataset(d);
    spec.validate(d.p());
    const bool use_x = spec.design_source == DesignSource::use_x;
    if (use_x && !d.x) throw SpecError("dantzig with the true design needs X in the dataset");
    const MatrixXd& design = use_x ? *d.x : d.z;
    const double n = static_cast<double>(d.n());

    SelectorProgram prog;
    prog.a = MatrixXd::Zero(d.p(), d.p());
    prog.a.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose(), 1.0 / n);
    prog.a.triangularView<Eigen::StrictlyUpper>() = prog.a.transpose();
    prog.r = design.transpose() * d.y / n;
    if (is_compensated(spec.kind.tag) && spec.d_hat.size() != 0)
        prog.a.diagonal() -= spec.d_hat;
    prog.tau = spec.tau;
    prog.theta_set = spec.theta_set;
    prog.safeguards = spec.kind.safeguards;

    switch (spec.kind.tag) {
        case EstimatorTag::dantzig:
            break;
        case EstimatorTag::mu:
        case EstimatorTag::compensated_mu:
            prog.mu_1 = spec.mu;
            break;
        case EstimatorTag::conic:
            prog.use_t_cone = spec.lambda > 0.0;
            prog.lambda = spec.lambda;
            prog.mu_t = spec.mu;
            break;
        case EstimatorTag::l1l2linf_mu:
        case EstimatorTag::l1l2linf_cmu:
            prog.use_t_cone = prog.use_u_cone = true;
            prog.lambda = spec.lambda;
            prog.nu = spec.nu;
            prog.mu_t = spec.mu;
            prog.mu_u = spec.kind.tag == EstimatorTag::l1l2linf_mu ? spec.delta_bar * spec.delta_bar
                                                                   : spec.beta;
            break;
    }
    // A conic spec with lambda = 0 has no aux variable left for safeguards.
    if (!prog.use_t_cone && !prog.use_u_cone) prog.safeguards = false;
    prog.validate();
    return prog;
}

Solution estimate(const EstimatorSpec& spec, const EivDataset& d, const SolverOptions& opts) {
    return solve(build_program(spec, d), opts);
}

}  // namespace eiv
