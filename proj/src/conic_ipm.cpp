#include "eivsel/conic_ipm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace eiv::ipm {

Index Cones::size() const {
    return nonneg + std::accumulate(soc.begin(), soc.end(), Index{0});
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStepFraction = 0.99;
constexpr int kStallIterations = 10;

// Calls f(offset, dim) for every second-order cone block.
template <class F>
void for_each_soc(const Cones& k, F&& f) {
    Index off = k.nonneg;
    for (Index dim : k.soc) {
        f(off, dim);
        off += dim;
    }
}

VectorXd unit(const Cones& k) {
    VectorXd e = VectorXd::Zero(k.size());
    e.head(k.nonneg).setOnes();
    for_each_soc(k, [&](Index off, Index) { e(off) = 1.0; });
    return e;
}

// Jordan product u o v.
VectorXd jordan(const Cones& k, const VectorXd& u, const VectorXd& v) {
    VectorXd out(u.size());
    out.head(k.nonneg) = u.head(k.nonneg).cwiseProduct(v.head(k.nonneg));
    for_each_soc(k, [&](Index off, Index dim) {
        const auto u1 = u.segment(off + 1, dim - 1);
        const auto v1 = v.segment(off + 1, dim - 1);
        out(off) = u(off) * v(off) + u1.dot(v1);
        out.segment(off + 1, dim - 1) = u(off) * v1 + v(off) * u1;
    });
    return out;
}

// Solves lam o x = v for x.
VectorXd jordan_div(const Cones& k, const VectorXd& lam, const VectorXd& v) {
    VectorXd out(v.size());
    out.head(k.nonneg) = v.head(k.nonneg).cwiseQuotient(lam.head(k.nonneg));
    for_each_soc(k, [&](Index off, Index dim) {
        const double l0 = lam(off);
        const auto l1 = lam.segment(off + 1, dim - 1);
        const auto v1 = v.segment(off + 1, dim - 1);
        const double det = l0 * l0 - l1.squaredNorm();
        const double x0 = (l0 * v(off) - l1.dot(v1)) / det;
        out(off) = x0;
        out.segment(off + 1, dim - 1) = (v1 - x0 * l1) / l0;
    });
    return out;
}

// Smallest alpha > 0 at which (x0 + a d0, x1 + a d1) leaves the second-order cone.
double soc_step(double x0, const VectorXd& x1, double d0, const VectorXd& d1) {
    const double a = d0 * d0 - d1.squaredNorm();
    const double b = x0 * d0 - x1.dot(d1);
    const double c = x0 * x0 - x1.squaredNorm();
    if (c <= 0.0 || x0 <= 0.0) return 0.0;
    const double scale = std::max(d0 * d0 + d1.squaredNorm(), 1e-300);
    if (std::abs(a) <= 1e-14 * scale) return b < 0.0 ? -c / (2.0 * b) : kInf;
    const double disc = b * b - a * c;
    if (disc < 0.0) return kInf;
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    double best = kInf;
    for (double r : {q / a, q != 0.0 ? c / q : kInf})
        if (r > 0.0) best = std::min(best, r);
    return best;
}

double max_step(const Cones& k, const VectorXd& x, const VectorXd& dx) {
    double alpha = kInf;
    for (Index i = 0; i < k.nonneg; ++i)
        if (dx(i) < 0.0) alpha = std::min(alpha, -x(i) / dx(i));
    for_each_soc(k, [&](Index off, Index dim) {
        alpha = std::min(alpha, soc_step(x(off), x.segment(off + 1, dim - 1), dx(off),
                                         dx.segment(off + 1, dim - 1)));
    });
    return alpha;
}

// Moves v into the interior: v itself if already interior, else v + (1 + m) e
// where m is the most negative "eigenvalue".
VectorXd shift_into_cone(const Cones& k, const VectorXd& v) {
    double m = -kInf;
    for (Index i = 0; i < k.nonneg; ++i) m = std::max(m, -v(i));
    for_each_soc(k, [&](Index off, Index dim) {
        m = std::max(m, v.segment(off + 1, dim - 1).norm() - v(off));
    });
    if (m < 0.0) return v;
    return v + (1.0 + m) * unit(k);
}

// Nesterov-Todd scaling W with W z = W^-1 s = lambda. W is symmetric.
class Scaling {
 public:
    explicit Scaling(const Cones& k) : k_(k) {}

    bool update(const VectorXd& s, const VectorXd& z) {
        d_ = (s.head(k_.nonneg).array() / z.head(k_.nonneg).array()).sqrt();
        soc_.clear();
        bool ok = d_.allFinite() && (k_.nonneg == 0 || d_.minCoeff() > 0.0);
        for_each_soc(k_, [&](Index off, Index dim) {
            const auto sb = s.segment(off, dim);
            const auto zb = z.segment(off, dim);
            const double sres = sb(0) * sb(0) - sb.tail(dim - 1).squaredNorm();
            const double zres = zb(0) * zb(0) - zb.tail(dim - 1).squaredNorm();
            if (!(sres > 0.0 && zres > 0.0)) ok = false;
            const double sn = std::sqrt(std::max(sres, 1e-300));
            const double zn = std::sqrt(std::max(zres, 1e-300));
            VectorXd sbar = sb / sn;
            VectorXd zbar = zb / zn;
            const double gamma = std::sqrt(std::max((1.0 + sbar.dot(zbar)) / 2.0, 1e-300));
            // NT point wbar (wbar' J wbar = 1), then W = eta (2 v v' - J) with
            // v = (wbar + e) / sqrt(2 (wbar_0 + 1)).
            VectorXd wbar(dim);
            wbar(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
            wbar.tail(dim - 1) = (sbar.tail(dim - 1) - zbar.tail(dim - 1)) / (2.0 * gamma);
            SocBlock blk;
            blk.v = wbar;
            blk.v(0) += 1.0;
            blk.v /= std::sqrt(2.0 * (wbar(0) + 1.0));
            blk.eta = std::sqrt(sn / zn);
            soc_.push_back(std::move(blk));
        });
        lambda_ = apply(z);
        return ok && lambda_.allFinite();
    }

    const VectorXd& lambda() const { return lambda_; }

    VectorXd apply(const VectorXd& v) const {
        VectorXd out(v.size());
        out.head(k_.nonneg) = d_.cwiseProduct(v.head(k_.nonneg));
        std::size_t b = 0;
        for_each_soc(k_, [&](Index off, Index dim) {
            const SocBlock& blk = soc_[b++];
            const auto vb = v.segment(off, dim);
            const double wv = blk.v.dot(vb);
            auto ob = out.segment(off, dim);
            ob = 2.0 * wv * blk.v;
            ob(0) -= vb(0);
            ob.tail(dim - 1) += vb.tail(dim - 1);
            ob *= blk.eta;
        });
        return out;
    }

    VectorXd apply_inverse(const VectorXd& v) const {
        MatrixXd m = v;
        apply_inverse_rows(m);
        return m.col(0);
    }

    // m <- W^-1 m
    void apply_inverse_rows(MatrixXd& m) const {
        for (Index i = 0; i < k_.nonneg; ++i) m.row(i) /= d_(i);
        std::size_t b = 0;
        for_each_soc(k_, [&](Index off, Index dim) {
            const SocBlock& blk = soc_[b++];
            // W^-1 = (2 J v v' J - J) / eta
            VectorXd jw = blk.v;
            jw.tail(dim - 1) *= -1.0;
            auto mb = m.middleRows(off, dim);
            const Eigen::RowVectorXd proj = jw.transpose() * mb;
            mb.row(0) *= -1.0;
            mb.noalias() += 2.0 * jw * proj;
            mb /= blk.eta;
        });
    }

 private:
    struct SocBlock {
        double eta = 1.0;
        VectorXd v;
    };

    const Cones& k_;
    VectorXd d_;
    std::vector<SocBlock> soc_;
    VectorXd lambda_;
};

// Solves [0 G'; G -W^2] [x; z] = [a; b] through the normal equations
// (G' W^-2 G) x = a + G' W^-2 b with iterative refinement.
class KktSolver {
 public:
    explicit KktSolver(const MatrixXd& g) : g_(g) {}

    bool factor(const Scaling* sc) {
        sc_ = sc;
        MatrixXd m = g_;
        if (sc_) sc_->apply_inverse_rows(m);
        const Index n = g_.cols();
        MatrixXd h = MatrixXd::Zero(n, n);
        h.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose());
        const double scale = std::max(1.0, h.diagonal().maxCoeff());
        double reg = 1e-14 * scale;
        for (int attempt = 0; attempt < 6; ++attempt, reg *= 100.0) {
            MatrixXd hr = h;
            hr.diagonal().array() += reg;
            llt_.compute(hr.selfadjointView<Eigen::Lower>());
            if (llt_.info() == Eigen::Success) return true;
        }
        return false;
    }

    void solve(const VectorXd& a, const VectorXd& b, VectorXd& x, VectorXd& z) const {
        x = VectorXd::Zero(g_.cols());
        z = VectorXd::Zero(g_.rows());
        VectorXd ra = a;
        VectorXd rb = b;
        for (int it = 0; it < 4; ++it) {
            const VectorXd wb = winv2(rb);
            const VectorXd dx = llt_.solve(ra + g_.transpose() * wb);
            const VectorXd dz = winv2(g_ * dx) - wb;
            x += dx;
            z += dz;
            ra = a - g_.transpose() * z;
            rb = b - (g_ * x - w2(z));
            const double err = std::max(ra.lpNorm<Eigen::Infinity>(), rb.lpNorm<Eigen::Infinity>());
            const double ref = 1.0 + std::max(a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>());
            if (err <= 1e-14 * ref) break;
        }
    }

 private:
    VectorXd winv2(const VectorXd& v) const {
        return sc_ ? sc_->apply_inverse(sc_->apply_inverse(v)) : v;
    }
    VectorXd w2(const VectorXd& v) const { return sc_ ? sc_->apply(sc_->apply(v)) : v; }

    const MatrixXd& g_;
    const Scaling* sc_ = nullptr;
    Eigen::LLT<MatrixXd> llt_;
};

struct Direction {
    VectorXd dx, dz, ds;
    double dtau = 0.0;
    double dkappa = 0.0;
};

}  // namespace

Result solve(const ConicProblem& prob, const Settings& st) {
    const Cones& k = prob.cones;
    const MatrixXd& g = prob.g;
    const VectorXd& c = prob.c;
    const VectorXd& h = prob.h;
    const Index m = k.size();
    const double deg = static_cast<double>(k.degree());

    Result res;
    KktSolver kkt(g);
    if (!kkt.factor(nullptr)) {
        res.status = Status::numerical_failure;
        return res;
    }

    // Least-squares primal and least-norm dual starting points.
    VectorXd x, z, s, tmp;
    kkt.solve(VectorXd::Zero(g.cols()), h, x, tmp);
    s = shift_into_cone(k, -tmp);
    kkt.solve(-c, VectorXd::Zero(m), tmp, z);
    z = shift_into_cone(k, z);
    double tau = 1.0;
    double kappa = 1.0;

    const double cnorm = 1.0 + c.lpNorm<Eigen::Infinity>();
    Scaling sc(k);
    const VectorXd e = unit(k);

    // Best iterate so far, scored by the worst tolerance ratio. Late iterations
    // can lose accuracy; the final answer falls back to this point.
    struct Snapshot {
        VectorXd x, s, z;
        double tau = 1.0, pres = kInf, dres = kInf;
        double merit = kInf;
        int iter = 0;
    } best;

    for (int iter = 0;; ++iter) {
        const VectorXd rx = g.transpose() * z + c * tau;
        const VectorXd rz = g * x + s - h * tau;
        const double rt = kappa + c.dot(x) + h.dot(z);
        const double mu = (s.dot(z) + tau * kappa) / (deg + 1.0);

        const double pcost = c.dot(x) / tau;
        const double dcost = -h.dot(z) / tau;
        res.primal_residual = rz.lpNorm<Eigen::Infinity>() / tau;
        res.dual_residual = rx.lpNorm<Eigen::Infinity>() / tau / cnorm;
        res.iterations = iter;
        const double gap = s.dot(z) / (tau * tau);
        if (st.verbose)
            std::fprintf(stderr, "ipm %3d pcost %+.9e dcost %+.9e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e\n",
                         iter, pcost, dcost, res.primal_residual, res.dual_residual, gap, tau, kappa);

        const double gap_ref = std::max(1.0, std::min(std::abs(pcost), std::abs(dcost)));
        const double merit = std::max({res.primal_residual / st.feastol, res.dual_residual / st.dualtol,
                                       std::max(gap, std::abs(pcost - dcost)) / (st.gaptol * gap_ref)});
        if (merit <= 1.0) {
            res.status = Status::optimal;
            break;
        }
        if (std::isfinite(merit) && merit < best.merit) {
            best = {x, s, z, tau, res.primal_residual, res.dual_residual, merit, iter};
        }
        const double htz = h.dot(z);
        const double ctx = c.dot(x);
        if (tau < kappa && htz < 0.0 &&
            (g.transpose() * z).lpNorm<Eigen::Infinity>() <= st.feastol * -htz) {
            res.status = Status::primal_infeasible;
            res.x = VectorXd::Zero(g.cols());
            res.s = VectorXd::Zero(m);
            res.z = z / -htz;
            return res;
        }
        if (tau < kappa && ctx < 0.0 &&
            (g * x + s).lpNorm<Eigen::Infinity>() <= st.feastol * -ctx) {
            res.status = Status::dual_infeasible;
            res.x = x / -ctx;
            res.s = s / -ctx;
            res.z = VectorXd::Zero(m);
            return res;
        }
        if (iter >= st.max_iterations || iter - best.iter >= kStallIterations) {
            res.status = Status::max_iterations;
            break;
        }

        if (!sc.update(s, z) || !kkt.factor(&sc)) {
            res.status = Status::numerical_failure;
            break;
        }
        const VectorXd& lam = sc.lambda();

        VectorXd x1, z1;
        kkt.solve(-c, h, x1, z1);
        const double denom = c.dot(x1) + h.dot(z1) - kappa / tau;

        auto newton = [&](double resid_scale, const VectorXd& ds_rhs, double dt_rhs) {
            Direction d;
            const VectorXd ls = jordan_div(k, lam, ds_rhs);
            VectorXd x2, z2;
            kkt.solve(-resid_scale * rx, -resid_scale * rz - sc.apply(ls), x2, z2);
            d.dtau = (-resid_scale * rt - dt_rhs / tau - c.dot(x2) - h.dot(z2)) / denom;
            d.dx = x2 + d.dtau * x1;
            d.dz = z2 + d.dtau * z1;
            d.ds = sc.apply(ls - sc.apply(d.dz));
            d.dkappa = (dt_rhs - kappa * d.dtau) / tau;
            return d;
        };
        auto step_length = [&](const Direction& d) {
            double a = std::min(max_step(k, s, d.ds), max_step(k, z, d.dz));
            if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        // Predictor.
        const Direction aff = newton(1.0, -jordan(k, lam, lam), -tau * kappa);
        const double alpha_aff = std::min(1.0, step_length(aff));
        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

        // Corrector with second-order term.
        const VectorXd corr = jordan(k, sc.apply_inverse(aff.ds), sc.apply(aff.dz));
        const Direction dir = newton(1.0 - sigma, -jordan(k, lam, lam) - corr + sigma * mu * e,
                                     -tau * kappa - aff.dtau * aff.dkappa + sigma * mu);
        const double alpha = std::min(1.0, kStepFraction * step_length(dir));
        if (!(alpha > 1e-12) || !dir.dx.allFinite()) {
            res.status = Status::numerical_failure;
            break;
        }
        x += alpha * dir.dx;
        s += alpha * dir.ds;
        z += alpha * dir.dz;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
    }

    if (res.status != Status::optimal && best.merit < kInf) {
        x = best.x;
        s = best.s;
        z = best.z;
        tau = best.tau;
        res.primal_residual = best.pres;
        res.dual_residual = best.dres;
    }
    res.x = x / tau;
    res.s = s / tau;
    res.z = z / tau;
    res.primal_objective = c.dot(res.x);
    res.dual_objective = -h.dot(res.z);
    return res;
}

}  // namespace eiv::ipm
