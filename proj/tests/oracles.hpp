// Independent reference solvers for small selector programs. None of these
// share code with the interior-point path.
#ifndef EIVSEL_TESTS_ORACLES_HPP_
#define EIVSEL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "eivsel/selector.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min c'x s.t. G x <= h by trying every square subsystem of active rows.
// Requires a pointed feasible set with an attained optimum.
inline double lp_vertex_min(const MatrixXd& g, const VectorXd& h, const VectorXd& c,
                            VectorXd* argmin = nullptr, double tol = 1e-9) {
    const Index k = g.cols();
    const Index m = g.rows();
    double best = kInf;
    std::vector<Index> pick(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
    MatrixXd sub(k, k);
    VectorXd rhs(k);
    while (true) {
        for (Index i = 0; i < k; ++i) {
            sub.row(i) = g.row(pick[static_cast<std::size_t>(i)]);
            rhs(i) = h(pick[static_cast<std::size_t>(i)]);
        }
        Eigen::FullPivLU<MatrixXd> lu(sub);
        if (lu.rank() == k) {
            const VectorXd x = lu.solve(rhs);
            const VectorXd slack = h - g * x;
            if ((slack.array() >= -tol * (1.0 + h.cwiseAbs().array())).all()) {
                const double v = c.dot(x);
                if (v < best) {
                    best = v;
                    if (argmin) *argmin = x;
                }
            }
        }
        Index i = k - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - k + i) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < k; ++j)
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best;
}

// Exact optimum of a program without cones, as the LP over (theta+, theta-).
inline double lp_program_min(const eiv::SelectorProgram& prog) {
    const Index p = prog.p();
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    for (int sign : {1, -1}) {
        for (Index k = 0; k < p; ++k) {
            Eigen::RowVectorXd r(2 * p);
            // sign*(r - A(x+ - x-)) <= mu_1 sum(x) + tau
            r.head(p) = -sign * prog.a.row(k);
            r.tail(p) = sign * prog.a.row(k);
            r.array() -= prog.mu_1;
            rows.push_back(r);
            rhs.push_back(prog.tau - sign * prog.r(k));
        }
    }
    for (Index j = 0; j < 2 * p; ++j) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(2 * p);
        r(j) = -1.0;
        rows.push_back(r);
        rhs.push_back(0.0);
    }
    if (prog.theta_set.is_box()) {
        for (Index j = 0; j < p; ++j) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(2 * p);
            r(j) = 1.0;
            r(p + j) = -1.0;
            if (std::isfinite(prog.theta_set.upper()(j))) {
                rows.push_back(r);
                rhs.push_back(prog.theta_set.upper()(j));
            }
            if (std::isfinite(prog.theta_set.lower()(j))) {
                rows.push_back(-r);
                rhs.push_back(-prog.theta_set.lower()(j));
            }
        }
    }
    MatrixXd g(static_cast<Index>(rows.size()), 2 * p);
    VectorXd h(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        g.row(static_cast<Index>(i)) = rows[i];
        h(static_cast<Index>(i)) = rhs[i];
    }
    return lp_vertex_min(g, h, VectorXd::Ones(2 * p));
}

// For fixed theta: the cheapest w + lambda t + nu u with w >= |theta|_1,
// t >= |theta|_2, u >= |theta|_inf, optional t, u <= w, and
// mu_t t + mu_u u + mu_1 w >= |r - A theta|_inf - tau. The cost is convex and
// piecewise linear in w with kinks only at the candidates tried below.
inline double inner_cost(const eiv::SelectorProgram& prog, const VectorXd& theta) {
    if (prog.theta_set.is_box() && !prog.theta_set.contains(theta)) return kInf;
    const double l1 = theta.lpNorm<1>();
    const double l2 = prog.use_t_cone ? theta.norm() : 0.0;
    const double li = prog.use_u_cone ? theta.lpNorm<Eigen::Infinity>() : 0.0;
    const double need = (prog.r - prog.a * theta).lpNorm<Eigen::Infinity>() - prog.tau;
    const double mt = prog.use_t_cone ? prog.mu_t : 0.0;
    const double mu = prog.use_u_cone ? prog.mu_u : 0.0;
    const double unit_t = mt > 0 ? prog.lambda / mt : kInf;
    const double unit_u = mu > 0 ? prog.nu / mu : kInf;

    auto cost_at = [&](double w) {
        if (w < l1) return kInf;
        const double cap = prog.safeguards ? w : kInf;
        double t = l2;
        double u = li;
        if ((prog.use_t_cone && t > cap) || (prog.use_u_cone && u > cap)) return kInf;
        double deficit = need - mt * t - mu * u - prog.mu_1 * w;
        auto fill = [&](double& v, double m, bool on) {
            if (deficit <= 0 || !on || m <= 0) return;
            const double room = cap - v;
            const double step = std::min(room, deficit / m);
            v += step;
            deficit -= m * step;
        };
        if (unit_t <= unit_u) {
            fill(t, mt, prog.use_t_cone);
            fill(u, mu, prog.use_u_cone);
        } else {
            fill(u, mu, prog.use_u_cone);
            fill(t, mt, prog.use_t_cone);
        }
        if (deficit > 1e-12 * (1.0 + std::abs(need))) return kInf;
        return w + prog.lambda * t + prog.nu * u;
    };

    std::vector<double> cand{l1};
    const double w0 = std::max({l1, l2, li});
    cand.push_back(w0);
    if (prog.safeguards) {
        const double both = mt + mu;
        if (both > 0) cand.push_back(need / both);
        if (mt > 0) cand.push_back((need - mu * li) / mt);
        if (mu > 0) cand.push_back((need - mt * l2) / mu);
    }
    if (prog.mu_1 > 0) cand.push_back((need - mt * l2 - mu * li) / prog.mu_1);
    double best = kInf;
    for (double w : cand)
        if (std::isfinite(w)) best = std::min(best, cost_at(std::max(w, l1)));
    return best;
}

// Minimizes inner_cost over theta by repeated grid refinement around the
// incumbent. `radius` must bound the optimal theta in the sup norm.
inline double grid_program_min(const eiv::SelectorProgram& prog, double radius, int points = 21,
                               int levels = 40, double shrink = 0.6, VectorXd* argmin = nullptr) {
    const Index p = prog.p();
    VectorXd center = VectorXd::Zero(p);
    double half = radius;
    double best = kInf;
    VectorXd best_theta = center;
    std::vector<int> idx(static_cast<std::size_t>(p));
    for (int level = 0; level < levels; ++level) {
        const double step = 2.0 * half / (points - 1);
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            VectorXd th(p);
            for (Index j = 0; j < p; ++j) th(j) = center(j) - half + step * idx[static_cast<std::size_t>(j)];
            const double v = inner_cost(prog, th);
            if (v < best) {
                best = v;
                best_theta = th;
            }
            Index j = 0;
            while (j < p && ++idx[static_cast<std::size_t>(j)] == points) idx[static_cast<std::size_t>(j++)] = 0;
            if (j == p) break;
        }
        center = best_theta;
        half *= shrink;
    }
    if (argmin) *argmin = best_theta;
    return best;
}


// Compass search from `start` along the edges where the pieces of
// inner_cost meet. Flat kinks come from the residual rows and their ties
// (a_k, a_k +- a_l), the coordinate axes and the ties of |theta|_inf
// (e_i +- e_j); edges are null directions of (p-1)-subsets of those normals.
// A dense fan of extra directions handles the curved kinks where the slack
// in the residual constraint runs out.
inline double pattern_polish(const eiv::SelectorProgram& prog, VectorXd& theta, double step,
                             double min_step = 1e-11) {
    const Index p = prog.p();
    std::vector<VectorXd> normals;
    for (Index k = 0; k < p; ++k) {
        normals.push_back(prog.a.row(k).transpose());
        for (Index l = k + 1; l < p; ++l) {
            normals.push_back((prog.a.row(k) + prog.a.row(l)).transpose());
            normals.push_back((prog.a.row(k) - prog.a.row(l)).transpose());
        }
    }
    for (Index i = 0; i < p; ++i) {
        normals.push_back(VectorXd::Unit(p, i));
        for (Index j = i + 1; j < p; ++j) {
            normals.push_back(VectorXd::Unit(p, i) + VectorXd::Unit(p, j));
            normals.push_back(VectorXd::Unit(p, i) - VectorXd::Unit(p, j));
        }
    }
    constexpr double kPi = 3.14159265358979323846;
    std::vector<VectorXd> dirs;
    std::vector<VectorXd> fan;
    for (Index i = 0; i < p; ++i) dirs.push_back(VectorXd::Unit(p, i));
    if (p == 2) {
        for (const auto& nv : normals) dirs.push_back(VectorXd(Eigen::Vector2d(-nv(1), nv(0))));
        for (int k = 0; k < 720; ++k) {
            const double ang = k * kPi / 720.0;
            fan.push_back(VectorXd(Eigen::Vector2d(std::cos(ang), std::sin(ang))));
        }
    } else if (p == 3) {
        for (std::size_t i = 0; i < normals.size(); ++i)
            for (std::size_t j = i + 1; j < normals.size(); ++j) {
                const Eigen::Vector3d c =
                    Eigen::Vector3d(normals[i]).cross(Eigen::Vector3d(normals[j]));
                if (c.norm() > 1e-12) dirs.push_back(VectorXd(c));
            }
        // fans inside each flat kink plane, for curved kinks lying in it
        for (const auto& nv : normals) {
            const Eigen::Vector3d a = Eigen::Vector3d(nv).normalized();
            const Eigen::Vector3d b =
                std::abs(a(0)) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
            const Eigen::Vector3d e1 = a.cross(b).normalized();
            const Eigen::Vector3d e2 = a.cross(e1).normalized();
            for (int k = 0; k < 180; ++k) {
                const double ang = k * kPi / 180.0;
                fan.push_back(VectorXd(std::cos(ang) * e1 + std::sin(ang) * e2));
            }
        }
        // Fibonacci points on the unit sphere (antipodes come from the sign loop)
        const int count = 3000;
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - (k + 0.5) / count;
            const double rad = std::sqrt(1.0 - z * z);
            const double ang = k * kPi * (3.0 - std::sqrt(5.0));
            fan.push_back(VectorXd(Eigen::Vector3d(rad * std::cos(ang), rad * std::sin(ang), z)));
        }
    }
    for (auto& d : dirs) d.normalize();
    double best = inner_cost(prog, theta);
    auto sweep = [&](const std::vector<VectorXd>& set) {
        bool moved = false;
        for (const auto& d : set) {
            for (double sgn : {1.0, -1.0}) {
                // doubling line search while it pays
                for (double len = step;; len *= 2.0) {
                    const VectorXd cand = theta + sgn * len * d;
                    const double v = inner_cost(prog, cand);
                    if (!(v < best - 1e-14 * (1.0 + std::abs(best)))) break;
                    best = v;
                    theta = cand;
                    moved = true;
                }
            }
        }
        return moved;
    };
    // Net displacements of recent rounds join the structured set, so a
    // curved valley gets followed instead of zigzagged.
    const std::size_t fixed = dirs.size();
    for (int round = 0; round < 5000 && step > min_step; ++round) {
        const VectorXd before = theta;
        const bool moved = sweep(dirs) || sweep(fan);
        if (!moved) {
            step *= 0.5;
            continue;
        }
        const VectorXd disp = theta - before;
        if (disp.norm() > 0) {
            if (dirs.size() >= fixed + 4) dirs.erase(dirs.begin() + static_cast<std::ptrdiff_t>(fixed));
            dirs.push_back(disp.normalized());
        }
    }
    return best;
}

}  // namespace oracle

#endif  // EIVSEL_TESTS_ORACLES_HPP_
