#include "eivsel/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "eivsel/conic_ipm.hpp"
#include "eivsel/errors.hpp"
#include "eivsel/simlab.hpp"

namespace eiv {

void SensitivityQuery::validate() const {
    if (psi.rows() != psi.cols() || psi.rows() < 1)
        throw DimensionError("psi", "psi must be a nonempty square matrix");
    if (!psi.allFinite()) throw DomainError("psi has a non-finite entry");
    if ((psi - psi.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw DomainError("psi must be symmetric (within 1e-10)");
    if (s < 1 || s > psi.rows()) throw DomainError("s must lie in [1, p]");
    if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("u must be positive and finite");
}

bool cone_membership(const VectorXd& delta, const std::vector<Index>& j, double u) {
    std::vector<bool> in(static_cast<std::size_t>(delta.size()), false);
    for (Index k : j) {
        if (k < 0 || k >= delta.size())
            throw DomainError("support index " + std::to_string(k) + " out of range");
        in[static_cast<std::size_t>(k)] = true;
    }
    double on = 0.0;
    double off = 0.0;
    for (Index k = 0; k < delta.size(); ++k)
        (in[static_cast<std::size_t>(k)] ? on : off) += std::abs(delta(k));
    return off <= u * on + 1e-12 * (on + off);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<Index>> combinations(Index p, Index s) {
    std::vector<std::vector<Index>> out;
    std::vector<Index> cur(static_cast<std::size_t>(s));
    for (Index i = 0; i < s; ++i) cur[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(cur);
        Index i = s - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == p - s + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (Index k = i + 1; k < s; ++k)
            cur[static_cast<std::size_t>(k)] = cur[static_cast<std::size_t>(k - 1)] + 1;
    }
    return out;
}

// Builder for "minimize z subject to |psi D|_inf <= z" plus extra rows
// h_i - g_i x >= 0, over x = (vars..., z).
struct LpBuilder {
    Index nvars;
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;

    explicit LpBuilder(Index n) : nvars(n) {}
    Eigen::RowVectorXd row() const { return Eigen::RowVectorXd::Zero(nvars + 1); }
    void add(const Eigen::RowVectorXd& g, double h) {
        rows.push_back(g);
        rhs.push_back(h);
    }
    // Empty when the LP is infeasible (e.g. an anchor the cone cannot reach).
    std::optional<VectorXd> solve() const {
        ipm::ConicProblem cp;
        cp.c = VectorXd::Zero(nvars + 1);
        cp.c(nvars) = 1.0;
        cp.g.resize(static_cast<Index>(rows.size()), nvars + 1);
        cp.h.resize(static_cast<Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            cp.g.row(static_cast<Index>(i)) = rows[i];
            cp.h(static_cast<Index>(i)) = rhs[i];
        }
        cp.cones.nonneg = cp.g.rows();
        ipm::Settings st;
        st.feastol = st.dualtol = st.gaptol = 1e-9;
        const ipm::Result r = ipm::solve(cp, st);
        if (r.status == ipm::Status::primal_infeasible) return std::nullopt;
        if (r.status != ipm::Status::optimal)
            throw Error("sensitivity: linear program did not reach optimality");
        return r.x.head(nvars);
    }
};

// Adds +-(psi D)_k <= z where D = map * x.head(map.cols()).
void add_objective_rows(LpBuilder& lp, const MatrixXd& psi_map) {
    for (Index k = 0; k < psi_map.rows(); ++k) {
        for (double sgn : {1.0, -1.0}) {
            Eigen::RowVectorXd g = lp.row();
            g.head(psi_map.cols()) = sgn * psi_map.row(k);
            g(lp.nvars) = -1.0;
            lp.add(g, 0.0);
        }
    }
}

// Pushes a slightly infeasible LP point back into C_J(u) by shrinking the
// off-support part.
void repair_cone(VectorXd& delta, const std::vector<bool>& in_j, double u) {
    double on = 0.0;
    double off = 0.0;
    for (Index k = 0; k < delta.size(); ++k)
        (in_j[static_cast<std::size_t>(k)] ? on : off) += std::abs(delta(k));
    if (off <= u * on) return;
    const double f = off > 0.0 ? u * on / off : 0.0;
    for (Index k = 0; k < delta.size(); ++k)
        if (!in_j[static_cast<std::size_t>(k)]) delta(k) *= f;
}

struct Candidate {
    double value = kInf;
    VectorXd delta;
};

void consider(Candidate& best, const MatrixXd& psi, VectorXd delta) {
    if (!delta.allFinite() || delta.isZero(0.0)) return;
    const double v = (psi * delta).lpNorm<Eigen::Infinity>();
    if (v < best.value) best = {v, std::move(delta)};
}

Candidate solve_q1(const MatrixXd& psi, const std::vector<bool>& in_j, double u) {
    const Index p = psi.rows();
    Candidate best;
    // The first sign is fixed by the symmetry D -> -D.
    const unsigned long patterns = 1ul << (p - 1);
    for (unsigned long mask = 0; mask < patterns; ++mask) {
        VectorXd sigma(p);
        sigma(0) = 1.0;
        for (Index k = 1; k < p; ++k) sigma(k) = (mask >> (k - 1)) & 1ul ? -1.0 : 1.0;
        // x = (a, z) with D = sigma .* a, a >= 0.
        LpBuilder lp(p);
        add_objective_rows(lp, psi * sigma.asDiagonal());
        for (Index k = 0; k < p; ++k) {
            Eigen::RowVectorXd g = lp.row();
            g(k) = -1.0;
            lp.add(g, 0.0);
        }
        Eigen::RowVectorXd cone = lp.row();
        Eigen::RowVectorXd norm = lp.row();
        for (Index k = 0; k < p; ++k) {
            cone(k) = in_j[static_cast<std::size_t>(k)] ? -u : 1.0;
            norm(k) = -1.0;
        }
        lp.add(cone, 0.0);
        lp.add(norm, -1.0);
        const auto sol = lp.solve();
        if (!sol) continue;
        VectorXd a = sol->cwiseMax(0.0);
        VectorXd delta = sigma.cwiseProduct(a);
        repair_cone(delta, in_j, u);
        const double l1 = delta.lpNorm<1>();
        if (l1 > 0.0) consider(best, psi, delta / l1);
    }
    return best;
}

Candidate solve_qinf(const MatrixXd& psi, const std::vector<Index>& j, const std::vector<bool>& in_j,
                     double u) {
    const Index p = psi.rows();
    const Index s = static_cast<Index>(j.size());
    std::vector<Index> off;
    for (Index k = 0; k < p; ++k)
        if (!in_j[static_cast<std::size_t>(k)]) off.push_back(k);
    const Index m = static_cast<Index>(off.size());
    Candidate best;
    const unsigned long patterns = 1ul << (s - 1);
    for (unsigned long mask = 0; mask < patterns; ++mask) {
        VectorXd sigma = VectorXd::Zero(p);
        for (Index i = 0; i < s; ++i)
            sigma(j[static_cast<std::size_t>(i)]) = i > 0 && ((mask >> (i - 1)) & 1ul) ? -1.0 : 1.0;
        for (Index anchor = 0; anchor < p; ++anchor) {
            const bool anchor_in = in_j[static_cast<std::size_t>(anchor)];
            for (double asign : {1.0, -1.0}) {
                if (anchor_in && asign != sigma(anchor)) continue;
                // x = (D, e_off, z); e bounds |D_k| on the off-support.
                LpBuilder lp(p + m);
                MatrixXd map = MatrixXd::Zero(p, p + m);
                map.leftCols(p) = psi;
                add_objective_rows(lp, map);
                for (Index i = 0; i < s; ++i) {
                    const Index k = j[static_cast<std::size_t>(i)];
                    Eigen::RowVectorXd g = lp.row();
                    g(k) = -sigma(k);
                    lp.add(g, 0.0);
                }
                Eigen::RowVectorXd cone = lp.row();
                for (Index i = 0; i < m; ++i) {
                    for (double sg : {1.0, -1.0}) {
                        Eigen::RowVectorXd g = lp.row();
                        g(off[static_cast<std::size_t>(i)]) = sg;
                        g(p + i) = -1.0;
                        lp.add(g, 0.0);
                    }
                    cone(p + i) = 1.0;
                }
                for (Index k : j) cone(k) = -u * sigma(k);
                lp.add(cone, 0.0);
                Eigen::RowVectorXd peak = lp.row();
                peak(anchor) = -asign;
                lp.add(peak, -1.0);
                for (Index k = 0; k < p; ++k) {
                    if (k == anchor) continue;
                    for (double sg : {1.0, -1.0}) {
                        Eigen::RowVectorXd g = lp.row();
                        g(k) = sg;
                        g(anchor) = -asign;
                        lp.add(g, 0.0);
                    }
                }
                const auto sol = lp.solve();
                if (!sol) continue;
                VectorXd delta = sol->head(p);
                for (Index k : j) delta(k) = sigma(k) * std::max(0.0, sigma(k) * delta(k));
                repair_cone(delta, in_j, u);
                const double peak_abs = delta.lpNorm<Eigen::Infinity>();
                if (peak_abs > 0.0) consider(best, psi, delta / peak_abs);
            }
        }
    }
    return best;
}

}  // namespace

SensitivityResult kappa_bruteforce(const SensitivityQuery& qry, int jobs) {
    if (qry.psi.rows() > kSensitivityMaxP)
        throw DomainError("sensitivity enumeration is limited to p <= " +
                          std::to_string(kSensitivityMaxP) + ", got p = " +
                          std::to_string(qry.psi.rows()));
    qry.validate();
    const Index p = qry.psi.rows();

    // Solve on psi / max|psi| so the LP tolerances are relative; kappa scales back exactly.
    const double scale = qry.psi.cwiseAbs().maxCoeff();
    SensitivityResult res;
    if (scale == 0.0) {
        res.kappa = 0.0;
        res.witness_delta = VectorXd::Zero(p);
        res.witness_delta(0) = 1.0;
        for (Index k = 0; k < qry.s; ++k) res.witness_j.push_back(k);
        return res;
    }
    const MatrixXd psi = qry.psi / scale;

    const auto supports = combinations(p, qry.s);
    std::vector<Candidate> cells(supports.size());
    parallel_for(static_cast<int>(supports.size()), jobs, [&](int i) {
        const auto& j = supports[static_cast<std::size_t>(i)];
        std::vector<bool> in_j(static_cast<std::size_t>(p), false);
        for (Index k : j) in_j[static_cast<std::size_t>(k)] = true;
        cells[static_cast<std::size_t>(i)] =
            qry.q == NormQ::one ? solve_q1(psi, in_j, qry.u) : solve_qinf(psi, j, in_j, qry.u);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < cells.size(); ++i)
        if (cells[i].value < cells[best].value) best = i;
    if (!std::isfinite(cells[best].value)) throw Error("sensitivity: no candidate found");
    res.witness_delta = cells[best].delta;
    res.witness_j = supports[best];
    res.kappa = (qry.psi * res.witness_delta).lpNorm<Eigen::Infinity>();
    return res;
}

bool check_kappa_condition(const SensitivityQuery& qry, double c, int jobs) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("c must be positive and finite");
    const double kappa = kappa_bruteforce(qry, jobs).kappa;
    const double factor = qry.q == NormQ::one ? 1.0 / static_cast<double>(qry.s) : 1.0;
    return kappa >= c * factor;
}

}  // namespace eiv
