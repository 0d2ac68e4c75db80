#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "eivsel/conic_ipm.hpp"
#include "oracles.hpp"

using namespace eiv;
using namespace eiv::ipm;

TEST(ConicIpm, SmallLp) {
    // min -x1 - 2 x2  s.t.  x1 + x2 <= 4, x1 <= 3, x2 <= 2, x >= 0  ->  (2, 2), -6
    ConicProblem cp;
    cp.c = Eigen::Vector2d(-1, -2);
    cp.g.resize(5, 2);
    cp.g << 1, 1, 1, 0, 0, 1, -1, 0, 0, -1;
    cp.h.resize(5);
    cp.h << 4, 3, 2, 0, 0;
    cp.cones.nonneg = 5;
    const Result r = ipm::solve(cp);
    ASSERT_EQ(r.status, Status::optimal);
    EXPECT_NEAR(r.x(0), 2.0, 1e-7);
    EXPECT_NEAR(r.x(1), 2.0, 1e-7);
    EXPECT_NEAR(r.primal_objective, -6.0, 1e-7);
    EXPECT_NEAR(r.dual_objective, -6.0, 1e-7);
}

TEST(ConicIpm, UnitDisc) {
    // min -x1 - x2  s.t.  |(x1, x2)|_2 <= 1  ->  -sqrt(2)
    ConicProblem cp;
    cp.c = Eigen::Vector2d(-1, -1);
    cp.g = MatrixXd::Zero(3, 2);
    cp.g(1, 0) = -1;
    cp.g(2, 1) = -1;
    cp.h = Eigen::Vector3d(1, 0, 0);
    cp.cones.soc = {3};
    const Result r = ipm::solve(cp);
    ASSERT_EQ(r.status, Status::optimal);
    EXPECT_NEAR(r.primal_objective, -std::sqrt(2.0), 1e-7);
    EXPECT_NEAR(r.x(0), 1.0 / std::sqrt(2.0), 1e-6);
}

TEST(ConicIpm, DetectsPrimalInfeasibility) {
    // x >= 1 and x <= 0
    ConicProblem cp;
    cp.c = VectorXd::Ones(1);
    cp.g.resize(2, 1);
    cp.g << -1, 1;
    cp.h = Eigen::Vector2d(-1, 0);
    cp.cones.nonneg = 2;
    const Result r = ipm::solve(cp);
    ASSERT_EQ(r.status, Status::primal_infeasible);
    // Farkas: z >= 0, G'z = 0, h'z < 0
    EXPECT_GE(r.z.minCoeff(), -1e-9);
    EXPECT_LT((cp.g.transpose() * r.z).norm(), 1e-7);
    EXPECT_LT(cp.h.dot(r.z), 0.0);
}

TEST(ConicIpm, DetectsDualInfeasibility) {
    // min -x  s.t.  x >= 0, unbounded below
    ConicProblem cp;
    cp.c = -VectorXd::Ones(1);
    cp.g = -MatrixXd::Ones(1, 1);
    cp.h = VectorXd::Zero(1);
    cp.cones.nonneg = 1;
    EXPECT_EQ(ipm::solve(cp).status, Status::dual_infeasible);
}

TEST(ConicIpm, IterationBudgetIsReported) {
    ConicProblem cp;
    cp.c = Eigen::Vector2d(-1, -1);
    cp.g = MatrixXd::Zero(3, 2);
    cp.g(1, 0) = -1;
    cp.g(2, 1) = -1;
    cp.h = Eigen::Vector3d(1, 0, 0);
    cp.cones.soc = {3};
    Settings st;
    st.max_iterations = 1;
    const Result r = ipm::solve(cp, st);
    EXPECT_EQ(r.status, Status::max_iterations);
    EXPECT_LE(r.iterations, 1);
}

// Random bounded LPs against vertex enumeration.
TEST(ConicIpm, MatchesVertexEnumerationOnRandomLps) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const Index k = 2 + trial % 3;
        const Index m = k + 3 + trial % 4;
        MatrixXd gm(m + 2 * k, k);
        VectorXd h(m + 2 * k);
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < k; ++j) gm(i, j) = g(rng);
            h(i) = 1.0 + std::abs(g(rng));  // origin strictly feasible
        }
        // box |x_j| <= 5 keeps it bounded
        gm.bottomRows(2 * k).setZero();
        for (Index j = 0; j < k; ++j) {
            gm(m + 2 * j, j) = 1;
            gm(m + 2 * j + 1, j) = -1;
            h(m + 2 * j) = h(m + 2 * j + 1) = 5;
        }
        VectorXd c(k);
        for (Index j = 0; j < k; ++j) c(j) = g(rng);
        ConicProblem cp{c, gm, h, {m + 2 * k, {}}};
        const Result r = ipm::solve(cp);
        ASSERT_EQ(r.status, Status::optimal) << "trial " << trial;
        const double exact = oracle::lp_vertex_min(gm, h, c);
        EXPECT_NEAR(r.primal_objective, exact, 1e-7 * (1.0 + std::abs(exact))) << "trial " << trial;
    }
}
