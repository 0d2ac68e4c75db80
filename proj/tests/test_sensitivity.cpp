#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "eivsel/errors.hpp"
#include "eivsel/sensitivity.hpp"
#include "oracles.hpp"

using namespace eiv;

namespace {

MatrixXd random_gram(std::mt19937_64& rng, Index p) {
    std::normal_distribution<double> g(0.0, 1.0);
    const Index n = p + 3;
    MatrixXd x(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) x(i, j) = g(rng);
    MatrixXd psi = x.transpose() * x / static_cast<double>(n);
    return (psi + psi.transpose()) / 2.0;
}

SensitivityQuery query(const MatrixXd& psi, Index s, double u, NormQ q) {
    SensitivityQuery qry;
    qry.psi = psi;
    qry.s = s;
    qry.u = u;
    qry.q = q;
    return qry;
}

// Literal enumeration: every support of size <= s, every full sign pattern,
// and for q = inf every anchor, each LP over (D, z) solved by vertex
// enumeration.
double kappa_by_vertices(const SensitivityQuery& qry) {
    const Index p = qry.psi.rows();
    double best = oracle::kInf;
    for (unsigned mask = 1; mask < (1u << p); ++mask) {
        if (__builtin_popcount(mask) > qry.s) continue;
        for (unsigned signs = 0; signs < (1u << p); ++signs) {
            VectorXd sg(p);
            for (Index j = 0; j < p; ++j) sg(j) = (signs >> j) & 1u ? -1.0 : 1.0;
            const int anchors = qry.q == NormQ::one ? 1 : static_cast<int>(p);
            for (int a = 0; a < anchors; ++a) {
                std::vector<Eigen::RowVectorXd> rows;
                std::vector<double> rhs;
                auto add = [&](Eigen::RowVectorXd r, double b) {
                    rows.push_back(std::move(r));
                    rhs.push_back(b);
                };
                for (Index k = 0; k < p; ++k) {
                    Eigen::RowVectorXd r(p + 1);
                    r.head(p) = qry.psi.row(k);
                    r(p) = -1.0;
                    add(r, 0.0);
                    r.head(p) = -qry.psi.row(k);
                    add(r, 0.0);
                }
                Eigen::RowVectorXd cone = Eigen::RowVectorXd::Zero(p + 1);
                for (Index j = 0; j < p; ++j) {
                    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(p + 1);
                    r(j) = -sg(j);
                    add(r, 0.0);
                    cone(j) = (mask >> j) & 1u ? -qry.u * sg(j) : sg(j);
                }
                add(cone, 0.0);
                Eigen::RowVectorXd norm = Eigen::RowVectorXd::Zero(p + 1);
                if (qry.q == NormQ::one) {
                    norm.head(p) = sg.transpose();
                } else {
                    norm(a) = sg(a);
                    for (Index j = 0; j < p; ++j) {
                        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(p + 1);
                        r(j) = sg(j);
                        add(r, 1.0);
                    }
                }
                add(norm, 1.0);
                add(-norm, -1.0);
                MatrixXd g(static_cast<Index>(rows.size()), p + 1);
                VectorXd h(static_cast<Index>(rows.size()));
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    g.row(static_cast<Index>(i)) = rows[i];
                    h(static_cast<Index>(i)) = rhs[i];
                }
                VectorXd c = VectorXd::Zero(p + 1);
                c(p) = 1.0;
                best = std::min(best, oracle::lp_vertex_min(g, h, c));
            }
        }
    }
    return best;
}

// Upper bound from random cone points: random support, random direction,
// off-support mass scaled into the cone.
double kappa_by_sampling(const SensitivityQuery& qry, int samples, std::mt19937_64& rng) {
    const Index p = qry.psi.rows();
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double best = oracle::kInf;
    std::vector<Index> idx(static_cast<std::size_t>(p));
    for (int k = 0; k < samples; ++k) {
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        VectorXd d(p);
        for (Index j = 0; j < p; ++j) d(j) = g(rng);
        double on = 0.0, off = 0.0;
        for (Index j = 0; j < p; ++j)
            (j < qry.s ? on : off) += std::abs(d(idx[static_cast<std::size_t>(j)]));
        const double scale = off > 0 ? std::min(1.0, unif(rng) * qry.u * on / off) : 1.0;
        for (Index j = qry.s; j < p; ++j) d(idx[static_cast<std::size_t>(j)]) *= scale;
        const double nq = qry.q == NormQ::one ? d.lpNorm<1>() : d.lpNorm<Eigen::Infinity>();
        best = std::min(best, (qry.psi * d).lpNorm<Eigen::Infinity>() / nq);
    }
    return best;
}

void expect_witness_valid(const SensitivityQuery& qry, const SensitivityResult& r) {
    ASSERT_EQ(r.witness_delta.size(), qry.psi.rows());
    EXPECT_EQ(static_cast<Index>(r.witness_j.size()), qry.s);
    EXPECT_TRUE(cone_membership(r.witness_delta, r.witness_j, qry.u * (1 + 1e-9)));
    const double nq = qry.q == NormQ::one ? r.witness_delta.lpNorm<1>()
                                          : r.witness_delta.lpNorm<Eigen::Infinity>();
    EXPECT_NEAR(nq, 1.0, 1e-8);
    EXPECT_NEAR((qry.psi * r.witness_delta).lpNorm<Eigen::Infinity>(), r.kappa, 1e-8);
}

}  // namespace

TEST(ConeMembership, Examples) {
    EXPECT_TRUE(cone_membership(Eigen::Vector3d(1, -2, 0), {0, 1}, 0.01));
    EXPECT_FALSE(cone_membership(Eigen::Vector2d(0, 1), {0}, 5.0));
    EXPECT_TRUE(cone_membership(Eigen::Vector2d(1, 2), {0}, 2.0));
    EXPECT_THROW(cone_membership(Eigen::Vector2d(1, 2), {2}, 1.0), DomainError);
}

TEST(Kappa, IdentityGramOneNorm) {
    for (double u : {1.0, 2.0, 3.0}) {
        const auto qry = query(MatrixXd::Identity(4, 4), 1, u, NormQ::one);
        const auto r = kappa_bruteforce(qry);
        EXPECT_NEAR(r.kappa, 1.0 / (1.0 + u), 1e-9) << u;
        expect_witness_valid(qry, r);
    }
}

TEST(Kappa, IdentityGramInfNormMatchesSampler) {
    std::mt19937_64 rng(17);
    for (double u : {0.5, 1.0, 4.0}) {
        const auto qry = query(MatrixXd::Identity(5, 5), 1, u, NormQ::infinity);
        const auto r = kappa_bruteforce(qry);
        const double sampled = kappa_by_sampling(qry, 20000, rng);
        EXPECT_NEAR(r.kappa, sampled, 0.02 * sampled) << u;
        expect_witness_valid(qry, r);
    }
}

TEST(Kappa, ZeroGram) {
    const auto r = kappa_bruteforce(query(MatrixXd::Zero(3, 3), 2, 1.0, NormQ::one));
    EXPECT_EQ(r.kappa, 0.0);
}

TEST(Kappa, Validation) {
    EXPECT_THROW(kappa_bruteforce(query(MatrixXd::Identity(13, 13), 1, 1.0, NormQ::one)), DomainError);
    MatrixXd asym = MatrixXd::Identity(3, 3);
    asym(0, 1) = 0.5;
    EXPECT_THROW(kappa_bruteforce(query(asym, 1, 1.0, NormQ::one)), DomainError);
    EXPECT_THROW(kappa_bruteforce(query(MatrixXd::Identity(3, 3), 4, 1.0, NormQ::one)), DomainError);
    EXPECT_THROW(kappa_bruteforce(query(MatrixXd::Identity(3, 3), 1, 0.0, NormQ::one)), DomainError);
    EXPECT_THROW(kappa_bruteforce(query(MatrixXd::Identity(3, 2), 1, 1.0, NormQ::one)), Error);
}

TEST(CheckKappaCondition, Examples) {
    const auto id = query(MatrixXd::Identity(4, 4), 1, 3.0, NormQ::one);
    EXPECT_TRUE(check_kappa_condition(id, 0.25 * (1 - 1e-9)));
    EXPECT_FALSE(check_kappa_condition(id, 0.26));
    EXPECT_FALSE(check_kappa_condition(query(MatrixXd::Zero(3, 3), 1, 1.0, NormQ::one), 1e-6));
    EXPECT_TRUE(check_kappa_condition(id, 1e-300));
    EXPECT_THROW(check_kappa_condition(id, 0.0), DomainError);
    // s^(-1/q): s = 2, q = 1 halves the bound, q = inf leaves it alone
    const auto two = query(MatrixXd::Identity(4, 4), 2, 1.0, NormQ::one);
    const double k = kappa_bruteforce(two).kappa;
    EXPECT_TRUE(check_kappa_condition(two, 2.0 * k * (1 - 1e-9)));
    EXPECT_FALSE(check_kappa_condition(two, 2.0 * k * 1.01));
}

TEST(SensitivityProperties, MatchesLiteralVertexEnumeration) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        const Index p = 3 + trial % 2;
        const MatrixXd psi = random_gram(rng, p);
        const Index s = 1 + trial % 2;
        const double u = 0.5 + trial % 3;
        for (NormQ q : {NormQ::one, NormQ::infinity}) {
            const auto qry = query(psi, s, u, q);
            const auto r = kappa_bruteforce(qry);
            EXPECT_NEAR(r.kappa, kappa_by_vertices(qry), 1e-8) << "trial " << trial;
            expect_witness_valid(qry, r);
        }
    }
}

TEST(SensitivityProperties, SamplerIsAnUpperBound) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd psi = random_gram(rng, 5);
        for (NormQ q : {NormQ::one, NormQ::infinity}) {
            const auto qry = query(psi, 2, 1.5, q);
            EXPECT_LE(kappa_bruteforce(qry).kappa, kappa_by_sampling(qry, 3000, rng) + 1e-9);
        }
    }
}

TEST(SensitivityProperties, MonotoneInSAndU) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const MatrixXd psi = random_gram(rng, 5);
        for (NormQ q : {NormQ::one, NormQ::infinity}) {
            double prev = oracle::kInf;
            for (Index s = 1; s <= 3; ++s) {
                const double k = kappa_bruteforce(query(psi, s, 1.0, q)).kappa;
                EXPECT_LE(k, prev + 1e-9);
                prev = k;
            }
            prev = oracle::kInf;
            for (double u : {0.5, 1.0, 2.0, 4.0}) {
                const double k = kappa_bruteforce(query(psi, 2, u, q)).kappa;
                EXPECT_LE(k, prev + 1e-9);
                prev = k;
            }
        }
    }
}

TEST(SensitivityProperties, ScaleCovariance) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd psi = random_gram(rng, 4);
        const double c = 0.1 + 3.0 * trial / 10.0;
        for (NormQ q : {NormQ::one, NormQ::infinity}) {
            const double k1 = kappa_bruteforce(query(psi, 2, 1.5, q)).kappa;
            const double kc = kappa_bruteforce(query(c * psi, 2, 1.5, q)).kappa;
            EXPECT_NEAR(kc, c * k1, 1e-9);
        }
    }
}

TEST(SensitivityProperties, InfinityNormDominatesOneNorm) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 15; ++trial) {
        const MatrixXd psi = random_gram(rng, 4 + trial % 2);
        const Index s = 1 + trial % 3;
        const double u = 0.5 + trial % 4;
        EXPECT_GE(kappa_bruteforce(query(psi, s, u, NormQ::infinity)).kappa,
                  kappa_bruteforce(query(psi, s, u, NormQ::one)).kappa - 1e-9);
    }
}

TEST(SensitivityProperties, ParallelMatchesSerial) {
    std::mt19937_64 rng(43);
    const MatrixXd psi = random_gram(rng, 7);
    const auto qry = query(psi, 2, 1.0, NormQ::infinity);
    const auto a = kappa_bruteforce(qry, 1), b = kappa_bruteforce(qry, 4);
    EXPECT_EQ(a.kappa, b.kappa);
    EXPECT_EQ(a.witness_j, b.witness_j);
}
