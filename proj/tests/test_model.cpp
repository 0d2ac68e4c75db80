#include <random>

#include <gtest/gtest.h>

#include "eivsel/errors.hpp"
#include "eivsel/model.hpp"

using namespace eiv;

TEST(ValidateDataset, AcceptsConsistentShapes) {
    EivDataset d;
    d.y = VectorXd::Ones(2);
    d.z = MatrixXd::Identity(2, 2);
    d.x = MatrixXd::Identity(2, 2);
    EXPECT_NO_THROW(validate_dataset(d));
}

TEST(ValidateDataset, RejectsResponseLengthMismatch) {
    EivDataset d;
    d.y = VectorXd::Ones(3);
    d.z = MatrixXd::Ones(2, 2);
    try {
        validate_dataset(d);
        FAIL() << "expected DimensionError";
    } catch (const DimensionError& e) {
        EXPECT_EQ(e.field(), "y");
    }
}

TEST(ValidateDataset, RejectsTrueDesignShapeMismatch) {
    EivDataset d;
    d.y = VectorXd::Ones(2);
    d.z = MatrixXd::Ones(2, 2);
    d.x = MatrixXd::Ones(2, 3);
    try {
        validate_dataset(d);
        FAIL() << "expected DimensionError";
    } catch (const DimensionError& e) {
        EXPECT_EQ(e.field(), "x");
    }
}

TEST(ValidateDataset, ReportsNonFiniteLocation) {
    EivDataset d;
    d.y = VectorXd::Ones(2);
    d.z = MatrixXd::Ones(2, 2);
    d.z(1, 1) = std::nan("");
    try {
        validate_dataset(d);
        FAIL() << "expected NonFiniteError";
    } catch (const NonFiniteError& e) {
        EXPECT_EQ(e.field(), "z");
        EXPECT_EQ(e.row(), 1u);
        EXPECT_EQ(e.col(), 1u);
    }
}

TEST(ValidateDataset, RejectsEmpty) {
    EivDataset d;
    d.y = VectorXd(0);
    d.z = MatrixXd(0, 0);
    EXPECT_THROW(validate_dataset(d), DimensionError);
}

TEST(ThetaSet, BoxRejectsInvertedBounds) {
    EXPECT_THROW(ThetaSet::box(VectorXd::Constant(2, 1.0), VectorXd::Zero(2)), SpecError);
    EXPECT_THROW(ThetaSet::box(VectorXd::Zero(2), VectorXd::Zero(3)), Error);
}

TEST(ThetaSet, AllContainsEverything) {
    const ThetaSet all = ThetaSet::all();
    EXPECT_TRUE(all.contains(VectorXd::Constant(3, 1e300)));
    EXPECT_EQ(all.violation(VectorXd::Constant(3, -5.0)), 0.0);
}

TEST(ThetaSet, ProjectionLandsInsideProperty) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Index p = 1 + trial % 5;
        VectorXd lo(p), hi(p), pt(p);
        for (Index j = 0; j < p; ++j) {
            const double a = g(rng), b = g(rng);
            lo(j) = std::min(a, b);
            hi(j) = std::max(a, b);
            pt(j) = 2.0 * g(rng);
        }
        if (trial % 7 == 0) hi(0) = std::numeric_limits<double>::infinity();
        const ThetaSet box = ThetaSet::box(lo, hi);
        const VectorXd proj = box.project(pt);
        EXPECT_TRUE(box.contains(proj));
        if (box.contains(pt)) {
            EXPECT_EQ(proj, pt);
        }
    }
}

TEST(EstimatorTags, RoundTripAndAliases) {
    for (EstimatorTag t : {EstimatorTag::dantzig, EstimatorTag::mu, EstimatorTag::compensated_mu,
                           EstimatorTag::conic, EstimatorTag::l1l2linf_mu, EstimatorTag::l1l2linf_cmu})
        EXPECT_EQ(parse_estimator_tag(to_string(t)), t);
    EXPECT_EQ(parse_estimator_tag("l1l2linf_cmu"), EstimatorTag::l1l2linf_cmu);
    EXPECT_EQ(parse_estimator_tag("compensated-mu"), EstimatorTag::compensated_mu);
    EXPECT_THROW(parse_estimator_tag("lasso"), SpecError);
}

TEST(EstimatorKind, AuxiliaryVariables) {
    EXPECT_TRUE((EstimatorKind{EstimatorTag::conic, false}).has_aux());
    EXPECT_TRUE((EstimatorKind{EstimatorTag::l1l2linf_mu, false}).has_aux());
    EXPECT_FALSE((EstimatorKind{EstimatorTag::compensated_mu, false}).has_aux());
}
