#ifndef EIVSEL_THRESHOLDS_HPP_
#define EIVSEL_THRESHOLDS_HPP_

#include <string>

#include "eivsel/model.hpp"

namespace eiv {

/// Noise levels and the tail constants that turn them into thresholds.
///
/// `sigma` is the sub-gaussian parameter of the response noise, `sigma_star`
/// that of the design-noise rows. (gamma0, t0) enter the sub-exponential
/// tail delta_bar(eps, N); (gamma2, t2) enter delta4'. `delta_bar` bounds
/// |W|_inf almost surely and `b_eps` is the accuracy of the variance
/// estimates on the diagonal of D-hat.
struct NoiseConstants {
    double sigma = 0.0;
    double sigma_star = 0.0;
    double gamma0 = 1.0;
    double t0 = 1.0;
    double gamma2 = 1.0;
    double t2 = 1.0;
    double delta_bar = 0.0;
    double b_eps = 0.0;

    /// gamma0 = sigma*sigma_star, t0 = 1/(sigma*sigma_star), gamma2 = sigma_star^2,
    /// t2 = 1/sigma_star^2, each product floored at the smallest normal double
    /// so the constants stay strictly positive.
    static NoiseConstants with_defaults(double sigma, double sigma_star, double delta_bar = 0.0,
                                        double b_eps = 0.0);

    /// Throws DomainError on non-finite fields or non-positive tail constants.
    void validate() const;
};

struct Lemma1Thresholds {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    double delta4 = 0.0;
    double delta5 = 0.0;
};

struct Lemma2Thresholds {
    double delta1_prime = 0.0;
    double delta4_prime = 0.0;
};

struct Tuning {
    double mu = 0.0;
    double tau = 0.0;
    double beta = 0.0;
};

/// Every threshold for one (design, n, p, eps) together with the tuning
/// parameters derived from them.
struct ThresholdSet {
    double m2 = 0.0;
    double eps = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    double delta4 = 0.0;
    double delta5 = 0.0;
    double delta1_prime = 0.0;
    double delta4_prime = 0.0;
    double mu = 0.0;
    double tau = 0.0;
    double beta = 0.0;

    /// Flat "key = value" lines, one per field.
    std::string to_key_value() const;
};

/// max_j (1/n) sum_i X_ij^2. Throws DomainError on an empty or non-finite matrix.
double compute_m2(const MatrixXd& x);

/// max(gamma*sqrt(2 log(N/eps)/n), 2 log(N/eps)/(t n)); zero when N == 0.
double tail_threshold(double gamma, double t, double n, double count, double eps);

Lemma1Thresholds lemma1_thresholds(const NoiseConstants& nc, double m2, Index n, Index p,
                                   double eps);

Lemma2Thresholds lemma2_thresholds(const NoiseConstants& nc, double m2, Index n, Index p,
                                   double eps);

/// mu = delta1' + delta4', tau = delta2 + delta3, beta = b_eps + delta5.
Tuning tuning_from_lemmas(const ThresholdSet& partial, double b_eps);

/// Fills every field of a ThresholdSet from the two lemmas.
ThresholdSet compute_thresholds(const NoiseConstants& nc, double m2, Index n, Index p,
                                double eps);

struct SimulationTuning {
    double tau = 0.0;
    double b_eps = 0.0;
};

/// tau = sigma*sqrt(log(p/eps)/n), b = sigma_star_sq*sqrt(log(p/eps)/n).
SimulationTuning simulation_tuning(double sigma, double sigma_star_sq, Index n, Index p,
                                   double eps);

}  // namespace eiv

#endif  // EIVSEL_THRESHOLDS_HPP_
