#include "eivsel/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eivsel/errors.hpp"
#include "eivsel/format.hpp"

namespace eiv {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

void check_args(Index n, Index p, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1), got " + fmt_g(eps));
    if (n < 1) throw DomainError("n must be >= 1");
    if (p < 1) throw DomainError("p must be >= 1");
}

}  // namespace

NoiseConstants NoiseConstants::with_defaults(double sigma, double sigma_star, double delta_bar,
                                             double b_eps) {
    NoiseConstants nc;
    nc.sigma = sigma;
    nc.sigma_star = sigma_star;
    const double scale0 = std::max(sigma * sigma_star, kTiny);
    const double scale2 = std::max(sigma_star * sigma_star, kTiny);
    nc.gamma0 = scale0;
    nc.t0 = 1.0 / scale0;
    nc.gamma2 = scale2;
    nc.t2 = 1.0 / scale2;
    nc.delta_bar = delta_bar;
    nc.b_eps = b_eps;
    return nc;
}

void NoiseConstants::validate() const {
    const double all[] = {sigma, sigma_star, gamma0, t0, gamma2, t2, delta_bar, b_eps};
    for (double v : all)
        if (!std::isfinite(v)) throw DomainError("noise constants must be finite");
    if (sigma < 0 || sigma_star < 0 || delta_bar < 0 || b_eps < 0)
        throw DomainError("noise levels must be nonnegative");
    if (!(gamma0 > 0 && t0 > 0 && gamma2 > 0 && t2 > 0))
        throw DomainError("tail constants gamma0, t0, gamma2, t2 must be strictly positive");
}

double compute_m2(const MatrixXd& x) {
    if (x.rows() == 0 || x.cols() == 0) throw DomainError("compute_m2: empty matrix");
    if (!x.allFinite()) throw DomainError("compute_m2: non-finite entry");
    return x.colwise().squaredNorm().maxCoeff() / static_cast<double>(x.rows());
}

double tail_threshold(double gamma, double t, double n, double count, double eps) {
    if (count <= 0.0) return 0.0;
    const double lg = std::log(count / eps);
    return std::max(gamma * std::sqrt(2.0 * lg / n), 2.0 * lg / (t * n));
}

Lemma1Thresholds lemma1_thresholds(const NoiseConstants& nc, double m2, Index n, Index p,
                                   double eps) {
    check_args(n, p, eps);
    nc.validate();
    const double nn = static_cast<double>(n);
    const double pp = static_cast<double>(p);
    Lemma1Thresholds out;
    out.delta1 = nc.sigma_star * std::sqrt(2.0 * m2 * std::log(2.0 * pp * pp / eps) / nn);
    out.delta2 = nc.sigma * std::sqrt(2.0 * m2 * std::log(2.0 * pp / eps) / nn);
    out.delta3 = tail_threshold(nc.gamma0, nc.t0, nn, 2.0 * pp, eps);
    out.delta5 = out.delta3;
    out.delta4 = tail_threshold(nc.gamma0, nc.t0, nn, pp * (pp - 1.0), eps);
    return out;
}

Lemma2Thresholds lemma2_thresholds(const NoiseConstants& nc, double m2, Index n, Index p,
                                   double eps) {
    check_args(n, p, eps);
    nc.validate();
    const double nn = static_cast<double>(n);
    const double pp = static_cast<double>(p);
    Lemma2Thresholds out;
    out.delta1_prime = nc.sigma_star * std::sqrt(2.0 * m2 * std::log(2.0 * pp / eps) / nn);
    out.delta4_prime = tail_threshold(nc.gamma2, nc.t2, nn, 2.0 * pp, eps);
    return out;
}

Tuning tuning_from_lemmas(const ThresholdSet& ts, double b_eps) {
    return {ts.delta1_prime + ts.delta4_prime, ts.delta2 + ts.delta3, b_eps + ts.delta5};
}

ThresholdSet compute_thresholds(const NoiseConstants& nc, double m2, Index n, Index p,
                                double eps) {
    const Lemma1Thresholds l1 = lemma1_thresholds(nc, m2, n, p, eps);
    const Lemma2Thresholds l2 = lemma2_thresholds(nc, m2, n, p, eps);
    ThresholdSet ts;
    ts.m2 = m2;
    ts.eps = eps;
    ts.delta1 = l1.delta1;
    ts.delta2 = l1.delta2;
    ts.delta3 = l1.delta3;
    ts.delta4 = l1.delta4;
    ts.delta5 = l1.delta5;
    ts.delta1_prime = l2.delta1_prime;
    ts.delta4_prime = l2.delta4_prime;
    const Tuning tn = tuning_from_lemmas(ts, nc.b_eps);
    ts.mu = tn.mu;
    ts.tau = tn.tau;
    ts.beta = tn.beta;
    return ts;
}

std::string ThresholdSet::to_key_value() const {
    std::ostringstream os;
    os << "m2 = " << fmt_g(m2) << '\n'
       << "eps = " << fmt_g(eps) << '\n'
       << "delta1 = " << fmt_g(delta1) << '\n'
       << "delta2 = " << fmt_g(delta2) << '\n'
       << "delta3 = " << fmt_g(delta3) << '\n'
       << "delta4 = " << fmt_g(delta4) << '\n'
       << "delta5 = " << fmt_g(delta5) << '\n'
       << "delta1_prime = " << fmt_g(delta1_prime) << '\n'
       << "delta4_prime = " << fmt_g(delta4_prime) << '\n'
       << "mu = " << fmt_g(mu) << '\n'
       << "tau = " << fmt_g(tau) << '\n'
       << "beta = " << fmt_g(beta) << '\n';
    return os.str();
}

SimulationTuning simulation_tuning(double sigma, double sigma_star_sq, Index n, Index p,
                                   double eps) {
    check_args(n, p, eps);
    const double root = std::sqrt(std::log(static_cast<double>(p) / eps) / static_cast<double>(n));
    return {sigma * root, sigma_star_sq * root};
}

}  // namespace eiv
