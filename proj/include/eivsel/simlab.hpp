#ifndef EIVSEL_SIMLAB_HPP_
#define EIVSEL_SIMLAB_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eivsel/estimators.hpp"
#include "eivsel/model.hpp"
#include "eivsel/selector.hpp"

namespace eiv {

/// Gaussian errors-in-variables design: x_i ~ N(0, Sigma) with
/// Sigma_ij = rho^|i-j|, w_i ~ N(0, sigma_star_sq I), xi_i ~ N(0, sigma^2),
/// y = X theta_star + xi and Z = X + W.
struct SimConfig {
    Index n = 300;
    Index p = 10;
    int replications = 100;
    double rho = 0.25;
    double sigma = 0.128;
    double sigma_star_sq = 0.5;
    VectorXd theta_star;
    double eps = 0.05;
    std::uint64_t master_seed = 20240101;

    /// 1.25 on the first five coordinates (fewer when p < 5), zero elsewhere.
    static VectorXd default_theta_star(Index p);

    /// Throws SpecError listing every violated field.
    void validate() const;
};

/// Toeplitz covariance rho^|i-j|.
MatrixXd toeplitz_covariance(Index p, double rho);

/// Replication `rep` of the design. The random stream depends only on
/// (master_seed, rep), so any subset of replications can be drawn in any order.
EivDataset generate_dataset(const SimConfig& cfg, int rep);

struct Metrics {
    double bias = 0.0;
    double rmse = 0.0;
    double pr = 0.0;
};

/// bias = mean |D|_2, rmse = sqrt(mean |D|_2^2), pr = sqrt(mean |X D|_2^2 / n)
/// with D = theta_hat - theta_star. Throws DomainError on empty or misaligned input.
Metrics compute_metrics(const std::vector<VectorXd>& theta_hats, const VectorXd& theta_star,
                        const std::vector<MatrixXd>& designs);

struct MetricsRow {
    std::string estimator_label;
    double lambda = 0.0;
    double nu = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    double pr = 0.0;
    int r_effective = 0;
    /// Mean |theta_hat|_1 over the optimal fits.
    double mean_l1 = 0.0;
    /// Fits that threw instead of returning a Solution.
    int errors = 0;
};

/// Fits every spec on every replication (the same dataset is shared by all
/// specs of one replication) and aggregates one row per spec. Non-optimal
/// fits are left out of the metrics. Replications run on `jobs` threads;
/// the result does not depend on `jobs`.
std::vector<MetricsRow> run_experiment(const SimConfig& cfg, const std::vector<EstimatorSpec>& specs,
                                       const SolverOptions& opts = {}, int jobs = 1);

/// Whether (theta*, |theta*|_2, |theta*|_inf) satisfies the program within tol.
bool truth_feasible(const SelectorProgram& prog, const VectorXd& theta_star, double tol = 0.0);

struct Lemma4Check {
    bool cone = false;  ///< |D_{J^c}|_1 <= (1 + lambda + nu) |D_J|_1 + slack, J = supp(theta*)
    bool c2 = false;    ///< t - |theta*|_2 <= ((1+nu)/lambda)|D|_1 and u - |theta*|_inf <= ((1+lambda)/nu)|D|_1, + slack
};

Lemma4Check lemma4_check(const Solution& sol, const VectorXd& theta_star, double lambda, double nu,
                         double slack);

/// Tallies over replications of the Lemma 3 feasibility event and, on that
/// event, the Lemma 4 inequalities for the compensated l1l2linf selector.
struct LemmaStudy {
    int replications = 0;
    int feasible = 0;
    int fitted = 0;  ///< optimal fits among the feasible replications
    int cone_ok = 0;
    int c2_ok = 0;
};

/// Uses the lemma-based tuning on every replication: m2 from the drawn X,
/// default tail constants, D-hat = sigma_star_sq I, b from simulation_tuning,
/// mu = delta1' + delta4', tau = delta2 + delta3, beta = b + delta5.
LemmaStudy run_lemma_study(const SimConfig& cfg, double lambda, double nu,
                           const SolverOptions& opts = {}, int jobs = 1);

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Exceptions from
/// body are rethrown on the caller (the first one by index).
void parallel_for(int count, int jobs, const std::function<void(int)>& body);

}  // namespace eiv

#endif  // EIVSEL_SIMLAB_HPP_
