#include "eivsel/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "eivsel/errors.hpp"
#include "eivsel/thresholds.hpp"

namespace eiv {

VectorXd SimConfig::default_theta_star(Index p) {
    VectorXd th = VectorXd::Zero(p);
    th.head(std::min<Index>(5, p)).setConstant(1.25);
    return th;
}

void SimConfig::validate() const {
    std::string bad;
    auto check = [&](bool ok, const char* msg) {
        if (!ok) bad += std::string(bad.empty() ? "" : "; ") + msg;
    };
    check(n >= 1, "n must be >= 1");
    check(p >= 1, "p must be >= 1");
    check(replications >= 1, "R must be >= 1");
    check(std::isfinite(rho) && rho > -1.0 && rho < 1.0, "rho must lie in (-1,1)");
    check(std::isfinite(sigma) && sigma >= 0.0, "sigma must be finite and >= 0");
    check(std::isfinite(sigma_star_sq) && sigma_star_sq >= 0.0, "sigma_star_sq must be finite and >= 0");
    check(eps > 0.0 && eps < 1.0, "eps must lie in (0,1)");
    check(theta_star.size() == p, "theta_star must have length p");
    check(theta_star.allFinite(), "theta_star must be finite");
    if (!bad.empty()) throw SpecError("invalid simulation config: " + bad);
}

MatrixXd toeplitz_covariance(Index p, double rho) {
    MatrixXd s(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    return s;
}

EivDataset generate_dataset(const SimConfig& cfg, int rep) {
    cfg.validate();
    const Index n = cfg.n;
    const Index p = cfg.p;
    const Eigen::LLT<MatrixXd> chol(toeplitz_covariance(p, cfg.rho));
    if (chol.info() != Eigen::Success) throw DomainError("Toeplitz covariance is not positive definite");

    const auto seed = cfg.master_seed;
    const auto r = static_cast<std::uint64_t>(rep);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
    std::mt19937_64 eng(seq);
    std::normal_distribution<double> gauss;

    MatrixXd g(n, p);
    MatrixXd w(n, p);
    VectorXd xi(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) g(i, j) = gauss(eng);
        for (Index j = 0; j < p; ++j) w(i, j) = gauss(eng);
        xi(i) = gauss(eng);
    }

    EivDataset d;
    MatrixXd x = g * chol.matrixL().transpose();
    d.z = x + std::sqrt(cfg.sigma_star_sq) * w;
    d.y = x * cfg.theta_star + cfg.sigma * xi;
    d.x = std::move(x);
    d.theta_star = cfg.theta_star;
    return d;
}

namespace {

// Per-fit error summary; metrics are sums of these in replication order.
struct ErrorTerms {
    double l2 = 0.0;
    double pred_sq = 0.0;
    double l1_hat = 0.0;
};

ErrorTerms error_terms(const VectorXd& theta_hat, const VectorXd& theta_star, const MatrixXd& x) {
    const VectorXd delta = theta_hat - theta_star;
    return {delta.norm(), (x * delta).squaredNorm() / static_cast<double>(x.rows()),
            theta_hat.lpNorm<1>()};
}

Metrics aggregate(const std::vector<ErrorTerms>& terms) {
    Metrics m;
    double sq = 0.0;
    double pred = 0.0;
    for (const ErrorTerms& t : terms) {
        m.bias += t.l2;
        sq += t.l2 * t.l2;
        pred += t.pred_sq;
    }
    const double k = static_cast<double>(terms.size());
    m.bias /= k;
    m.rmse = std::sqrt(sq / k);
    m.pr = std::sqrt(pred / k);
    return m;
}

}  // namespace

Metrics compute_metrics(const std::vector<VectorXd>& theta_hats, const VectorXd& theta_star,
                        const std::vector<MatrixXd>& designs) {
    if (theta_hats.empty()) throw DomainError("compute_metrics: no solutions");
    if (designs.size() != theta_hats.size())
        throw DomainError("compute_metrics: one design per solution is required");
    std::vector<ErrorTerms> terms;
    terms.reserve(theta_hats.size());
    for (std::size_t i = 0; i < theta_hats.size(); ++i) {
        if (theta_hats[i].size() != theta_star.size() || designs[i].cols() != theta_star.size())
            throw DomainError("compute_metrics: dimension mismatch at solution " + std::to_string(i));
        terms.push_back(error_terms(theta_hats[i], theta_star, designs[i]));
    }
    return aggregate(terms);
}

void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(count, 0)));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int threads = std::clamp(jobs, 1, std::max(count, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<MetricsRow> run_experiment(const SimConfig& cfg, const std::vector<EstimatorSpec>& specs,
                                       const SolverOptions& opts, int jobs) {
    cfg.validate();
    opts.validate();
    for (const EstimatorSpec& s : specs) s.validate(cfg.p);

    struct Fit {
        bool ok = false;
        bool error = false;
        ErrorTerms terms;
    };
    const int reps = cfg.replications;
    const std::size_t ns = specs.size();
    std::vector<Fit> fits(static_cast<std::size_t>(reps) * ns);

    parallel_for(reps, jobs, [&](int rep) {
        const EivDataset d = generate_dataset(cfg, rep);
        for (std::size_t k = 0; k < ns; ++k) {
            Fit& f = fits[static_cast<std::size_t>(rep) * ns + k];
            try {
                const Solution sol = estimate(specs[k], d, opts);
                if (sol.optimal()) {
                    f.ok = true;
                    f.terms = error_terms(sol.theta_hat, cfg.theta_star, *d.x);
                }
            } catch (const Error&) {
                f.error = true;
            }
        }
    });

    std::vector<MetricsRow> rows;
    for (std::size_t k = 0; k < ns; ++k) {
        MetricsRow row;
        row.estimator_label = specs[k].label.empty() ? default_label(specs[k]) : specs[k].label;
        row.lambda = specs[k].lambda;
        row.nu = specs[k].nu;
        std::vector<ErrorTerms> terms;
        for (int rep = 0; rep < reps; ++rep) {
            const Fit& f = fits[static_cast<std::size_t>(rep) * ns + k];
            if (f.error) ++row.errors;
            if (f.ok) terms.push_back(f.terms);
        }
        row.r_effective = static_cast<int>(terms.size());
        if (!terms.empty()) {
            const Metrics m = aggregate(terms);
            row.bias = m.bias;
            row.rmse = m.rmse;
            row.pr = m.pr;
            double l1 = 0.0;
            for (const ErrorTerms& t : terms) l1 += t.l1_hat;
            row.mean_l1 = l1 / static_cast<double>(terms.size());
        } else {
            row.bias = row.rmse = row.pr = row.mean_l1 = std::nan("");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

bool truth_feasible(const SelectorProgram& prog, const VectorXd& theta_star, double tol) {
    return feasibility_residual(prog, theta_star, theta_star.norm(),
                                theta_star.lpNorm<Eigen::Infinity>()) <= tol;
}

Lemma4Check lemma4_check(const Solution& sol, const VectorXd& theta_star, double lambda, double nu,
                         double slack) {
    const VectorXd delta = sol.theta_hat - theta_star;
    double on = 0.0;
    double off = 0.0;
    for (Index j = 0; j < delta.size(); ++j)
        (theta_star(j) != 0.0 ? on : off) += std::abs(delta(j));
    const double l1 = on + off;
    Lemma4Check out;
    out.cone = off <= (1.0 + lambda + nu) * on + slack;
    out.c2 = sol.t_hat - theta_star.norm() <= (1.0 + nu) / lambda * l1 + slack &&
             sol.u_hat - theta_star.lpNorm<Eigen::Infinity>() <= (1.0 + lambda) / nu * l1 + slack;
    return out;
}

LemmaStudy run_lemma_study(const SimConfig& cfg, double lambda, double nu, const SolverOptions& opts,
                           int jobs) {
    cfg.validate();
    opts.validate();
    const int reps = cfg.replications;
    struct Outcome {
        bool feasible = false, fitted = false, cone = false, c2 = false;
    };
    std::vector<Outcome> out(static_cast<std::size_t>(reps));
    const double slack = 10.0 * opts.eps_feas * static_cast<double>(cfg.p);
    const SimulationTuning st = simulation_tuning(cfg.sigma, cfg.sigma_star_sq, cfg.n, cfg.p, cfg.eps);

    parallel_for(reps, jobs, [&](int rep) {
        const EivDataset d = generate_dataset(cfg, rep);
        const NoiseConstants nc = NoiseConstants::with_defaults(cfg.sigma, std::sqrt(cfg.sigma_star_sq),
                                                                0.0, st.b_eps);
        const ThresholdSet ts = compute_thresholds(nc, compute_m2(*d.x), cfg.n, cfg.p, cfg.eps);
        EstimatorSpec spec;
        spec.kind = {EstimatorTag::l1l2linf_cmu, false};
        spec.lambda = lambda;
        spec.nu = nu;
        spec.mu = ts.mu;
        spec.tau = ts.tau;
        spec.beta = ts.beta;
        spec.d_hat = VectorXd::Constant(cfg.p, cfg.sigma_star_sq);
        const SelectorProgram prog = build_program(spec, d);
        Outcome& o = out[static_cast<std::size_t>(rep)];
        o.feasible = truth_feasible(prog, cfg.theta_star);
        if (!o.feasible) return;
        const Solution sol = solve(prog, opts);
        if (!sol.optimal()) return;
        o.fitted = true;
        const Lemma4Check c = lemma4_check(sol, cfg.theta_star, lambda, nu, slack);
        o.cone = c.cone;
        o.c2 = c.c2;
    });

    LemmaStudy s;
    s.replications = reps;
    for (const Outcome& o : out) {
        s.feasible += o.feasible;
        s.fitted += o.fitted;
        s.cone_ok += o.cone;
        s.c2_ok += o.c2;
    }
    return s;
}

}  // namespace eiv
