#ifndef EIVSEL_CONFIG_HPP_
#define EIVSEL_CONFIG_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eivsel/estimators.hpp"
#include "eivsel/selector.hpp"
#include "eivsel/simlab.hpp"
#include "eivsel/thresholds.hpp"

namespace eiv {

/// A tuning entry: either a literal number or a rule keyword.
struct TuningValue {
    std::string rule;  ///< empty for a literal
    double value = 0.0;

    static TuningValue literal(double v) { return {"", v}; }
    static TuningValue keyword(std::string k) { return {std::move(k), 0.0}; }
    bool is_literal() const { return rule.empty(); }
    std::string canonical() const;
};

struct EstimatorEntry {
    EstimatorKind kind;
    DesignSource design = DesignSource::use_z;
    double lambda = 0.0;
    double nu = 0.0;
    std::optional<double> mu;
    std::optional<double> tau;
    std::optional<double> beta;
    std::string label;
};

/// Experiment description read from an INI file:
///
///   [sim]     n, p, R, rho, sigma, sigma_star_sq, eps, seed, theta_star
///   [tuning]  tau      = simulation | lemma | <number>
///             b_eps    = simulation | <number>
///             beta     = auto (b_eps + delta5) | <number>
///             mu       = lemma (delta1' + delta4') | <number>
///             mu_single = auto (mu + beta) | <number>   slack of mu, cmu and conic
///             d_hat    = exact (sigma_star_sq) | <number>
///             delta_bar = <number>
///   [solver]  eps_feas, eps_opt, max_iterations
///   [estimators.N]  kind, lambda, nu, safeguards, design (z|x), label, mu, tau, beta
///
/// Lemma thresholds use the population m2 = max_j Sigma_jj = 1 and the
/// default tail constants.
struct ExperimentConfig {
    SimConfig sim;
    TuningValue tau = TuningValue::keyword("simulation");
    TuningValue b_eps = TuningValue::keyword("simulation");
    TuningValue beta = TuningValue::keyword("auto");
    TuningValue mu = TuningValue::keyword("lemma");
    TuningValue mu_single = TuningValue::keyword("auto");
    TuningValue d_hat = TuningValue::keyword("exact");
    double delta_bar = 0.0;
    SolverOptions solver;
    std::vector<EstimatorEntry> estimators;
};

struct ResolvedTuning {
    ThresholdSet thresholds;
    double tau = 0.0;
    double b_eps = 0.0;
    double beta = 0.0;
    double mu = 0.0;
    double mu_single = 0.0;
    double d_hat = 0.0;
    double delta_bar = 0.0;

    std::string to_key_value() const;
};

/// Throws ParseError for malformed INI and SpecError listing every invalid field.
ExperimentConfig parse_config(std::istream& in);

/// Reads a file, or a bundled config when `name` has no path separator and
/// no file of that name exists.
ExperimentConfig load_config(const std::string& name);

/// EIV_SEED, when set, replaces sim.seed. Throws SpecError on a malformed value.
void apply_env_overrides(ExperimentConfig& cfg);

/// Normalized text of the parsed config; equal for semantically equal files.
std::string canonical_text(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);
std::string sha256_hex(std::string_view data);

ResolvedTuning resolve_tuning(const ExperimentConfig& cfg);
std::vector<EstimatorSpec> build_specs(const ExperimentConfig& cfg, const ResolvedTuning& t);

std::vector<std::string> bundled_config_names();
std::optional<std::string_view> bundled_config(std::string_view name);

}  // namespace eiv

#endif  // EIVSEL_CONFIG_HPP_
