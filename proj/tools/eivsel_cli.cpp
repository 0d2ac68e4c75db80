#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "eivsel/config.hpp"
#include "eivsel/csv_io.hpp"
#include "eivsel/errors.hpp"
#include "eivsel/estimators.hpp"
#include "eivsel/format.hpp"
#include "eivsel/sensitivity.hpp"
#include "eivsel/simlab.hpp"

namespace {

using namespace eiv;

constexpr const char* kVersion = "0.1.0";

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    return out;
}

// A scalar broadcast to length p, a comma-separated list, or a CSV file.
VectorXd vector_arg(const std::string& arg, Index p, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(arg, &used);
        if (used == arg.size()) return VectorXd::Constant(p, v);
    } catch (const std::exception&) {
    }
    MatrixXd m;
    if (std::filesystem::exists(arg)) {
        m = read_csv_file(arg, CsvHeader::optional).values;
    } else {
        std::istringstream in(arg);
        m = read_csv(in, CsvHeader::none).values;
    }
    if (m.size() != p)
        throw SpecError(what + " needs " + std::to_string(p) + " values, got " + std::to_string(m.size()));
    return Eigen::Map<const VectorXd>(m.data(), m.size());
}

struct FitArgs {
    std::string data;
    std::string x_data;
    std::string estimator;
    std::string design = "z";
    double lambda = 0.0, nu = 0.0, mu = 0.0, tau = 0.0, beta = 0.0, delta_bar = 0.0;
    std::string dhat;
    bool safeguards = false;
    std::string lower, upper;
    std::string out, coef_out, dump;
    SolverOptions opts;
};

int cmd_fit(const FitArgs& a) {
    const EivDataset d = read_dataset(a.data, a.x_data.empty() ? std::nullopt : std::optional(a.x_data));
    const Index p = d.p();
    EstimatorSpec spec;
    spec.kind = {parse_estimator_tag(a.estimator), a.safeguards};
    if (a.design != "z" && a.design != "x") throw SpecError("--design must be 'z' or 'x'");
    spec.design_source = a.design == "x" ? DesignSource::use_x : DesignSource::use_z;
    spec.lambda = a.lambda;
    spec.nu = a.nu;
    spec.mu = a.mu;
    spec.tau = a.tau;
    spec.beta = a.beta;
    spec.delta_bar = a.delta_bar;
    if (!a.dhat.empty()) spec.d_hat = vector_arg(a.dhat, p, "--dhat");
    if (!a.lower.empty() || !a.upper.empty()) {
        const double inf = std::numeric_limits<double>::infinity();
        spec.theta_set = ThetaSet::box(a.lower.empty() ? VectorXd::Constant(p, -inf) : vector_arg(a.lower, p, "--theta-lower"),
                                       a.upper.empty() ? VectorXd::Constant(p, inf) : vector_arg(a.upper, p, "--theta-upper"));
    }
    const SelectorProgram prog = build_program(spec, d);
    const Solution sol = solve(prog, a.opts);
    if (!a.dump.empty()) {
        auto out = open_out(a.dump);
        dump_program(out, prog, &sol);
    }

    std::ostringstream rep;
    rep << "estimator = " << to_string(spec.kind.tag) << '\n'
        << "safeguards = " << (spec.kind.safeguards ? "true" : "false") << '\n'
        << "n = " << d.n() << '\n'
        << "p = " << p << '\n'
        << "status = " << to_string(sol.status) << '\n'
        << "objective = " << fmt_g(sol.objective) << '\n'
        << "t_hat = " << fmt_g(sol.t_hat) << '\n'
        << "u_hat = " << fmt_g(sol.u_hat) << '\n'
        << "w_hat = " << fmt_g(sol.w_hat) << '\n'
        << "feasibility_residual = " << fmt_g(sol.feasibility_residual) << '\n'
        << "optimality_gap = " << fmt_g(sol.optimality_gap) << '\n'
        << "iterations = " << sol.iterations << '\n'
        << "theta_hat =";
    for (Index j = 0; j < p; ++j) rep << (j ? "," : " ") << fmt_g(sol.theta_hat(j));
    rep << '\n';
    if (a.out.empty()) {
        std::cout << rep.str();
    } else {
        open_out(a.out) << rep.str();
    }
    const std::string coef = !a.coef_out.empty() ? a.coef_out : a.out.empty() ? "" : a.out + ".coef.csv";
    if (!coef.empty()) {
        auto out = open_out(coef);
        out << "index,theta_hat\n";
        for (Index j = 0; j < p; ++j) out << j + 1 << ',' << fmt_g(sol.theta_hat(j)) << '\n';
    }
    switch (sol.status) {
        case SolveStatus::optimal: return 0;
        case SolveStatus::infeasible: return 2;
        default:
            std::cerr << "error: solver ended with status " << to_string(sol.status) << '\n';
            return 1;
    }
}

struct SimArgs {
    std::string config;
    std::string out;
    std::string manifest;
    int jobs = 1;
    int replications = 0;
};

int cmd_simulate(const SimArgs& a) {
    ExperimentConfig cfg = load_config(a.config);
    apply_env_overrides(cfg);
    if (a.replications > 0) cfg.sim.replications = a.replications;
    const std::string hash = config_hash(cfg);
    const ResolvedTuning tuning = resolve_tuning(cfg);
    const auto specs = build_specs(cfg, tuning);
    const auto rows = run_experiment(cfg.sim, specs, cfg.solver, a.jobs);

    auto out = open_out(a.out);
    out << "estimator_label,lambda,nu,bias,rmse,pr,R_effective,seed,config_hash\n";
    for (const MetricsRow& r : rows) {
        out << csv_field(r.estimator_label) << ',' << fmt_g(r.lambda) << ',' << fmt_g(r.nu) << ','
            << fmt_g(r.bias) << ',' << fmt_g(r.rmse) << ',' << fmt_g(r.pr) << ',' << r.r_effective << ','
            << cfg.sim.master_seed << ',' << hash << '\n';
    }

    const std::string manifest = a.manifest.empty() ? a.out + ".manifest" : a.manifest;
    auto mf = open_out(manifest);
    mf << "config_hash = " << hash << '\n'
       << "tool_version = " << kVersion << '\n'
       << "master_seed = " << cfg.sim.master_seed << '\n'
       << "timestamp = " << utc_timestamp() << '\n'
       << "output_paths = " << a.out << ',' << manifest << '\n'
       << "config = " << a.config << '\n'
       << "replications = " << cfg.sim.replications << '\n';
    mf << "[tuning]\n" << tuning.to_key_value() << "[thresholds]\n" << tuning.thresholds.to_key_value();
    mf << "[fits]\n";
    for (const MetricsRow& r : rows)
        mf << r.estimator_label << " = R_effective " << r.r_effective << ", errors " << r.errors << '\n';
    mf << "[canonical_config]\n" << canonical_text(cfg);

    for (const MetricsRow& r : rows)
        std::cout << r.estimator_label << ": bias " << fmt_g(r.bias) << " rmse " << fmt_g(r.rmse) << " pr "
                  << fmt_g(r.pr) << " (R_effective " << r.r_effective << ")\n";
    return 0;
}

struct GenArgs {
    std::string config;
    int rep = 0;
    std::string out;
    std::string x_out;
};

int cmd_generate(const GenArgs& a) {
    ExperimentConfig cfg = load_config(a.config);
    apply_env_overrides(cfg);
    const EivDataset d = generate_dataset(cfg.sim, a.rep);
    auto out = open_out(a.out);
    if (a.x_out.empty()) {
        write_dataset(out, d);
    } else {
        auto xo = open_out(a.x_out);
        write_dataset(out, d, &xo);
    }
    return 0;
}

struct SensArgs {
    std::string gram;
    Index s = 1;
    double u = 1.0;
    std::string q = "1";
    double check_c = 0.0;
    bool has_check = false;
    int jobs = 1;
};

int cmd_sensitivity(const SensArgs& a) {
    SensitivityQuery qry;
    qry.psi = read_csv_file(a.gram, CsvHeader::optional).values;
    qry.s = a.s;
    qry.u = a.u;
    if (a.q == "1" || a.q == "one")
        qry.q = NormQ::one;
    else if (a.q == "inf" || a.q == "infinity")
        qry.q = NormQ::infinity;
    else
        throw SpecError("--q must be 1 or inf");
    const SensitivityResult r = kappa_bruteforce(qry, a.jobs);
    std::cout << "kappa = " << fmt_g(r.kappa) << '\n' << "witness_J =";
    for (std::size_t i = 0; i < r.witness_j.size(); ++i) std::cout << (i ? "," : " ") << r.witness_j[i] + 1;
    std::cout << "\nwitness_delta =";
    for (Index j = 0; j < r.witness_delta.size(); ++j) std::cout << (j ? "," : " ") << fmt_g(r.witness_delta(j));
    std::cout << '\n';
    if (a.has_check) {
        if (!(a.check_c > 0.0)) throw DomainError("--check-c must be > 0");
        const double factor = qry.q == NormQ::one ? 1.0 / static_cast<double>(qry.s) : 1.0;
        const double bound = a.check_c * factor;
        std::cout << "bound = " << fmt_g(bound) << '\n'
                  << "condition = " << (r.kappa >= bound ? "satisfied" : "violated") << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse regression with errors in variables: fit, simulate, sensitivity"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Fit one estimator on a CSV dataset");
    f->add_option("--data", fit.data, "CSV with header; y then Z columns")->required();
    f->add_option("--x", fit.x_data, "CSV with the true design X (for --design x)");
    f->add_option("--estimator", fit.estimator, "dantzig, mu, cmu, conic, l1l2linf-mu, l1l2linf-cmu")->required();
    f->add_option("--design", fit.design, "z or x (dantzig only)");
    f->add_option("--lambda", fit.lambda);
    f->add_option("--nu", fit.nu);
    f->add_option("--mu", fit.mu);
    f->add_option("--tau", fit.tau);
    f->add_option("--beta", fit.beta);
    f->add_option("--delta-bar", fit.delta_bar);
    f->add_option("--dhat", fit.dhat, "scalar, comma list or CSV file with the diagonal of D-hat");
    f->add_flag("--safeguards", fit.safeguards);
    f->add_option("--theta-lower", fit.lower, "scalar, comma list or CSV file");
    f->add_option("--theta-upper", fit.upper, "scalar, comma list or CSV file");
    f->add_option("--out", fit.out, "report path (default stdout); coefficients go to <out>.coef.csv");
    f->add_option("--coef-out", fit.coef_out, "coefficient CSV path");
    f->add_option("--dump-program", fit.dump, "write the solved program as text");
    f->add_option("--eps-feas", fit.opts.eps_feas);
    f->add_option("--eps-opt", fit.opts.eps_opt);
    f->add_option("--max-iterations", fit.opts.max_iterations);

    SimArgs sim;
    auto* s = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a config");
    s->add_option("--config", sim.config, "INI file or bundled name (table1_p10, ...)")->required();
    s->add_option("--out", sim.out, "result CSV")->required();
    s->add_option("--manifest", sim.manifest, "run manifest (default <out>.manifest)");
    s->add_option("--jobs", sim.jobs, "worker threads")->check(CLI::PositiveNumber);
    s->add_option("--replications", sim.replications, "override R")->check(CLI::PositiveNumber);

    GenArgs gen;
    auto* g = app.add_subcommand("generate", "Write one simulated replication as CSV");
    g->add_option("--config", gen.config)->required();
    g->add_option("--rep", gen.rep)->check(CLI::NonNegativeNumber);
    g->add_option("--out", gen.out)->required();
    g->add_option("--x-out", gen.x_out);

    SensArgs sens;
    auto* k = app.add_subcommand("sensitivity", "Exact l_q-sensitivity by enumeration (p <= 12)");
    k->add_option("--gram", sens.gram, "CSV matrix psi")->required();
    k->add_option("--s", sens.s)->required();
    k->add_option("--u", sens.u)->required();
    k->add_option("--q", sens.q, "1 or inf");
    auto* c = k->add_option("--check-c", sens.check_c, "report whether kappa >= c s^(-1/q)");
    k->add_option("--jobs", sens.jobs)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    sens.has_check = c->count() > 0;

    try {
        if (*f) return cmd_fit(fit);
        if (*s) return cmd_simulate(sim);
        if (*g) return cmd_generate(gen);
        if (*k) return cmd_sensitivity(sens);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
