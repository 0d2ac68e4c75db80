#include "eivsel/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "eivsel/errors.hpp"
#include "eivsel/format.hpp"

namespace eiv {

namespace pt = boost::property_tree;

namespace bundled {
// Defined in the generated bundled_configs.cpp.
extern const std::map<std::string_view, std::string_view>& table();
}  // namespace bundled

std::string TuningValue::canonical() const { return is_literal() ? fmt_exact(value) : rule; }

namespace {

// Collects every problem before throwing, so one run reports them all.
class Issues {
 public:
    void add(const std::string& where, const std::string& what) { list_.push_back(where + ": " + what); }
    void throw_if_any() const {
        if (list_.empty()) return;
        std::string msg = "invalid config:";
        for (const auto& s : list_) msg += "\n  " + s;
        throw SpecError(msg);
    }

 private:
    std::vector<std::string> list_;
};

std::optional<double> to_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || b == e) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> to_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<bool> to_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    return std::nullopt;
}

// Typed accessors over one section; unknown keys are reported at the end.
class Section {
 public:
    Section(const pt::ptree& tree, std::string name, Issues& issues)
        : tree_(tree), name_(std::move(name)), issues_(issues) {}

    std::optional<std::string> raw(const std::string& key) {
        seen_.insert(key);
        const auto it = tree_.find(key);
        if (it == tree_.not_found()) return std::nullopt;
        return it->second.data();
    }

    template <class T, class Conv>
    void get(const std::string& key, T& out, Conv conv, const char* expect) {
        if (const auto s = raw(key)) {
            if (const auto v = conv(*s))
                out = static_cast<T>(*v);
            else
                issues_.add(where(key), std::string("expected ") + expect + ", got '" + *s + "'");
        }
    }
    void number(const std::string& key, double& out) { get(key, out, to_double, "a number"); }
    void integer(const std::string& key, Index& out) {
        get(key, out, [](const std::string& s) -> std::optional<double> {
            const auto v = to_double(s);
            if (!v || std::floor(*v) != *v) return std::nullopt;
            return v;
        }, "an integer");
    }
    void tuning(const std::string& key, TuningValue& out, std::initializer_list<const char*> rules) {
        const auto s = raw(key);
        if (!s) return;
        for (const char* r : rules)
            if (*s == r) {
                out = TuningValue::keyword(r);
                return;
            }
        if (const auto v = to_double(*s)) {
            out = TuningValue::literal(*v);
            return;
        }
        std::string expect = "a number";
        for (const char* r : rules) expect += std::string(" or '") + r + "'";
        issues_.add(where(key), "expected " + expect + ", got '" + *s + "'");
    }
    std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

    void report_unknown() {
        for (const auto& kv : tree_)
            if (!seen_.count(kv.first)) issues_.add(where(kv.first), "unknown key");
    }

 private:
    const pt::ptree& tree_;
    std::string name_;
    Issues& issues_;
    std::set<std::string> seen_;
};

void validate_tuning(const TuningValue& v, const std::string& where, Issues& issues) {
    if (v.is_literal() && !(std::isfinite(v.value) && v.value >= 0.0))
        issues.add(where, "must be finite and >= 0");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(e.message(), e.line());
    }

    ExperimentConfig cfg;
    Issues issues;
    const pt::ptree empty;
    std::map<long, const pt::ptree*> est_sections;
    for (const auto& [name, sub] : tree) {
        if (name == "sim" || name == "tuning" || name == "solver") continue;
        if (name.rfind("estimators.", 0) == 0) {
            const auto idx = to_double(name.substr(11));
            if (!idx || std::floor(*idx) != *idx || *idx < 0)
                issues.add("[" + name + "]", "section index must be a nonnegative integer");
            else
                est_sections[static_cast<long>(*idx)] = &sub;
            continue;
        }
        issues.add("[" + name + "]", sub.empty() ? "key outside any section" : "unknown section");
    }

    auto section = [&](const char* name) -> const pt::ptree& {
        const auto it = tree.find(name);
        return it == tree.not_found() ? empty : it->second;
    };

    {
        Section s(section("sim"), "sim", issues);
        SimConfig& sim = cfg.sim;
        s.integer("n", sim.n);
        s.integer("p", sim.p);
        Index reps = sim.replications;
        s.integer("R", reps);
        sim.replications = static_cast<int>(reps);
        s.number("rho", sim.rho);
        s.number("sigma", sim.sigma);
        s.number("sigma_star_sq", sim.sigma_star_sq);
        s.number("eps", sim.eps);
        s.get("seed", sim.master_seed, to_u64, "an unsigned 64-bit integer");
        sim.theta_star = SimConfig::default_theta_star(std::max<Index>(sim.p, 1));
        if (const auto th = s.raw("theta_star"); th && *th != "default") {
            std::vector<double> vals;
            std::stringstream ss(*th);
            std::string item;
            bool ok = true;
            while (std::getline(ss, item, ',')) {
                item.erase(0, item.find_first_not_of(" \t"));
                item.erase(item.find_last_not_of(" \t") + 1);
                const auto v = to_double(item);
                ok = ok && v.has_value();
                if (v) vals.push_back(*v);
            }
            if (!ok) issues.add(s.where("theta_star"), "expected 'default' or a comma-separated list of numbers");
            sim.theta_star = Eigen::Map<VectorXd>(vals.data(), static_cast<Index>(vals.size()));
        }
        s.report_unknown();
        if (sim.n < 1) issues.add(s.where("n"), "must be >= 1");
        if (sim.p < 1) issues.add(s.where("p"), "must be >= 1");
        if (sim.replications < 1) issues.add(s.where("R"), "must be >= 1");
        if (!(sim.rho > -1.0 && sim.rho < 1.0)) issues.add(s.where("rho"), "must lie in (-1,1)");
        if (!(sim.sigma >= 0.0 && std::isfinite(sim.sigma))) issues.add(s.where("sigma"), "must be finite and >= 0");
        if (!(sim.sigma_star_sq >= 0.0 && std::isfinite(sim.sigma_star_sq)))
            issues.add(s.where("sigma_star_sq"), "must be finite and >= 0");
        if (!(sim.eps > 0.0 && sim.eps < 1.0)) issues.add(s.where("eps"), "must lie in (0,1)");
        if (sim.theta_star.size() != sim.p) issues.add(s.where("theta_star"), "must have p entries");
    }
    {
        Section s(section("tuning"), "tuning", issues);
        s.tuning("tau", cfg.tau, {"simulation", "lemma"});
        s.tuning("b_eps", cfg.b_eps, {"simulation"});
        s.tuning("beta", cfg.beta, {"auto"});
        s.tuning("mu", cfg.mu, {"lemma"});
        s.tuning("mu_single", cfg.mu_single, {"auto"});
        s.tuning("d_hat", cfg.d_hat, {"exact"});
        s.number("delta_bar", cfg.delta_bar);
        s.report_unknown();
        validate_tuning(cfg.tau, s.where("tau"), issues);
        validate_tuning(cfg.b_eps, s.where("b_eps"), issues);
        validate_tuning(cfg.beta, s.where("beta"), issues);
        validate_tuning(cfg.mu, s.where("mu"), issues);
        validate_tuning(cfg.mu_single, s.where("mu_single"), issues);
        validate_tuning(cfg.d_hat, s.where("d_hat"), issues);
        validate_tuning(TuningValue::literal(cfg.delta_bar), s.where("delta_bar"), issues);
    }
    {
        Section s(section("solver"), "solver", issues);
        s.number("eps_feas", cfg.solver.eps_feas);
        s.number("eps_opt", cfg.solver.eps_opt);
        Index iters = cfg.solver.max_iterations;
        s.integer("max_iterations", iters);
        cfg.solver.max_iterations = static_cast<int>(iters);
        s.report_unknown();
        if (!(cfg.solver.eps_feas > 0.0)) issues.add(s.where("eps_feas"), "must be > 0");
        if (!(cfg.solver.eps_opt > 0.0)) issues.add(s.where("eps_opt"), "must be > 0");
        if (cfg.solver.max_iterations < 1) issues.add(s.where("max_iterations"), "must be >= 1");
    }
    for (const auto& [idx, sub] : est_sections) {
        const std::string name = "estimators." + std::to_string(idx);
        Section s(*sub, name, issues);
        EstimatorEntry e;
        if (const auto k = s.raw("kind")) {
            try {
                e.kind.tag = parse_estimator_tag(*k);
            } catch (const SpecError& err) {
                issues.add(s.where("kind"), err.what());
            }
        } else {
            issues.add(s.where("kind"), "missing");
        }
        s.get("safeguards", e.kind.safeguards, to_bool, "a boolean");
        if (const auto d = s.raw("design")) {
            if (*d == "x")
                e.design = DesignSource::use_x;
            else if (*d != "z")
                issues.add(s.where("design"), "expected 'z' or 'x', got '" + *d + "'");
        }
        s.number("lambda", e.lambda);
        s.number("nu", e.nu);
        for (auto [key, slot] : {std::pair{"mu", &e.mu}, std::pair{"tau", &e.tau}, std::pair{"beta", &e.beta}}) {
            double v = 0.0;
            if (s.raw(key)) {
                s.number(key, v);
                *slot = v;
            }
        }
        if (const auto l = s.raw("label")) e.label = *l;
        s.report_unknown();
        if (!(e.lambda >= 0.0 && std::isfinite(e.lambda))) issues.add(s.where("lambda"), "must be finite and >= 0");
        if (!(e.nu >= 0.0 && std::isfinite(e.nu))) issues.add(s.where("nu"), "must be finite and >= 0");
        const bool l12 = e.kind.tag == EstimatorTag::l1l2linf_mu || e.kind.tag == EstimatorTag::l1l2linf_cmu;
        if (l12 && !(e.lambda > 0.0 && e.nu > 0.0)) issues.add(s.where("lambda/nu"), "must both be > 0");
        if (e.kind.safeguards && !e.kind.has_aux())
            issues.add(s.where("safeguards"), "only conic and l1l2linf estimators take safeguards");
        if (e.design == DesignSource::use_x && e.kind.tag != EstimatorTag::dantzig)
            issues.add(s.where("design"), "only dantzig may use the true design");
        cfg.estimators.push_back(std::move(e));
    }
    if (cfg.estimators.empty()) issues.add("[estimators.N]", "at least one estimator section is required");
    issues.throw_if_any();
    return cfg;
}

ExperimentConfig load_config(const std::string& name) {
    if (std::filesystem::exists(name)) {
        std::ifstream in(name);
        if (!in) throw ParseError("cannot open '" + name + "'");
        return parse_config(in);
    }
    if (name.find('/') == std::string::npos) {
        if (const auto text = bundled_config(name)) {
            std::istringstream in{std::string(*text)};
            return parse_config(in);
        }
    }
    std::string known;
    for (const auto& n : bundled_config_names()) known += " " + n;
    throw ParseError("no config file '" + name + "' (bundled:" + known + ")");
}

void apply_env_overrides(ExperimentConfig& cfg) {
    const char* s = std::getenv("EIV_SEED");
    if (!s) return;
    const auto v = to_u64(s);
    if (!v) throw SpecError(std::string("EIV_SEED must be an unsigned 64-bit integer, got '") + s + "'");
    cfg.sim.master_seed = *v;
}

std::string canonical_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    const SimConfig& s = cfg.sim;
    os << "[sim]\nn=" << s.n << "\np=" << s.p << "\nR=" << s.replications << "\nrho=" << fmt_exact(s.rho)
       << "\nsigma=" << fmt_exact(s.sigma) << "\nsigma_star_sq=" << fmt_exact(s.sigma_star_sq)
       << "\neps=" << fmt_exact(s.eps) << "\nseed=" << s.master_seed << "\ntheta_star=";
    for (Index j = 0; j < s.theta_star.size(); ++j) os << (j ? "," : "") << fmt_exact(s.theta_star(j));
    os << "\n[tuning]\ntau=" << cfg.tau.canonical() << "\nb_eps=" << cfg.b_eps.canonical()
       << "\nbeta=" << cfg.beta.canonical() << "\nmu=" << cfg.mu.canonical()
       << "\nmu_single=" << cfg.mu_single.canonical() << "\nd_hat=" << cfg.d_hat.canonical()
       << "\ndelta_bar=" << fmt_exact(cfg.delta_bar) << "\n[solver]\neps_feas=" << fmt_exact(cfg.solver.eps_feas)
       << "\neps_opt=" << fmt_exact(cfg.solver.eps_opt) << "\nmax_iterations=" << cfg.solver.max_iterations
       << '\n';
    for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
        const EstimatorEntry& e = cfg.estimators[i];
        os << "[estimators." << i << "]\nkind=" << to_string(e.kind.tag)
           << "\nsafeguards=" << (e.kind.safeguards ? "true" : "false")
           << "\ndesign=" << (e.design == DesignSource::use_x ? "x" : "z") << "\nlambda=" << fmt_exact(e.lambda)
           << "\nnu=" << fmt_exact(e.nu);
        if (e.mu) os << "\nmu=" << fmt_exact(*e.mu);
        if (e.tau) os << "\ntau=" << fmt_exact(*e.tau);
        if (e.beta) os << "\nbeta=" << fmt_exact(*e.beta);
        os << "\nlabel=" << e.label << '\n';
    }
    return os.str();
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) { return sha256_hex(canonical_text(cfg)); }

ResolvedTuning resolve_tuning(const ExperimentConfig& cfg) {
    const SimConfig& s = cfg.sim;
    ResolvedTuning t;
    const SimulationTuning st = simulation_tuning(s.sigma, s.sigma_star_sq, s.n, s.p, s.eps);
    t.b_eps = cfg.b_eps.is_literal() ? cfg.b_eps.value : st.b_eps;
    t.delta_bar = cfg.delta_bar;
    const NoiseConstants nc = NoiseConstants::with_defaults(s.sigma, std::sqrt(s.sigma_star_sq), t.delta_bar, t.b_eps);
    // Population m2: every column of X has unit variance.
    t.thresholds = compute_thresholds(nc, toeplitz_covariance(1, s.rho)(0, 0), s.n, s.p, s.eps);
    const ThresholdSet& ts = t.thresholds;
    if (cfg.tau.is_literal())
        t.tau = cfg.tau.value;
    else
        t.tau = cfg.tau.rule == "lemma" ? ts.tau : st.tau;
    t.beta = cfg.beta.is_literal() ? cfg.beta.value : t.b_eps + ts.delta5;
    t.mu = cfg.mu.is_literal() ? cfg.mu.value : ts.mu;
    t.mu_single = cfg.mu_single.is_literal() ? cfg.mu_single.value : t.mu + t.beta;
    t.d_hat = cfg.d_hat.is_literal() ? cfg.d_hat.value : s.sigma_star_sq;
    return t;
}

std::string ResolvedTuning::to_key_value() const {
    std::ostringstream os;
    os << "tau = " << fmt_g(tau) << '\n'
       << "b_eps = " << fmt_g(b_eps) << '\n'
       << "beta = " << fmt_g(beta) << '\n'
       << "mu = " << fmt_g(mu) << '\n'
       << "mu_single = " << fmt_g(mu_single) << '\n'
       << "d_hat = " << fmt_g(d_hat) << '\n'
       << "delta_bar = " << fmt_g(delta_bar) << '\n';
    return os.str();
}

std::vector<EstimatorSpec> build_specs(const ExperimentConfig& cfg, const ResolvedTuning& t) {
    std::vector<EstimatorSpec> specs;
    for (const EstimatorEntry& e : cfg.estimators) {
        EstimatorSpec s;
        s.kind = e.kind;
        s.design_source = e.design;
        s.lambda = e.lambda;
        s.nu = e.nu;
        const bool single = e.kind.tag == EstimatorTag::mu || e.kind.tag == EstimatorTag::compensated_mu ||
                            e.kind.tag == EstimatorTag::conic;
        s.mu = e.mu.value_or(single ? t.mu_single : t.mu);
        s.tau = e.tau.value_or(t.tau);
        s.beta = e.beta.value_or(t.beta);
        s.delta_bar = t.delta_bar;
        s.d_hat = VectorXd::Constant(cfg.sim.p, t.d_hat);
        s.label = e.label;
        specs.push_back(std::move(s));
    }
    return specs;
}

std::vector<std::string> bundled_config_names() {
    std::vector<std::string> out;
    for (const auto& kv : bundled::table()) out.emplace_back(kv.first);
    return out;
}

std::optional<std::string_view> bundled_config(std::string_view name) {
    const auto& t = bundled::table();
    const auto it = t.find(name);
    if (it == t.end()) return std::nullopt;
    return it->second;
}

}  // namespace eiv
