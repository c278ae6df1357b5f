#include "wlogit_cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "wlogit/error.hpp"

namespace wlogit::cli {

namespace {

class Section {
public:
    Section(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

    template <class T>
    void read(const std::string& key, T& out) {
        seen_.insert(key);
        const toml::node* n = t_.get(key);
        if (!n) return;
        if constexpr (std::is_same_v<T, bool>) {
            if (!n->is_boolean()) fail(key, "expected a boolean");
            out = n->as_boolean()->get();
        } else if constexpr (std::is_integral_v<T>) {
            if (!n->is_integer()) fail(key, "expected an integer");
            const auto v = n->as_integer()->get();
            if (v < 0) fail(key, "must be non-negative");
            out = static_cast<T>(v);
        } else if constexpr (std::is_floating_point_v<T>) {
            if (n->is_integer()) {
                out = static_cast<T>(n->as_integer()->get());
            } else if (n->is_floating_point()) {
                out = static_cast<T>(n->as_floating_point()->get());
            } else {
                fail(key, "expected a number");
            }
        } else {
            if (!n->is_string()) fail(key, "expected a string");
            out = n->as_string()->get();
        }
    }

    const toml::node* node(const std::string& key) {
        seen_.insert(key);
        return t_.get(key);
    }

    void reject_unknown() const {
        for (const auto& [k, v] : t_) {
            if (!seen_.count(std::string(k.str()))) {
                throw DataError(path_ + ": unknown key '" + std::string(k.str()) + "'");
            }
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const {
        throw DataError(path_ + "." + key + ": " + why);
    }

    const std::string& path() const { return path_; }

private:
    const toml::table& t_;
    std::string path_;
    std::set<std::string> seen_;
};

SigmaKind parse_sigma(const std::string& s, const Section& sec) {
    if (s == "identity") return SigmaKind::identity;
    if (s == "blockwise") return SigmaKind::blockwise;
    sec.fail("sigma", "expected \"identity\" or \"blockwise\", got \"" + s + "\"");
}

CovarianceMethod parse_covariance(const std::string& s, const Section& sec) {
    if (s == "shrinkage") return CovarianceMethod::shrinkage;
    if (s == "sample_loaded") return CovarianceMethod::sample_loaded;
    if (s == "adaptive") return CovarianceMethod::adaptive;
    sec.fail("covariance", "expected shrinkage, sample_loaded or adaptive");
}

void read_solver(Section& sec, SolverOptions& s) {
    sec.read("maxit", s.maxit);
    sec.read("max_sweeps", s.max_sweeps);
    sec.read("tol", s.tol);
    sec.read("cd_tol", s.cd_tol);
}

void read_wlogit(const toml::table& t, const std::string& path, FitConfig& f) {
    Section sec(t, path);
    sec.read("gamma_k", f.cutoff.gamma_k);
    sec.read("gamma_m", f.cutoff.gamma_m);
    if (const auto* g = sec.node("gamma")) {
        if (!g->is_number()) sec.fail("gamma", "expected a number");
        f.cutoff.gamma_k = f.cutoff.gamma_m = g->value<double>().value();
    }
    std::string rule;
    sec.read("cutoff_rule", rule);
    if (rule == "literal") {
        f.cutoff.rule = CutoffRule::literal;
    } else if (!rule.empty() && rule != "nll_ratio") {
        sec.fail("cutoff_rule", "expected nll_ratio or literal");
    }
    Eigen::Index cap = f.cutoff.cap;
    sec.read("cap", cap);
    f.cutoff.cap = cap;
    sec.read("signed_correction", f.cutoff.signed_correction);
    sec.read("n_lambda", f.n_lambda);
    sec.read("lambda_ratio", f.lambda_ratio);
    sec.read("standardize", f.standardize);
    sec.read("lambda_ridge", f.whitening.lambda_ridge);
    std::string h;
    sec.read("h_convention", h);
    if (!h.empty()) {
        try {
            f.whitening.h_convention = parse_h_convention(h);
        } catch (const InvalidArgument& e) {
            sec.fail("h_convention", e.what());
        }
    }
    std::string cov;
    sec.read("covariance", cov);
    if (!cov.empty()) f.whitening.covariance = parse_covariance(cov, sec);
    if (const auto* r = sec.node("shrinkage_rho")) {
        if (!r->is_number()) sec.fail("shrinkage_rho", "expected a number");
        f.whitening.shrinkage_rho = r->value<double>().value();
    }
    sec.read("diagonal_loading", f.whitening.diagonal_loading);
    sec.read("adaptive_threshold", f.whitening.adaptive_threshold);
    read_solver(sec, f.solver);
    sec.reject_unknown();
}

void read_lasso(const toml::table& t, const std::string& path, LassoCvOptions& l) {
    Section sec(t, path);
    sec.read("folds", l.folds);
    sec.read("n_lambda", l.n_lambda);
    sec.read("lambda_ratio", l.lambda_ratio);
    sec.read("standardize", l.standardize);
    read_solver(sec, l.solver);
    sec.reject_unknown();
}

ScenarioConfig read_scenario(const toml::table& t, const std::string& path) {
    ScenarioConfig c;
    Section sec(t, path);
    sec.read("name", c.name);
    sec.read("p", c.p);
    sec.read("n_train", c.n_train);
    sec.read("n_test", c.n_test);
    sec.read("d", c.d);
    sec.read("effect_size", c.effect_size);
    sec.read("replications", c.replications);
    sec.read("seed", c.seed);

    std::string sigma = "identity";
    sec.read("sigma", sigma);
    c.sigma.kind = parse_sigma(sigma, sec);
    if (const auto* a = sec.node("alpha")) {
        const auto* arr = a->as_array();
        if (!arr || arr->size() != 3) sec.fail("alpha", "expected an array of three numbers");
        double v[3];
        for (std::size_t i = 0; i < 3; ++i) {
            const auto x = (*arr)[i].value<double>();
            if (!x) sec.fail("alpha", "expected an array of three numbers");
            v[i] = *x;
        }
        c.sigma.alpha1 = v[0];
        c.sigma.alpha2 = v[1];
        c.sigma.alpha3 = v[2];
    }

    std::string balance = "balanced";
    sec.read("balance", balance);
    Eigen::Index n_pos = 0;
    sec.read("n_pos", n_pos);
    if (balance == "balanced") {
        c.balance = Balance::balanced();
    } else if (balance == "unconstrained") {
        c.balance = Balance::unconstrained();
    } else if (balance == "imbalanced") {
        if (n_pos <= 0) sec.fail("n_pos", "imbalanced balance needs n_pos > 0");
        c.balance = Balance::imbalanced(n_pos);
    } else {
        sec.fail("balance", "expected balanced, imbalanced or unconstrained");
    }

    if (const auto* w = sec.node("wlogit")) {
        if (!w->is_table()) sec.fail("wlogit", "expected a table");
        read_wlogit(*w->as_table(), path + ".wlogit", c.wlogit);
    }
    if (const auto* l = sec.node("lasso")) {
        if (!l->is_table()) sec.fail("lasso", "expected a table");
        read_lasso(*l->as_table(), path + ".lasso", c.lasso);
    }
    sec.reject_unknown();

    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw DataError(path + ": " + e.what());
    }
    return c;
}

}  // namespace

std::vector<ScenarioConfig> parse_simulation_config(const std::string& toml_text, const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
           << e.description();
        throw DataError(os.str());
    }
    for (const auto& [k, v] : root) {
        if (k.str() != "scenario") throw DataError(source + ": unknown key '" + std::string(k.str()) + "'");
    }
    const auto* arr = root.get_as<toml::array>("scenario");
    if (!arr || arr->empty()) throw DataError(source + ": no [[scenario]] tables");

    std::vector<ScenarioConfig> out;
    std::set<std::string> names;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto* t = (*arr)[i].as_table();
        const std::string path = "scenario[" + std::to_string(i) + "]";
        if (!t) throw DataError(source + ": " + path + " is not a table");
        out.push_back(read_scenario(*t, path));
        if (!names.insert(out.back().name).second) {
            throw DataError(source + ": duplicate scenario name '" + out.back().name + "'");
        }
    }
    return out;
}

std::vector<ScenarioConfig> load_simulation_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_simulation_config(ss.str(), path.string());
}

}  // namespace wlogit::cli
