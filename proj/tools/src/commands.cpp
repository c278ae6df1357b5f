#include "wlogit_cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "wlogit/diagnostics.hpp"
#include "wlogit/error.hpp"
#include "wlogit/model_io.hpp"
#include "wlogit/pipeline.hpp"
#include "wlogit/random.hpp"
#include "wlogit/simbench.hpp"
#include "wlogit_cli/config.hpp"
#include "wlogit_cli/csv.hpp"

#ifndef WLOGIT_VERSION
#define WLOGIT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace wlogit::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

template <class T>
std::string join(const std::vector<T>& v, const char* sep = ",") {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
    return os.str();
}

/// Tokens of a comma / whitespace separated list.
std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// Feature indices from 0-based integers or column names.
std::vector<Eigen::Index> resolve_features(const std::vector<std::string>& items,
                                           const std::vector<std::string>& names) {
    std::vector<Eigen::Index> out;
    for (const auto& item : items) {
        const auto it = std::find(names.begin(), names.end(), item);
        if (it != names.end()) {
            out.push_back(it - names.begin());
            continue;
        }
        Eigen::Index j = -1;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), j);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
            throw DataError("unknown feature '" + item + "'");
        }
        if (j < 0 || j >= static_cast<Eigen::Index>(names.size())) {
            throw DataError("feature index " + item + " out of range [0, " + std::to_string(names.size()) + ")");
        }
        out.push_back(j);
    }
    return out;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct FitArgs {
    std::string data, label, out;
    std::optional<double> gamma, gamma_k, gamma_m;
    int n_lambda = 30;
    std::string h_convention = "fisher";
    bool no_standardize = false;
};

FitConfig fit_config(const FitArgs& a) {
    FitConfig c;
    if (a.gamma) c.cutoff.gamma_k = c.cutoff.gamma_m = *a.gamma;
    if (a.gamma_k) c.cutoff.gamma_k = *a.gamma_k;
    if (a.gamma_m) c.cutoff.gamma_m = *a.gamma_m;
    c.n_lambda = a.n_lambda;
    c.whitening.h_convention = parse_h_convention(a.h_convention);
    c.standardize = !a.no_standardize;
    return c;
}

void add_fit_flags(CLI::App* cmd, FitArgs& a) {
    cmd->add_option("--gamma", a.gamma, "knee level for both K and M")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--gamma-k", a.gamma_k, "knee level for the Top-K correction")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--gamma-m", a.gamma_m, "knee level for the Top-M threshold")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--n-lambda", a.n_lambda, "length of the lambda grid")->check(CLI::PositiveNumber);
    cmd->add_option("--h-convention", a.h_convention, "fisher or literal")
        ->check(CLI::IsMember({"fisher", "literal"}));
    cmd->add_flag("--no-standardize", a.no_standardize, "fit on the raw feature scale");
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const CsvDataset csv = read_csv_dataset(a.data, a.label);
    WLogitModel model = fit(csv.data, fit_config(a));
    model.feature_names = csv.feature_names;
    if (!a.out.empty()) save_model(model, a.out);

    std::vector<std::string> names;
    for (auto j : model.support) names.push_back(csv.feature_names[static_cast<std::size_t>(j)]);
    out << "lambda_hat=" << format_double(model.lambda_hat) << "\n"
        << "k_hat=" << model.k_hat << "\n"
        << "m_hat=" << model.m_hat << "\n"
        << "support_size=" << model.support.size() << "\n"
        << "support=" << join(model.support) << "\n"
        << "support_names=" << join(names) << "\n";
    return exit_ok;
}

/// Columns of `table` in the order of the model's feature names.
Matrix align_features(const WLogitModel& model, const CsvTable& table) {
    if (model.feature_names.empty()) {
        if (table.values.cols() != model.p()) {
            throw DimensionMismatch("model has " + std::to_string(model.p()) + " features, data has " +
                                    std::to_string(table.values.cols()));
        }
        return table.values;
    }
    std::vector<Eigen::Index> cols;
    for (const auto& name : model.feature_names) {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) throw DataError("feature '" + name + "' missing from data");
        cols.push_back(it - table.header.begin());
    }
    return table.values(Eigen::all, cols);
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::optional<std::string>& label,
                const std::string& out_path, double threshold, std::ostream& out) {
    const WLogitModel model = load_model(model_path);
    const CsvTable table = read_csv_features(data, label);
    const Prediction pr = predict(model, align_features(model, table), threshold);
    std::string csv = "probability,label\n";
    for (Eigen::Index i = 0; i < pr.probabilities.size(); ++i) {
        csv += format_double(pr.probabilities(i)) + "," + std::to_string(pr.labels(i)) + "\n";
    }
    if (out_path.empty()) {
        out << csv;
    } else {
        write_file_atomic(out_path, csv);
        out << "samples=" << pr.probabilities.size() << "\n";
    }
    return exit_ok;
}

int cmd_simulate(const std::string& config, const std::string& out_dir, int threads,
                 std::optional<std::uint64_t> seed, std::ostream& out) {
    auto scenarios = load_simulation_config(config);
    if (seed) {
        // Distinct, reproducible base seed per scenario.
        std::uint64_t state = *seed;
        for (auto& s : scenarios) s.seed = splitmix64(state);
    }
    const unsigned workers = resolve_threads(threads);
    std::vector<ResultTable> tables;
    for (const auto& s : scenarios) tables.push_back(run_scenario(s, workers));
    const ResultTable all = merge_tables(tables);

    // Everything is computed before anything is written.
    const std::string results = results_csv(all);
    const std::string aggregate = aggregate_csv(all);
    const std::string errors = errors_csv(all);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create '" + out_dir + "': " + ec.message());
    write_file_atomic(fs::path(out_dir) / "results.csv", results);
    write_file_atomic(fs::path(out_dir) / "aggregate.csv", aggregate);
    write_file_atomic(fs::path(out_dir) / "errors.csv", errors);

    for (const auto& a : all.aggregates) {
        out << "scenario=" << a.scenario << " method=" << a.method << " count=" << a.count
            << " failures=" << a.failures << " tpr=" << format_double(a.tpr_mean)
            << " fpr=" << format_double(a.fpr_mean) << " auc=" << format_double(a.auc_mean) << "\n";
    }
    return exit_ok;
}

void print_report(std::ostream& out, const char* prefix, const ICReport& r) {
    out << prefix << "violation_fraction=" << format_double(r.violation_fraction) << "\n"
        << prefix << "max_row_sum=" << format_double(r.max_row_sum) << "\n"
        << prefix << "jittered=" << (r.jittered ? "true" : "false") << "\n";
}

int cmd_ic_check(const FitArgs& a, const std::string& support, const std::string& truth_file, bool entries,
                 std::ostream& out) {
    const CsvDataset csv = read_csv_dataset(a.data, a.label);
    const auto items = !support.empty() ? tokens(support) : tokens(read_text(truth_file));
    if (items.empty()) throw DataError("empty active set");
    const auto active = resolve_features(items, csv.feature_names);

    const FitConfig cfg = fit_config(a);
    Dataset ds = csv.data;
    if (cfg.standardize) ds.X = Standardization::fit(ds.X).apply(ds.X);
    const WhiteningTransform t = build_whitening(ds, cfg.whitening);
    const ViolationUnit unit = entries ? ViolationUnit::entries : ViolationUnit::rows;
    const ICReport before = ic_violation(ds.X, t.h_diag, active, unit);
    const ICReport after = ic_violation(whiten(ds.X, t), t.h_diag, active, unit);

    out << "d=" << before.d << "\n"
        << "unit=" << (entries ? "entries" : "rows") << "\n"
        << "active=" << join(before.active) << "\n";
    print_report(out, "before.", before);
    print_report(out, "after.", after);
    out << "shrinkage_rho=" << format_double(t.shrinkage_rho) << "\n";
    return exit_ok;
}

int cmd_cv(const FitArgs& a, int k, std::uint64_t seed, const std::string& method, const std::string& roc_path,
           std::ostream& out, std::ostream& err) {
    const CsvDataset csv = read_csv_dataset(a.data, a.label);
    std::uint64_t state = seed;
    const std::uint64_t method_seed = splitmix64(state);
    const Scorer scorer = method == "lasso" ? lasso_scorer(LassoCvOptions{}, method_seed) : wlogit_scorer(fit_config(a));
    const CvResult r = kfold_cv_auc(csv.data, k, scorer, seed);
    for (const auto& w : r.warnings) err << "warning: " << one_line(w) << "\n";
    for (std::size_t f = 0; f < r.fold_auc.size(); ++f) {
        out << "fold=" << f + 1 << " auc=" << format_double(r.fold_auc[f]) << "\n";
    }
    out << "pooled_auc=" << format_double(r.pooled_auc) << "\n";
    if (!roc_path.empty()) {
        std::string csv_text = "fpr,tpr\n";
        for (const auto& pt : r.roc) csv_text += format_double(pt.fpr) + "," + format_double(pt.tpr) + "\n";
        write_file_atomic(roc_path, csv_text);
    }
    return exit_ok;
}

int fail(std::ostream& err, const char* category, const std::string& what, int code) {
    err << "error: " << category << ": " << one_line(what) << "\n";
    return code;
}

}  // namespace

unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    if (const char* env = std::getenv("WLOGIT_THREADS")) {
        const std::string s(env);
        int v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size() && v > 0) return static_cast<unsigned>(v);
        throw UsageError("WLOGIT_THREADS must be a positive integer, got '" + s + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Whitening-based variable selection for sparse logistic regression", "wlogit"};
    app.require_subcommand(1);

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model on a CSV file");
    fit_cmd->add_option("--data", fa.data, "CSV with a header row")->required();
    fit_cmd->add_option("--label", fa.label, "0/1 label column")->required();
    fit_cmd->add_option("--out", fa.out, "where to write the model (JSON)");
    add_fit_flags(fit_cmd, fa);

    std::string model_path, pred_data, pred_out;
    std::optional<std::string> pred_label;
    double threshold = 0.5;
    auto* predict_cmd = app.add_subcommand("predict", "score a CSV file with a saved model");
    predict_cmd->add_option("--model", model_path, "model file written by fit")->required();
    predict_cmd->add_option("--data", pred_data, "CSV with the model's feature columns")->required();
    predict_cmd->add_option("--label", pred_label, "column to ignore if present");
    predict_cmd->add_option("--out", pred_out, "output CSV (stdout if omitted)");
    predict_cmd->add_option("--threshold", threshold, "probability cut for label 1")->check(CLI::Range(0.0, 1.0));

    std::string sim_config, sim_out = ".";
    int threads = 0;
    std::optional<std::uint64_t> sim_seed;
    auto* sim_cmd = app.add_subcommand("simulate", "run synthetic benchmark scenarios");
    sim_cmd->add_option("--config", sim_config, "TOML scenario file")->required();
    sim_cmd->add_option("--out", sim_out, "output directory");
    sim_cmd->add_option("--threads", threads, "worker threads (default: WLOGIT_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--seed", sim_seed, "replace the scenario seeds");

    FitArgs ia;
    std::string support, truth_file;
    bool entries = false;
    auto* ic_cmd = app.add_subcommand("ic-check", "irrepresentable-condition report before and after whitening");
    ic_cmd->add_option("--data", ia.data)->required();
    ic_cmd->add_option("--label", ia.label)->required();
    auto* sup_opt = ic_cmd->add_option("--support", support, "active features: 0-based indices or names");
    auto* truth_opt = ic_cmd->add_option("--truth", truth_file, "file listing the active features");
    sup_opt->excludes(truth_opt);
    ic_cmd->add_flag("--entries", entries, "count violating entries instead of rows");
    ic_cmd->add_option("--h-convention", ia.h_convention)->check(CLI::IsMember({"fisher", "literal"}));
    ic_cmd->add_flag("--no-standardize", ia.no_standardize);

    FitArgs ca;
    int folds = 10;
    std::uint64_t cv_seed = 1;
    std::string cv_method = "wlogit", roc_out;
    auto* cv_cmd = app.add_subcommand("cv", "stratified k-fold cross-validated AUC");
    cv_cmd->add_option("--data", ca.data)->required();
    cv_cmd->add_option("--label", ca.label)->required();
    cv_cmd->add_option("--k", folds, "number of folds")->check(CLI::Range(2, 1000));
    cv_cmd->add_option("--seed", cv_seed, "fold assignment seed");
    cv_cmd->add_option("--method", cv_method)->check(CLI::IsMember({"wlogit", "lasso"}));
    cv_cmd->add_option("--out", roc_out, "ROC points CSV");
    add_fit_flags(cv_cmd, ca);

    auto* version_cmd = app.add_subcommand("version", "print the version");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        return fail(err, "usage", e.what(), exit_usage);
    }
    if (ic_cmd->parsed() && support.empty() && truth_file.empty()) {
        return fail(err, "usage", "ic-check needs --support or --truth", exit_usage);
    }

    try {
        if (version_cmd->parsed()) {
            out << WLOGIT_VERSION << "\n";
            return exit_ok;
        }
        if (fit_cmd->parsed()) return cmd_fit(fa, out);
        if (predict_cmd->parsed()) return cmd_predict(model_path, pred_data, pred_label, pred_out, threshold, out);
        if (sim_cmd->parsed()) return cmd_simulate(sim_config, sim_out, threads, sim_seed, out);
        if (ic_cmd->parsed()) return cmd_ic_check(ia, support, truth_file, entries, out);
        if (cv_cmd->parsed()) return cmd_cv(ca, folds, cv_seed, cv_method, roc_out, out, err);
    } catch (const UsageError& e) {
        return fail(err, "usage", e.what(), exit_usage);
    } catch (const Error& e) {
        switch (e.kind()) {
            case ErrorKind::invalid_argument:
                return fail(err, "usage", e.what(), exit_usage);
            case ErrorKind::dimension_mismatch:
            case ErrorKind::insufficient_samples:
            case ErrorKind::data:
                return fail(err, "data", e.what(), exit_data);
            case ErrorKind::not_positive_definite:
            case ErrorKind::numerical:
                return fail(err, "numerical", e.what(), exit_numerical);
        }
    } catch (const fs::filesystem_error& e) {
        return fail(err, "data", e.what(), exit_data);
    } catch (const std::exception& e) {
        return fail(err, "internal", e.what(), exit_numerical);
    }
    return fail(err, "usage", "no command given", exit_usage);
}

}  // namespace wlogit::cli
