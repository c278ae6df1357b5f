#include "wlogit/simbench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "wlogit/error.hpp"

namespace wlogit {

SymMatrix make_sigma(Eigen::Index p, Eigen::Index d, const SigmaSpec& spec) {
    if (p < 1) throw InvalidArgument("p must be >= 1");
    if (d < 0 || d >= p) throw InvalidArgument("active count d must satisfy 0 <= d < p");
    if (spec.kind == SigmaKind::identity) return SymMatrix::identity(p);

    Matrix s(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j) {
                s(i, j) = 1.0;
            } else if (i < d && j < d) {
                s(i, j) = spec.alpha1;
            } else if (i >= d && j >= d) {
                s(i, j) = spec.alpha3;
            } else {
                s(i, j) = spec.alpha2;
            }
        }
    }
    SymMatrix out(s);
    if (!is_positive_definite(out)) {
        std::ostringstream os;
        os << "blockwise covariance (" << spec.alpha1 << ", " << spec.alpha2 << ", " << spec.alpha3
           << ") is not positive definite for p=" << p << ", d=" << d;
        throw NotPositiveDefinite(os.str());
    }
    return out;
}

Eigen::Index Balance::positives_for(Eigen::Index n, Eigen::Index reference_n) const {
    switch (kind) {
        case Kind::unconstrained:
            return -1;
        case Kind::balanced:
            return n / 2;
        case Kind::imbalanced:
            return static_cast<Eigen::Index>(std::llround(static_cast<double>(n_pos) *
                                                          static_cast<double>(n) /
                                                          static_cast<double>(reference_n)));
    }
    return -1;
}

Dataset gen_dataset(const MvNormal& sampler, const Vector& beta_true, Eigen::Index n,
                    Eigen::Index n_pos, Rng& rng) {
    if (beta_true.size() != sampler.dim()) throw DimensionMismatch("beta_true does not match sigma");
    if (n < 1) throw InvalidArgument("sample size must be >= 1");
    if (n_pos > n) throw InvalidArgument("positive count exceeds sample size");

    Dataset out;
    if (n_pos < 0) {
        out.X = sampler.sample(n, rng);
        const Vector pi = wlogit::predict_prob(out.X, beta_true);
        out.y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) out.y(i) = rng.bernoulli(pi(i)) ? 1.0 : 0.0;
        return out;
    }

    out.X.resize(n, sampler.dim());
    out.y.resize(n);
    const Eigen::Index n_neg = n - n_pos;
    Eigen::Index pos = 0;
    Eigen::Index neg = 0;
    Eigen::Index drawn = 0;
    while (pos + neg < n) {
        if (drawn >= kClassDrawBudget) {
            throw DataError("class targets (" + std::to_string(n_pos) + " positives, " +
                            std::to_string(n_neg) + " negatives) not met after " +
                            std::to_string(drawn) + " candidates");
        }
        const Matrix batch = sampler.sample(n, rng);
        const Vector pi = wlogit::predict_prob(batch, beta_true);
        drawn += n;
        for (Eigen::Index i = 0; i < n && pos + neg < n; ++i) {
            const bool label = rng.bernoulli(pi(i));
            if (label ? pos >= n_pos : neg >= n_neg) continue;
            const Eigen::Index row = pos + neg;
            out.X.row(row) = batch.row(i);
            out.y(row) = label ? 1.0 : 0.0;
            (label ? pos : neg) += 1;
        }
    }
    return out;
}

Dataset gen_dataset(const SymMatrix& sigma, const Vector& beta_true, Eigen::Index n,
                    const Balance& balance, std::uint64_t seed) {
    Rng rng(seed);
    return gen_dataset(MvNormal(sigma), beta_true, n, balance.positives_for(n, n), rng);
}

std::vector<int> stratified_folds(const Vector& labels, int k, Rng& rng) {
    if (k < 2) throw InvalidArgument("cross-validation needs k >= 2");
    if (labels.size() < k) throw InvalidArgument("fewer samples than folds");
    std::vector<Eigen::Index> pos;
    std::vector<Eigen::Index> neg;
    for (Eigen::Index i = 0; i < labels.size(); ++i) (labels(i) == 1.0 ? pos : neg).push_back(i);
    const auto shuffle = [&rng](std::vector<Eigen::Index>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.below(i));
            std::swap(v[i - 1], v[j]);
        }
    };
    shuffle(pos);
    shuffle(neg);
    std::vector<int> fold(static_cast<std::size_t>(labels.size()), 0);
    std::size_t slot = 0;
    for (auto i : pos) fold[static_cast<std::size_t>(i)] = static_cast<int>(slot++ % static_cast<std::size_t>(k));
    for (auto i : neg) fold[static_cast<std::size_t>(i)] = static_cast<int>(slot++ % static_cast<std::size_t>(k));
    return fold;
}

namespace {

struct Split {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

Split split_for(const std::vector<int>& folds, int f) {
    Split s;
    for (std::size_t i = 0; i < folds.size(); ++i) {
        (folds[i] == f ? s.test : s.train).push_back(static_cast<Eigen::Index>(i));
    }
    return s;
}

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& rows) {
    return Dataset{data.X(rows, Eigen::all), data.y(rows)};
}

bool both_classes(const Vector& y) {
    const auto pos = (y.array() == 1.0).count();
    return pos > 0 && pos < y.size();
}

double deviance(const Vector& y, const Vector& eta) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) acc += y(i) * eta(i) - log1p_exp(eta(i));
    return -2.0 * acc;
}

}  // namespace

Vector LassoCvModel::predict_prob(const Matrix& x) const {
    return wlogit::predict_prob(standardization.apply(x), beta);
}

LassoCvModel fit_lasso_cv(const Dataset& data, const LassoCvOptions& opts, std::uint64_t seed) {
    data.validate(true);
    LassoCvModel m;
    m.standardization =
        opts.standardize ? Standardization::fit(data.X) : Standardization::identity(data.p());
    const Dataset ds{m.standardization.apply(data.X), data.y};
    m.lambdas = lambda_grid(ds, opts.n_lambda, opts.lambda_ratio);

    Rng rng(seed);
    const auto folds = stratified_folds(ds.y, opts.folds, rng);
    m.cv_deviance.assign(m.lambdas.size(), 0.0);
    Eigen::Index scored = 0;
    for (int f = 0; f < opts.folds; ++f) {
        const Split s = split_for(folds, f);
        const Dataset train = subset(ds, s.train);
        if (!both_classes(train.y) || s.test.empty()) continue;
        const Matrix x_test = ds.X(s.test, Eigen::all);
        const Vector y_test = ds.y(s.test);
        const auto path = lasso_path(train, m.lambdas, opts.solver);
        for (std::size_t l = 0; l < path.size(); ++l) {
            m.cv_deviance[l] += deviance(y_test, x_test * path[l].beta);
        }
        scored += static_cast<Eigen::Index>(s.test.size());
    }
    if (scored == 0) throw DataError("no cross-validation fold had a two-class training split");
    for (double& v : m.cv_deviance) v /= static_cast<double>(scored);

    m.lambda_index = static_cast<std::size_t>(
        std::min_element(m.cv_deviance.begin(), m.cv_deviance.end()) - m.cv_deviance.begin());
    m.lambda = m.lambdas[m.lambda_index];
    const std::vector<double> prefix(m.lambdas.begin(),
                                     m.lambdas.begin() + static_cast<std::ptrdiff_t>(m.lambda_index) + 1);
    m.beta = lasso_path(ds, prefix, opts.solver).back().beta;
    return m;
}

void ScenarioConfig::validate() const {
    if (p < 2) throw InvalidArgument("scenario p must be >= 2");
    if (d < 1 || d >= p) throw InvalidArgument("scenario needs 1 <= d < p");
    if (n_train < 2) throw InvalidArgument("scenario n_train must be >= 2");
    if (n_test < 2 || n_test > n_train) throw InvalidArgument("scenario needs 2 <= n_test <= n_train");
    if (replications < 1) throw InvalidArgument("scenario needs at least one replication");
    if (balance.kind == Balance::Kind::imbalanced && (balance.n_pos < 1 || balance.n_pos >= n_train)) {
        throw InvalidArgument("imbalanced positives must lie in [1, n_train)");
    }
}

std::vector<ResultRow> run_replication(const ScenarioConfig& config, int replication) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(replication);
    ResultRow w;
    w.method = "wlogit";
    w.scenario = config.name;
    w.replication = replication;
    w.seed = seed;
    ResultRow l = w;
    l.method = "lasso";

    std::vector<Eigen::Index> truth(static_cast<std::size_t>(config.d));
    for (Eigen::Index j = 0; j < config.d; ++j) truth[static_cast<std::size_t>(j)] = j;
    Vector beta_true = Vector::Zero(config.p);
    beta_true.head(config.d).setConstant(config.effect_size);

    Dataset train;
    Dataset test;
    try {
        const MvNormal sampler(make_sigma(config.p, config.d, config.sigma));
        Rng rng(seed);
        train = gen_dataset(sampler, beta_true, config.n_train,
                            config.balance.positives_for(config.n_train, config.n_train), rng);
        test = gen_dataset(sampler, beta_true, config.n_test,
                           config.balance.positives_for(config.n_test, config.n_train), rng);
    } catch (const std::exception& e) {
        w.error = l.error = std::string("data generation: ") + e.what();
        return {w, l};
    }

    try {
        const WLogitModel model = fit(train, config.wlogit);
        const SelectionRates r = selection_metrics(model.support, truth, config.p);
        w.tpr = r.tpr;
        w.fpr = r.fpr;
        w.selected_count = static_cast<Eigen::Index>(model.support.size());
        w.auc = auc(predict(model, test.X).probabilities, test.y);
        const Vector truth_tilde =
            to_whitened(beta_true.cwiseProduct(model.standardization.scale), *model.transform);
        w.tilde_error_uncorrected = (model.beta_tilde0_hat - truth_tilde).norm();
        w.tilde_error_corrected = (model.beta_tilde_hat - truth_tilde).norm();
    } catch (const std::exception& e) {
        w.error = e.what();
    }

    try {
        std::uint64_t cv_state = seed;
        const LassoCvModel lm = fit_lasso_cv(train, config.lasso, splitmix64(cv_state));
        const SelectionRates r = selection_metrics(support(lm.beta), truth, config.p);
        l.tpr = r.tpr;
        l.fpr = r.fpr;
        l.selected_count = static_cast<Eigen::Index>(support(lm.beta).size());
        l.auc = auc(lm.predict_prob(test.X), test.y);
    } catch (const std::exception& e) {
        l.error = e.what();
    }
    return {w, l};
}

namespace {

auto row_key(const ResultRow& r) { return std::tie(r.scenario, r.method, r.replication); }

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows) {
    struct Acc {
        std::vector<double> tpr, fpr, auc, sel;
        int failures = 0;
    };
    std::map<std::pair<std::string, std::string>, Acc> groups;  // (scenario, method)
    for (const auto& r : rows) {
        Acc& a = groups[{r.scenario, r.method}];
        if (!r.error.empty()) {
            ++a.failures;
            continue;
        }
        a.tpr.push_back(r.tpr);
        a.fpr.push_back(r.fpr);
        a.auc.push_back(r.auc);
        a.sel.push_back(static_cast<double>(r.selected_count));
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, a] : groups) {
        AggregateRow g;
        g.scenario = key.first;
        g.method = key.second;
        g.count = static_cast<int>(a.tpr.size());
        g.failures = a.failures;
        g.tpr_mean = mean_of(a.tpr);
        g.tpr_se = se_of(a.tpr, g.tpr_mean);
        g.fpr_mean = mean_of(a.fpr);
        g.fpr_se = se_of(a.fpr, g.fpr_mean);
        g.auc_mean = mean_of(a.auc);
        g.auc_se = se_of(a.auc, g.auc_mean);
        g.selected_mean = mean_of(a.sel);
        g.selected_se = se_of(a.sel, g.selected_mean);
        out.push_back(std::move(g));
    }
    return out;
}

const AggregateRow& ResultTable::aggregate(const std::string& method,
                                           const std::string& scenario) const {
    for (const auto& a : aggregates) {
        if (a.method == method && a.scenario == scenario) return a;
    }
    throw InvalidArgument("no aggregate row for " + method + " / " + scenario);
}

ResultTable run_scenario(const ScenarioConfig& config, unsigned threads) {
    config.validate();
    make_sigma(config.p, config.d, config.sigma);  // positive-definiteness check up front

    const auto reps = static_cast<std::size_t>(config.replications);
    std::vector<std::vector<ResultRow>> slots(reps);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
    if (workers == 1) {
        for (std::size_t r = 0; r < reps; ++r) slots[r] = run_replication(config, static_cast<int>(r));
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < reps; r = next++) {
                    slots[r] = run_replication(config, static_cast<int>(r));
                }
            });
        }
    }

    ResultTable table;
    for (auto& s : slots) {
        for (auto& row : s) table.rows.push_back(std::move(row));
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); });
    table.aggregates = aggregate_rows(table.rows);
    return table;
}

ResultTable merge_tables(const std::vector<ResultTable>& tables) {
    ResultTable out;
    for (const auto& t : tables) out.rows.insert(out.rows.end(), t.rows.begin(), t.rows.end());
    std::sort(out.rows.begin(), out.rows.end(),
              [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); });
    out.aggregates = aggregate_rows(out.rows);
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string results_csv(const ResultTable& table) {
    std::ostringstream os;
    os << "method,scenario,replication,tpr,fpr,auc,selected_count,seed\n";
    for (const auto& r : table.rows) {
        os << r.method << ',' << r.scenario << ',' << r.replication << ',' << format_double(r.tpr) << ','
           << format_double(r.fpr) << ',' << format_double(r.auc) << ',' << r.selected_count << ','
           << r.seed << '\n';
    }
    return os.str();
}

std::string aggregate_csv(const ResultTable& table) {
    std::ostringstream os;
    os << "method,scenario,count,failures,tpr_mean,tpr_se,fpr_mean,fpr_se,auc_mean,auc_se,"
          "selected_mean,selected_se\n";
    for (const auto& a : table.aggregates) {
        os << a.method << ',' << a.scenario << ',' << a.count << ',' << a.failures << ','
           << format_double(a.tpr_mean) << ',' << format_double(a.tpr_se) << ','
           << format_double(a.fpr_mean) << ',' << format_double(a.fpr_se) << ','
           << format_double(a.auc_mean) << ',' << format_double(a.auc_se) << ','
           << format_double(a.selected_mean) << ',' << format_double(a.selected_se) << '\n';
    }
    return os.str();
}

std::string errors_csv(const ResultTable& table) {
    std::ostringstream os;
    os << "method,scenario,replication,seed,error\n";
    for (const auto& r : table.rows) {
        if (r.error.empty()) continue;
        std::string msg = r.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        os << r.method << ',' << r.scenario << ',' << r.replication << ',' << r.seed << ',' << msg << '\n';
    }
    return os.str();
}

Scorer wlogit_scorer(const FitConfig& config) {
    return [config](const Dataset& train, const Matrix& held_out) {
        return predict(fit(train, config), held_out).probabilities;
    };
}

Scorer lasso_scorer(const LassoCvOptions& opts, std::uint64_t seed) {
    return [opts, seed](const Dataset& train, const Matrix& held_out) {
        return fit_lasso_cv(train, opts, seed).predict_prob(held_out);
    };
}

Scorer constant_scorer(double value) {
    return [value](const Dataset&, const Matrix& held_out) {
        return Vector::Constant(held_out.rows(), value);
    };
}

CvResult kfold_cv_auc(const Dataset& data, int k, const Scorer& method, std::uint64_t seed) {
    data.validate(true);
    Rng rng(seed);
    const auto folds = stratified_folds(data.y, k, rng);

    CvResult out;
    std::vector<double> scores;
    std::vector<double> labels;
    for (int f = 0; f < k; ++f) {
        const Split s = split_for(folds, f);
        const Dataset train = subset(data, s.train);
        if (!both_classes(train.y)) {
            out.skipped_folds.push_back(f);
            out.warnings.push_back("fold " + std::to_string(f) + " skipped: single-class training split");
            out.fold_auc.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const Vector y_test = data.y(s.test);
        const Vector sc = method(train, data.X(s.test, Eigen::all));
        if (sc.size() != y_test.size()) throw DimensionMismatch("scorer returned the wrong number of scores");
        out.fold_auc.push_back(both_classes(y_test) ? auc(sc, y_test)
                                                    : std::numeric_limits<double>::quiet_NaN());
        for (Eigen::Index i = 0; i < sc.size(); ++i) {
            scores.push_back(sc(i));
            labels.push_back(y_test(i));
        }
    }
    out.pooled_scores = Eigen::Map<const Vector>(scores.data(), static_cast<Eigen::Index>(scores.size()));
    out.pooled_labels = Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    if (out.pooled_labels.size() > 0 && both_classes(out.pooled_labels)) {
        out.pooled_auc = auc(out.pooled_scores, out.pooled_labels);
        out.roc = roc_curve(out.pooled_scores, out.pooled_labels);
    }
    return out;
}

}  // namespace wlogit
