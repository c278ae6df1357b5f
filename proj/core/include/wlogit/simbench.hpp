#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wlogit/diagnostics.hpp"
#include "wlogit/glm.hpp"
#include "wlogit/pipeline.hpp"
#include "wlogit/random.hpp"

namespace wlogit {

enum class SigmaKind { identity, blockwise };

struct SigmaSpec {
    SigmaKind kind = SigmaKind::identity;
    double alpha1 = 0.3;  ///< within the active block
    double alpha2 = 0.5;  ///< between active and inactive
    double alpha3 = 0.7;  ///< within the inactive block
};

/// Unit-diagonal covariance; blockwise puts the d active features first.
/// Throws NotPositiveDefinite for an indefinite parameter combination.
SymMatrix make_sigma(Eigen::Index p, Eigen::Index d, const SigmaSpec& spec);

struct Balance {
    enum class Kind { unconstrained, balanced, imbalanced };
    Kind kind = Kind::balanced;
    Eigen::Index n_pos = 0;  ///< positives for `imbalanced`

    static Balance unconstrained() { return {Kind::unconstrained, 0}; }
    static Balance balanced() { return {Kind::balanced, 0}; }
    static Balance imbalanced(Eigen::Index positives) { return {Kind::imbalanced, positives}; }

    /// Target positive count for a sample of size n (negative for unconstrained).
    Eigen::Index positives_for(Eigen::Index n, Eigen::Index reference_n) const;
};

/// Candidate budget for conditional class sampling.
inline constexpr Eigen::Index kClassDrawBudget = 1'000'000;

/// Rows from N(0, sigma), labels from the logistic model. Balanced and
/// imbalanced modes draw candidates in batches of n and keep a candidate only
/// while its class is below target, so exact class counts are met.
Dataset gen_dataset(const MvNormal& sampler, const Vector& beta_true, Eigen::Index n,
                    Eigen::Index n_pos, Rng& rng);
Dataset gen_dataset(const SymMatrix& sigma, const Vector& beta_true, Eigen::Index n,
                    const Balance& balance, std::uint64_t seed);

/// Lasso-logistic baseline with lambda chosen by K-fold cross-validated deviance.
struct LassoCvOptions {
    int folds = 10;
    int n_lambda = 30;
    double lambda_ratio = 0.01;
    bool standardize = true;
    SolverOptions solver;
};

struct LassoCvModel {
    Vector beta;  ///< standardized-feature coefficients
    double lambda = 0.0;
    std::size_t lambda_index = 0;
    Standardization standardization;
    std::vector<double> lambdas;
    std::vector<double> cv_deviance;  ///< mean held-out deviance per lambda

    Vector predict_prob(const Matrix& x) const;
};

LassoCvModel fit_lasso_cv(const Dataset& data, const LassoCvOptions& opts, std::uint64_t seed);

/// Partition labels into k folds, stratified by class. Returns the fold of each sample.
std::vector<int> stratified_folds(const Vector& labels, int k, Rng& rng);

struct ScenarioConfig {
    std::string name = "scenario";
    Eigen::Index p = 200;
    Eigen::Index n_train = 100;
    Eigen::Index n_test = 50;
    Eigen::Index d = 10;
    double effect_size = 1.0;
    SigmaSpec sigma;
    Balance balance = Balance::balanced();
    int replications = 20;
    std::uint64_t seed = 1;
    FitConfig wlogit;
    LassoCvOptions lasso;

    void validate() const;
};

struct ResultRow {
    std::string method;
    std::string scenario;
    int replication = 0;
    double tpr = std::numeric_limits<double>::quiet_NaN();
    double fpr = std::numeric_limits<double>::quiet_NaN();
    double auc = std::numeric_limits<double>::quiet_NaN();
    Eigen::Index selected_count = 0;
    std::uint64_t seed = 0;
    std::string error;  ///< empty on success
    /// WLogit only: l2 error of the whitened coefficients before / after the Top-K correction.
    double tilde_error_uncorrected = std::numeric_limits<double>::quiet_NaN();
    double tilde_error_corrected = std::numeric_limits<double>::quiet_NaN();
};

struct AggregateRow {
    std::string method;
    std::string scenario;
    int count = 0;
    int failures = 0;
    double tpr_mean = 0.0, tpr_se = 0.0;
    double fpr_mean = 0.0, fpr_se = 0.0;
    double auc_mean = 0.0, auc_se = 0.0;
    double selected_mean = 0.0, selected_se = 0.0;
};

struct ResultTable {
    std::vector<ResultRow> rows;  ///< sorted by (scenario, method, replication)
    std::vector<AggregateRow> aggregates;

    const AggregateRow& aggregate(const std::string& method, const std::string& scenario) const;
};

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows);

/// One replication: draws train / test sets and evaluates WLogit and the Lasso baseline.
std::vector<ResultRow> run_replication(const ScenarioConfig& config, int replication);

/// All replications; `threads` <= 1 runs sequentially. Output does not depend on `threads`.
ResultTable run_scenario(const ScenarioConfig& config, unsigned threads = 1);

/// Merge the tables of several scenarios (rows stay sorted).
ResultTable merge_tables(const std::vector<ResultTable>& tables);

/// CSV with header method,scenario,replication,tpr,fpr,auc,selected_count,seed.
std::string results_csv(const ResultTable& table);
std::string aggregate_csv(const ResultTable& table);
/// method,scenario,replication,seed,error for failed replications (header only if none).
std::string errors_csv(const ResultTable& table);

/// Shortest round-trip decimal text of a double ("nan" for NaN).
std::string format_double(double v);

/// Fits on the training split, returns scores for the held-out rows.
using Scorer = std::function<Vector(const Dataset& train, const Matrix& held_out)>;

Scorer wlogit_scorer(const FitConfig& config);
Scorer lasso_scorer(const LassoCvOptions& opts, std::uint64_t seed);
Scorer constant_scorer(double value = 0.5);

struct CvResult {
    std::vector<double> fold_auc;  ///< NaN for a fold whose held-out part is single-class
    std::vector<int> skipped_folds;
    std::vector<std::string> warnings;
    Vector pooled_scores;
    Vector pooled_labels;
    double pooled_auc = std::numeric_limits<double>::quiet_NaN();
    std::vector<RocPoint> roc;
};

/// Stratified k-fold evaluation: fit on k-1 folds, score the remaining fold.
CvResult kfold_cv_auc(const Dataset& data, int k, const Scorer& method, std::uint64_t seed);

}  // namespace wlogit
