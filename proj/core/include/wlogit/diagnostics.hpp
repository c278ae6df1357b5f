#pragma once

#include <string>
#include <vector>

#include "wlogit/linalg.hpp"

namespace wlogit {

enum class ViolationUnit {
    rows,     ///< rows of Q_{S^c S} Q_SS^{-1} with absolute row sum >= 1
    entries,  ///< individual entries with magnitude >= 1
};

/// Irrepresentable-condition measurement for an active set S.
struct ICReport {
    double violation_fraction = 0.0;  ///< in [0, 1], unit given by `unit`
    double max_row_sum = 0.0;         ///< |Q_{S^c S} Q_SS^{-1}|_inf
    std::vector<Eigen::Index> active;
    Eigen::Index d = 0;
    ViolationUnit unit = ViolationUnit::rows;
    bool jittered = false;  ///< Q_SS needed 1e-10 * I to be factorized
};

/// Q = X^T H X, A = Q_{S^c S} (Q_SS)^{-1}, and the fraction of A violating the bound.
ICReport ic_violation(const Matrix& x, const Vector& h_diag, const std::vector<Eigen::Index>& active,
                      ViolationUnit unit = ViolationUnit::rows);

/// max-abs entry of X~^T H X~ / n - I.
double whitening_gap(const Matrix& x_tilde, const Vector& h_diag);

struct SelectionRates {
    double tpr = 0.0;
    double fpr = 0.0;
};

SelectionRates selection_metrics(const std::vector<Eigen::Index>& selected,
                                 const std::vector<Eigen::Index>& truth, Eigen::Index p);

/// Tie-aware Mann-Whitney estimate of the area under the ROC curve.
double auc(const Vector& scores, const Vector& labels);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// ROC vertices from the highest threshold down, tied scores collapsed into one step.
std::vector<RocPoint> roc_curve(const Vector& scores, const Vector& labels);

/// One row of evaluation output.
struct MetricsRecord {
    double tpr = 0.0;
    double fpr = 0.0;
    double auc = 0.0;
    Eigen::Index selected_count = 0;
    std::string method;
    std::string scenario;
};

}  // namespace wlogit
