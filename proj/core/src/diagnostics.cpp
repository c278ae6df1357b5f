#include "wlogit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "wlogit/error.hpp"

namespace wlogit {

ICReport ic_violation(const Matrix& x, const Vector& h_diag, const std::vector<Eigen::Index>& active,
                      ViolationUnit unit) {
    const Eigen::Index p = x.cols();
    if (h_diag.size() != x.rows()) throw DimensionMismatch("H diagonal does not match sample count");
    const std::set<Eigen::Index> s(active.begin(), active.end());
    if (s.size() != active.size()) throw InvalidArgument("active set has duplicate indices");
    if (s.empty() || static_cast<Eigen::Index>(s.size()) >= p) {
        throw InvalidArgument("active set size must lie in [1, p)");
    }
    if (*s.begin() < 0 || *s.rbegin() >= p) throw InvalidArgument("active index out of range");

    std::vector<Eigen::Index> inactive;
    inactive.reserve(static_cast<std::size_t>(p) - s.size());
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!s.count(j)) inactive.push_back(j);
    }
    const std::vector<Eigen::Index> act(s.begin(), s.end());

    // Only the S columns of Q are needed: Q_{:,S} = X^T H X_S.
    const Matrix xs = x(Eigen::all, act);
    const Matrix hxs = h_diag.asDiagonal() * xs;
    const Matrix q_ss = xs.transpose() * hxs;
    const Matrix q_cs = x(Eigen::all, inactive).transpose() * hxs;

    ICReport rep;
    rep.active = act;
    rep.d = static_cast<Eigen::Index>(act.size());
    rep.unit = unit;

    Eigen::LDLT<Matrix> ldlt(q_ss);
    const auto usable = [](const Eigen::LDLT<Matrix>& f) {
        return f.info() == Eigen::Success && f.isPositive() &&
               f.vectorD().minCoeff() > 1e-14 * std::max(1.0, f.vectorD().cwiseAbs().maxCoeff());
    };
    if (!usable(ldlt)) {
        Matrix jittered = q_ss;
        jittered.diagonal().array() += 1e-10;
        ldlt.compute(jittered);
        rep.jittered = true;
        if (!usable(ldlt)) {
            const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(q_ss, Eigen::EigenvaluesOnly).eigenvalues();
            std::ostringstream os;
            os << "Q_SS is singular even after jitter (condition number ~ "
               << ev.cwiseAbs().maxCoeff() / std::max(ev.cwiseAbs().minCoeff(), 1e-300) << ")";
            throw NumericalError(os.str());
        }
    }
    // A = Q_cs Q_ss^{-1}  <=>  A^T = Q_ss^{-1} Q_cs^T (Q_ss symmetric).
    const Matrix a = ldlt.solve(q_cs.transpose()).transpose();

    const Vector row_sums = a.cwiseAbs().rowwise().sum();
    rep.max_row_sum = row_sums.size() ? row_sums.maxCoeff() : 0.0;
    if (unit == ViolationUnit::rows) {
        rep.violation_fraction =
            static_cast<double>((row_sums.array() >= 1.0).count()) / static_cast<double>(a.rows());
    } else {
        rep.violation_fraction =
            static_cast<double>((a.array().abs() >= 1.0).count()) / static_cast<double>(a.size());
    }
    return rep;
}

double whitening_gap(const Matrix& x_tilde, const Vector& h_diag) {
    if (h_diag.size() != x_tilde.rows()) throw DimensionMismatch("H diagonal does not match sample count");
    Matrix g = x_tilde.transpose() * h_diag.asDiagonal() * x_tilde / static_cast<double>(x_tilde.rows());
    g.diagonal().array() -= 1.0;
    return max_abs(g);
}

SelectionRates selection_metrics(const std::vector<Eigen::Index>& selected,
                                 const std::vector<Eigen::Index>& truth, Eigen::Index p) {
    const std::set<Eigen::Index> t(truth.begin(), truth.end());
    const std::set<Eigen::Index> s(selected.begin(), selected.end());
    if (t.empty()) throw InvalidArgument("truth set must be non-empty");
    for (Eigen::Index j : t) {
        if (j < 0 || j >= p) throw InvalidArgument("truth index out of range");
    }
    std::size_t hits = 0;
    std::size_t false_hits = 0;
    for (Eigen::Index j : s) {
        if (j < 0 || j >= p) throw InvalidArgument("selected index out of range");
        if (t.count(j)) {
            ++hits;
        } else {
            ++false_hits;
        }
    }
    SelectionRates r;
    r.tpr = static_cast<double>(hits) / static_cast<double>(t.size());
    const auto negatives = static_cast<double>(p) - static_cast<double>(t.size());
    r.fpr = negatives > 0 ? static_cast<double>(false_hits) / negatives : 0.0;
    return r;
}

namespace {

void check_binary(const Vector& scores, const Vector& labels) {
    if (scores.size() != labels.size()) throw DimensionMismatch("scores and labels differ in length");
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) != 0.0 && labels(i) != 1.0) throw DataError("labels must be 0 or 1");
    }
    const auto pos = (labels.array() == 1.0).count();
    if (pos == 0 || pos == labels.size()) throw DataError("AUC is undefined for a single class");
}

}  // namespace

double auc(const Vector& scores, const Vector& labels) {
    check_binary(scores, labels);
    // Sort once; within each run of tied scores every positive-negative pair counts 1/2.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(scores.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) < scores(b); });

    double concordant2 = 0.0;  // twice the Mann-Whitney count, kept integral
    double neg_below = 0.0;
    double n_pos = 0.0;
    double n_neg = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        double pos_run = 0.0;
        double neg_run = 0.0;
        while (j < idx.size() && scores(idx[j]) == scores(idx[i])) {
            (labels(idx[j]) == 1.0 ? pos_run : neg_run) += 1.0;
            ++j;
        }
        concordant2 += pos_run * (2.0 * neg_below + neg_run);
        neg_below += neg_run;
        n_pos += pos_run;
        n_neg += neg_run;
        i = j;
    }
    return concordant2 / (2.0 * n_pos * n_neg);
}

std::vector<RocPoint> roc_curve(const Vector& scores, const Vector& labels) {
    check_binary(scores, labels);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(scores.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });
    const double n_pos = static_cast<double>((labels.array() == 1.0).count());
    const double n_neg = static_cast<double>(labels.size()) - n_pos;

    std::vector<RocPoint> pts{{0.0, 0.0}};
    double tp = 0.0;
    double fp = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j < idx.size() && scores(idx[j]) == scores(idx[i])) {
            (labels(idx[j]) == 1.0 ? tp : fp) += 1.0;
            ++j;
        }
        pts.push_back({fp / n_neg, tp / n_pos});
        i = j;
    }
    return pts;
}

}  // namespace wlogit
