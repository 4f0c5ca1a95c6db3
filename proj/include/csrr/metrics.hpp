#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "csrr/losses.hpp"
#include "csrr/matrix.hpp"

namespace csrr {

struct UndefinedMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-user ranking: candidate items in non-increasing score order, ties
/// broken by ascending item index. Training positives are excluded.
struct RankedList {
    Index user = 0;
    std::vector<Index> items;
    std::vector<double> scores;
};

/// Build the ranking of one user from a score column, excluding that user's
/// training positives from the candidate set.
inline RankedList rank_user(const Matrix& scores, const ObservationMatrix& train, Index user) {
    RankedList r;
    r.user = user;
    for (Index i = 0; i < scores.rows(); ++i)
        if (!train.is_positive(i, user)) r.items.push_back(i);
    std::stable_sort(r.items.begin(), r.items.end(), [&](Index a, Index b) {
        double sa = scores(a, user), sb = scores(b, user);
        if (sa != sb) return sa > sb;
        return a < b;
    });
    r.scores.reserve(r.items.size());
    for (Index i : r.items) r.scores.push_back(scores(i, user));
    return r;
}

using ItemSet = std::set<Index>;

inline std::pair<double, double> precision_recall_at_n(const RankedList& ranked,
                                                       const ItemSet& relevant, Index n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (relevant.empty()) throw UndefinedMetricError("empty relevant set: user must be skipped");
    Index limit = std::min<Index>(n, static_cast<Index>(ranked.items.size()));
    Index hits = 0;
    for (Index i = 0; i < limit; ++i)
        if (relevant.count(ranked.items[static_cast<size_t>(i)])) ++hits;
    return {static_cast<double>(hits) / static_cast<double>(n),
            static_cast<double>(hits) / static_cast<double>(relevant.size())};
}

inline double f1_at_n(double p, double r) {
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

/// Binary-gain NDCG with log2(i+1) discount; IDCG truncated at
/// min(n, |relevant|).
inline double ndcg_at_n(const RankedList& ranked, const ItemSet& relevant, Index n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (relevant.empty()) throw UndefinedMetricError("empty relevant set: user must be skipped");
    Index limit = std::min<Index>(n, static_cast<Index>(ranked.items.size()));
    double dcg = 0.0;
    for (Index i = 0; i < limit; ++i)
        if (relevant.count(ranked.items[static_cast<size_t>(i)]))
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    double idcg = 0.0;
    Index ideal = std::min<Index>(n, static_cast<Index>(relevant.size()));
    for (Index i = 0; i < ideal; ++i)
        idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

struct MetricValues {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double ndcg = 0.0;
};

/// Metric values per cutoff N, averaged over users with non-empty test sets.
using MetricsReport = std::map<Index, MetricValues>;

/// Evaluate the full ranking protocol: per-user metrics averaged over all
/// users whose test set is non-empty.
inline MetricsReport evaluate_ranking(const Matrix& scores, const ObservationMatrix& train,
                                      const std::vector<ItemSet>& test_sets,
                                      const std::vector<Index>& cutoffs) {
    MetricsReport report;
    for (Index n : cutoffs) report[n] = MetricValues{};
    Index counted = 0;
    for (Index user = 0; user < train.cols(); ++user) {
        const ItemSet& relevant = test_sets[static_cast<size_t>(user)];
        if (relevant.empty()) continue;
        RankedList ranked = rank_user(scores, train, user);
        ++counted;
        for (Index n : cutoffs) {
            auto [p, r] = precision_recall_at_n(ranked, relevant, n);
            auto& acc = report[n];
            acc.precision += p;
            acc.recall += r;
            acc.f1 += f1_at_n(p, r);
            acc.ndcg += ndcg_at_n(ranked, relevant, n);
        }
    }
    if (counted == 0) throw UndefinedMetricError("no user has a non-empty test set");
    for (auto& [n, acc] : report) {
        acc.precision /= counted;
        acc.recall /= counted;
        acc.f1 /= counted;
        acc.ndcg /= counted;
    }
    return report;
}

struct ConfusionCounts {
    Index false_negatives = 0;  // M_p: A = 1 predicted <= q
    Index false_positives = 0;  // M_n: A = 0 predicted > q
    Index positives = 0;        // T_p
    Index negatives = 0;        // T_n
};

inline ConfusionCounts count_confusion(const Matrix& predictions, const ObservationMatrix& truth,
                                       double q) {
    if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols())
        throw DimensionError("count_confusion: dimension mismatch");
    ConfusionCounts c;
    for (Index i = 0; i < predictions.rows(); ++i) {
        for (Index j = 0; j < predictions.cols(); ++j) {
            bool pos = truth.is_positive(i, j);
            bool predicted = predictions(i, j) > q;
            if (pos) {
                ++c.positives;
                if (!predicted) ++c.false_negatives;
            } else {
                ++c.negatives;
                if (predicted) ++c.false_positives;
            }
        }
    }
    return c;
}

/// mu_p * recall + mu_n * specificity at threshold q.
inline double weighted_sum_metric(const Matrix& predictions, const ObservationMatrix& truth,
                                  double q, const SumWeights& w) {
    ConfusionCounts c = count_confusion(predictions, truth, q);
    if (c.positives == 0 || c.negatives == 0)
        throw UndefinedMetricError("weighted_sum_metric undefined: a class is empty");
    double recall = static_cast<double>(c.positives - c.false_negatives) /
                    static_cast<double>(c.positives);
    double specificity = static_cast<double>(c.negatives - c.false_positives) /
                         static_cast<double>(c.negatives);
    return w.mu_p * recall + w.mu_n * specificity;
}

/// c_p * M_p + c_n * M_n at threshold q.
inline double weighted_cost_metric(const Matrix& predictions, const ObservationMatrix& truth,
                                   double q, const CostModel& cm) {
    ConfusionCounts c = count_confusion(predictions, truth, q);
    return cm.c_p * static_cast<double>(c.false_negatives) +
           cm.c_n * static_cast<double>(c.false_positives);
}

}  // namespace csrr
