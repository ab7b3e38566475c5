#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "toolplan/error.hpp"

namespace toolplan::metrics {

inline void check_sizes(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw value_error("metric inputs must be non-empty and equally sized");
}

inline double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_sizes(pred, truth);
    double s = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / pred.size());
}

inline double rmsle(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_sizes(pred, truth);
    double s = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        double d = std::log1p(std::max(pred[i], 0.0)) - std::log1p(std::max(truth[i], 0.0));
        s += d * d;
    }
    return std::sqrt(s / pred.size());
}

inline double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_sizes(pred, truth);
    double s = 0;
    for (size_t i = 0; i < pred.size(); ++i) s += std::fabs(pred[i] - truth[i]);
    return s / pred.size();
}

inline double r2(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_sizes(pred, truth);
    double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / truth.size();
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    if (ss_tot == 0) return ss_res == 0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

/// Label-based metrics take string labels so every target dtype goes through
/// one comparison path.
inline double accuracy(const std::vector<std::string>& pred,
                       const std::vector<std::string>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw value_error("metric inputs must be non-empty and equally sized");
    size_t ok = 0;
    for (size_t i = 0; i < pred.size(); ++i) ok += pred[i] == truth[i];
    return static_cast<double>(ok) / pred.size();
}

/// Binary F1 when two classes are present (positive = lexicographically
/// larger label, so True > False); macro-averaged F1 otherwise.
inline double f1(const std::vector<std::string>& pred, const std::vector<std::string>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw value_error("metric inputs must be non-empty and equally sized");
    std::vector<std::string> classes;
    for (const auto& v : truth)
        if (std::find(classes.begin(), classes.end(), v) == classes.end()) classes.push_back(v);
    for (const auto& v : pred)
        if (std::find(classes.begin(), classes.end(), v) == classes.end()) classes.push_back(v);
    std::sort(classes.begin(), classes.end());

    auto f1_for = [&](const std::string& pos) {
        size_t tp = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < pred.size(); ++i) {
            bool p = pred[i] == pos, t = truth[i] == pos;
            tp += p && t;
            fp += p && !t;
            fn += !p && t;
        }
        if (tp == 0) return 0.0;
        double prec = static_cast<double>(tp) / (tp + fp);
        double rec = static_cast<double>(tp) / (tp + fn);
        return 2 * prec * rec / (prec + rec);
    };

    if (classes.size() == 2) return f1_for(classes.back());
    double s = 0;
    for (const auto& c : classes) s += f1_for(c);
    return classes.empty() ? 0.0 : s / classes.size();
}

/// ROC AUC from scores for the positive class, rank statistic with midrank
/// tie handling.
inline double auc(const std::vector<double>& scores, const std::vector<uint8_t>& positive) {
    if (scores.size() != positive.size() || scores.empty())
        throw value_error("metric inputs must be non-empty and equally sized");
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    double n_pos = 0, n_neg = 0, rank_sum = 0;
    for (size_t k = 0; k < scores.size(); ++k) {
        if (positive[k]) {
            n_pos += 1;
            rank_sum += rank[k];
        } else {
            n_neg += 1;
        }
    }
    if (n_pos == 0 || n_neg == 0) throw value_error("AUC needs both classes present");
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

}  // namespace toolplan::metrics
