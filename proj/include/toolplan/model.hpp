#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "toolplan/error.hpp"
#include "toolplan/metrics.hpp"
#include "toolplan/table.hpp"

namespace toolplan {

enum class ModelKind {
    LinearRegression,
    LogisticRegression,
    RandomForestRegressor,
    RandomForestClassifier,
    GbdtRegressor,
    GbdtClassifier,
};

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::LinearRegression: return "linear_regression";
        case ModelKind::LogisticRegression: return "logistic_regression";
        case ModelKind::RandomForestRegressor: return "random_forest_regressor";
        case ModelKind::RandomForestClassifier: return "random_forest_classifier";
        case ModelKind::GbdtRegressor: return "gbdt_regressor";
        case ModelKind::GbdtClassifier: return "gbdt_classifier";
    }
    return "?";
}

inline bool model_kind_is_classifier(ModelKind k) {
    return k == ModelKind::LogisticRegression || k == ModelKind::RandomForestClassifier ||
           k == ModelKind::GbdtClassifier;
}

/// Row-major numeric feature matrix assembled from a Table (all columns
/// numeric, no missing cells).
struct Dataset {
    size_t n = 0, p = 0;
    std::vector<double> x;  // n * p
    std::vector<std::string> feature_names;

    double at(size_t row, size_t col) const { return x[row * p + col]; }
    const double* row(size_t r) const { return x.data() + r * p; }
};

struct Hyperparams {
    int n_estimators = 50;
    int max_depth = 3;
    double learning_rate = 0.1;
    double l2 = 1.0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1, right = -1;
    double value = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const double* row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].value;
    }
};

struct ModelArtifact {
    ModelKind kind = ModelKind::LinearRegression;
    bool is_classifier = false;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_labels;  // classifier only, sorted
    Dtype target_dtype = Dtype::Float;
    std::string target_name;
    double cv_score = 0;
    std::vector<std::pair<std::string, std::string>> best_params;  // tool-facing names
    uint64_t seed = 0;

    // linear family: coef[k] = weights + trailing intercept
    std::vector<std::vector<double>> coef;
    // tree family: one forest per output (1 for regression/binary, K for one-vs-rest)
    std::vector<std::vector<Tree>> forests;
    std::vector<double> base_score;  // gbdt initial score per output
    double learning_rate = 0.1;
    bool additive_forest = false;  // gbdt accumulates, rf averages

    std::string summary() const {
        return std::string("Model(") + model_kind_name(kind) +
               ", cv_score=" + format_double(cv_score) + ")";
    }
};

namespace learn {

namespace detail {

inline std::vector<double> solve_linear_system(std::vector<std::vector<double>> a,
                                               std::vector<double> b) {
    const size_t n = b.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        double d = a[col][col];
        if (std::fabs(d) < 1e-12) {
            a[col][col] += 1e-9;  // near-singular: nudge instead of failing
            d = a[col][col];
        }
        for (size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col] / d;
            if (f == 0) continue;
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = b[i] / a[i][i];
    return out;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct SplitResult {
    int feature = -1;
    double threshold = 0;
    double gain = 0;
};

/// Candidate thresholds: midpoints of sorted unique values, thinned to at
/// most 32 per feature for speed.
inline std::vector<double> split_candidates(std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> mids;
    for (size_t i = 0; i + 1 < vals.size(); ++i) mids.push_back((vals[i] + vals[i + 1]) / 2.0);
    if (mids.size() > 32) {
        std::vector<double> thin;
        for (size_t i = 0; i < 32; ++i) thin.push_back(mids[i * mids.size() / 32]);
        return thin;
    }
    return mids;
}

/// Grows a least-squares regression tree over the given row subset.  Used
/// directly for regression targets and on gradients for boosting; the
/// classifier forest reuses it on one-hot targets.
inline Tree fit_regression_tree(const Dataset& xs, const std::vector<double>& y,
                                const std::vector<size_t>& rows, int max_depth,
                                int min_leaf, const std::vector<size_t>& features) {
    Tree tree;
    struct Item {
        std::vector<size_t> rows;
        int depth;
        int slot;
    };
    std::vector<Item> work;
    tree.nodes.emplace_back();
    work.push_back({rows, 0, 0});

    while (!work.empty()) {
        Item it = std::move(work.back());
        work.pop_back();
        double sum = 0;
        for (size_t r : it.rows) sum += y[r];
        double mean = it.rows.empty() ? 0.0 : sum / it.rows.size();

        TreeNode& node = tree.nodes[it.slot];
        node.value = mean;
        if (it.depth >= max_depth || it.rows.size() < static_cast<size_t>(2 * min_leaf)) continue;

        double base_sse = 0;
        for (size_t r : it.rows) base_sse += (y[r] - mean) * (y[r] - mean);
        if (base_sse <= 1e-12) continue;

        SplitResult best;
        for (size_t f : features) {
            std::vector<double> vals;
            vals.reserve(it.rows.size());
            for (size_t r : it.rows) vals.push_back(xs.at(r, f));
            for (double thr : split_candidates(vals)) {
                double ls = 0, rs = 0;
                size_t ln = 0, rn = 0;
                for (size_t r : it.rows) {
                    if (xs.at(r, f) <= thr) {
                        ls += y[r];
                        ++ln;
                    } else {
                        rs += y[r];
                        ++rn;
                    }
                }
                if (ln < static_cast<size_t>(min_leaf) || rn < static_cast<size_t>(min_leaf))
                    continue;
                double lm = ls / ln, rm = rs / rn;
                double sse = 0;
                for (size_t r : it.rows) {
                    double m = xs.at(r, f) <= thr ? lm : rm;
                    sse += (y[r] - m) * (y[r] - m);
                }
                double gain = base_sse - sse;
                if (gain > best.gain + 1e-12) {
                    best.gain = gain;
                    best.feature = static_cast<int>(f);
                    best.threshold = thr;
                }
            }
        }
        if (best.feature < 0) continue;

        std::vector<size_t> lrows, rrows;
        for (size_t r : it.rows) {
            if (xs.at(r, static_cast<size_t>(best.feature)) <= best.threshold)
                lrows.push_back(r);
            else
                rrows.push_back(r);
        }
        int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        int ri = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        TreeNode& nd = tree.nodes[it.slot];
        nd.feature = best.feature;
        nd.threshold = best.threshold;
        nd.left = li;
        nd.right = ri;
        work.push_back({std::move(lrows), it.depth + 1, li});
        work.push_back({std::move(rrows), it.depth + 1, ri});
    }
    return tree;
}

inline std::vector<size_t> all_rows(size_t n) {
    std::vector<size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

inline std::vector<size_t> all_features(size_t p) {
    std::vector<size_t> f(p);
    std::iota(f.begin(), f.end(), 0);
    return f;
}

}  // namespace detail

/// ---- linear / logistic -------------------------------------------------

inline void fit_linear(ModelArtifact& m, const Dataset& xs, const std::vector<double>& y,
                       const Hyperparams& hp) {
    const size_t p = xs.p;
    std::vector<std::vector<double>> ata(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> atb(p + 1, 0.0);
    for (size_t r = 0; r < xs.n; ++r) {
        for (size_t i = 0; i <= p; ++i) {
            double xi = i < p ? xs.at(r, i) : 1.0;
            atb[i] += xi * y[r];
            for (size_t j = i; j <= p; ++j) {
                double xj = j < p ? xs.at(r, j) : 1.0;
                ata[i][j] += xi * xj;
            }
        }
    }
    for (size_t i = 0; i <= p; ++i)
        for (size_t j = 0; j < i; ++j) ata[i][j] = ata[j][i];
    for (size_t i = 0; i < p; ++i) ata[i][i] += hp.l2;  // intercept unregularized
    m.coef = {detail::solve_linear_system(std::move(ata), std::move(atb))};
}

/// Gradient descent on standardized features; deterministic zero init.
inline void fit_logistic(ModelArtifact& m, const Dataset& xs,
                         const std::vector<int>& y_idx, size_t n_classes,
                         const Hyperparams& hp) {
    const size_t p = xs.p;
    std::vector<double> mean(p, 0), sd(p, 1);
    for (size_t c = 0; c < p; ++c) {
        double s = 0;
        for (size_t r = 0; r < xs.n; ++r) s += xs.at(r, c);
        mean[c] = s / xs.n;
        double v = 0;
        for (size_t r = 0; r < xs.n; ++r) v += (xs.at(r, c) - mean[c]) * (xs.at(r, c) - mean[c]);
        sd[c] = std::sqrt(v / xs.n);
        if (sd[c] < 1e-12) sd[c] = 1.0;
    }
    const size_t k_out = n_classes == 2 ? 1 : n_classes;
    std::vector<std::vector<double>> w(k_out, std::vector<double>(p + 1, 0.0));
    const int iters = 400;
    const double lr = 0.5;
    std::vector<double> z(k_out);
    for (int it = 0; it < iters; ++it) {
        std::vector<std::vector<double>> grad(k_out, std::vector<double>(p + 1, 0.0));
        for (size_t r = 0; r < xs.n; ++r) {
            for (size_t k = 0; k < k_out; ++k) {
                double acc = w[k][p];
                for (size_t c = 0; c < p; ++c)
                    acc += w[k][c] * (xs.at(r, c) - mean[c]) / sd[c];
                z[k] = acc;
            }
            if (k_out == 1) {
                double pr = detail::sigmoid(z[0]);
                double err = pr - (y_idx[r] == 1 ? 1.0 : 0.0);
                for (size_t c = 0; c < p; ++c)
                    grad[0][c] += err * (xs.at(r, c) - mean[c]) / sd[c];
                grad[0][p] += err;
            } else {
                double zmax = *std::max_element(z.begin(), z.end());
                double denom = 0;
                for (size_t k = 0; k < k_out; ++k) denom += std::exp(z[k] - zmax);
                for (size_t k = 0; k < k_out; ++k) {
                    double pr = std::exp(z[k] - zmax) / denom;
                    double err = pr - (y_idx[r] == static_cast<int>(k) ? 1.0 : 0.0);
                    for (size_t c = 0; c < p; ++c)
                        grad[k][c] += err * (xs.at(r, c) - mean[c]) / sd[c];
                    grad[k][p] += err;
                }
            }
        }
        for (size_t k = 0; k < k_out; ++k)
            for (size_t c = 0; c <= p; ++c) {
                double g = grad[k][c] / xs.n + (c < p ? hp.l2 * 1e-4 * w[k][c] : 0.0);
                w[k][c] -= lr * g;
            }
    }
    // fold standardization back into raw-feature weights
    m.coef.assign(k_out, std::vector<double>(p + 1, 0.0));
    for (size_t k = 0; k < k_out; ++k) {
        double b = w[k][p];
        for (size_t c = 0; c < p; ++c) {
            m.coef[k][c] = w[k][c] / sd[c];
            b -= w[k][c] * mean[c] / sd[c];
        }
        m.coef[k][p] = b;
    }
}

/// ---- forests -------------------------------------------------------------

inline void fit_random_forest(ModelArtifact& m, const Dataset& xs, const std::vector<double>& y,
                              size_t n_classes, const Hyperparams& hp, uint64_t seed) {
    std::mt19937_64 rng(seed);
    const size_t p = xs.p;
    size_t mtry = m.is_classifier ? static_cast<size_t>(std::max(1.0, std::floor(std::sqrt(p))))
                                  : std::max<size_t>(1, p / 3);
    (void)n_classes;
    m.forests.assign(1, {});
    m.additive_forest = false;
    for (int t = 0; t < hp.n_estimators; ++t) {
        std::vector<size_t> rows(xs.n);
        for (auto& r : rows) r = rng() % xs.n;
        std::vector<size_t> feats = detail::all_features(p);
        std::shuffle(feats.begin(), feats.end(), rng);
        feats.resize(std::max<size_t>(1, std::min(mtry, feats.size())));
        std::sort(feats.begin(), feats.end());
        m.forests[0].push_back(
            detail::fit_regression_tree(xs, y, rows, hp.max_depth, 1, feats));
    }
}

inline void fit_gbdt(ModelArtifact& m, const Dataset& xs, const std::vector<int>& y_idx,
                     const std::vector<double>& y_val, size_t n_classes,
                     const Hyperparams& hp) {
    auto rows = detail::all_rows(xs.n);
    auto feats = detail::all_features(xs.p);
    m.additive_forest = true;
    m.learning_rate = hp.learning_rate;
    if (!m.is_classifier) {
        double mean = std::accumulate(y_val.begin(), y_val.end(), 0.0) / y_val.size();
        m.base_score = {mean};
        m.forests.assign(1, {});
        std::vector<double> f(xs.n, mean), resid(xs.n);
        for (int round = 0; round < hp.n_estimators; ++round) {
            for (size_t r = 0; r < xs.n; ++r) resid[r] = y_val[r] - f[r];
            Tree tree = detail::fit_regression_tree(xs, resid, rows, hp.max_depth, 2, feats);
            for (size_t r = 0; r < xs.n; ++r) f[r] += hp.learning_rate * tree.predict(xs.row(r));
            m.forests[0].push_back(std::move(tree));
        }
        return;
    }
    const size_t k_out = n_classes == 2 ? 1 : n_classes;
    m.forests.assign(k_out, {});
    m.base_score.assign(k_out, 0.0);
    for (size_t k = 0; k < k_out; ++k) {
        double pos = 0;
        for (size_t r = 0; r < xs.n; ++r)
            pos += (k_out == 1 ? y_idx[r] == 1 : y_idx[r] == static_cast<int>(k)) ? 1.0 : 0.0;
        double rate = std::clamp(pos / xs.n, 1e-6, 1.0 - 1e-6);
        m.base_score[k] = std::log(rate / (1.0 - rate));
        std::vector<double> f(xs.n, m.base_score[k]), grad(xs.n);
        for (int round = 0; round < hp.n_estimators; ++round) {
            for (size_t r = 0; r < xs.n; ++r) {
                double target = (k_out == 1 ? y_idx[r] == 1 : y_idx[r] == static_cast<int>(k))
                                    ? 1.0
                                    : 0.0;
                grad[r] = target - detail::sigmoid(f[r]);
            }
            Tree tree = detail::fit_regression_tree(xs, grad, rows, hp.max_depth, 2, feats);
            for (size_t r = 0; r < xs.n; ++r) f[r] += hp.learning_rate * tree.predict(xs.row(r));
            m.forests[k].push_back(std::move(tree));
        }
    }
}

/// ---- prediction ------------------------------------------------------------

inline std::vector<double> predict_value(const ModelArtifact& m, const Dataset& xs) {
    std::vector<double> out(xs.n, 0.0);
    if (!m.coef.empty()) {
        for (size_t r = 0; r < xs.n; ++r) {
            double z = m.coef[0][xs.p];
            for (size_t c = 0; c < xs.p; ++c) z += m.coef[0][c] * xs.at(r, c);
            out[r] = z;
        }
        return out;
    }
    for (size_t r = 0; r < xs.n; ++r) {
        double acc = m.additive_forest ? m.base_score[0] : 0.0;
        for (const Tree& t : m.forests[0])
            acc += (m.additive_forest ? m.learning_rate : 1.0) * t.predict(xs.row(r));
        out[r] = m.additive_forest ? acc : acc / std::max<size_t>(1, m.forests[0].size());
    }
    return out;
}

/// n x K class probabilities.
inline std::vector<std::vector<double>> predict_proba(const ModelArtifact& m,
                                                      const Dataset& xs) {
    const size_t K = m.class_labels.size();
    std::vector<std::vector<double>> out(xs.n, std::vector<double>(K, 0.0));
    if (!m.coef.empty()) {
        for (size_t r = 0; r < xs.n; ++r) {
            if (m.coef.size() == 1) {
                double z = m.coef[0][xs.p];
                for (size_t c = 0; c < xs.p; ++c) z += m.coef[0][c] * xs.at(r, c);
                double p1 = detail::sigmoid(z);
                out[r][0] = 1.0 - p1;
                out[r][1] = p1;
            } else {
                std::vector<double> z(K, 0.0);
                for (size_t k = 0; k < K; ++k) {
                    z[k] = m.coef[k][xs.p];
                    for (size_t c = 0; c < xs.p; ++c) z[k] += m.coef[k][c] * xs.at(r, c);
                }
                double zmax = *std::max_element(z.begin(), z.end());
                double denom = 0;
                for (size_t k = 0; k < K; ++k) denom += std::exp(z[k] - zmax);
                for (size_t k = 0; k < K; ++k) out[r][k] = std::exp(z[k] - zmax) / denom;
            }
        }
        return out;
    }
    if (m.additive_forest) {
        for (size_t r = 0; r < xs.n; ++r) {
            if (m.forests.size() == 1) {
                double f = m.base_score[0];
                for (const Tree& t : m.forests[0]) f += m.learning_rate * t.predict(xs.row(r));
                double p1 = detail::sigmoid(f);
                out[r][0] = 1.0 - p1;
                out[r][1] = p1;
            } else {
                double total = 0;
                for (size_t k = 0; k < K; ++k) {
                    double f = m.base_score[k];
                    for (const Tree& t : m.forests[k])
                        f += m.learning_rate * t.predict(xs.row(r));
                    out[r][k] = detail::sigmoid(f);
                    total += out[r][k];
                }
                if (total > 0)
                    for (size_t k = 0; k < K; ++k) out[r][k] /= total;
            }
        }
        return out;
    }
    // random forest: per-class one-hot vote shares
    for (size_t r = 0; r < xs.n; ++r) {
        for (const Tree& t : m.forests[0]) {
            int cls = static_cast<int>(std::lround(t.predict(xs.row(r))));
            cls = std::clamp(cls, 0, static_cast<int>(K) - 1);
            out[r][static_cast<size_t>(cls)] += 1.0;
        }
        for (size_t k = 0; k < K; ++k) out[r][k] /= std::max<size_t>(1, m.forests[0].size());
    }
    return out;
}

inline std::vector<int> predict_class_index(const ModelArtifact& m, const Dataset& xs) {
    auto proba = predict_proba(m, xs);
    std::vector<int> out(xs.n, 0);
    for (size_t r = 0; r < xs.n; ++r) {
        size_t best = 0;
        for (size_t k = 1; k < proba[r].size(); ++k)
            if (proba[r][k] > proba[r][best]) best = k;
        out[r] = static_cast<int>(best);
    }
    return out;
}

/// ---- fitting entry point with k-fold cross-validation ----------------------

struct FitLabels {
    std::vector<double> values;       // regression targets
    std::vector<int> indices;         // classifier class indices
    std::vector<std::string> labels;  // sorted class labels
};

inline ModelArtifact fit_model(ModelKind kind, const Dataset& xs, const FitLabels& y,
                               const Hyperparams& hp, int cv, uint64_t seed) {
    if (cv < 2 || static_cast<size_t>(cv) > xs.n)
        throw value_error("cv must satisfy 2 <= cv <= n_rows, got cv=" + std::to_string(cv) +
                          " with n_rows=" + std::to_string(xs.n));
    ModelArtifact m;
    m.kind = kind;
    m.is_classifier = model_kind_is_classifier(kind);
    m.feature_names = xs.feature_names;
    m.class_labels = y.labels;
    m.seed = seed;

    auto fit_on = [&](const Dataset& tx, const std::vector<double>& ty_val,
                      const std::vector<int>& ty_idx, ModelArtifact& target) {
        switch (kind) {
            case ModelKind::LinearRegression: fit_linear(target, tx, ty_val, hp); break;
            case ModelKind::LogisticRegression:
                fit_logistic(target, tx, ty_idx, y.labels.size(), hp);
                break;
            case ModelKind::RandomForestRegressor:
                fit_random_forest(target, tx, ty_val, 0, hp, seed);
                break;
            case ModelKind::RandomForestClassifier: {
                std::vector<double> as_double(ty_idx.begin(), ty_idx.end());
                fit_random_forest(target, tx, as_double, y.labels.size(), hp, seed);
                break;
            }
            case ModelKind::GbdtRegressor:
                fit_gbdt(target, tx, ty_idx, ty_val, 0, hp);
                break;
            case ModelKind::GbdtClassifier:
                fit_gbdt(target, tx, ty_idx, ty_val, y.labels.size(), hp);
                break;
        }
    };

    // deterministic fold assignment from the trial seed
    std::vector<size_t> perm(xs.n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> fold(xs.n);
    for (size_t i = 0; i < xs.n; ++i) fold[perm[i]] = static_cast<int>(i % cv);

    double score_sum = 0;
    int used_folds = 0;
    for (int f = 0; f < cv; ++f) {
        Dataset tx, vx;
        tx.p = vx.p = xs.p;
        tx.feature_names = vx.feature_names = xs.feature_names;
        std::vector<double> ty_val, vy_val;
        std::vector<int> ty_idx, vy_idx;
        for (size_t r = 0; r < xs.n; ++r) {
            bool held = fold[r] == f;
            auto& dst = held ? vx : tx;
            dst.x.insert(dst.x.end(), xs.row(r), xs.row(r) + xs.p);
            dst.n += 1;
            if (m.is_classifier) (held ? vy_idx : ty_idx).push_back(y.indices[r]);
            else (held ? vy_val : ty_val).push_back(y.values[r]);
        }
        if (vx.n == 0 || tx.n == 0) continue;
        if (m.is_classifier) {
            bool all_classes = true;
            std::vector<uint8_t> seen(y.labels.size(), 0);
            for (int idx : ty_idx) seen[static_cast<size_t>(idx)] = 1;
            for (auto s : seen) all_classes = all_classes && s;
            if (!all_classes) continue;  // degenerate fold, skip
        }
        ModelArtifact fm = m;
        fit_on(tx, ty_val, ty_idx, fm);
        if (m.is_classifier) {
            auto pred = predict_class_index(fm, vx);
            size_t ok = 0;
            for (size_t i = 0; i < pred.size(); ++i) ok += pred[i] == vy_idx[i];
            score_sum += static_cast<double>(ok) / pred.size();
        } else {
            auto pred = predict_value(fm, vx);
            score_sum += -metrics::rmse(pred, vy_val);
        }
        ++used_folds;
    }
    if (used_folds == 0)
        throw value_error("cross-validation produced no usable folds (classes too sparse)");
    m.cv_score = score_sum / used_folds;

    fit_on(xs, y.values, y.indices, m);
    return m;
}

/// ---- binary serialization ---------------------------------------------------

inline constexpr char kModelMagic[] = "TPLMODEL1";

inline nlohmann::json model_to_json(const ModelArtifact& m) {
    nlohmann::json j;
    j["kind"] = model_kind_name(m.kind);
    j["feature_names"] = m.feature_names;
    j["class_labels"] = m.class_labels;
    j["target_dtype"] = dtype_name(m.target_dtype);
    j["target_name"] = m.target_name;
    j["cv_score"] = m.cv_score;
    j["seed"] = m.seed;
    j["learning_rate"] = m.learning_rate;
    j["additive"] = m.additive_forest;
    j["base_score"] = m.base_score;
    j["coef"] = m.coef;
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [k, v] : m.best_params) params.push_back({k, v});
    j["best_params"] = params;
    nlohmann::json forests = nlohmann::json::array();
    for (const auto& forest : m.forests) {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& tree : forest) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& nd : tree.nodes)
                nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
            trees.push_back(nodes);
        }
        forests.push_back(trees);
    }
    j["forests"] = forests;
    return j;
}

inline ModelArtifact model_from_json(const nlohmann::json& j) {
    ModelArtifact m;
    std::string kind = j.at("kind");
    for (ModelKind k :
         {ModelKind::LinearRegression, ModelKind::LogisticRegression,
          ModelKind::RandomForestRegressor, ModelKind::RandomForestClassifier,
          ModelKind::GbdtRegressor, ModelKind::GbdtClassifier})
        if (kind == model_kind_name(k)) m.kind = k;
    m.is_classifier = model_kind_is_classifier(m.kind);
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    m.target_dtype = *dtype_from_name(j.at("target_dtype"));
    m.target_name = j.at("target_name");
    m.cv_score = j.at("cv_score");
    m.seed = j.at("seed");
    m.learning_rate = j.at("learning_rate");
    m.additive_forest = j.at("additive");
    m.base_score = j.at("base_score").get<std::vector<double>>();
    m.coef = j.at("coef").get<std::vector<std::vector<double>>>();
    for (const auto& kv : j.at("best_params"))
        m.best_params.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
    for (const auto& trees : j.at("forests")) {
        std::vector<Tree> forest;
        for (const auto& nodes : trees) {
            Tree t;
            for (const auto& nd : nodes) {
                TreeNode n;
                n.feature = nd.at(0);
                n.threshold = nd.at(1);
                n.left = nd.at(2);
                n.right = nd.at(3);
                n.value = nd.at(4);
                t.nodes.push_back(n);
            }
            forest.push_back(std::move(t));
        }
        m.forests.push_back(std::move(forest));
    }
    return m;
}

inline void save_model_file(const ModelArtifact& m, const std::string& filepath) {
    std::filesystem::path p(filepath);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(filepath, std::ios::binary);
    if (!out) throw ToolError("OSError", "cannot open file for writing: '" + filepath + "'");
    auto blob = nlohmann::json::to_msgpack(model_to_json(m));
    out.write(kModelMagic, sizeof(kModelMagic) - 1);
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size()));
    if (!out) throw ToolError("OSError", "write failed: '" + filepath + "'");
}

inline ModelArtifact load_model_file(const std::string& filepath) {
    std::ifstream in(filepath, std::ios::binary);
    if (!in)
        throw ToolError("FileNotFoundError",
                        "[Errno 2] No such file or directory: '" + filepath + "'");
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const size_t magic_len = sizeof(kModelMagic) - 1;
    if (body.size() < magic_len || body.compare(0, magic_len, kModelMagic) != 0)
        throw value_error("not a model file: '" + filepath + "'");
    std::vector<uint8_t> blob(body.begin() + static_cast<long>(magic_len), body.end());
    return model_from_json(nlohmann::json::from_msgpack(blob));
}

}  // namespace learn

}  // namespace toolplan
