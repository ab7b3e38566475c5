#pragma once

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "toolplan/catalog.hpp"
#include "toolplan/competition.hpp"
#include "toolplan/metrics.hpp"
#include "toolplan/search.hpp"

namespace toolplan::harness {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// bundled synthetic competitions

namespace synth {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0, 1)(rng);
}

/// Regression with a known linear signal plus a categorical effect.
inline Table make_linear_source(size_t rows, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Column x1 = Column::make("x1", Dtype::Float, rows);
    Column x2 = Column::make("x2", Dtype::Float, rows);
    Column x3 = Column::make("x3", Dtype::Float, rows);
    Column grp = Column::make("grade", Dtype::Text, rows);
    Column y = Column::make("y", Dtype::Float, rows);
    static const char* cats[] = {"low", "mid", "high"};
    for (size_t i = 0; i < rows; ++i) {
        double a = uniform(rng, -2, 2), b = uniform(rng, -2, 2), c = uniform(rng, -1, 1);
        int g = static_cast<int>(rng() % 3);
        x1.num[i] = a;
        x2.num[i] = b;
        x3.num[i] = c;
        grp.str[i] = cats[g];
        y.num[i] = 3.0 * a - 2.0 * b + 1.5 * g + uniform(rng, -0.2, 0.2);
        if (rng() % 12 == 0) x2.missing[i] = 1;
        if (rng() % 15 == 0) grp.missing[i] = 1;
    }
    Table t;
    t.add_column(std::move(x1));
    t.add_column(std::move(x2));
    t.add_column(std::move(x3));
    t.add_column(std::move(grp));
    t.add_column(std::move(y));
    return t;
}

/// Binary classification, mostly separable with a small label flip.
inline Table make_binary_source(size_t rows, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Column x1 = Column::make("x1", Dtype::Float, rows);
    Column x2 = Column::make("x2", Dtype::Float, rows);
    Column color = Column::make("color", Dtype::Text, rows);
    Column label = Column::make("label", Dtype::Bool, rows);
    static const char* cats[] = {"red", "blue", "green"};
    static const double bias[] = {1.0, -1.0, 0.0};
    for (size_t i = 0; i < rows; ++i) {
        double a = uniform(rng, -2, 2), b = uniform(rng, -2, 2);
        int c = static_cast<int>(rng() % 3);
        x1.num[i] = a;
        x2.num[i] = b;
        color.str[i] = cats[c];
        bool positive = 1.4 * a + 1.2 * b + bias[c] > 0;
        if (rng() % 25 == 0) positive = !positive;  // 4% label noise
        label.num[i] = positive ? 1.0 : 0.0;
        if (rng() % 14 == 0) x2.missing[i] = 1;
        if (rng() % 18 == 0) color.missing[i] = 1;
    }
    Table t;
    t.add_column(std::move(x1));
    t.add_column(std::move(x2));
    t.add_column(std::move(color));
    t.add_column(std::move(label));
    return t;
}

/// Three well-separated blobs with a correlated categorical hint.
inline Table make_multiclass_source(size_t rows, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Column x1 = Column::make("x1", Dtype::Float, rows);
    Column x2 = Column::make("x2", Dtype::Float, rows);
    Column region = Column::make("region", Dtype::Text, rows);
    Column target = Column::make("category", Dtype::Text, rows);
    static const char* classes[] = {"alpha", "beta", "gamma"};
    static const double cx[] = {-2.5, 0.0, 2.5};
    static const double cy[] = {1.5, -2.5, 1.5};
    static const char* regions[] = {"west", "south", "east"};
    for (size_t i = 0; i < rows; ++i) {
        int k = static_cast<int>(rng() % 3);
        x1.num[i] = cx[k] + uniform(rng, -0.9, 0.9);
        x2.num[i] = cy[k] + uniform(rng, -0.9, 0.9);
        region.str[i] = regions[rng() % 20 == 0 ? (k + 1) % 3 : k];
        target.str[i] = classes[k];
        if (rng() % 16 == 0) x1.missing[i] = 1;
        if (rng() % 19 == 0) region.missing[i] = 1;
    }
    Table t;
    t.add_column(std::move(x1));
    t.add_column(std::move(x2));
    t.add_column(std::move(region));
    t.add_column(std::move(target));
    return t;
}

inline void write_leaderboard(const std::string& path, bool higher_is_better) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path);
    // 40 plausible public scores spanning weak to strong entries
    for (int i = 0; i < 40; ++i) {
        double score = higher_is_better ? 0.50 + i * 0.0115 : 4.0 - i * 0.09;
        out << format_double(score) << "\n";
    }
}

}  // namespace synth

/// Writes the source csv + leaderboard for a bundled generator competition if
/// not already present. User-supplied sources are validated instead.
inline std::string ensure_source_data(const CompetitionSpec& comp, const fs::path& comp_dir) {
    fs::create_directories(comp_dir);
    std::string source_path = (comp_dir / "source.csv").string();
    if (comp.source.contains("source_train")) {
        std::string provided = comp.source["source_train"].get<std::string>();
        if (!fs::exists(provided))
            throw ToolError("FileNotFoundError",
                            "[Errno 2] No such file or directory: '" + provided + "'");
        return provided;
    }
    std::string generator = comp.source.value("generator", std::string());
    size_t rows = comp.source.value("rows", 600);
    uint64_t seed = comp.source.value("seed", 1);
    if (!fs::exists(source_path)) {
        Table t;
        if (generator == "synthetic_linear") t = synth::make_linear_source(rows, seed);
        else if (generator == "synthetic_binary") t = synth::make_binary_source(rows, seed);
        else if (generator == "synthetic_multiclass")
            t = synth::make_multiclass_source(rows, seed);
        else throw value_error("unknown data generator '" + generator + "'");
        csv::write_csv(t, source_path);
    }
    if (!fs::exists(comp.leaderboard_path))
        synth::write_leaderboard(comp.leaderboard_path, comp.higher_is_better);
    return source_path;
}

// ---------------------------------------------------------------------------
// sampling / splitting

inline constexpr size_t kDefaultSampleN = 10000;
inline constexpr double kDefaultTestFraction = 0.2;

/// Deterministic subsample-then-split: up to sample_n rows without
/// replacement, then the configured fraction reserved as the internal test
/// set. The emitted test file drops the target; labels stay private on the
/// spec for scoring.
inline void prepare_splits(CompetitionSpec& comp, const std::string& source_csv,
                           size_t sample_n = kDefaultSampleN,
                           double test_fraction = kDefaultTestFraction, uint64_t seed = 1) {
    Table source = csv::read_csv(source_csv);
    if (source.n_rows() < 2)
        throw value_error("source data has fewer than 2 rows; cannot split");
    if (!source.has_column(comp.target))
        throw value_error("source data lacks the target column '" + comp.target + "'");

    std::vector<size_t> order(source.n_rows());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    size_t take = std::min(sample_n, source.n_rows());
    order.resize(take);

    size_t test_n = std::max<size_t>(1, static_cast<size_t>(std::llround(take * test_fraction)));
    if (test_n >= take) test_n = take - 1;
    std::vector<uint8_t> is_test(source.n_rows(), 0), in_sample(source.n_rows(), 0);
    for (size_t i = 0; i < take; ++i) {
        in_sample[order[i]] = 1;
        if (i < test_n) is_test[order[i]] = 1;
    }
    std::vector<uint8_t> train_mask(source.n_rows()), test_mask(source.n_rows());
    for (size_t i = 0; i < source.n_rows(); ++i) {
        train_mask[i] = in_sample[i] && !is_test[i];
        test_mask[i] = in_sample[i] && is_test[i];
    }
    Table train = source.filter_rows(train_mask);
    Table test = source.filter_rows(test_mask);

    comp.private_labels = test.column(comp.target);
    test.drop_column(comp.target);
    if (!comp.id_column.empty() && test.has_column(comp.id_column))
        comp.test_ids = test.column(comp.id_column);

    csv::write_csv(train, comp.train_path);
    csv::write_csv(test, comp.test_path);
    comp.train_rows = train.n_rows();
    comp.test_rows = test.n_rows();
}

// ---------------------------------------------------------------------------
// scoring

struct ScoreResult {
    bool valid = false;
    double score = 0;
    std::string reason;
};

inline ScoreResult score_submission(const CompetitionSpec& comp, const std::string& file) {
    ScoreResult out;
    if (!fs::exists(file)) {
        out.reason = "submission file does not exist";
        return out;
    }
    Table sub;
    try {
        sub = csv::read_csv(file);
    } catch (const ToolError& e) {
        out.reason = std::string("submission unreadable: ") + e.what();
        return out;
    }
    if (sub.n_rows() != comp.test_rows) {
        out.reason = "row count " + std::to_string(sub.n_rows()) + " does not match test set " +
                     std::to_string(comp.test_rows);
        return out;
    }
    for (const auto& col : comp.submission_columns)
        if (!sub.has_column(col)) {
            out.reason = "missing required column '" + col + "'";
            return out;
        }
    if (sub.missing_cells() > 0) {
        out.reason = "submission contains missing values";
        return out;
    }
    if (!comp.private_labels) {
        out.reason = "competition has no private labels prepared";
        return out;
    }

    const Column& truth = *comp.private_labels;
    const Column& pred = sub.column(comp.target);
    if (comp.metric == "rmse" || comp.metric == "rmsle" || comp.metric == "mae") {
        if (!pred.is_numeric()) {
            out.reason = "prediction column is not numeric";
            return out;
        }
        std::vector<double> p(pred.num.begin(), pred.num.end());
        std::vector<double> t(truth.num.begin(), truth.num.end());
        out.score = comp.metric == "rmse" ? metrics::rmse(p, t)
                    : comp.metric == "mae" ? metrics::mae(p, t)
                                           : metrics::rmsle(p, t);
    } else if (comp.metric == "accuracy" || comp.metric == "f1") {
        std::vector<std::string> p, t;
        for (size_t i = 0; i < pred.size(); ++i) p.push_back(pred.cell_string(i));
        for (size_t i = 0; i < truth.size(); ++i) t.push_back(truth.cell_string(i));
        out.score = comp.metric == "accuracy" ? metrics::accuracy(p, t) : metrics::f1(p, t);
    } else if (comp.metric == "auc") {
        if (!pred.is_numeric()) {
            out.reason = "auc needs probability predictions";
            return out;
        }
        // positive class = lexicographically larger label
        std::vector<std::string> labels;
        for (size_t i = 0; i < truth.size(); ++i) labels.push_back(truth.cell_string(i));
        std::vector<std::string> classes = labels;
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        if (classes.size() != 2) {
            out.reason = "auc needs a binary target";
            return out;
        }
        std::vector<uint8_t> pos;
        for (const auto& l : labels) pos.push_back(l == classes.back());
        std::vector<double> scores(pred.num.begin(), pred.num.end());
        out.score = metrics::auc(scores, pos);
    } else {
        out.reason = "unknown metric '" + comp.metric + "'";
        return out;
    }
    out.valid = true;
    return out;
}

/// Fraction of leaderboard entries strictly worse than the score, times 100.
inline double leaderboard_percentile(const CompetitionSpec& comp, double score) {
    std::ifstream in(comp.leaderboard_path);
    if (!in)
        throw ToolError("FileNotFoundError", "[Errno 2] No such file or directory: '" +
                                                 comp.leaderboard_path + "'");
    std::vector<double> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto v = parse_double(line);
        if (v) entries.push_back(*v);
    }
    if (entries.empty()) throw value_error("leaderboard file is empty");
    size_t worse = 0;
    for (double e : entries) worse += comp.higher_is_better ? (e < score) : (e > score);
    return 100.0 * static_cast<double>(worse) / static_cast<double>(entries.size());
}

// ---------------------------------------------------------------------------
// benchmark runner

struct TrialResult {
    uint64_t seed = 0;
    bool valid = false;
    bool solved = false;
    double score = 0;
    double percentile = 0;  // 0 when invalid
    std::string log_path;
    std::string submission_path;
    std::string invalid_reason;
};

struct BenchmarkReport {
    std::string competition;
    std::string algorithm;
    std::string policy;
    size_t trials = 0;
    double consistency = 0;
    double median_percentile = 0;
    double mean_percentile = 0;
    double std_percentile = 0;
    std::vector<TrialResult> results;
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

/// Consistency = valid / trials exactly; percentile statistics over all
/// trials (invalid trials contribute their fixed 0 percentile).
inline void aggregate_results(BenchmarkReport& report) {
    size_t valid = 0;
    std::vector<double> percentiles;
    for (const auto& r : report.results) {
        valid += r.valid;
        percentiles.push_back(r.valid ? r.percentile : 0.0);
    }
    report.trials = report.results.size();
    if (report.results.empty()) return;
    report.consistency = static_cast<double>(valid) / static_cast<double>(report.trials);
    report.median_percentile = median(percentiles);
    double mean =
        std::accumulate(percentiles.begin(), percentiles.end(), 0.0) / percentiles.size();
    report.mean_percentile = mean;
    double var = 0;
    for (double p : percentiles) var += (p - mean) * (p - mean);
    report.std_percentile = std::sqrt(var / percentiles.size());
}

inline ordered_json report_to_json(const BenchmarkReport& r) {
    ordered_json out;
    out["competition"] = r.competition;
    out["algorithm"] = r.algorithm;
    out["policy"] = r.policy;
    out["trials"] = r.trials;
    out["consistency"] = r.consistency;
    out["median_percentile"] = r.median_percentile;
    out["mean_percentile"] = r.mean_percentile;
    out["std_percentile"] = r.std_percentile;
    ordered_json trials = ordered_json::array();
    for (const auto& t : r.results) {
        ordered_json j;
        j["seed"] = t.seed;
        j["valid"] = t.valid;
        j["solved"] = t.solved;
        j["score"] = t.score;
        j["percentile"] = t.percentile;
        j["log_path"] = t.log_path;
        j["submission_path"] = t.submission_path;
        if (!t.invalid_reason.empty()) j["invalid_reason"] = t.invalid_reason;
        trials.push_back(j);
    }
    out["trial_results"] = trials;
    return out;
}

inline std::string render_report_table(const std::vector<BenchmarkReport>& reports) {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-20s %-14s %-9s %7s %8s %8s %8s %8s\n", "competition",
                  "algorithm", "policy", "trials", "consist", "median", "mean", "std");
    out += buf;
    out += std::string(88, '-') + "\n";
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf), "%-20s %-14s %-9s %7zu %8.2f %8.2f %8.2f %8.2f\n",
                      r.competition.c_str(), r.algorithm.c_str(), r.policy.c_str(), r.trials,
                      r.consistency, r.median_percentile, r.mean_percentile, r.std_percentile);
        out += buf;
    }
    return out;
}

enum class AlgorithmKind { React, Lats, MctsOutcome, MctsShaped, Hierarchical };

inline std::optional<AlgorithmKind> algorithm_from_name(const std::string& s) {
    if (s == "react") return AlgorithmKind::React;
    if (s == "lats") return AlgorithmKind::Lats;
    if (s == "mcts-outcome") return AlgorithmKind::MctsOutcome;
    if (s == "mcts-shaped") return AlgorithmKind::MctsShaped;
    if (s == "hierarchical") return AlgorithmKind::Hierarchical;
    return std::nullopt;
}

inline const char* algorithm_name(AlgorithmKind a) {
    switch (a) {
        case AlgorithmKind::React: return "react";
        case AlgorithmKind::Lats: return "lats";
        case AlgorithmKind::MctsOutcome: return "mcts-outcome";
        case AlgorithmKind::MctsShaped: return "mcts-shaped";
        case AlgorithmKind::Hierarchical: return "hierarchical";
    }
    return "?";
}

struct RunOptions {
    AlgorithmKind algorithm = AlgorithmKind::React;
    std::string policy = "scripted";  // scripted | llm
    size_t trials = 10;
    uint64_t base_seed = 1;
    double epsilon = 0.0;  // scripted noise
    search::SearchConfig search;
    LlmConfig llm;
    std::shared_ptr<LlmClient> llm_client;  // injected in tests; HTTP otherwise
    fs::path out_dir = "runs";
    size_t jobs = 1;
};

/// Renders the per-trial prompt: the competition template with the concrete
/// paths substituted.
inline std::string render_prompt(const CompetitionSpec& comp,
                                 const std::string& submission_path,
                                 const std::string& model_path) {
    std::string text = comp.prompt_template;
    auto subst = [&](const std::string& key, const std::string& value) {
        size_t pos;
        while ((pos = text.find(key)) != std::string::npos) text.replace(pos, key.size(), value);
    };
    subst("{train_path}", comp.train_path);
    subst("{test_path}", comp.test_path);
    subst("{target}", comp.target);
    subst("{submission_path}", submission_path);
    subst("{model_path}", model_path);
    return text;
}

inline TrialResult run_one_trial(const CompetitionSpec& comp, const Registry& registry,
                                 const json& grids, const RunOptions& opt, uint64_t seed) {
    std::string algo = algorithm_name(opt.algorithm);
    fs::path sub_dir = opt.out_dir / "submissions" / comp.name / algo;
    fs::path log_dir = opt.out_dir / "logs" / comp.name / algo;
    fs::create_directories(sub_dir);
    fs::create_directories(log_dir);
    std::string submission_path = (sub_dir / ("trial_" + std::to_string(seed) + ".csv")).string();
    std::string model_path =
        (opt.out_dir / "model_saves" / comp.name / ("trial_" + std::to_string(seed) + ".bin"))
            .string();
    std::string log_path = (log_dir / ("trial_" + std::to_string(seed) + ".json")).string();

    CompetitionSpec trial_comp = comp;
    trial_comp.prompt_template = render_prompt(comp, submission_path, model_path);

    std::unique_ptr<Policy> policy;
    std::unique_ptr<LlmEvaluator> evaluator;
    std::unique_ptr<Clock> clock;
    if (opt.policy == "scripted") {
        policy = std::make_unique<ScriptedPolicy>(
            build_playbook(trial_comp, submission_path, model_path), seed, opt.epsilon);
        clock = std::make_unique<DeterministicClock>();
    } else {
        auto client = opt.llm_client ? opt.llm_client
                                     : std::make_shared<HttpLlmClient>(opt.llm);
        policy = std::make_unique<LlmPolicy>(opt.llm, client);
        evaluator = std::make_unique<LlmEvaluator>(opt.llm, client);
        clock = std::make_unique<SystemClock>();
    }
    if (opt.algorithm == AlgorithmKind::Lats && !evaluator) {
        auto client = opt.llm_client ? opt.llm_client
                                     : std::make_shared<HttpLlmClient>(opt.llm);
        evaluator = std::make_unique<LlmEvaluator>(opt.llm, client);
    }

    search::EngineEnv env;
    env.registry = &registry;
    env.competition = &trial_comp;
    env.model_grids = &grids;
    env.policy = policy.get();
    env.evaluator = evaluator.get();
    env.clock = clock.get();
    env.algorithm_name = algo;

    search::SearchConfig cfg = opt.search;
    cfg.seed = seed;
    switch (opt.algorithm) {
        case AlgorithmKind::React: break;
        case AlgorithmKind::Lats: cfg.reward_mode = search::RewardMode::LlmEval; break;
        case AlgorithmKind::MctsOutcome: cfg.reward_mode = search::RewardMode::Outcome; break;
        case AlgorithmKind::MctsShaped: cfg.reward_mode = search::RewardMode::Shaped; break;
        case AlgorithmKind::Hierarchical: break;
    }

    search::SolutionReport report;
    switch (opt.algorithm) {
        case AlgorithmKind::React: report = search::react_run(env, cfg); break;
        case AlgorithmKind::Hierarchical: report = search::hierarchical_run(env, cfg); break;
        default: report = search::mcts_run(env, cfg); break;
    }

    {
        std::ofstream out(log_path, std::ios::binary);
        out << report.log.dump(2) << "\n";
    }

    TrialResult result;
    result.seed = seed;
    result.solved = report.solved;
    result.log_path = log_path;
    result.submission_path = report.submission_file.value_or(submission_path);
    ScoreResult score = score_submission(trial_comp, result.submission_path);
    result.valid = score.valid;
    result.invalid_reason = score.reason;
    if (score.valid) {
        result.score = score.score;
        result.percentile = leaderboard_percentile(trial_comp, score.score);
    }
    return result;
}

/// Runs `trials` independent seeds through a bounded worker pool and
/// aggregates consistency and percentile statistics.
inline BenchmarkReport run_trials(const CompetitionSpec& comp, const Registry& registry,
                                  const json& grids, const RunOptions& opt) {
    BenchmarkReport report;
    report.competition = comp.name;
    report.algorithm = algorithm_name(opt.algorithm);
    report.policy = opt.policy;
    report.trials = opt.trials;
    report.results.resize(opt.trials);

    size_t jobs = std::max<size_t>(1, std::min(opt.jobs, opt.trials));
    std::mutex mu;
    size_t next = 0;
    auto worker = [&]() {
        for (;;) {
            size_t i;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= opt.trials) return;
                i = next++;
            }
            TrialResult r = run_one_trial(comp, registry, grids, opt, opt.base_seed + i);
            std::lock_guard<std::mutex> lock(mu);
            report.results[i] = std::move(r);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    aggregate_results(report);
    return report;
}

// ---------------------------------------------------------------------------
// competition config loading

inline CompetitionSpec load_competition_config(const json& config, const fs::path& data_dir) {
    CompetitionSpec comp;
    comp.name = config.at("name").get<std::string>();
    comp.task = config.at("task").get<std::string>();
    comp.target = config.at("target").get<std::string>();
    comp.id_column = config.value("id_column", std::string());
    comp.metric = config.at("metric").get<std::string>();
    comp.higher_is_better = config.at("higher_is_better").get<bool>();
    comp.submission_columns =
        config.at("submission_columns").get<std::vector<std::string>>();
    comp.prompt_template = config.value("prompt_template", std::string());
    comp.source = config.value("source", json::object());

    static const std::map<std::string, std::vector<std::string>> metric_by_task = {
        {"regression", {"rmse", "rmsle", "mae"}},
        {"binary", {"accuracy", "f1", "auc"}},
        {"multiclass", {"accuracy", "f1"}},
    };
    auto it = metric_by_task.find(comp.task);
    if (it == metric_by_task.end())
        throw value_error("unknown task kind '" + comp.task + "'");
    if (std::find(it->second.begin(), it->second.end(), comp.metric) == it->second.end())
        throw value_error("metric '" + comp.metric + "' is not valid for task '" + comp.task +
                          "'");

    fs::path comp_dir = data_dir / comp.name;
    comp.train_path = (comp_dir / "train.csv").string();
    comp.test_path = (comp_dir / "test.csv").string();
    comp.leaderboard_path = (comp_dir / "leaderboard.txt").string();
    return comp;
}

/// Full preparation: source data, sampling, splitting. Skips the split when
/// the prepared files already exist (the prepared labels are re-derived).
inline CompetitionSpec prepare_competition(const json& config, const fs::path& data_dir,
                                           size_t sample_n = kDefaultSampleN,
                                           double test_fraction = kDefaultTestFraction,
                                           uint64_t seed = 1) {
    CompetitionSpec comp = load_competition_config(config, data_dir);
    fs::path comp_dir = data_dir / comp.name;
    std::string source = ensure_source_data(comp, comp_dir);
    prepare_splits(comp, source, sample_n, test_fraction, seed);
    return comp;
}

}  // namespace toolplan::harness
