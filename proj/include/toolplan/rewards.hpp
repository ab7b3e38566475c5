#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "toolplan/competition.hpp"
#include "toolplan/scratchpad.hpp"
#include "toolplan/stages.hpp"
#include "toolplan/tool_registry.hpp"

namespace toolplan::rewards {

/// One executed step of a trajectory, root to current node. Reasoning-only
/// nodes have a null call/result.
struct StepInfo {
    const NodeScratchpad* pad = nullptr;
    const ToolCall* call = nullptr;
    const ToolResult* result = nullptr;
};

using TrajectoryView = std::vector<StepInfo>;

struct RewardContext {
    const CompetitionSpec* comp = nullptr;
    const Registry* registry = nullptr;  // used for docstring feedback only
};

struct StageCheck {
    bool passed = false;
    std::string feedback;
};

/// Per-trajectory bookkeeping: stage-wise rewards fire once per trajectory
/// and only after every earlier stage has been met.
struct StageStatus {
    std::array<int, kStageCount> met_at;

    StageStatus() { met_at.fill(-1); }

    bool met(StageId s) const { return met_at[static_cast<size_t>(s)] >= 0; }

    bool prerequisites_met(StageId s) const {
        for (int j = 0; j < static_cast<int>(s); ++j)
            if (met_at[static_cast<size_t>(j)] < 0) return false;
        return true;
    }

    std::optional<StageId> lowest_unmet() const {
        for (StageId s : kAllStages)
            if (!met(s)) return s;
        return std::nullopt;
    }
};

struct RewardSignal {
    double value = 0;
    std::optional<StageId> stage;
    std::string feedback;
};

inline constexpr double kDepthPenaltyPerLevel = 0.1;

inline double depth_adjust(double r, int depth) { return r - kDepthPenaltyPerLevel * depth; }

namespace detail {

inline bool call_succeeded(const StepInfo& s, const char* tool) {
    return s.call && s.result && s.result->ok && s.call->tool == tool;
}

inline std::string kwarg_string(const ToolCall& call, const char* name) {
    if (call.func_kwargs.contains(name) && call.func_kwargs[name].is_string())
        return call.func_kwargs[name].get<std::string>();
    return {};
}

/// Deepest artifact of the given kind anywhere on the path.
inline const Artifact* deepest_of_kind(const TrajectoryView& traj, ObjectKind kind) {
    for (auto it = traj.rbegin(); it != traj.rend(); ++it) {
        if (!it->pad) continue;
        const auto& entries = it->pad->entries();
        for (auto e = entries.rbegin(); e != entries.rend(); ++e)
            if (e->kind == kind) return e->value.get();
    }
    return nullptr;
}

/// The table produced by the deepest successful read_data of `filepath`.
inline const Table* deepest_loaded(const TrajectoryView& traj, const std::string& filepath) {
    for (auto it = traj.rbegin(); it != traj.rend(); ++it) {
        if (!call_succeeded(*it, "read_data")) continue;
        if (kwarg_string(*it->call, "filepath") != filepath) continue;
        if (it->result->created.empty() || !it->pad) continue;
        const ScratchpadEntry* e = it->pad->find(it->result->created.front().first);
        if (e && e->kind == ObjectKind::Table) return &e->value->table();
    }
    return nullptr;
}

inline PathView path_up_to(const TrajectoryView& traj, size_t node_index) {
    PathView out;
    for (size_t i = 0; i <= node_index && i < traj.size(); ++i)
        if (traj[i].pad) out.pads.push_back(traj[i].pad);
    return out;
}

inline std::string dtype_word(Dtype d) {
    switch (d) {
        case Dtype::Bool: return "boolean";
        case Dtype::Int: return "integer";
        case Dtype::Float: return "float";
        case Dtype::Category: return "categorical";
        case Dtype::Datetime: return "datetime";
        default: return "text";
    }
}

inline size_t unique_count(const Column& c) {
    std::vector<std::string> seen;
    for (size_t i = 0; i < c.size(); ++i) {
        std::string v = c.missing[i] ? std::string() : c.cell_string(i);
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
    }
    return seen.size();
}

/// Submission table bound to the deepest successful qualifying
/// save_dataframe_to_csv call, together with the saved path.
struct SavedSubmission {
    const Table* table = nullptr;
    std::string filepath;
};

inline std::optional<SavedSubmission> deepest_saved_frame(const TrajectoryView& traj) {
    for (size_t i = traj.size(); i-- > 0;) {
        const StepInfo& s = traj[i];
        if (!call_succeeded(s, "save_dataframe_to_csv")) continue;
        auto binding = s.call->bindings.find("df");
        if (binding == s.call->bindings.end()) continue;
        PathView view = path_up_to(traj, i);
        const ScratchpadEntry* e = try_resolve(view, binding->second);
        if (!e) continue;
        const Table* frame = frame_of(*e->value);
        if (!frame) continue;
        return SavedSubmission{frame, kwarg_string(*s.call, "filepath")};
    }
    return std::nullopt;
}

inline bool submission_table_valid(const Table& t, const CompetitionSpec& comp) {
    if (comp.test_rows != 0 && t.n_rows() != comp.test_rows) return false;
    for (const auto& col : comp.submission_columns)
        if (!t.has_column(col)) return false;
    if (t.missing_cells() > 0) return false;
    return true;
}

}  // namespace detail

/// Byte-stable feedback strings (golden-log contract).
namespace feedback {

inline std::string stage_success(StageId s, const TrajectoryView& traj,
                                 const RewardContext& ctx) {
    switch (s) {
        case StageId::TrainDataLoading:
            return "Human Feedback: Verified that the train data was loaded successfully";
        case StageId::TestDataLoading:
            return "Human Feedback: Verified that the test data was loaded successfully";
        case StageId::CombineTrainTest:
            return "Human Feedback: Verified that the train and test data were combined "
                   "successfully";
        case StageId::DataCleaning:
            return "Human Feedback: Verified that the data cleaning is complete and no missing "
                   "values remain";
        case StageId::FeatureEngineering:
            return "Human Feedback: Verified that the feature engineering is complete and all "
                   "columns are numeric (int/float)";
        case StageId::SplitTrainTest:
            return "Human Feedback: Verified that the train and test data were split "
                   "successfully";
        case StageId::TrainFeaturesTarget:
            return "Human Feedback: Verified that the train data was converted to features and "
                   "target successfully";
        case StageId::TestFeatures:
            return "Human Feedback: Verified that the test data was converted to features "
                   "successfully";
        case StageId::Modeling:
            return "Human Feedback: Verified that the modeling was successful";
        case StageId::CreateSubmission: {
            auto saved = detail::deepest_saved_frame(traj);
            std::string cols = "0";
            std::string kinds = "unknown";
            if (saved && saved->table) {
                size_t data_cols = saved->table->n_cols();
                std::vector<std::string> words;
                for (const auto& c : saved->table->columns()) {
                    if (ctx.comp && c.name == ctx.comp->id_column) {
                        --data_cols;
                        continue;
                    }
                    std::string w = detail::dtype_word(c.dtype);
                    if (std::find(words.begin(), words.end(), w) == words.end())
                        words.push_back(w);
                }
                cols = std::to_string(data_cols);
                kinds = join(words, ", ");
            }
            return "Human Feedback: Verified that the submission DataFrame was created "
                   "successfully with " +
                   cols + " columns (" + kinds + ") and no missing values.";
        }
    }
    return "";
}

inline std::string submission_failure(const RewardContext& ctx) {
    std::string doc;
    if (ctx.registry) {
        const ToolDescriptor* d = ctx.registry->find("save_dataframe_to_csv");
        if (d) doc = d->docstring();
    }
    return "Human Feedback: submission DataFrame was NOT created successfully. Please check the "
           "signature of the wrapped function if any, and call it with the correct arguments. "
           "The tool signature is This tool reads arguments from the scratchpad using "
           "`bindings`, passes them to the internal function.\n\n        Applied "
           "save_dataframe_to_csv with docstring: " +
           doc;
}

inline std::string tool_failure(const std::string& tool_name, const std::string& error_message,
                                const RewardContext& ctx) {
    std::string doc;
    if (ctx.registry) {
        const ToolDescriptor* d = ctx.registry->find(tool_name);
        if (d) doc = d->docstring();
    }
    return "Human Feedback: The last tool call to '" + tool_name +
           "' failed with: " + error_message + "\nThe tool docstring is: " + doc;
}

}  // namespace feedback

/// Deterministic checker for one stage; the feedback explains a failure or
/// confirms the success, in the fixed phrasings above.
inline StageCheck check_stage(StageId stage, const TrajectoryView& traj,
                              const RewardContext& ctx) {
    const CompetitionSpec& comp = *ctx.comp;
    auto pass = [&](StageId s) {
        return StageCheck{true, feedback::stage_success(s, traj, ctx)};
    };

    switch (stage) {
        case StageId::TrainDataLoading: {
            if (detail::deepest_loaded(traj, comp.train_path)) return pass(stage);
            return StageCheck{false, "The train data has not been loaded yet. Load it from '" +
                                         comp.train_path + "' using read_data."};
        }
        case StageId::TestDataLoading: {
            if (detail::deepest_loaded(traj, comp.test_path)) return pass(stage);
            return StageCheck{false, "The test data has not been loaded yet. Load it from '" +
                                         comp.test_path + "' using read_data."};
        }
        case StageId::CombineTrainTest: {
            const Table* train = detail::deepest_loaded(traj, comp.train_path);
            const Table* test = detail::deepest_loaded(traj, comp.test_path);
            const Artifact* pair = detail::deepest_of_kind(traj, ObjectKind::TrainTestPair);
            if (train && test && pair &&
                pair->pair().combined.n_rows() == train->n_rows() + test->n_rows())
                return pass(stage);
            return StageCheck{false,
                              "The train and test data have not been combined into a single "
                              "dataframe with a tracking column yet."};
        }
        case StageId::DataCleaning: {
            const Artifact* pair = detail::deepest_of_kind(traj, ObjectKind::TrainTestPair);
            if (!pair)
                return StageCheck{false,
                                  "The train and test data have not been combined into a single "
                                  "dataframe with a tracking column yet."};
            const Table& t = pair->pair().combined;
            if (t.missing_cells() == 0) return pass(stage);
            std::vector<std::string> parts;
            for (const auto& c : t.columns()) {
                size_t n = c.missing_count();
                if (n)
                    parts.push_back("{'column': " + py_repr(c.name) +
                                    ", 'count': " + std::to_string(n) + "}");
            }
            return StageCheck{false, "Missing values found: [" + join(parts, ", ") +
                                         "]. Please fill or drop the missing values."};
        }
        case StageId::FeatureEngineering: {
            const Artifact* pair = detail::deepest_of_kind(traj, ObjectKind::TrainTestPair);
            if (!pair)
                return StageCheck{false,
                                  "The train and test data have not been combined into a single "
                                  "dataframe with a tracking column yet."};
            const Table& t = pair->pair().combined;
            std::vector<std::string> categorical, other;
            for (const auto& c : t.columns()) {
                if (c.name == kTrackingColumn || c.name == comp.target) continue;
                if (c.dtype == Dtype::Category)
                    categorical.push_back("{'column': " + py_repr(c.name) + ", 'unique_count': " +
                                          std::to_string(detail::unique_count(c)) +
                                          ", 'dtype': 'category'}");
                else if (c.dtype == Dtype::Text || c.dtype == Dtype::Datetime)
                    other.push_back("{'column': " + py_repr(c.name) + ", 'dtype': '" +
                                    dtype_name(c.dtype) + "'}");
            }
            if (!categorical.empty() || !other.empty())
                return StageCheck{false,
                                  "Categorical columns found: [" + join(categorical, ", ") +
                                      "]. Columns with dtypes that are not numeric/categorical "
                                      "found: [" +
                                      join(other, ", ") +
                                      "]. Please convert them to numeric dtypes (int/float) or "
                                      "encode them."};
            const Table* train = detail::deepest_loaded(traj, comp.train_path);
            size_t original = train ? train->n_cols() : 10;
            size_t bound = std::max<size_t>(200, 20 * original);
            if (t.n_cols() > bound)
                return StageCheck{false, "Feature dimensionality " + std::to_string(t.n_cols()) +
                                             " exceeds the allowed bound " +
                                             std::to_string(bound) +
                                             "; reduce the number of generated features."};
            return pass(stage);
        }
        case StageId::SplitTrainTest: {
            const Table* train = detail::deepest_loaded(traj, comp.train_path);
            const Table* test = detail::deepest_loaded(traj, comp.test_path);
            for (size_t i = traj.size(); i-- > 0;) {
                const StepInfo& s = traj[i];
                if (!detail::call_succeeded(s, "split_combined_into_train_test") || !s.pad)
                    continue;
                const ScratchpadEntry* tr = s.pad->find("train_df");
                const ScratchpadEntry* te = s.pad->find("test_df");
                if (!tr || !te) continue;
                bool rows_ok = train && test &&
                               tr->value->table().n_rows() == train->n_rows() &&
                               te->value->table().n_rows() == test->n_rows();
                if (rows_ok) return pass(stage);
            }
            return StageCheck{false,
                              "The combined data has not been split back into train and test "
                              "dataframes with the original row counts yet."};
        }
        case StageId::TrainFeaturesTarget: {
            for (size_t i = traj.size(); i-- > 0;) {
                const StepInfo& s = traj[i];
                if (!detail::call_succeeded(s, "convert_dataframe_to_features_target")) continue;
                bool is_train = s.call->func_kwargs.value("is_train", true);
                if (is_train && detail::kwarg_string(*s.call, "target_column") == comp.target)
                    return pass(stage);
            }
            return StageCheck{false,
                              "The train data has not been converted to features and target "
                              "yet. Use convert_dataframe_to_features_target with the target "
                              "column '" +
                                  comp.target + "'."};
        }
        case StageId::TestFeatures: {
            const Table* test = detail::deepest_loaded(traj, comp.test_path);
            for (size_t i = traj.size(); i-- > 0;) {
                const StepInfo& s = traj[i];
                if (!detail::call_succeeded(s, "convert_dataframe_to_features_target")) continue;
                bool is_train = s.call->func_kwargs.value("is_train", true);
                if (is_train || detail::kwarg_string(*s.call, "target_column") != comp.target)
                    continue;
                const ScratchpadEntry* x = s.pad ? s.pad->find("X_test") : nullptr;
                bool rows_ok =
                    x && test && x->value->table().n_rows() == test->n_rows();
                if (rows_ok) return pass(stage);
            }
            return StageCheck{false,
                              "The test data has not been converted to features yet. Use "
                              "convert_dataframe_to_features_target with is_train=false on the "
                              "test dataframe."};
        }
        case StageId::Modeling: {
            const Artifact* model = detail::deepest_of_kind(traj, ObjectKind::Model);
            if (model && std::isfinite(model->model().cv_score)) return pass(stage);
            return StageCheck{false, "Modeling is still in progress"};
        }
        case StageId::CreateSubmission: {
            auto saved = detail::deepest_saved_frame(traj);
            if (saved && detail::submission_table_valid(*saved->table, comp))
                return pass(stage);
            return StageCheck{false, feedback::submission_failure(ctx)};
        }
    }
    return StageCheck{false, ""};
}

/// Modeling reward scale: classifiers use cv accuracy directly; regressors
/// map their negated-rmse cv score into (0, 1] via 1/(1+rmse). The best model
/// on the path wins.
inline double modeling_scale(const TrajectoryView& traj) {
    double best = 0;
    for (const auto& s : traj) {
        if (!s.pad) continue;
        for (const auto& e : s.pad->entries()) {
            if (e.kind != ObjectKind::Model) continue;
            const ModelArtifact& m = e.value->model();
            if (!std::isfinite(m.cv_score)) continue;
            double scale = m.is_classifier ? std::clamp(m.cv_score, 0.0, 1.0)
                                           : 1.0 / (1.0 - std::min(m.cv_score, 0.0));
            best = std::max(best, scale);
        }
    }
    return best;
}

inline constexpr double kStageRewardMagnitude = 1.0;

/// Fires the lowest unmet stage whose prerequisites are met and whose checker
/// passes at this node; at most one stage per evaluation, once per trajectory.
inline RewardSignal shaped_reward(StageStatus& status, const TrajectoryView& traj,
                                  const RewardContext& ctx, int node_id) {
    auto next = status.lowest_unmet();
    if (!next) return RewardSignal{0, std::nullopt, ""};
    StageCheck check = check_stage(*next, traj, ctx);
    if (!check.passed) return RewardSignal{0, std::nullopt, check.feedback};
    status.met_at[static_cast<size_t>(*next)] = node_id;
    double value = kStageRewardMagnitude;
    if (*next == StageId::Modeling) value *= modeling_scale(traj);
    return RewardSignal{value, *next, check.feedback};
}

struct OutcomeStatus {
    bool model_rewarded = false;
    bool submission_rewarded = false;
};

/// Outcome mode: 1.0 for training a model, another 1.0 for a valid submission
/// file, each once per trajectory.
inline RewardSignal outcome_reward(OutcomeStatus& status, const TrajectoryView& traj,
                                   const RewardContext& ctx) {
    RewardSignal out;
    if (!status.model_rewarded) {
        StageCheck c = check_stage(StageId::Modeling, traj, ctx);
        if (c.passed) {
            status.model_rewarded = true;
            out.value += 1.0;
            out.stage = StageId::Modeling;
            out.feedback = c.feedback;
        }
    }
    if (!status.submission_rewarded) {
        StageCheck c = check_stage(StageId::CreateSubmission, traj, ctx);
        if (c.passed) {
            status.submission_rewarded = true;
            out.value += 1.0;
            out.stage = StageId::CreateSubmission;
            out.feedback = c.feedback;
        }
    }
    if (out.value == 0) {
        StageCheck model = check_stage(StageId::Modeling, traj, ctx);
        out.feedback = model.passed ? check_stage(StageId::CreateSubmission, traj, ctx).feedback
                                    : model.feedback;
    }
    return out;
}

/// A trajectory is valid when it has written a valid submission file.
inline bool submission_valid(const TrajectoryView& traj, const RewardContext& ctx) {
    auto saved = detail::deepest_saved_frame(traj);
    return saved && detail::submission_table_valid(*saved->table, *ctx.comp);
}

inline std::optional<std::string> submission_path(const TrajectoryView& traj,
                                                  const RewardContext& ctx) {
    auto saved = detail::deepest_saved_frame(traj);
    if (saved && detail::submission_table_valid(*saved->table, *ctx.comp))
        return saved->filepath;
    return std::nullopt;
}

}  // namespace toolplan::rewards
