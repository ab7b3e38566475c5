#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "toolplan/table.hpp"

namespace toolplan {

/// One challenge definition. The static fields come from the competition
/// config file; the prepared fields are filled by the harness after
/// sampling/splitting and stay private to the evaluator.
struct CompetitionSpec {
    std::string name;
    std::string task;  // regression | binary | multiclass
    std::string train_path;
    std::string test_path;
    std::string target;
    std::string id_column;  // optional; empty when the submission has no id
    std::string metric;     // rmse | rmsle | mae | accuracy | f1 | auc
    bool higher_is_better = true;
    std::string leaderboard_path;
    std::string prompt_template;
    std::vector<std::string> submission_columns;
    nlohmann::json source;  // synthetic generator parameters or a source csv

    // prepared by the harness, never exposed to the agent
    size_t train_rows = 0;
    size_t test_rows = 0;
    std::optional<Column> private_labels;
    std::optional<Column> test_ids;
};

/// Per-trial context threaded through tool invocations: the deterministic
/// seed, the competition being solved, and the model grid configuration.
struct TrialContext {
    uint64_t seed = 0;
    const CompetitionSpec* competition = nullptr;
    const nlohmann::json* model_grids = nullptr;
};

}  // namespace toolplan
