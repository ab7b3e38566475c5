#include "catch_amalgamated.hpp"

#include <fstream>

#include "test_support.hpp"
#include "toolplan/catalog.hpp"
#include "toolplan/rewards.hpp"

using namespace toolplan;
using namespace toolplan::rewards;
using nlohmann::json;

namespace {

/// Small harness that executes tool calls through the real registry and keeps
/// the per-node records the checkers consume.
struct PipelineSim {
    const Registry& reg;
    TrialContext trial;
    CompetitionSpec comp;
    std::vector<std::unique_ptr<NodeScratchpad>> pads;
    std::vector<std::unique_ptr<ToolCall>> calls;
    std::vector<std::unique_ptr<ToolResult>> results;

    explicit PipelineSim(const Registry& r, const json& grids) : reg(r) {
        trial.seed = 7;
        trial.model_grids = &grids;
        auto dir = tp_test::fresh_tmp_dir("rewards");
        comp.name = "toy";
        comp.train_path = (dir / "train.csv").string();
        comp.test_path = (dir / "test.csv").string();
        comp.target = "label";
        comp.metric = "accuracy";
        comp.submission_columns = {"label"};
        {
            std::ofstream out(comp.train_path);
            out << "a,c,label\n";
            for (int i = 0; i < 16; ++i) {
                bool pos = i % 2;
                out << (pos ? 2.0 + i * 0.1 : -2.0 - i * 0.1) << ","
                    << (i % 5 == 0 ? "" : (pos ? "p" : "q")) << ","
                    << (pos ? "True" : "False") << "\n";
            }
        }
        {
            std::ofstream out(comp.test_path);
            out << "a,c\n3.0,p\n-3.0,q\n2.5,\n-2.5,q\n";
        }
        comp.train_rows = 16;
        comp.test_rows = 4;
        trial.competition = &comp;
    }

    ToolResult run(const std::string& tool, std::map<std::string, std::string> bindings = {},
                   json kwargs = json::object(),
                   std::optional<std::string> output = std::nullopt) {
        auto c = std::make_unique<ToolCall>();
        c->tool = tool;
        c->bindings = std::move(bindings);
        c->func_kwargs = std::move(kwargs);
        c->output = std::move(output);
        c->call_id = "call_" + std::to_string(calls.size());
        PathView path = view();
        pads.push_back(std::make_unique<NodeScratchpad>());
        ToolResult r = reg.full_view().invoke(*c, path, *pads.back(), trial);
        calls.push_back(std::move(c));
        results.push_back(std::make_unique<ToolResult>(r));
        return r;
    }

    PathView view() const {
        PathView out;
        for (const auto& p : pads) out.pads.push_back(p.get());
        return out;
    }

    TrajectoryView traj() const {
        TrajectoryView out;
        for (size_t i = 0; i < pads.size(); ++i)
            out.push_back({pads[i].get(), calls[i].get(), results[i].get()});
        return out;
    }

    RewardContext ctx() const { return RewardContext{&comp, &reg}; }
};

const Registry& shared_registry() {
    static Registry reg =
        catalog::load_registry((tp_test::repo_dir() / "configs" / "tool_catalog.json").string());
    return reg;
}

const json& shared_grids() {
    static json grids = catalog::load_json_file(
        (tp_test::repo_dir() / "configs" / "model_grids.json").string());
    return grids;
}

/// Runs the full golden pipeline, returning the sim positioned at the end.
PipelineSim golden_pipeline(std::string submission_path) {
    PipelineSim sim(shared_registry(), shared_grids());
    REQUIRE(sim.run("read_data", {}, {{"filepath", sim.comp.train_path}}, "train_df").ok);
    REQUIRE(sim.run("read_data", {}, {{"filepath", sim.comp.test_path}}, "test_df").ok);
    REQUIRE(sim.run("concatenate_train_test",
                    {{"train_df", "train_df"}, {"test_df", "test_df"}}, json::object(),
                    "combined_df")
                .ok);
    REQUIRE(sim.run("fillna_with_mode", {{"df", "combined_df"}}).ok);
    REQUIRE(sim.run("label_encode", {{"df", "combined_df"}}, {{"columns", json::array({"c"})}})
                .ok);
    REQUIRE(sim.run("split_combined_into_train_test", {{"combined", "combined_df"}},
                    json::object(), "splitted_dfs")
                .ok);
    REQUIRE(sim.run("convert_dataframe_to_features_target", {{"df", "train_df"}},
                    {{"target_column", "label"}, {"is_train", true}}, "train_xy")
                .ok);
    REQUIRE(sim.run("convert_dataframe_to_features_target", {{"df", "test_df"}},
                    {{"target_column", "label"}, {"is_train", false}}, "test_x")
                .ok);
    REQUIRE(sim.run("fit_lightgbm_classifier",
                    {{"X_train", "X_train"}, {"y_train", "Y_train"}}, {{"cv", 4}}, "model")
                .ok);
    REQUIRE(sim.run("predict_target", {{"model", "model"}, {"X_data", "X_test"}}, json::object(),
                    "test_predictions")
                .ok);
    REQUIRE(sim.run("save_dataframe_to_csv", {{"df", "test_predictions"}},
                    {{"filepath", submission_path}})
                .ok);
    return sim;
}

}  // namespace

TEST_CASE("depth penalty arithmetic") {
    CHECK_THAT(depth_adjust(1.0, 3), Catch::Matchers::WithinAbs(0.7, 1e-12));
    CHECK(depth_adjust(0.5, 0) == 0.5);
    CHECK_THAT(depth_adjust(0.0, 2), Catch::Matchers::WithinAbs(-0.2, 1e-12));
}

TEST_CASE("stage checkers pass in order along the golden pipeline") {
    auto dir = tp_test::fresh_tmp_dir("rewards_golden");
    PipelineSim sim = golden_pipeline((dir / "sub.csv").string());
    auto traj = sim.traj();
    auto ctx = sim.ctx();
    for (StageId s : kAllStages) {
        INFO(stage_name(s));
        CHECK(check_stage(s, traj, ctx).passed);
    }
}

TEST_CASE("checker feedback strings match the fixed phrasings") {
    auto dir = tp_test::fresh_tmp_dir("rewards_fb");
    PipelineSim sim = golden_pipeline((dir / "sub.csv").string());
    auto traj = sim.traj();
    auto ctx = sim.ctx();
    CHECK(check_stage(StageId::SplitTrainTest, traj, ctx).feedback ==
          "Human Feedback: Verified that the train and test data were split successfully");
    CHECK(check_stage(StageId::Modeling, traj, ctx).feedback ==
          "Human Feedback: Verified that the modeling was successful");
    CHECK_THAT(check_stage(StageId::CreateSubmission, traj, ctx).feedback,
               Catch::Matchers::ContainsSubstring(
                   "created successfully with 1 columns (boolean) and no missing values."));

    // unmet modeling phrasing
    PipelineSim fresh(shared_registry(), shared_grids());
    fresh.run("read_data", {}, {{"filepath", fresh.comp.train_path}}, "train_df");
    CHECK(check_stage(StageId::Modeling, fresh.traj(), fresh.ctx()).feedback ==
          "Modeling is still in progress");
    CHECK_THAT(check_stage(StageId::CreateSubmission, fresh.traj(), fresh.ctx()).feedback,
               Catch::Matchers::ContainsSubstring(
                   "submission DataFrame was NOT created successfully"));
}

TEST_CASE("feature engineering failure lists categorical columns") {
    PipelineSim sim(shared_registry(), shared_grids());
    sim.run("read_data", {}, {{"filepath", sim.comp.train_path}}, "train_df");
    sim.run("read_data", {}, {{"filepath", sim.comp.test_path}}, "test_df");
    sim.run("concatenate_train_test", {{"train_df", "train_df"}, {"test_df", "test_df"}},
            json::object(), "combined_df");
    sim.run("cast_categorical_columns", {{"df", "combined_df"}});
    auto check = check_stage(StageId::FeatureEngineering, sim.traj(), sim.ctx());
    CHECK_FALSE(check.passed);
    CHECK_THAT(check.feedback, Catch::Matchers::ContainsSubstring("Categorical columns found: "));
    CHECK_THAT(check.feedback, Catch::Matchers::ContainsSubstring("'column': 'c'"));
    CHECK_THAT(check.feedback, Catch::Matchers::ContainsSubstring("'dtype': 'category'"));
}

TEST_CASE("data cleaning failure lists missing cells; combined pass requires row counts") {
    PipelineSim sim(shared_registry(), shared_grids());
    sim.run("read_data", {}, {{"filepath", sim.comp.train_path}}, "train_df");
    sim.run("read_data", {}, {{"filepath", sim.comp.test_path}}, "test_df");
    auto ctx = sim.ctx();
    {
        auto traj = sim.traj();
        CHECK_FALSE(check_stage(StageId::CombineTrainTest, traj, ctx).passed);
    }
    sim.run("concatenate_train_test", {{"train_df", "train_df"}, {"test_df", "test_df"}},
            json::object(), "combined_df");
    auto traj = sim.traj();
    CHECK(check_stage(StageId::CombineTrainTest, traj, ctx).passed);
    auto cleaning = check_stage(StageId::DataCleaning, traj, ctx);
    CHECK_FALSE(cleaning.passed);
    CHECK_THAT(cleaning.feedback, Catch::Matchers::ContainsSubstring("Missing values found: "));
    CHECK_THAT(cleaning.feedback, Catch::Matchers::ContainsSubstring("'column': 'label'"));
}

TEST_CASE("shaped rewards fire each stage once, in order") {
    auto dir = tp_test::fresh_tmp_dir("rewards_shaped");
    PipelineSim sim = golden_pipeline((dir / "sub.csv").string());
    auto full = sim.traj();
    auto ctx = sim.ctx();

    StageStatus status;
    std::vector<StageId> fired;
    // replay the trajectory prefix by prefix, as the search evaluates nodes
    for (size_t i = 0; i < full.size(); ++i) {
        TrajectoryView prefix(full.begin(), full.begin() + i + 1);
        // a node may complete several stages' worth of state; fire until blocked
        for (;;) {
            RewardSignal r = shaped_reward(status, prefix, ctx, static_cast<int>(i));
            if (!r.stage) break;
            fired.push_back(*r.stage);
            CHECK(r.value > 0);
        }
    }
    std::vector<StageId> expect(kAllStages.begin(), kAllStages.end());
    CHECK(fired == expect);

    // nothing fires twice
    StageStatus done = status;
    RewardSignal again = shaped_reward(done, full, ctx, 99);
    CHECK(again.value == 0);
    CHECK_FALSE(again.stage.has_value());
}

TEST_CASE("shaped reward: prerequisite gating blocks later stages") {
    PipelineSim sim(shared_registry(), shared_grids());
    // load ONLY the test data: stage 1 unmet, stage 2 satisfied but gated
    sim.run("read_data", {}, {{"filepath", sim.comp.test_path}}, "test_df");
    StageStatus status;
    auto r = shaped_reward(status, sim.traj(), sim.ctx(), 0);
    CHECK(r.value == 0);
    CHECK_FALSE(status.met(StageId::TestDataLoading));
    CHECK_THAT(r.feedback, Catch::Matchers::ContainsSubstring("train data has not been loaded"));
}

TEST_CASE("modeling reward is scaled by cv performance") {
    auto dir = tp_test::fresh_tmp_dir("rewards_scale");
    PipelineSim sim = golden_pipeline((dir / "sub.csv").string());
    auto traj = sim.traj();
    double scale = modeling_scale(traj);
    CHECK(scale > 0.5);
    CHECK(scale <= 1.0);

    StageStatus status;
    for (StageId s : {StageId::TrainDataLoading, StageId::TestDataLoading,
                      StageId::CombineTrainTest, StageId::DataCleaning,
                      StageId::FeatureEngineering, StageId::SplitTrainTest,
                      StageId::TrainFeaturesTarget, StageId::TestFeatures})
        status.met_at[static_cast<size_t>(s)] = 0;
    RewardSignal r = shaped_reward(status, traj, sim.ctx(), 8);
    REQUIRE(r.stage == StageId::Modeling);
    CHECK_THAT(r.value, Catch::Matchers::WithinAbs(kStageRewardMagnitude * scale, 1e-12));
}

TEST_CASE("outcome rewards: model then submission, each once, cumulative 2.0") {
    auto dir = tp_test::fresh_tmp_dir("rewards_outcome");
    PipelineSim sim = golden_pipeline((dir / "sub.csv").string());
    auto full = sim.traj();
    auto ctx = sim.ctx();

    OutcomeStatus status;
    TrajectoryView up_to_fit(full.begin(), full.begin() + 9);  // through the fit node
    RewardSignal r1 = outcome_reward(status, up_to_fit, ctx);
    CHECK(r1.value == 1.0);
    RewardSignal r1b = outcome_reward(status, up_to_fit, ctx);
    CHECK(r1b.value == 0.0);  // once per trajectory

    RewardSignal r2 = outcome_reward(status, full, ctx);
    CHECK(r2.value == 1.0);  // submission reward
    OutcomeStatus fresh;
    RewardSignal both = outcome_reward(fresh, full, ctx);
    CHECK(both.value == 2.0);  // model + valid submission together

    OutcomeStatus none;
    PipelineSim empty(shared_registry(), shared_grids());
    empty.run("read_data", {}, {{"filepath", empty.comp.train_path}}, "train_df");
    CHECK(outcome_reward(none, empty.traj(), empty.ctx()).value == 0.0);
}

TEST_CASE("submission validity: row counts, required columns, no missing") {
    auto dir = tp_test::fresh_tmp_dir("rewards_valid");
    PipelineSim sim = golden_pipeline((dir / "sub.csv").string());
    CHECK(submission_valid(sim.traj(), sim.ctx()));
    CHECK(submission_path(sim.traj(), sim.ctx()).value() == (dir / "sub.csv").string());

    // wrong row count: predictions on the train features
    PipelineSim bad = golden_pipeline((dir / "sub2.csv").string());
    bad.run("predict_target", {{"model", "model"}, {"X_data", "X_train"}}, json::object(),
            "train_predictions");
    bad.run("save_dataframe_to_csv", {{"df", "train_predictions"}},
            {{"filepath", (dir / "bad.csv").string()}});
    // the deepest save is the bad one; the checker sees it and rejects
    CHECK_FALSE(submission_valid(bad.traj(), bad.ctx()));
}

TEST_CASE("tool failure feedback carries the docstring") {
    PipelineSim sim(shared_registry(), shared_grids());
    auto text = feedback::tool_failure("read_data", "Error: boom", sim.ctx());
    CHECK_THAT(text, Catch::Matchers::ContainsSubstring("read_data"));
    CHECK_THAT(text, Catch::Matchers::ContainsSubstring("Read CSV data into a DataFrame."));
}
