#include "catch_amalgamated.hpp"

#include <fstream>

#include "test_support.hpp"
#include "toolplan/catalog.hpp"
#include "toolplan/tool_registry.hpp"

using namespace toolplan;
using nlohmann::json;

namespace {

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

TrialContext make_ctx() {
    TrialContext ctx;
    ctx.seed = 1234;
    ctx.model_grids = &shared_grids();
    return ctx;
}

ToolCall call(const std::string& tool, std::map<std::string, std::string> bindings = {},
              json kwargs = json::object(), std::optional<std::string> output = std::nullopt) {
    ToolCall c;
    c.tool = tool;
    c.bindings = std::move(bindings);
    c.func_kwargs = std::move(kwargs);
    c.output = std::move(output);
    static int next_id = 0;
    c.call_id = "call_test_" + std::to_string(++next_id);
    return c;
}

std::string write_csv_fixture() {
    auto dir = tp_test::fresh_tmp_dir("registry");
    auto path = (dir / "train.csv").string();
    std::ofstream out(path);
    out << "a,b,label\n1,x,True\n2,y,False\n3,x,True\n4,,True\n";
    return path;
}

}  // namespace

TEST_CASE("full catalog loads exactly 61 tools") {
    CHECK(shared_registry().size() == 61);
}

TEST_CASE("duplicate registration is rejected") {
    Registry reg;
    ToolDescriptor d;
    d.name = "read_data";
    d.wrapper = WrapperKind::Set;
    reg.register_tool(d, [](const ToolArgs&) { return ToolOutput{}; });
    CHECK_THROWS_WITH(reg.register_tool(d, [](const ToolArgs&) { return ToolOutput{}; }),
                      Catch::Matchers::ContainsSubstring("already registered"));
}

TEST_CASE("invoke read_data creates a Table and renders the docstring message") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    NodeScratchpad pad;
    PathView path{{}};
    auto res = view.invoke(call("read_data", {}, {{"filepath", write_csv_fixture()}}, "train_df"),
                           path, pad, ctx);
    REQUIRE(res.ok);
    REQUIRE(res.created.size() == 1);
    CHECK(res.created[0].first == "train_df");
    CHECK(res.created[0].second == ObjectKind::Table);
    CHECK(res.message.rfind("Applied read_data with docstring: ", 0) == 0);
    CHECK_THAT(res.message, Catch::Matchers::ContainsSubstring(
                                "stored in the scratchpad under: ['train_df']"));
    CHECK(pad.size() == 1);
}

TEST_CASE("missing required argument mirrors the python TypeError text") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    NodeScratchpad pad;
    PathView path{{}};
    auto res = view.invoke(call("read_data", {}, json::object(), "train_df"), path, pad, ctx);
    REQUIRE_FALSE(res.ok);
    CHECK(res.error_kind == ToolErrorKind::MissingRequiredArg);
    CHECK(res.message ==
          "Error: TypeError(\"read_data() missing 1 required positional argument: "
          "'filepath'\")\n Please fix your mistakes.");
    CHECK(pad.empty());
}

TEST_CASE("unresolved binding lists the available names") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    NodeScratchpad root;
    root.put("train_df", ObjectKind::Table, make_table(Table{}));
    NodeScratchpad child;
    PathView path{{&root}};
    auto res = view.invoke(call("get_missing_summary", {{"df", "nope"}}), path, child, ctx);
    REQUIRE_FALSE(res.ok);
    CHECK(res.error_kind == ToolErrorKind::BindingUnresolved);
    CHECK_THAT(res.message, Catch::Matchers::ContainsSubstring(
                                "'nope' not found in scratchpad. Available names: ['train_df']"));
    CHECK_THAT(res.message, Catch::Matchers::EndsWith(" Please fix your mistakes."));
}

TEST_CASE("kind mismatch is reported with both kinds") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    NodeScratchpad root;
    root.put("m", ObjectKind::Model, make_model_artifact(ModelArtifact{}));
    NodeScratchpad child;
    PathView path{{&root}};
    auto res = view.invoke(call("get_missing_summary", {{"df", "m"}}), path, child, ctx);
    REQUIRE_FALSE(res.ok);
    CHECK(res.error_kind == ToolErrorKind::KindMismatch);
    CHECK_THAT(res.message, Catch::Matchers::ContainsSubstring("got Model ('m')"));
}

TEST_CASE("unknown tool and masked tool errors") {
    auto ctx = make_ctx();
    NodeScratchpad pad;
    PathView path{{}};
    auto res = shared_registry().full_view().invoke(call("fly_to_moon"), path, pad, ctx);
    CHECK(res.error_kind == ToolErrorKind::UnknownTool);

    auto masked = shared_registry().masked_view(StageId::Modeling);
    auto res2 = masked.invoke(call("read_data", {}, {{"filepath", "x.csv"}}, "df"), path, pad, ctx);
    REQUIRE_FALSE(res2.ok);
    CHECK(res2.error_kind == ToolErrorKind::MaskedTool);
    CHECK_THAT(res2.message,
               Catch::Matchers::ContainsSubstring(
                   "tool 'read_data' is not available in the current stage"));
}

TEST_CASE("masking exposes exactly the stage-tagged tools") {
    auto masked = shared_registry().masked_view(StageId::Modeling);
    auto tools = masked.exposed();
    CHECK(tools.size() == 22);  // 10 fit + 10 tune + 2 evaluate
    for (const auto* d : tools) {
        bool family = d->name.rfind("fit_", 0) == 0 || d->name.rfind("tune_", 0) == 0 ||
                      d->name.rfind("evaluate_", 0) == 0;
        INFO(d->name);
        CHECK(family);
    }
    // masking soundness: exposed == all tools whose stages contain the stage
    for (StageId s : kAllStages) {
        auto view = shared_registry().masked_view(s);
        std::set<std::string> exposed_names;
        for (const auto* d : view.exposed()) exposed_names.insert(d->name);
        std::set<std::string> expect;
        for (const auto* d : shared_registry().all())
            if (d->stages.count(s)) expect.insert(d->name);
        CHECK(exposed_names == expect);
    }
}

TEST_CASE("schema export: full catalog yields 61 schemas, masked is a subset") {
    auto schemas = shared_registry().full_view().export_schemas();
    CHECK(schemas.size() == 61);
    for (const auto& s : schemas) {
        CHECK(s["type"] == "function");
        CHECK(s["function"].contains("name"));
        CHECK(s["function"].contains("description"));
        CHECK(s["function"]["parameters"]["properties"].contains("bindings"));
    }
    auto masked = shared_registry().masked_view(StageId::TrainDataLoading).export_schemas();
    CHECK(masked.size() == 6);
    Registry empty;
    CHECK(empty.full_view().export_schemas().empty());
}

TEST_CASE("override tool defaults its output to the bound input name") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    NodeScratchpad root;
    Column c = Column::make("v", Dtype::Float, 3);
    c.num = {1, 0, 3};
    c.missing = {0, 1, 0};
    Table t;
    t.add_column(std::move(c));
    root.put("combined_df", ObjectKind::Table, make_table(std::move(t)));
    NodeScratchpad child;
    PathView path{{&root}};

    auto res = view.invoke(call("fillna_with_mean", {{"df", "combined_df"}}), path, child, ctx);
    REQUIRE(res.ok);
    REQUIRE(res.created.size() == 1);
    CHECK(res.created[0].first == "combined_df");  // shadowing write, not mutation
    CHECK(root.find("combined_df")->value->table().column("v").missing_count() == 1);
    PathView deeper{{&root, &child}};
    CHECK(resolve(deeper, "combined_df").value->table().column("v").missing_count() == 0);
}

TEST_CASE("get tools write nothing; set/get_set require an output name") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    NodeScratchpad root;
    root.put("df", ObjectKind::Table, make_table(Table{}));
    NodeScratchpad child;
    PathView path{{&root}};

    auto res = view.invoke(call("get_missing_summary", {{"df", "df"}}), path, child, ctx);
    REQUIRE(res.ok);
    CHECK(res.created.empty());
    CHECK(child.empty());

    auto res2 = view.invoke(call("read_data", {}, {{"filepath", "f.csv"}}), path, child, ctx);
    REQUIRE_FALSE(res2.ok);
    CHECK_THAT(res2.message, Catch::Matchers::ContainsSubstring("'output'"));
}

TEST_CASE("failed invoke leaves the child pad empty") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    NodeScratchpad root;
    Table t;
    Column c = Column::make("x", Dtype::Text, 1);
    c.str[0] = "oops";
    t.add_column(std::move(c));
    root.put("df", ObjectKind::Table, make_table(std::move(t)));
    NodeScratchpad child;
    PathView path{{&root}};
    auto res = view.invoke(call("fillna_with_mean", {{"df", "df"}}, {{"columns", "x"}}), path,
                           child, ctx);
    REQUIRE_FALSE(res.ok);
    CHECK(res.error_kind == ToolErrorKind::ToolRuntimeError);
    CHECK(child.empty());
}

TEST_CASE("wrapper conformance across a full pipeline invocation sequence") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    std::string train_path = write_csv_fixture();

    // chain of single-node pads standing in for tree nodes
    std::vector<std::unique_ptr<NodeScratchpad>> pads;
    PathView path{{}};
    auto step = [&](const ToolCall& c) {
        pads.push_back(std::make_unique<NodeScratchpad>());
        ToolResult r = view.invoke(c, path, *pads.back(), ctx);
        path.pads.push_back(pads.back().get());
        return r;
    };

    auto r1 = step(call("read_data", {}, {{"filepath", train_path}}, "train_df"));
    REQUIRE(r1.ok);
    auto r2 = step(call("fillna_with_mode", {{"df", "train_df"}}));
    REQUIRE(r2.ok);
    auto r3 = step(call("label_encode", {{"df", "train_df"}}));
    REQUIRE(r3.ok);
    auto r4 = step(call("convert_dataframe_to_features_target", {{"df", "train_df"}},
                        {{"target_column", "label"}, {"is_train", true}}, "train_xy"));
    REQUIRE(r4.ok);
    // convention: X_train / Y_train written alongside the declared output
    CHECK(try_resolve(path, "X_train") != nullptr);
    CHECK(try_resolve(path, "Y_train") != nullptr);

    auto r5 = step(call("fit_lightgbm_classifier",
                        {{"X_train", "X_train"}, {"y_train", "Y_train"}}, {{"cv", 2}}, "model"));
    REQUIRE(r5.ok);
    CHECK_THAT(r5.message, Catch::Matchers::ContainsSubstring("The CV score"));

    auto r6 = step(call("tune_lightgbm_classifier",
                        {{"X_train", "X_train"}, {"y_train", "Y_train"}}, {{"cv", 2}},
                        "tuned_model_info"));
    REQUIRE(r6.ok);
    CHECK_THAT(r6.message,
               Catch::Matchers::ContainsSubstring("The Best params and CV score for this method"));
    CHECK(try_resolve(path, "best_estimator") != nullptr);  // alias written by tune tools

    auto r7 = step(call("predict_target", {{"model", "best_estimator"}, {"X_data", "X_train"}},
                        json::object(), "test_predictions"));
    REQUIRE(r7.ok);
    CHECK(resolve(path, "test_predictions").kind == ObjectKind::PredictionTable);

    auto dir = tp_test::fresh_tmp_dir("registry_out");
    auto sub_path = (dir / "sub.csv").string();
    auto r8 = step(call("save_dataframe_to_csv", {{"df", "test_predictions"}},
                        {{"filepath", sub_path}}));
    REQUIRE(r8.ok);
    CHECK(r8.created.empty());
    CHECK(std::filesystem::exists(sub_path));
}

TEST_CASE("tune grid of one point equals the fit result") {
    auto ctx = make_ctx();
    json grids = shared_grids();
    grids["grids"]["lightgbm"] = {{"n_estimators", {40}}, {"num_leaves", {8}},
                                  {"learning_rate", {0.3}}};
    ctx.model_grids = &grids;

    auto view = shared_registry().full_view();
    std::string train_path = write_csv_fixture();
    NodeScratchpad p0, p1, p2, p3, p4, p5;
    PathView path{{}};
    view.invoke(call("read_data", {}, {{"filepath", train_path}}, "df"), path, p0, ctx);
    path.pads.push_back(&p0);
    view.invoke(call("fillna_with_mode", {{"df", "df"}}), path, p1, ctx);
    path.pads.push_back(&p1);
    view.invoke(call("label_encode", {{"df", "df"}}), path, p2, ctx);
    path.pads.push_back(&p2);
    view.invoke(call("convert_dataframe_to_features_target", {{"df", "df"}},
                     {{"target_column", "label"}}, "xy"),
                path, p3, ctx);
    path.pads.push_back(&p3);
    auto fit = view.invoke(call("fit_lightgbm_classifier",
                                {{"X_train", "X_train"}, {"y_train", "Y_train"}}, {{"cv", 2}},
                                "m1"),
                           path, p4, ctx);
    REQUIRE(fit.ok);
    auto tuned = view.invoke(call("tune_lightgbm_classifier",
                                  {{"X_train", "X_train"}, {"y_train", "Y_train"}}, {{"cv", 2}},
                                  "m2"),
                             path, p5, ctx);
    REQUIRE(tuned.ok);
    PathView path4 = path;
    path4.pads.push_back(&p4);
    PathView path5 = path;
    path5.pads.push_back(&p5);
    const auto& m1 = resolve(path4, "m1").value->model();
    const auto& m2 = resolve(path5, "m2").value->model();
    CHECK(m1.cv_score == m2.cv_score);
}

TEST_CASE("empty tuning grid axis is a configuration error") {
    auto ctx = make_ctx();
    json grids = shared_grids();
    grids["grids"]["lightgbm"] = {{"n_estimators", json::array()}};
    ctx.model_grids = &grids;
    CHECK_THROWS_WITH(catalog::detail::grid_points(ctx, "lightgbm"),
                      Catch::Matchers::ContainsSubstring("empty axis"));
}

TEST_CASE("unexpected keyword argument is rejected") {
    auto ctx = make_ctx();
    auto view = shared_registry().full_view();
    NodeScratchpad pad;
    PathView path{{}};
    auto res = view.invoke(
        call("read_data", {}, {{"filepath", "f.csv"}, {"bogus", 1}}, "df"), path, pad, ctx);
    REQUIRE_FALSE(res.ok);
    CHECK_THAT(res.message,
               Catch::Matchers::ContainsSubstring("unexpected keyword argument 'bogus'"));
}
