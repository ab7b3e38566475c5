#include "catch_amalgamated.hpp"

#include "test_support.hpp"
#include "toolplan/toolkit.hpp"

using namespace toolplan;
using nlohmann::json;

namespace {

Table num_col(const std::string& name, std::vector<double> vals,
              std::vector<size_t> missing_at = {}, Dtype dt = Dtype::Float) {
    Column c = Column::make(name, dt, vals.size());
    c.num = std::move(vals);
    for (size_t i : missing_at) c.missing[i] = 1;
    Table t;
    t.add_column(std::move(c));
    return t;
}

Table text_col(const std::string& name, std::vector<std::string> vals,
               std::vector<size_t> missing_at = {}) {
    Column c = Column::make(name, Dtype::Text, vals.size());
    c.str = std::move(vals);
    for (size_t i : missing_at) c.missing[i] = 1;
    Table t;
    t.add_column(std::move(c));
    return t;
}

}  // namespace

TEST_CASE("missing summary counts and fractions") {
    Table t = num_col("a", {1, 0, 3}, {1});
    auto r = toolkit::get_missing_summary(t);
    CHECK(*r.get("a.missing_count") == 1.0);
    CHECK_THAT(*r.get("a.missing_fraction"), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    Table clean = num_col("a", {1, 2, 3});
    auto r2 = toolkit::get_missing_summary(clean);
    CHECK(*r2.get("a.missing_count") == 0.0);
    Column all_missing = Column::make("m", Dtype::Float, 4);
    all_missing.missing = {1, 1, 1, 1};
    Table t3;
    t3.add_column(std::move(all_missing));
    auto r3 = toolkit::get_missing_summary(t3);
    CHECK(*r3.get("m.missing_count") == 4.0);
    CHECK(*r3.get("m.missing_fraction") == 1.0);
}

TEST_CASE("fillna mean") {
    Table t = num_col("a", {1, 0, 3}, {1});
    Table out = toolkit::fillna_with_mean(t, json());
    CHECK(out.column("a").missing_count() == 0);
    CHECK(out.column("a").num[1] == 2.0);
}

TEST_CASE("fillna mode: ties broken by first appearance") {
    Table t = text_col("c", {"a", "a", "", "b"}, {2});
    Table out = toolkit::fillna_with_mode(t, json());
    CHECK(out.column("c").str[2] == "a");
    // tie case: b and a both appear twice; first-seen wins
    Table tie = text_col("c", {"b", "a", "a", "b", ""}, {4});
    Table out2 = toolkit::fillna_with_mode(tie, json());
    CHECK(out2.column("c").str[4] == "b");
}

TEST_CASE("fillna mean rejects text columns") {
    Table t = text_col("c", {"x", "y"});
    CHECK_THROWS_WITH(toolkit::fillna_with_mean(t, json("c")),
                      Catch::Matchers::ContainsSubstring("non-numeric"));
}

TEST_CASE("fillna median upcasts int columns on fractional fill") {
    Table t = num_col("a", {1, 2, 0, 5, 6}, {2}, Dtype::Int);
    Table out = toolkit::fillna_with_median(t, json());
    CHECK(out.column("a").dtype == Dtype::Float);  // median of [1,2,5,6] is 3.5
    CHECK(out.column("a").num[2] == 3.5);
}

TEST_CASE("fillna with condition fills only matching rows") {
    Table t = num_col("a", {1, -1, 1}, {});
    Column b = Column::make("b", Dtype::Float, 3);
    b.missing = {1, 1, 0};
    b.num[2] = 5;
    t.add_column(std::move(b));
    Table out = toolkit::fillna_with_condition(t, "b", "a > 0", json(9.0));
    CHECK(out.column("b").missing[0] == 0);
    CHECK(out.column("b").num[0] == 9.0);
    CHECK(out.column("b").missing[1] == 1);  // condition false, left missing
}

TEST_CASE("fillna with conditional aggregation uses group means") {
    Table t = text_col("g", {"x", "x", "y", "y", "x"});
    Column v = Column::make("v", Dtype::Float, 5);
    v.num = {10, 0, 20, 22, 14};
    v.missing = {0, 1, 0, 0, 0};
    t.add_column(std::move(v));
    Table out = toolkit::fillna_with_conditional_aggregation(t, "v", "g", json(), "mean");
    CHECK(out.column("v").missing_count() == 0);
    CHECK(out.column("v").num[1] == 12.0);  // mean of the x-group: (10+14)/2
}

TEST_CASE("drop_rows_with_missing") {
    Table t = num_col("a", {1, 0, 3}, {1});
    Column b = Column::make("b", Dtype::Float, 3);
    b.num = {1, 2, 0};
    b.missing = {0, 0, 1};
    t.add_column(std::move(b));
    Table out = toolkit::drop_rows_with_missing(t, json(), json());
    CHECK(out.n_rows() == 1);
    Table thr = toolkit::drop_rows_with_missing(t, json(), json(1));
    CHECK(thr.n_rows() == 3);  // every row has at least one value
}

TEST_CASE("concatenate_train_test adds tracking and missing target block") {
    Table train = num_col("x", {1, 2, 3, 4, 5, 6, 7, 8});
    Column y = Column::make("y", Dtype::Bool, 8);
    train.add_column(std::move(y));
    Table test = num_col("x", {9, 10});

    TrainTestPair pair = toolkit::concatenate_train_test(train, test);
    CHECK(pair.combined.n_rows() == 10);
    const Column& flag = pair.combined.column(kTrackingColumn);
    size_t train_flags = 0;
    for (size_t i = 0; i < 10; ++i) train_flags += flag.num[i] != 0;
    CHECK(train_flags == 8);
    CHECK(pair.combined.column("y").missing_count() == 2);  // test block only
}

TEST_CASE("concatenate_train_test rejects dtype conflicts") {
    Table train = num_col("x", {1, 2}, {}, Dtype::Int);
    Table test = text_col("x", {"a", "b"});
    CHECK_THROWS_WITH(toolkit::concatenate_train_test(train, test),
                      Catch::Matchers::ContainsSubstring("incompatible schemas"));
}

TEST_CASE("split_combined round-trips concatenation") {
    Table train = num_col("x", {1, 2, 3});
    Column t_y = Column::make("y", Dtype::Float, 3);
    t_y.num = {7, 8, 9};
    train.add_column(std::move(t_y));
    Table test = num_col("x", {4, 5});

    TrainTestPair pair = toolkit::concatenate_train_test(train, test);
    auto [train2, test2] = toolkit::split_combined_into_train_test(pair.combined);
    CHECK(train2.n_rows() == 3);
    CHECK(test2.n_rows() == 2);
    CHECK_FALSE(train2.has_column(kTrackingColumn));
    CHECK(tp_test::tables_equal(train, train2));
    // test2 has the all-missing target column appended
    CHECK(test2.column("y").missing_count() == 2);
    CHECK(test2.column("x").num[1] == 5);
}

TEST_CASE("split without tracking column fails") {
    Table t = num_col("x", {1, 2});
    CHECK_THROWS_WITH(toolkit::split_combined_into_train_test(t),
                      Catch::Matchers::ContainsSubstring("__is_train__"));
}

TEST_CASE("concat/split identity on random tables", "[property]") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        Table train = tp_test::random_table(rng, 400);
        // test = same schema, some rows
        Table test;
        size_t test_rows = 1 + rng() % 20;
        for (const auto& c : train.columns()) {
            Column nc = Column::make(c.name, c.dtype, test_rows);
            for (size_t i = 0; i < test_rows; ++i) {
                if (rng() % 8 == 0) {
                    nc.missing[i] = 1;
                    continue;
                }
                if (nc.is_numeric()) nc.num[i] = static_cast<double>(rng() % 100);
                else nc.str[i] = std::string(1, char('a' + rng() % 26));
            }
            test.add_column(std::move(nc));
        }
        TrainTestPair pair = toolkit::concatenate_train_test(train, test);
        auto [train2, test2] = toolkit::split_combined_into_train_test(pair.combined);
        INFO("trial " << trial);
        REQUIRE(tp_test::tables_equal(train, train2));
        REQUIRE(tp_test::tables_equal(test, test2));
    }
}

TEST_CASE("label encode maps categories to lexicographic ranks") {
    Table t = text_col("c", {"b", "a", "b"});
    Table out = toolkit::label_encode(t, json());
    CHECK(out.column("c").dtype == Dtype::Int);
    CHECK(out.column("c").num == std::vector<double>{1, 0, 1});
}

TEST_CASE("one-hot encode with drop_first") {
    Table t = text_col("col", {"a", "b", "a"});
    Table out = toolkit::one_hot_encode(t, json(), true, json());
    REQUIRE(out.n_cols() == 1);
    CHECK(out.columns()[0].name == "col_b");
    CHECK(out.columns()[0].num == std::vector<double>{0, 1, 0});
    Table both = toolkit::one_hot_encode(text_col("col", {"a", "b", "a"}), json(), false, json());
    CHECK(both.n_cols() == 2);
    CHECK(both.columns()[0].name == "col_a");
}

TEST_CASE("one-hot on numeric column list is a no-op") {
    Table t = num_col("n", {1, 2, 3});
    Table out = toolkit::one_hot_encode(t, json("n"), true, json());
    CHECK(tp_test::tables_equal(t, out));
}

TEST_CASE("encode leaves no categorical columns and re-encode is idempotent") {
    Table t = text_col("c", {"x", "y", "z", "x"});
    Column d = Column::make("d", Dtype::Category, 4);
    d.str = {"p", "q", "p", "q"};
    t.add_column(std::move(d));
    Table once = toolkit::encode_all_categorical_columns(t, "label", true);
    for (const auto& c : once.columns()) CHECK_FALSE(dtype_is_categorical(c.dtype));
    Table twice = toolkit::encode_all_categorical_columns(once, "label", true);
    CHECK(tp_test::tables_equal(once, twice));
}

TEST_CASE("casts") {
    Table t = num_col("a", {1.7, 2.2}, {});
    json mapping = {{"a", "int"}};
    Table out = toolkit::cast_columns(t, mapping);
    CHECK(out.column("a").dtype == Dtype::Int);
    CHECK(out.column("a").num == std::vector<double>{1, 2});

    Table txt = text_col("s", {"x", "y"});
    Table cat = toolkit::cast_categorical_columns(txt, json());
    CHECK(cat.column("s").dtype == Dtype::Category);

    Table ints = num_col("i", {1, 2}, {}, Dtype::Int);
    Table fl = toolkit::cast_integer_columns_to_float(ints, json());
    CHECK(fl.column("i").dtype == Dtype::Float);

    CHECK_THROWS_WITH(toolkit::cast_columns(text_col("s", {"x"}), json{{"s", "int"}}),
                      Catch::Matchers::ContainsSubstring("cannot cast"));
}

TEST_CASE("normalize: standard scores, zero-variance column becomes zeros") {
    Table t = num_col("a", {1, 2, 3});
    Column b = Column::make("b", Dtype::Float, 3);
    b.num = {5, 5, 5};
    t.add_column(std::move(b));
    Table out = toolkit::normalize_features(t, json(), "standard");
    CHECK_THAT(out.column("a").num[0], Catch::Matchers::WithinAbs(-1.22474487, 1e-6));
    CHECK(out.column("b").num == std::vector<double>{0, 0, 0});
}

TEST_CASE("create_numeric_feature appends the evaluated expression") {
    Table t = num_col("a", {1});
    Column b = Column::make("b", Dtype::Float, 1);
    b.num = {2};
    t.add_column(std::move(b));
    Table out = toolkit::create_numeric_feature(t, "sum", "a + b");
    CHECK(out.column("sum").num[0] == 3.0);
}

TEST_CASE("filter_dataframe: notna filter keeps non-missing rows") {
    Column c = Column::make("Transported", Dtype::Bool, 2);
    c.num = {1, 0};
    c.missing = {0, 1};
    Table t;
    t.add_column(std::move(c));
    Table out = toolkit::filter_dataframe(t, "Transported.notna()");
    CHECK(out.n_rows() == 1);
}

TEST_CASE("filter_dataframe: compound condition from the docstring") {
    Table t = num_col("col1", {1, -1});
    Column c2 = Column::make("col2", Dtype::Float, 2);
    c2.num = {50, 50};
    t.add_column(std::move(c2));
    Table out = toolkit::filter_dataframe(t, "col1 > 0 and col2 < 100");
    REQUIRE(out.n_rows() == 1);
    CHECK(out.column("col1").num[0] == 1.0);
}

TEST_CASE("filter_dataframe rejects non-boolean conditions") {
    Table t = num_col("a", {1});
    CHECK_THROWS_WITH(toolkit::filter_dataframe(t, "a + 1"),
                      Catch::Matchers::ContainsSubstring("boolean"));
}

TEST_CASE("conditional feature uses false branch on missing condition") {
    Table t = num_col("a", {1, -1, 0}, {2});
    Table out = toolkit::create_conditional_feature(t, "f", "a > 0", json(1.0), json(0.0));
    CHECK(out.column("f").num == std::vector<double>{1, 0, 0});
}

TEST_CASE("convert features/target splits the frame") {
    Table t = num_col("a", {1, 2});
    Column b = Column::make("b", Dtype::Float, 2);
    b.num = {3, 4};
    t.add_column(std::move(b));
    Column y = Column::make("y", Dtype::Bool, 2);
    y.num = {1, 0};
    t.add_column(std::move(y));

    auto split = toolkit::convert_dataframe_to_features_target(t, "y", true);
    CHECK(split.features.n_cols() == 2);
    REQUIRE(split.target.has_value());
    CHECK(split.target->name == "y");

    auto test_split = toolkit::convert_dataframe_to_features_target(t, "y", false);
    CHECK_FALSE(test_split.target.has_value());
}

TEST_CASE("convert with missing target raises the NaN error") {
    Table t = num_col("a", {1, 2});
    Column y = Column::make("y", Dtype::Bool, 2);
    y.missing = {0, 1};
    t.add_column(std::move(y));
    CHECK_THROWS_WITH(toolkit::convert_dataframe_to_features_target(t, "y", true),
                      Catch::Matchers::ContainsSubstring("Input y contains NaN."));
}

TEST_CASE("dataset rejects unencoded and missing features") {
    Table t = text_col("c", {"x"});
    CHECK_THROWS_WITH(toolkit::dataset_from_table(t),
                      Catch::Matchers::ContainsSubstring("Non-numeric features present"));
    Table m = num_col("a", {1, 2}, {1});
    CHECK_THROWS_WITH(toolkit::dataset_from_table(m),
                      Catch::Matchers::ContainsSubstring("Input X contains NaN."));
}

TEST_CASE("fit/evaluate/predict through tables") {
    Table x;
    Column a = Column::make("a", Dtype::Float, 8);
    a.num = {-4, -3, -2, -1, 1, 2, 3, 4};
    x.add_column(std::move(a));
    Table y;
    Column lab = Column::make("label", Dtype::Bool, 8);
    lab.num = {0, 0, 0, 0, 1, 1, 1, 1};
    y.add_column(std::move(lab));

    auto m = toolkit::fit_from_tables(ModelKind::LogisticRegression, x, y,
                                      Hyperparams{}, 4, 7);
    CHECK(m.target_name == "label");
    CHECK(m.cv_score > 0.9);

    auto report = toolkit::evaluate_classification_model(m, x, y);
    CHECK(*report.get("accuracy") == 1.0);
    CHECK(*report.get("f1") == 1.0);
    CHECK(*report.get("auc") == 1.0);

    Table pred = toolkit::predict_target(m, x, false);
    REQUIRE(pred.n_cols() == 1);
    CHECK(pred.columns()[0].name == "label");
    CHECK(pred.columns()[0].dtype == Dtype::Bool);
    CHECK(pred.n_rows() == x.n_rows());

    Table proba = toolkit::predict_target(m, x, true);
    CHECK(proba.columns()[0].dtype == Dtype::Float);
    CHECK(proba.columns()[0].num[7] > 0.5);
}

TEST_CASE("feature mismatch lists missing and extra columns") {
    Table x = num_col("a", {1, 2});
    Table y;
    Column v = Column::make("v", Dtype::Float, 2);
    v.num = {1, 2};
    y.add_column(std::move(v));
    auto m = toolkit::fit_from_tables(ModelKind::LinearRegression, x, y, Hyperparams{},
                                      2, 1);
    Table wrong = num_col("z", {1, 2});
    CHECK_THROWS_WITH(toolkit::predict_target(m, wrong, false),
                      Catch::Matchers::ContainsSubstring("missing ['a'], extra ['z']"));
    // same set, different order: reordered internally, no error
    Table x2;
    Column a2 = Column::make("a", Dtype::Float, 1);
    a2.num = {3};
    x2.add_column(std::move(a2));
    CHECK(toolkit::predict_target(m, x2, false).n_rows() == 1);
}

TEST_CASE("group aggregation feature and report") {
    Table t = text_col("g", {"x", "y", "x"});
    Column v = Column::make("v", Dtype::Float, 3);
    v.num = {1, 10, 3};
    t.add_column(std::move(v));
    Table out = toolkit::create_group_aggregation(t, "gmean", "g", "v", "mean");
    CHECK(out.column("gmean").num == std::vector<double>{2, 10, 2});
    auto rep = toolkit::get_group_aggregation(t, "g", "v", "sum");
    CHECK(*rep.get("x") == 4.0);
    CHECK(*rep.get("y") == 10.0);
}
