#include "catch_amalgamated.hpp"

#include <fstream>

#include "test_support.hpp"
#include "toolplan/table.hpp"

using namespace toolplan;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& body) {
    auto dir = tp_test::fresh_tmp_dir("table");
    auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("csv read infers dtypes") {
    auto path = write_file("basic.csv", "a,b\n1,x\n2,y\n");
    Table t = csv::read_csv(path.string());
    REQUIRE(t.n_rows() == 2);
    REQUIRE(t.n_cols() == 2);
    CHECK(t.column("a").dtype == Dtype::Int);
    CHECK(t.column("b").dtype == Dtype::Text);
    CHECK(t.column("a").num[1] == 2.0);
    CHECK(t.column("b").str[0] == "x");
}

TEST_CASE("csv read marks empty cells missing") {
    auto path = write_file("missing.csv", "a,b\n1,\n,2\n");
    Table t = csv::read_csv(path.string());
    CHECK(t.column("b").missing[0] == 1);
    CHECK(t.column("a").missing[1] == 1);
    CHECK(t.column("a").missing_count() == 1);
}

TEST_CASE("csv read: bool and float inference") {
    auto path = write_file("kinds.csv", "flag,score,label\nTrue,1.5,ok\nFalse,2,bad\n");
    Table t = csv::read_csv(path.string());
    CHECK(t.column("flag").dtype == Dtype::Bool);
    CHECK(t.column("score").dtype == Dtype::Float);
    CHECK(t.column("label").dtype == Dtype::Text);
    CHECK(t.column("flag").num[0] == 1.0);
}

TEST_CASE("csv read missing file") {
    CHECK_THROWS_WITH(csv::read_csv("/nonexistent/nope.csv"),
                      Catch::Matchers::ContainsSubstring("FileNotFoundError"));
}

TEST_CASE("csv read ragged row is a parse error") {
    auto path = write_file("ragged.csv", "a,b\n1,2\n1,2,3\n");
    CHECK_THROWS_WITH(csv::read_csv(path.string()),
                      Catch::Matchers::ContainsSubstring("Expected 2 fields in line 3, saw 3"));
}

TEST_CASE("csv quoted fields: commas, quotes, newlines") {
    auto path = write_file("quoted.csv", "a,b\n\"x,y\",\"he said \"\"hi\"\"\"\n\"l1\nl2\",z\n");
    Table t = csv::read_csv(path.string());
    REQUIRE(t.n_rows() == 2);
    CHECK(t.column("a").str[0] == "x,y");
    CHECK(t.column("b").str[0] == "he said \"hi\"");
    CHECK(t.column("a").str[1] == "l1\nl2");
}

TEST_CASE("csv write renders bool as True/False") {
    Column c = Column::make("flag", Dtype::Bool, 2);
    c.num = {1.0, 0.0};
    Table t;
    t.add_column(std::move(c));
    auto dir = tp_test::fresh_tmp_dir("table_w");
    auto path = (dir / "flags.csv").string();
    csv::write_csv(t, path);
    std::ifstream in(path);
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(body == "flag\nTrue\nFalse\n");
}

TEST_CASE("csv save/read round-trips random tables", "[property]") {
    std::mt19937_64 rng(20240811);
    auto dir = tp_test::fresh_tmp_dir("table_rt");
    for (int trial = 0; trial < 60; ++trial) {
        Table t = tp_test::random_table(rng);
        auto path = (dir / ("t" + std::to_string(trial) + ".csv")).string();
        csv::write_csv(t, path);
        Table back = csv::read_csv(path);
        INFO("trial " << trial);
        REQUIRE(tp_test::tables_equal(t, back, /*compare_dtype=*/false));
    }
}

TEST_CASE("filter_rows keeps columns in lockstep") {
    Column a = Column::make("a", Dtype::Int, 3);
    a.num = {1, 2, 3};
    Column b = Column::make("b", Dtype::Text, 3);
    b.str = {"x", "y", "z"};
    Table t;
    t.add_column(std::move(a));
    t.add_column(std::move(b));
    Table f = t.filter_rows({1, 0, 1});
    REQUIRE(f.n_rows() == 2);
    CHECK(f.column("a").num[1] == 3);
    CHECK(f.column("b").str[1] == "z");
}
