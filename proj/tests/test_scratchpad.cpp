#include "catch_amalgamated.hpp"

#include <map>
#include <random>

#include "toolplan/scratchpad.hpp"

using namespace toolplan;

TEST_CASE("put stores an entry; duplicates and empty names rejected") {
    NodeScratchpad pad;
    pad.put("train_df", ObjectKind::Table, make_text("t"));
    CHECK(pad.size() == 1);
    CHECK_THROWS_WITH(pad.put("train_df", ObjectKind::Table, make_text("t2")),
                      Catch::Matchers::ContainsSubstring("already exists"));
    CHECK_THROWS_WITH(pad.put("", ObjectKind::Table, make_text("t")),
                      Catch::Matchers::ContainsSubstring("non-empty"));
    CHECK(pad.size() == 1);
}

TEST_CASE("resolve: single definition comes from the root") {
    NodeScratchpad root, child;
    root.put("a", ObjectKind::Scalar, make_scalar(1));
    PathView view{{&root, &child}};
    CHECK(resolve(view, "a").value->scalar() == 1);
}

TEST_CASE("resolve: deepest definition shadows the ancestor") {
    NodeScratchpad root, child;
    root.put("df", ObjectKind::Text, make_text("T0"));
    child.put("df", ObjectKind::Text, make_text("T1"));
    PathView view{{&root, &child}};
    CHECK(resolve(view, "df").value->text() == "T1");
    PathView parent{{&root}};
    CHECK(resolve(parent, "df").value->text() == "T0");
}

TEST_CASE("resolve: absent name lists available keys") {
    NodeScratchpad root;
    root.put("a", ObjectKind::Scalar, make_scalar(1));
    PathView view{{&root}};
    CHECK_THROWS_WITH(resolve(view, "missing"),
                      Catch::Matchers::ContainsSubstring("Available names: ['a']"));
}

TEST_CASE("branch extends the view and keeps the parent unchanged") {
    NodeScratchpad root, c1, c2;
    root.put("x", ObjectKind::Scalar, make_scalar(0));
    PathView r{{&root}};
    PathView v1 = r.branch(&c1);
    PathView v2 = r.branch(&c2);
    c1.put("x", ObjectKind::Scalar, make_scalar(1));
    c2.put("x", ObjectKind::Scalar, make_scalar(2));
    CHECK(resolve(v1, "x").value->scalar() == 1);
    CHECK(resolve(v2, "x").value->scalar() == 2);
    CHECK(resolve(r, "x").value->scalar() == 0);
}

namespace {

struct RandomTree {
    // parent[i] < i; node 0 is the root
    std::vector<int> parent;
    std::vector<NodeScratchpad> pads;

    PathView view_of(int node) const {
        std::vector<int> chain;
        for (int v = node; v >= 0; v = parent[v]) chain.push_back(v);
        PathView out;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it)
            out.pads.push_back(&pads[static_cast<size_t>(*it)]);
        return out;
    }
};

RandomTree make_random_tree(std::mt19937_64& rng, int max_nodes) {
    RandomTree t;
    int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_nodes));
    t.parent.assign(static_cast<size_t>(n), -1);
    t.pads.resize(static_cast<size_t>(n));
    const char* names[] = {"a", "b", "c", "df", "x"};
    for (int i = 0; i < n; ++i) {
        if (i > 0) t.parent[static_cast<size_t>(i)] = static_cast<int>(rng() % static_cast<unsigned>(i));
        t.pads[static_cast<size_t>(i)].owner_node = i;
        int k = static_cast<int>(rng() % 3);
        std::vector<std::string> used;
        for (int e = 0; e < k; ++e) {
            std::string nm = names[rng() % 5];
            if (std::find(used.begin(), used.end(), nm) != used.end()) continue;
            used.push_back(nm);
            t.pads[static_cast<size_t>(i)].put(nm, ObjectKind::Scalar,
                                               make_scalar(static_cast<double>(rng() % 1000)));
        }
    }
    return t;
}

/// Brute-force oracle: walk the path root->node, overwrite into a map so the
/// deepest writer wins, then look up.
std::optional<double> union_oracle(const RandomTree& t, int node, const std::string& name) {
    std::vector<int> chain;
    for (int v = node; v >= 0; v = t.parent[static_cast<size_t>(v)]) chain.push_back(v);
    std::map<std::string, double> acc;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        for (const auto& e : t.pads[static_cast<size_t>(*it)].entries())
            acc[e.name] = e.value->scalar();
    auto found = acc.find(name);
    if (found == acc.end()) return std::nullopt;
    return found->second;
}

}  // namespace

TEST_CASE("path-union law on random trees", "[property]") {
    std::mt19937_64 rng(99);
    const char* names[] = {"a", "b", "c", "df", "x", "zz"};
    for (int trial = 0; trial < 100; ++trial) {
        RandomTree t = make_random_tree(rng, 50);
        for (size_t node = 0; node < t.pads.size(); ++node) {
            PathView view = t.view_of(static_cast<int>(node));
            for (const char* nm : names) {
                auto expect = union_oracle(t, static_cast<int>(node), nm);
                const ScratchpadEntry* got = try_resolve(view, nm);
                if (expect.has_value()) {
                    REQUIRE(got != nullptr);
                    REQUIRE(got->value->scalar() == *expect);
                } else {
                    REQUIRE(got == nullptr);
                }
            }
        }
    }
}

TEST_CASE("ancestor resolutions unchanged by descendant writes", "[property]") {
    std::mt19937_64 rng(7);
    RandomTree t = make_random_tree(rng, 30);
    // Snapshot every node's resolution table.
    const char* names[] = {"a", "b", "c", "df", "x"};
    std::vector<std::map<std::string, const ScratchpadEntry*>> before(t.pads.size());
    for (size_t node = 0; node < t.pads.size(); ++node) {
        PathView view = t.view_of(static_cast<int>(node));
        for (const char* nm : names) before[node][nm] = try_resolve(view, nm);
    }
    //

    // Grow new children under random nodes and write into them.
    size_t base = t.pads.size();
    for (int i = 0; i < 10; ++i) {
        t.parent.push_back(static_cast<int>(rng() % base));
        t.pads.emplace_back();
        t.pads.back().put("a", ObjectKind::Scalar, make_scalar(1e9 + i));
    }
    for (size_t node = 0; node < base; ++node) {
        PathView view = t.view_of(static_cast<int>(node));
        for (const char* nm : names) {
            const ScratchpadEntry* now = try_resolve(view, nm);
            CHECK(now == before[node][nm]);  // same entry object, bitwise unchanged
        }
    }
}

TEST_CASE("put then resolve round-trips the identical artifact") {
    NodeScratchpad pad;
    auto artifact = make_text("payload");
    pad.put("t", ObjectKind::Text, artifact);
    PathView view{{&pad}};
    CHECK(resolve(view, "t").value.get() == artifact.get());
}

TEST_CASE("debug dump lists name, kind, summary") {
    NodeScratchpad pad;
    pad.put("s", ObjectKind::Scalar, make_scalar(2.5));
    auto dump = pad.debug_dump();
    REQUIRE(dump.size() == 1);
    CHECK(dump[0]["name"] == "s");
    CHECK(dump[0]["kind"] == "Scalar");
    CHECK(dump[0]["summary"] == "Scalar(2.5)");
}
