#include "catch_amalgamated.hpp"

#include <random>

#include "toolplan/metrics.hpp"

using namespace toolplan;

TEST_CASE("rmse spot value") {
    // preds [0,0] vs truth [3,4]: sqrt((9+16)/2) = sqrt(12.5)
    CHECK_THAT(metrics::rmse({0, 0}, {3, 4}),
               Catch::Matchers::WithinAbs(std::sqrt(12.5), 1e-12));
}

TEST_CASE("accuracy spot value") {
    CHECK_THAT(metrics::accuracy({"1", "0", "1"}, {"1", "1", "1"}),
               Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
}

TEST_CASE("mae and r2 basics") {
    CHECK_THAT(metrics::mae({1, 2}, {2, 4}), Catch::Matchers::WithinAbs(1.5, 1e-12));
    CHECK_THAT(metrics::r2({1, 2, 3}, {1, 2, 3}), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("auc: perfect separation is 1, reversed is 0") {
    CHECK_THAT(metrics::auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(metrics::auc({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(metrics::auc({0.5, 0.5, 0.5, 0.5}, {1, 1, 0, 0}),
               Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("metrics match brute-force oracles on random vectors", "[property]") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 30; ++trial) {
        size_t n = 1 + rng() % 1000;
        std::vector<double> a(n), b(n);
        for (size_t i = 0; i < n; ++i) {
            a[i] = static_cast<double>(rng() % 1000) / 10.0;
            b[i] = static_cast<double>(rng() % 1000) / 10.0;
        }
        double sq = 0, ab = 0;
        for (size_t i = 0; i < n; ++i) {
            sq += (a[i] - b[i]) * (a[i] - b[i]);
            ab += std::fabs(a[i] - b[i]);
        }
        CHECK_THAT(metrics::rmse(a, b), Catch::Matchers::WithinAbs(std::sqrt(sq / n), 1e-9));
        CHECK_THAT(metrics::mae(a, b), Catch::Matchers::WithinAbs(ab / n, 1e-9));
    }
}

TEST_CASE("auc equals pairwise comparison oracle", "[property]") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 20; ++trial) {
        size_t n = 10 + rng() % 100;
        std::vector<double> score(n);
        std::vector<uint8_t> pos(n);
        bool has_pos = false, has_neg = false;
        for (size_t i = 0; i < n; ++i) {
            score[i] = static_cast<double>(rng() % 20) / 20.0;
            pos[i] = rng() % 2;
            (pos[i] ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        double wins = 0, total = 0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                if (!pos[i] || pos[j]) continue;
                total += 1;
                if (score[i] > score[j]) wins += 1;
                else if (score[i] == score[j]) wins += 0.5;
            }
        CHECK_THAT(metrics::auc(score, pos), Catch::Matchers::WithinAbs(wins / total, 1e-9));
    }
}
