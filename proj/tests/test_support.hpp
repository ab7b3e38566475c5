#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "toolplan/table.hpp"

namespace tp_test {

inline std::filesystem::path repo_dir() { return std::filesystem::path(TOOLPLAN_REPO_DIR); }

inline std::filesystem::path fresh_tmp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("toolplan_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Random table generator used by the round-trip and scratchpad properties.
/// Text cells always start with a letter so dtype inference cannot reinterpret
/// them on re-read. At least two columns, because a one-column row whose cell
/// is missing serializes as a blank line, which CSV readers skip.
inline toolplan::Table random_table(std::mt19937_64& rng, size_t max_cells = 1000) {
    using namespace toolplan;
    std::uniform_int_distribution<size_t> cols_d(2, 6);
    size_t n_cols = cols_d(rng);
    size_t max_rows = std::max<size_t>(1, max_cells / n_cols);
    std::uniform_int_distribution<size_t> rows_d(1, std::min<size_t>(max_rows, 60));
    size_t n_rows = rows_d(rng);

    Table t;
    for (size_t c = 0; c < n_cols; ++c) {
        Dtype dt;
        switch (rng() % 4) {
            case 0: dt = Dtype::Int; break;
            case 1: dt = Dtype::Float; break;
            case 2: dt = Dtype::Bool; break;
            default: dt = Dtype::Text; break;
        }
        Column col = Column::make("c" + std::to_string(c), dt, n_rows);
        bool has_nonint_float = false;
        for (size_t i = 0; i < n_rows; ++i) {
            if (rng() % 8 == 0) {
                col.missing[i] = 1;
                continue;
            }
            switch (dt) {
                case Dtype::Int:
                    col.num[i] = static_cast<double>(static_cast<long long>(rng() % 2001) - 1000);
                    break;
                case Dtype::Float: {
                    col.num[i] =
                        (static_cast<double>(rng() % 1000000) / 997.0 - 500.0) * 1.37;
                    if (col.num[i] != std::floor(col.num[i])) has_nonint_float = true;
                    break;
                }
                case Dtype::Bool: col.num[i] = rng() % 2; break;
                default: {
                    std::string s(1, static_cast<char>('a' + rng() % 26));
                    size_t len = rng() % 8;
                    for (size_t k = 0; k < len; ++k) {
                        const char* alphabet =
                            "abcdefghijklmnopqrstuvwxyz0123456789 ,\"_-";
                        s += alphabet[rng() % 41];
                    }
                    col.str[i] = s;
                }
            }
        }
        (void)has_nonint_float;
        t.add_column(std::move(col));
    }
    return t;
}

inline bool tables_equal(const toolplan::Table& a, const toolplan::Table& b,
                         bool compare_dtype = true) {
    using namespace toolplan;
    if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) return false;
    for (size_t c = 0; c < a.n_cols(); ++c) {
        const Column& ca = a.columns()[c];
        const Column& cb = b.columns()[c];
        if (ca.name != cb.name) return false;
        if (compare_dtype && ca.dtype != cb.dtype) return false;
        for (size_t i = 0; i < a.n_rows(); ++i) {
            if (ca.missing[i] != cb.missing[i]) return false;
            if (ca.missing[i]) continue;
            if (ca.cell_string(i) != cb.cell_string(i)) return false;
        }
    }
    return true;
}

}  // namespace tp_test
