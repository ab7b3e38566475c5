#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "toolplan/artifact.hpp"
#include "toolplan/error.hpp"
#include "toolplan/expr.hpp"
#include "toolplan/model.hpp"
#include "toolplan/table.hpp"

namespace toolplan::toolkit {

using nlohmann::json;

// ---------------------------------------------------------------------------
// shared helpers

namespace detail {

inline std::vector<std::string> column_list_arg(const Table& t, const json& columns,
                                                const char* param = "columns") {
    std::vector<std::string> out;
    if (columns.is_null()) return out;
    if (columns.is_string()) out.push_back(columns.get<std::string>());
    else if (columns.is_array())
        for (const auto& c : columns) out.push_back(c.get<std::string>());
    else
        throw type_error(std::string(param) + " must be a column name or a list of column names");
    for (const auto& name : out)
        if (!t.has_column(name))
            throw key_error("column '" + name + "' not found. Available columns: " +
                            py_list(t.column_names()));
    return out;
}

inline double column_mean(const Column& c) {
    double s = 0;
    size_t n = 0;
    for (size_t i = 0; i < c.size(); ++i) {
        if (c.missing[i]) continue;
        s += c.num[i];
        ++n;
    }
    if (n == 0) throw value_error("column '" + c.name + "' has no values to aggregate");
    return s / n;
}

inline double column_median(const Column& c) {
    std::vector<double> vals;
    for (size_t i = 0; i < c.size(); ++i)
        if (!c.missing[i]) vals.push_back(c.num[i]);
    if (vals.empty()) throw value_error("column '" + c.name + "' has no values to aggregate");
    std::sort(vals.begin(), vals.end());
    size_t n = vals.size();
    return n % 2 ? vals[n / 2] : (vals[n / 2 - 1] + vals[n / 2]) / 2.0;
}

/// Most frequent non-missing value; ties broken by first appearance.
inline std::optional<std::string> column_mode(const Column& c) {
    std::vector<std::pair<std::string, size_t>> counts;
    for (size_t i = 0; i < c.size(); ++i) {
        if (c.missing[i]) continue;
        std::string v = c.cell_string(i);
        bool found = false;
        for (auto& [k, n] : counts)
            if (k == v) {
                ++n;
                found = true;
                break;
            }
        if (!found) counts.emplace_back(v, 1);
    }
    if (counts.empty()) return std::nullopt;
    size_t best = 0;
    for (size_t i = 1; i < counts.size(); ++i)
        if (counts[i].second > counts[best].second) best = i;
    return counts[best].first;
}

inline void set_cell_from_string(Column& c, size_t i, const std::string& v) {
    switch (c.dtype) {
        case Dtype::Int: {
            auto parsed = parse_int(v);
            if (!parsed) throw value_error("cannot fill int column '" + c.name + "' with '" + v + "'");
            c.num[i] = static_cast<double>(*parsed);
            break;
        }
        case Dtype::Float: {
            auto parsed = parse_double(v);
            if (!parsed)
                throw value_error("cannot fill float column '" + c.name + "' with '" + v + "'");
            c.num[i] = *parsed;
            break;
        }
        case Dtype::Bool:
            if (v != "True" && v != "False")
                throw value_error("cannot fill bool column '" + c.name + "' with '" + v + "'");
            c.num[i] = v == "True" ? 1.0 : 0.0;
            break;
        default: c.str[i] = v;
    }
    c.missing[i] = 0;
}

inline std::string json_scalar_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "True" : "False";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_float_cell(v.get<double>());
    throw type_error("expected a scalar value, got " + v.dump());
}

inline void fill_with_numeric(Column& c, double value) {
    if (c.dtype == Dtype::Int && value != std::floor(value)) {
        c.dtype = Dtype::Float;  // pandas upcasts int columns on fractional fill
    }
    for (size_t i = 0; i < c.size(); ++i) {
        if (!c.missing[i]) continue;
        c.num[i] = value;
        c.missing[i] = 0;
    }
}

inline double aggregate(const std::vector<double>& vals, const std::string& func) {
    if (vals.empty()) throw value_error("no values to aggregate");
    if (func == "mean") {
        double s = 0;
        for (double v : vals) s += v;
        return s / vals.size();
    }
    if (func == "median") {
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        size_t n = sorted.size();
        return n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    }
    if (func == "min") return *std::min_element(vals.begin(), vals.end());
    if (func == "max") return *std::max_element(vals.begin(), vals.end());
    if (func == "sum") {
        double s = 0;
        for (double v : vals) s += v;
        return s;
    }
    if (func == "count") return static_cast<double>(vals.size());
    if (func == "std") {
        double m = 0;
        for (double v : vals) m += v;
        m /= vals.size();
        double var = 0;
        for (double v : vals) var += (v - m) * (v - m);
        return std::sqrt(var / vals.size());
    }
    throw value_error("unknown aggregation function '" + func + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// loading / inspection

inline Table read_data(const std::string& filepath) { return csv::read_csv(filepath); }

inline MetricsReport get_missing_summary(const Table& t) {
    MetricsReport r;
    for (const auto& c : t.columns()) {
        double count = static_cast<double>(c.missing_count());
        r.values.emplace_back(c.name + ".missing_count", count);
        r.values.emplace_back(c.name + ".missing_fraction",
                              t.n_rows() ? count / static_cast<double>(t.n_rows()) : 0.0);
    }
    return r;
}

inline std::string render_missing_summary(const Table& t) {
    std::vector<std::string> parts;
    for (const auto& c : t.columns()) {
        size_t count = c.missing_count();
        double frac = t.n_rows() ? static_cast<double>(count) / t.n_rows() : 0.0;
        parts.push_back(py_repr(c.name) + ": {'count': " + std::to_string(count) +
                        ", 'fraction': " + format_double(frac) + "}");
    }
    return "Missing value summary: {" + join(parts, ", ") + "}";
}

inline std::string render_dtypes_summary(const Table& t) {
    std::vector<std::string> parts;
    for (const auto& c : t.columns())
        parts.push_back(py_repr(c.name) + ": " + py_repr(dtype_name(c.dtype)));
    return "Shape: (" + std::to_string(t.n_rows()) + ", " + std::to_string(t.n_cols()) +
           "). Dtypes: {" + join(parts, ", ") + "}";
}

inline std::string render_unique_values(const Table& t, const std::string& column, bool sort,
                                        bool include_counts) {
    if (!t.has_column(column))
        throw key_error("column '" + column + "' not found. Available columns: " +
                        py_list(t.column_names()));
    const Column& c = t.column(column);
    std::vector<std::pair<std::string, size_t>> counts;
    for (size_t i = 0; i < c.size(); ++i) {
        if (c.missing[i]) continue;
        std::string v = c.cell_string(i);
        bool found = false;
        for (auto& [k, n] : counts)
            if (k == v) {
                ++n;
                found = true;
                break;
            }
        if (!found) counts.emplace_back(v, 1);
    }
    if (sort)
        std::sort(counts.begin(), counts.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> parts;
    for (const auto& [k, n] : counts)
        parts.push_back(include_counts ? "(" + py_repr(k) + ", " + std::to_string(n) + ")"
                                       : py_repr(k));
    return "Unique values of '" + column + "': [" + join(parts, ", ") + "]";
}

// ---------------------------------------------------------------------------
// cleaning

inline Table fillna_with_value(Table t, const json& columns, const json& value) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty()) throw value_error("fillna_with_value requires explicit columns");
    std::string v = detail::json_scalar_to_string(value);
    for (const auto& name : names) {
        Column& c = t.column(name);
        for (size_t i = 0; i < c.size(); ++i)
            if (c.missing[i]) detail::set_cell_from_string(c, i, v);
    }
    return t;
}

inline Table fillna_numeric(Table t, const json& columns, bool use_median) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty()) {
        for (const auto& c : t.columns())
            if (c.dtype == Dtype::Int || c.dtype == Dtype::Float) names.push_back(c.name);
    }
    for (const auto& name : names) {
        Column& c = t.column(name);
        if (c.dtype != Dtype::Int && c.dtype != Dtype::Float)
            throw value_error(std::string("cannot compute ") + (use_median ? "median" : "mean") +
                              " of non-numeric column '" + name + "'");
        if (c.missing_count() == 0 || c.missing_count() == c.size()) continue;
        double v = use_median ? detail::column_median(c) : detail::column_mean(c);
        detail::fill_with_numeric(c, v);
    }
    return t;
}

inline Table fillna_with_mean(Table t, const json& columns) {
    return fillna_numeric(std::move(t), columns, false);
}

inline Table fillna_with_median(Table t, const json& columns) {
    return fillna_numeric(std::move(t), columns, true);
}

inline Table fillna_with_mode(Table t, const json& columns) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty()) names = t.column_names();
    for (const auto& name : names) {
        Column& c = t.column(name);
        if (c.missing_count() == 0) continue;
        auto mode = detail::column_mode(c);
        if (!mode) continue;  // all-missing column has no mode
        for (size_t i = 0; i < c.size(); ++i)
            if (c.missing[i]) detail::set_cell_from_string(c, i, *mode);
    }
    return t;
}

inline Table fillna_with_condition(Table t, const std::string& target_column,
                                   const std::string& condition, const json& fill_value) {
    if (!t.has_column(target_column))
        throw key_error("column '" + target_column + "' not found. Available columns: " +
                        py_list(t.column_names()));
    auto mask = expr::eval_mask(expr::parse(condition), t);
    std::string v = detail::json_scalar_to_string(fill_value);
    Column& c = t.column(target_column);
    for (size_t i = 0; i < c.size(); ++i)
        if (c.missing[i] && mask[i]) detail::set_cell_from_string(c, i, v);
    return t;
}

inline Table fillna_with_multiple_conditions(Table t, const std::string& target_column,
                                             const json& conditions_and_values) {
    if (!conditions_and_values.is_array())
        throw type_error("conditions_and_values must be a list of [condition, value] pairs");
    for (const auto& pair : conditions_and_values) {
        if (!pair.is_array() || pair.size() != 2)
            throw type_error("conditions_and_values must be a list of [condition, value] pairs");
        t = fillna_with_condition(std::move(t), target_column, pair[0].get<std::string>(),
                                  pair[1]);
    }
    return t;
}

/// Group-wise fill: each missing target cell takes agg(target) over the rows
/// sharing its condition_column value; empty groups fall back to the global
/// aggregate.
inline Table fillna_with_conditional_aggregation(Table t, const std::string& target_column,
                                                 const std::string& condition_column,
                                                 const json& condition_values,
                                                 const std::string& agg_func) {
    for (const auto& name : {target_column, condition_column})
        if (!t.has_column(name))
            throw key_error("column '" + name + "' not found. Available columns: " +
                            py_list(t.column_names()));
    const Column& target_ro = t.column(target_column);
    if (target_ro.dtype != Dtype::Int && target_ro.dtype != Dtype::Float)
        throw value_error("conditional aggregation needs a numeric target column, '" +
                          target_column + "' is " + dtype_name(target_ro.dtype));
    std::set<std::string> allowed;
    if (!condition_values.is_null())
        for (const auto& v : condition_values) allowed.insert(detail::json_scalar_to_string(v));

    const Column& key = t.column(condition_column);
    std::map<std::string, std::vector<double>> groups;
    std::vector<double> all;
    for (size_t i = 0; i < t.n_rows(); ++i) {
        if (target_ro.missing[i]) continue;
        all.push_back(target_ro.num[i]);
        if (!key.missing[i]) groups[key.cell_string(i)].push_back(target_ro.num[i]);
    }
    if (all.empty())
        throw value_error("column '" + target_column + "' has no values to aggregate");
    double global = detail::aggregate(all, agg_func);

    Column& target = t.column(target_column);
    for (size_t i = 0; i < t.n_rows(); ++i) {
        if (!target.missing[i]) continue;
        std::string k = t.column(condition_column).missing[i]
                            ? std::string()
                            : t.column(condition_column).cell_string(i);
        if (!allowed.empty() && !allowed.count(k)) continue;
        auto g = groups.find(k);
        double v = g != groups.end() && !g->second.empty() ? detail::aggregate(g->second, agg_func)
                                                           : global;
        target.num[i] = v;
        target.missing[i] = 0;
        if (target.dtype == Dtype::Int && v != std::floor(v)) target.dtype = Dtype::Float;
    }
    return t;
}

inline Table drop_rows_with_missing(const Table& t, const json& columns, const json& threshold) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty()) names = t.column_names();
    std::vector<uint8_t> keep(t.n_rows(), 1);
    for (size_t i = 0; i < t.n_rows(); ++i) {
        size_t present = 0;
        for (const auto& name : names) present += t.column(name).missing[i] ? 0 : 1;
        if (threshold.is_null()) keep[i] = present == names.size();
        else keep[i] = present >= threshold.get<size_t>();
    }
    return t.filter_rows(keep);
}

// ---------------------------------------------------------------------------
// combine / split

inline TrainTestPair concatenate_train_test(const Table& train, const Table& test) {
    // The implicit target is the single train column the test set lacks.
    std::vector<std::string> absent;
    for (const auto& c : train.columns())
        if (!test.has_column(c.name)) absent.push_back(c.name);
    if (absent.size() > 1)
        throw value_error("test data lacks columns " + py_list(absent) +
                          "; only the target column may be absent");
    for (const auto& c : test.columns())
        if (!train.has_column(c.name))
            throw value_error("test data has column '" + c.name + "' not present in train data");

    Table combined;
    size_t total = train.n_rows() + test.n_rows();
    for (const auto& tc : train.columns()) {
        bool in_test = test.has_column(tc.name);
        Dtype dt = tc.dtype;
        if (in_test) {
            Dtype td = test.column(tc.name).dtype;
            if (td != dt) {
                bool promotable = (dt == Dtype::Int && td == Dtype::Float) ||
                                  (dt == Dtype::Float && td == Dtype::Int);
                if (!promotable)
                    throw value_error("incompatible schemas: column '" + tc.name + "' is " +
                                      dtype_name(dt) + " in train but " + dtype_name(td) +
                                      " in test");
                dt = Dtype::Float;
            }
        }
        Column c = Column::make(tc.name, dt, total);
        for (size_t i = 0; i < train.n_rows(); ++i) {
            c.missing[i] = tc.missing[i];
            if (tc.missing[i]) continue;
            if (c.is_numeric()) c.num[i] = tc.num[i];
            else c.str[i] = tc.str[i];
        }
        for (size_t i = 0; i < test.n_rows(); ++i) {
            size_t j = train.n_rows() + i;
            if (!in_test) {
                c.missing[j] = 1;  // target block of the test rows
                continue;
            }
            const Column& sc = test.column(tc.name);
            c.missing[j] = sc.missing[i];
            if (sc.missing[i]) continue;
            if (c.is_numeric()) c.num[j] = sc.num[i];
            else c.str[j] = sc.str[i];
        }
        combined.add_column(std::move(c));
    }
    Column flag = Column::make(kTrackingColumn, Dtype::Bool, total);
    for (size_t i = 0; i < train.n_rows(); ++i) flag.num[i] = 1.0;
    combined.add_column(std::move(flag));
    return TrainTestPair{std::move(combined)};
}

inline std::pair<Table, Table> split_combined_into_train_test(const Table& combined) {
    if (!combined.has_column(kTrackingColumn))
        throw key_error(std::string("tracking column '") + kTrackingColumn +
                        "' is missing; cannot split combined data");
    const Column& flag = combined.column(kTrackingColumn);
    std::vector<uint8_t> is_train(combined.n_rows()), is_test(combined.n_rows());
    for (size_t i = 0; i < combined.n_rows(); ++i) {
        if (flag.missing[i])
            throw value_error(std::string("tracking column '") + kTrackingColumn +
                              "' has missing values");
        is_train[i] = flag.num[i] != 0;
        is_test[i] = !is_train[i];
    }
    Table train = combined.filter_rows(is_train);
    Table test = combined.filter_rows(is_test);
    train.drop_column(kTrackingColumn);
    test.drop_column(kTrackingColumn);
    return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// encoding / casting / normalizing

namespace detail {

inline std::vector<std::string> sorted_categories(const Column& c) {
    std::vector<std::string> cats;
    for (size_t i = 0; i < c.size(); ++i) {
        if (c.missing[i]) continue;
        std::string v = c.cell_string(i);
        if (std::find(cats.begin(), cats.end(), v) == cats.end()) cats.push_back(v);
    }
    std::sort(cats.begin(), cats.end());
    return cats;
}

inline std::vector<std::string> default_encode_targets(const Table& t) {
    std::vector<std::string> out;
    for (const auto& c : t.columns())
        if (dtype_is_categorical(c.dtype)) out.push_back(c.name);
    return out;
}

}  // namespace detail

inline Table one_hot_encode(Table t, const json& columns, bool drop_first, const json& prefix) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty()) names = detail::default_encode_targets(t);
    for (const auto& name : names) {
        Column src = t.column(name);  // copy; original is removed below
        if (src.is_numeric() && src.dtype != Dtype::Bool) continue;  // numeric: no-op
        auto cats = detail::sorted_categories(src);
        std::string pfx = prefix.is_null() ? name : prefix.get<std::string>();
        t.drop_column(name);
        for (size_t k = drop_first ? 1 : 0; k < cats.size(); ++k) {
            Column out = Column::make(pfx + "_" + cats[k], Dtype::Int, src.size());
            for (size_t i = 0; i < src.size(); ++i) {
                if (src.missing[i]) {
                    out.missing[i] = 1;
                    continue;
                }
                out.num[i] = src.cell_string(i) == cats[k] ? 1.0 : 0.0;
            }
            t.add_column(std::move(out));
        }
    }
    return t;
}

/// Maps each category to its lexicographic rank.
inline Table label_encode(Table t, const json& columns) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty()) names = detail::default_encode_targets(t);
    for (const auto& name : names) {
        Column& c = t.column(name);
        if (c.is_numeric()) continue;  // already numeric: no-op
        auto cats = detail::sorted_categories(c);
        Column out = Column::make(c.name, Dtype::Int, c.size());
        for (size_t i = 0; i < c.size(); ++i) {
            if (c.missing[i]) {
                out.missing[i] = 1;
                continue;
            }
            auto it = std::find(cats.begin(), cats.end(), c.cell_string(i));
            out.num[i] = static_cast<double>(it - cats.begin());
        }
        c = std::move(out);
    }
    return t;
}

inline Table encode_all_categorical_columns(Table t, const std::string& method,
                                            bool drop_first) {
    if (method == "one_hot") return one_hot_encode(std::move(t), json(), drop_first, json());
    if (method == "label") return label_encode(std::move(t), json());
    throw value_error("unknown encoding method '" + method + "'; use 'one_hot' or 'label'");
}

inline Table cast_columns(Table t, const json& column_type_mapping) {
    if (!column_type_mapping.is_object())
        throw type_error("column_type_mapping must be a mapping of column name to dtype");
    for (const auto& [name, type_j] : column_type_mapping.items()) {
        if (!t.has_column(name))
            throw key_error("column '" + name + "' not found. Available columns: " +
                            py_list(t.column_names()));
        auto want = dtype_from_name(type_j.get<std::string>());
        if (!want) throw value_error("unknown dtype '" + type_j.get<std::string>() + "'");
        Column& c = t.column(name);
        if (c.dtype == *want) continue;
        Column out = Column::make(c.name, *want, c.size());
        for (size_t i = 0; i < c.size(); ++i) {
            if (c.missing[i]) {
                out.missing[i] = 1;
                continue;
            }
            std::string cell = c.cell_string(i);
            switch (*want) {
                case Dtype::Int: {
                    if (c.is_numeric()) {
                        out.num[i] = std::trunc(c.num[i]);
                    } else {
                        auto v = parse_double(cell);
                        if (!v)
                            throw value_error("cannot cast '" + cell + "' in column '" + name +
                                              "' to int");
                        out.num[i] = std::trunc(*v);
                    }
                    break;
                }
                case Dtype::Float: {
                    if (c.is_numeric()) {
                        out.num[i] = c.num[i];
                    } else {
                        auto v = parse_double(cell);
                        if (!v)
                            throw value_error("cannot cast '" + cell + "' in column '" + name +
                                              "' to float");
                        out.num[i] = *v;
                    }
                    break;
                }
                case Dtype::Bool: {
                    if (c.is_numeric()) out.num[i] = c.num[i] != 0 ? 1.0 : 0.0;
                    else if (cell == "True" || cell == "False") out.num[i] = cell == "True";
                    else
                        throw value_error("cannot cast '" + cell + "' in column '" + name +
                                          "' to bool");
                    break;
                }
                default: out.str[i] = cell;
            }
        }
        c = std::move(out);
    }
    return t;
}

inline Table cast_numeric_columns(Table t, const json& columns, const std::string& target_type) {
    if (target_type != "int" && target_type != "float")
        throw value_error("target_type must be 'int' or 'float'");
    auto names = detail::column_list_arg(t, columns);
    if (names.empty())
        for (const auto& c : t.columns())
            if (c.dtype == Dtype::Int || c.dtype == Dtype::Float) names.push_back(c.name);
    json mapping = json::object();
    for (const auto& name : names) mapping[name] = target_type;
    return cast_columns(std::move(t), mapping);
}

inline Table cast_integer_columns_to_float(Table t, const json& columns) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty())
        for (const auto& c : t.columns())
            if (c.dtype == Dtype::Int) names.push_back(c.name);
    json mapping = json::object();
    for (const auto& name : names) mapping[name] = "float";
    return cast_columns(std::move(t), mapping);
}

inline Table cast_categorical_columns(Table t, const json& columns) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty())
        for (const auto& c : t.columns())
            if (c.dtype == Dtype::Text) names.push_back(c.name);
    json mapping = json::object();
    for (const auto& name : names) mapping[name] = "category";
    return cast_columns(std::move(t), mapping);
}

inline Table normalize_features(Table t, const json& columns, const std::string& method) {
    if (method != "standard" && method != "minmax")
        throw value_error("unknown normalization method '" + method +
                          "'; use 'standard' or 'minmax'");
    auto names = detail::column_list_arg(t, columns);
    if (names.empty())
        for (const auto& c : t.columns())
            if ((c.dtype == Dtype::Int || c.dtype == Dtype::Float) && c.name != kTrackingColumn)
                names.push_back(c.name);
    for (const auto& name : names) {
        Column& c = t.column(name);
        if (c.dtype != Dtype::Int && c.dtype != Dtype::Float)
            throw value_error("cannot normalize non-numeric column '" + name + "'");
        std::vector<double> vals;
        for (size_t i = 0; i < c.size(); ++i)
            if (!c.missing[i]) vals.push_back(c.num[i]);
        if (vals.empty()) continue;
        Column out = Column::make(c.name, Dtype::Float, c.size());
        out.missing = c.missing;
        if (method == "standard") {
            double mean = detail::aggregate(vals, "mean");
            double sd = detail::aggregate(vals, "std");
            for (size_t i = 0; i < c.size(); ++i)
                if (!c.missing[i]) out.num[i] = sd == 0 ? 0.0 : (c.num[i] - mean) / sd;
        } else {
            double lo = detail::aggregate(vals, "min");
            double hi = detail::aggregate(vals, "max");
            for (size_t i = 0; i < c.size(); ++i)
                if (!c.missing[i]) out.num[i] = hi == lo ? 0.0 : (c.num[i] - lo) / (hi - lo);
        }
        c = std::move(out);
    }
    return t;
}

inline Table normalize_all_numerical_columns(Table t, const std::string& method) {
    return normalize_features(std::move(t), json(), method);
}

// ---------------------------------------------------------------------------
// feature ops

inline Table create_numeric_feature(Table t, const std::string& name,
                                    const std::string& expression) {
    auto result = expr::eval_numeric(expr::parse(expression), t);
    Column c = Column::make(name, Dtype::Float, t.n_rows());
    c.num = std::move(result.values);
    c.missing = std::move(result.missing);
    if (t.has_column(name)) t.column(name) = std::move(c);
    else t.add_column(std::move(c));
    return t;
}

inline Table create_conditional_feature(Table t, const std::string& name,
                                        const std::string& condition, const json& true_value,
                                        const json& false_value) {
    auto mask = expr::eval_mask(expr::parse(condition), t);
    Dtype dt;
    if (true_value.is_number() && false_value.is_number()) dt = Dtype::Float;
    else if (true_value.is_boolean() && false_value.is_boolean()) dt = Dtype::Bool;
    else if (true_value.is_string() && false_value.is_string()) dt = Dtype::Text;
    else throw type_error("true_value and false_value must be scalars of the same type");
    Column c = Column::make(name, dt, t.n_rows());
    for (size_t i = 0; i < t.n_rows(); ++i) {
        const json& v = mask[i] ? true_value : false_value;
        if (dt == Dtype::Float) c.num[i] = v.get<double>();
        else if (dt == Dtype::Bool) c.num[i] = v.get<bool>() ? 1.0 : 0.0;
        else c.str[i] = v.get<std::string>();
    }
    if (t.has_column(name)) t.column(name) = std::move(c);
    else t.add_column(std::move(c));
    return t;
}

inline Table create_categorical_feature(Table t, const std::string& name,
                                        const std::string& source_column, const json& mapping) {
    if (!t.has_column(source_column))
        throw key_error("column '" + source_column + "' not found. Available columns: " +
                        py_list(t.column_names()));
    if (!mapping.is_object()) throw type_error("mapping must be an object of value -> category");
    const Column& src = t.column(source_column);
    Column c = Column::make(name, Dtype::Category, t.n_rows());
    for (size_t i = 0; i < t.n_rows(); ++i) {
        if (src.missing[i]) {
            c.missing[i] = 1;
            continue;
        }
        auto it = mapping.find(src.cell_string(i));
        if (it == mapping.end()) c.missing[i] = 1;  // unmapped values stay missing
        else c.str[i] = detail::json_scalar_to_string(*it);
    }
    if (t.has_column(name)) t.column(name) = std::move(c);
    else t.add_column(std::move(c));
    return t;
}

inline Table create_group_aggregation(Table t, const std::string& name,
                                      const std::string& group_column,
                                      const std::string& agg_column,
                                      const std::string& agg_func) {
    for (const auto& col : {group_column, agg_column})
        if (!t.has_column(col))
            throw key_error("column '" + col + "' not found. Available columns: " +
                            py_list(t.column_names()));
    const Column& vals = t.column(agg_column);
    if (!vals.is_numeric())
        throw value_error("aggregation column '" + agg_column + "' must be numeric");
    const Column& keys = t.column(group_column);
    std::map<std::string, std::vector<double>> groups;
    for (size_t i = 0; i < t.n_rows(); ++i) {
        if (keys.missing[i] || vals.missing[i]) continue;
        groups[keys.cell_string(i)].push_back(vals.num[i]);
    }
    Column c = Column::make(name, Dtype::Float, t.n_rows());
    for (size_t i = 0; i < t.n_rows(); ++i) {
        if (keys.missing[i]) {
            c.missing[i] = 1;
            continue;
        }
        auto g = groups.find(keys.cell_string(i));
        if (g == groups.end() || g->second.empty()) {
            c.missing[i] = 1;
            continue;
        }
        c.num[i] = detail::aggregate(g->second, agg_func);
    }
    if (t.has_column(name)) t.column(name) = std::move(c);
    else t.add_column(std::move(c));
    return t;
}

inline MetricsReport get_group_aggregation(const Table& t, const std::string& group_column,
                                           const std::string& agg_column,
                                           const std::string& agg_func) {
    for (const auto& col : {group_column, agg_column})
        if (!t.has_column(col))
            throw key_error("column '" + col + "' not found. Available columns: " +
                            py_list(t.column_names()));
    const Column& vals = t.column(agg_column);
    if (!vals.is_numeric())
        throw value_error("aggregation column '" + agg_column + "' must be numeric");
    const Column& keys = t.column(group_column);
    std::map<std::string, std::vector<double>> groups;
    for (size_t i = 0; i < t.n_rows(); ++i) {
        if (keys.missing[i] || vals.missing[i]) continue;
        groups[keys.cell_string(i)].push_back(vals.num[i]);
    }
    MetricsReport r;
    for (const auto& [k, v] : groups) r.values.emplace_back(k, detail::aggregate(v, agg_func));
    return r;
}

inline Table drop_feature(Table t, const json& column) {
    auto names = detail::column_list_arg(t, column, "column");
    if (names.empty()) throw type_error("column must name at least one column to drop");
    for (const auto& name : names) t.drop_column(name);
    return t;
}

inline Table get_features(const Table& t, const json& columns) {
    auto names = detail::column_list_arg(t, columns);
    if (names.empty()) throw type_error("columns must name at least one column");
    Table out;
    for (const auto& name : names) out.add_column(t.column(name));
    return out;
}

inline Table rename_feature(Table t, const std::string& old_name, const std::string& new_name) {
    if (!t.has_column(old_name))
        throw key_error("column '" + old_name + "' not found. Available columns: " +
                        py_list(t.column_names()));
    if (t.has_column(new_name))
        throw value_error("column '" + new_name + "' already exists");
    t.column(old_name).name = new_name;
    return t;
}

inline Table filter_dataframe(const Table& t, const std::string& condition) {
    return t.filter_rows(expr::eval_mask(expr::parse(condition), t));
}

inline Table concatenate_dataframes(const Table& a, const Table& b, int axis) {
    if (axis == 1) {
        if (a.n_rows() != b.n_rows())
            throw value_error("axis=1 concatenation needs equal row counts, got " +
                              std::to_string(a.n_rows()) + " and " + std::to_string(b.n_rows()));
        Table out = a;
        for (const auto& c : b.columns()) out.add_column(c);
        return out;
    }
    if (axis != 0) throw value_error("axis must be 0 or 1");
    if (a.column_names() != b.column_names())
        throw value_error("axis=0 concatenation needs identical column names");
    Table out;
    for (size_t ci = 0; ci < a.n_cols(); ++ci) {
        const Column& ca = a.columns()[ci];
        const Column& cb = b.columns()[ci];
        Dtype dt = ca.dtype;
        if (cb.dtype != dt) {
            bool promotable = (dt == Dtype::Int && cb.dtype == Dtype::Float) ||
                              (dt == Dtype::Float && cb.dtype == Dtype::Int);
            if (!promotable)
                throw value_error("column '" + ca.name + "' dtypes differ: " + dtype_name(dt) +
                                  " vs " + dtype_name(cb.dtype));
            dt = Dtype::Float;
        }
        Column c = Column::make(ca.name, dt, ca.size() + cb.size());
        for (size_t i = 0; i < ca.size(); ++i) {
            c.missing[i] = ca.missing[i];
            if (ca.missing[i]) continue;
            if (c.is_numeric()) c.num[i] = ca.num[i];
            else c.str[i] = ca.str[i];
        }
        for (size_t i = 0; i < cb.size(); ++i) {
            size_t j = ca.size() + i;
            c.missing[j] = cb.missing[i];
            if (cb.missing[i]) continue;
            if (c.is_numeric()) c.num[j] = cb.num[i];
            else c.str[j] = cb.str[i];
        }
        out.add_column(std::move(c));
    }
    return out;
}

inline Table convert_to_dataframe(const Artifact& a) {
    switch (a.kind) {
        case ObjectKind::Table:
        case ObjectKind::PredictionTable: return a.table();
        case ObjectKind::TrainTestPair: return a.pair().combined;
        case ObjectKind::FeatureTargetSplit: {
            Table out = a.split().features;
            if (a.split().target) out.add_column(*a.split().target);
            return out;
        }
        case ObjectKind::MetricsReport: {
            Column k = Column::make("metric", Dtype::Text, a.metrics().values.size());
            Column v = Column::make("value", Dtype::Float, a.metrics().values.size());
            for (size_t i = 0; i < a.metrics().values.size(); ++i) {
                k.str[i] = a.metrics().values[i].first;
                v.num[i] = a.metrics().values[i].second;
            }
            Table out;
            out.add_column(std::move(k));
            out.add_column(std::move(v));
            return out;
        }
        case ObjectKind::Scalar: {
            Column v = Column::make("value", Dtype::Float, 1);
            v.num[0] = a.scalar();
            Table out;
            out.add_column(std::move(v));
            return out;
        }
        default:
            throw type_error(std::string("cannot convert ") + object_kind_name(a.kind) +
                             " to a DataFrame");
    }
}

// ---------------------------------------------------------------------------
// features/target and modeling

inline FeatureTargetSplit convert_dataframe_to_features_target(const Table& t,
                                                               const std::string& target_column,
                                                               bool is_train) {
    if (!t.has_column(target_column))
        throw key_error("column '" + target_column + "' not found. Available columns: " +
                        py_list(t.column_names()));
    FeatureTargetSplit out;
    out.features = t;
    out.features.drop_column(target_column);
    if (is_train) {
        const Column& y = t.column(target_column);
        if (y.missing_count() > 0) throw value_error("Input y contains NaN.");
        out.target = y;
    }
    return out;
}

/// Numeric matrix for the learners; rejects unencoded or missing features.
inline Dataset dataset_from_table(const Table& t) {
    std::vector<std::string> non_numeric;
    for (const auto& c : t.columns())
        if (!c.is_numeric()) non_numeric.push_back(c.name);
    if (!non_numeric.empty())
        throw value_error("Non-numeric features present: " + py_list(non_numeric) +
                          ". Encode categorical columns before fitting.");
    if (t.missing_cells() > 0) throw value_error("Input X contains NaN.");
    Dataset d;
    d.n = t.n_rows();
    d.p = t.n_cols();
    d.feature_names = t.column_names();
    d.x.resize(d.n * d.p);
    for (size_t i = 0; i < d.n; ++i)
        for (size_t c = 0; c < d.p; ++c) d.x[i * d.p + c] = t.columns()[c].num[i];
    return d;
}

/// Reorders X to the model's training feature order; set mismatches raise the
/// feature-mismatch error listing missing and extra columns.
inline Dataset dataset_for_model(const ModelArtifact& m, const Table& x) {
    std::vector<std::string> missing, extra;
    for (const auto& name : m.feature_names)
        if (!x.has_column(name)) missing.push_back(name);
    for (const auto& c : x.columns())
        if (std::find(m.feature_names.begin(), m.feature_names.end(), c.name) ==
            m.feature_names.end())
            extra.push_back(c.name);
    if (!missing.empty() || !extra.empty())
        throw value_error("Feature mismatch: missing " + py_list(missing) + ", extra " +
                          py_list(extra));
    Table ordered;
    for (const auto& name : m.feature_names) ordered.add_column(x.column(name));
    return dataset_from_table(ordered);
}

inline learn::FitLabels labels_from_column(const Column& y, bool classifier) {
    if (y.missing_count() > 0) throw value_error("Input y contains NaN.");
    learn::FitLabels out;
    if (classifier) {
        for (size_t i = 0; i < y.size(); ++i) {
            std::string v = y.cell_string(i);
            if (std::find(out.labels.begin(), out.labels.end(), v) == out.labels.end())
                out.labels.push_back(v);
        }
        std::sort(out.labels.begin(), out.labels.end());
        if (out.labels.size() < 2)
            throw value_error("y contains a single class; at least two are required");
        for (size_t i = 0; i < y.size(); ++i) {
            auto it = std::find(out.labels.begin(), out.labels.end(), y.cell_string(i));
            out.indices.push_back(static_cast<int>(it - out.labels.begin()));
        }
    } else {
        if (y.dtype != Dtype::Int && y.dtype != Dtype::Float)
            throw value_error("regression target must be numeric, got " +
                              std::string(dtype_name(y.dtype)) + " column '" + y.name + "'");
        out.values.assign(y.num.begin(), y.num.end());
    }
    return out;
}

/// The single-column Table convention used for Y_train entries.
inline const Column& target_column_of(const Table& y_table) {
    if (y_table.n_cols() != 1)
        throw value_error("expected a single-column target, got " +
                          std::to_string(y_table.n_cols()) + " columns");
    return y_table.columns()[0];
}

inline ModelArtifact fit_from_tables(ModelKind kind, const Table& x, const Table& y_table,
                                     const Hyperparams& hp, int cv, uint64_t seed) {
    const Column& y = target_column_of(y_table);
    if (x.n_rows() != y.size())
        throw value_error("X has " + std::to_string(x.n_rows()) + " rows but y has " +
                          std::to_string(y.size()));
    Dataset xs = dataset_from_table(x);
    learn::FitLabels labels = labels_from_column(y, model_kind_is_classifier(kind));
    ModelArtifact m = learn::fit_model(kind, xs, labels, hp, cv, seed);
    m.target_dtype = y.dtype;
    m.target_name = y.name;
    return m;
}

inline MetricsReport evaluate_classification_model(const ModelArtifact& m, const Table& x,
                                                   const Table& y_table) {
    if (!m.is_classifier) throw value_error("model is not a classifier");
    const Column& y = target_column_of(y_table);
    Dataset xs = dataset_for_model(m, x);
    auto idx = learn::predict_class_index(m, xs);
    std::vector<std::string> pred, truth;
    for (size_t i = 0; i < xs.n; ++i) pred.push_back(m.class_labels[static_cast<size_t>(idx[i])]);
    for (size_t i = 0; i < y.size(); ++i) truth.push_back(y.cell_string(i));
    MetricsReport r;
    r.values.emplace_back("accuracy", metrics::accuracy(pred, truth));
    r.values.emplace_back("f1", metrics::f1(pred, truth));
    if (m.class_labels.size() == 2) {
        auto proba = learn::predict_proba(m, xs);
        std::vector<double> scores;
        std::vector<uint8_t> pos;
        for (size_t i = 0; i < xs.n; ++i) {
            scores.push_back(proba[i][1]);
            pos.push_back(truth[i] == m.class_labels[1]);
        }
        bool has_pos = false, has_neg = false;
        for (auto p : pos) (p ? has_pos : has_neg) = true;
        if (has_pos && has_neg) r.values.emplace_back("auc", metrics::auc(scores, pos));
    }
    return r;
}

inline MetricsReport evaluate_regression_model(const ModelArtifact& m, const Table& x,
                                               const Table& y_table) {
    if (m.is_classifier) throw value_error("model is not a regressor");
    const Column& y = target_column_of(y_table);
    if (y.missing_count() > 0) throw value_error("Input y contains NaN.");
    Dataset xs = dataset_for_model(m, x);
    auto pred = learn::predict_value(m, xs);
    std::vector<double> truth(y.num.begin(), y.num.end());
    MetricsReport r;
    r.values.emplace_back("rmse", metrics::rmse(pred, truth));
    r.values.emplace_back("mae", metrics::mae(pred, truth));
    r.values.emplace_back("r2", metrics::r2(pred, truth));
    return r;
}

/// Prediction table: one column named after the training target, in the
/// target's original dtype; probabilities instead when requested.
inline Table predict_target(const ModelArtifact& m, const Table& x, bool return_probabilities) {
    Dataset xs = dataset_for_model(m, x);
    Table out;
    std::string name = m.target_name.empty() ? "prediction" : m.target_name;
    if (return_probabilities) {
        if (!m.is_classifier)
            throw value_error("return_probabilities requires a classification model");
        auto proba = learn::predict_proba(m, xs);
        if (m.class_labels.size() == 2) {
            Column c = Column::make(name, Dtype::Float, xs.n);
            for (size_t i = 0; i < xs.n; ++i) c.num[i] = proba[i][1];
            out.add_column(std::move(c));
        } else {
            for (size_t k = 0; k < m.class_labels.size(); ++k) {
                Column c = Column::make(name + "_" + m.class_labels[k], Dtype::Float, xs.n);
                for (size_t i = 0; i < xs.n; ++i) c.num[i] = proba[i][k];
                out.add_column(std::move(c));
            }
        }
        return out;
    }
    if (m.is_classifier) {
        auto idx = learn::predict_class_index(m, xs);
        Dtype dt = m.target_dtype;
        Column c = Column::make(name, dt, xs.n);
        for (size_t i = 0; i < xs.n; ++i) {
            const std::string& label = m.class_labels[static_cast<size_t>(idx[i])];
            detail::set_cell_from_string(c, i, label);
        }
        out.add_column(std::move(c));
    } else {
        Column c = Column::make(name, Dtype::Float, xs.n);
        c.num = learn::predict_value(m, xs);
        out.add_column(std::move(c));
    }
    return out;
}

}  // namespace toolplan::toolkit
