#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "json.hpp"
#include "toolplan/tool_registry.hpp"
#include "toolplan/toolkit.hpp"

namespace toolplan::catalog {

using nlohmann::json;

namespace detail {

inline std::string py_value(const json& v) {
    if (v.is_boolean()) return v.get<bool>() ? "True" : "False";
    if (v.is_string()) return py_repr(v.get<std::string>());
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    return v.dump();
}

inline std::string py_params(const std::map<std::string, json>& params) {
    std::vector<std::string> parts;
    for (const auto& [k, v] : params) parts.push_back(py_repr(k) + ": " + py_value(v));
    return "{" + join(parts, ", ") + "}";
}

/// xgboost/lightgbm/catboost names are kept on the wire but backed by the
/// native learners; each family keeps its own hyperparameter vocabulary.
struct ModelFamily {
    ModelKind reg_kind = ModelKind::GbdtRegressor;
    ModelKind clf_kind = ModelKind::GbdtClassifier;
    std::string grid_key;
};

inline ModelFamily family_of(const std::string& tool) {
    if (tool.find("logistic") != std::string::npos)
        return {ModelKind::LogisticRegression, ModelKind::LogisticRegression,
                "logistic_regressor"};
    if (tool.find("linear") != std::string::npos)
        return {ModelKind::LinearRegression, ModelKind::LinearRegression, "linear_regressor"};
    if (tool.find("random_forest") != std::string::npos)
        return {ModelKind::RandomForestRegressor, ModelKind::RandomForestClassifier,
                "random_forest"};
    if (tool.find("xgboost") != std::string::npos)
        return {ModelKind::GbdtRegressor, ModelKind::GbdtClassifier, "xgboost"};
    if (tool.find("lightgbm") != std::string::npos)
        return {ModelKind::GbdtRegressor, ModelKind::GbdtClassifier, "lightgbm"};
    return {ModelKind::GbdtRegressor, ModelKind::GbdtClassifier, "catboost"};
}

inline ModelKind kind_of(const std::string& tool) {
    ModelFamily fam = family_of(tool);
    bool classifier = tool.find("classifier") != std::string::npos ||
                      tool.find("logistic") != std::string::npos;
    return classifier ? fam.clf_kind : fam.reg_kind;
}

inline Hyperparams translate_params(const std::string& grid_key,
                                    const std::map<std::string, json>& point) {
    Hyperparams hp;
    auto get_num = [&](const char* name, double fallback) {
        auto it = point.find(name);
        return it == point.end() ? fallback : it->second.get<double>();
    };
    if (grid_key == "logistic_regressor") {
        double c = get_num("C", 1.0);
        hp.l2 = c > 0 ? 1.0 / c : 1.0;
    } else if (grid_key == "random_forest") {
        hp.n_estimators = static_cast<int>(get_num("n_estimators", 30));
        hp.max_depth = static_cast<int>(get_num("max_depth", 6));
    } else if (grid_key == "xgboost") {
        hp.n_estimators = static_cast<int>(get_num("n_estimators", 40));
        hp.max_depth = static_cast<int>(get_num("max_depth", 3));
        hp.learning_rate = get_num("learning_rate", 0.3);
    } else if (grid_key == "lightgbm") {
        hp.n_estimators = static_cast<int>(get_num("n_estimators", 40));
        double leaves = get_num("num_leaves", 8);
        hp.max_depth = std::max(1, static_cast<int>(std::lround(std::log2(leaves))));
        hp.learning_rate = get_num("learning_rate", 0.3);
    } else if (grid_key == "catboost") {
        hp.n_estimators = static_cast<int>(get_num("iterations", 40));
        hp.max_depth = static_cast<int>(get_num("depth", 3));
        hp.learning_rate = get_num("learning_rate", 0.3);
        hp.l2 = get_num("l2_leaf_reg", 1.0);
    }
    return hp;
}

inline std::map<std::string, json> default_point(const TrialContext& ctx,
                                                 const std::string& grid_key) {
    std::map<std::string, json> out;
    if (ctx.model_grids && ctx.model_grids->contains("defaults") &&
        (*ctx.model_grids)["defaults"].contains(grid_key))
        for (const auto& [k, v] : (*ctx.model_grids)["defaults"][grid_key].items()) out[k] = v;
    return out;
}

/// Deterministic cartesian enumeration of the configured grid, keys sorted.
inline std::vector<std::map<std::string, json>> grid_points(const TrialContext& ctx,
                                                            const std::string& grid_key) {
    std::vector<std::map<std::string, json>> points;
    if (!ctx.model_grids || !ctx.model_grids->contains("grids") ||
        !(*ctx.model_grids)["grids"].contains(grid_key))
        throw value_error("no tuning grid configured for '" + grid_key + "'");
    const json& grid = (*ctx.model_grids)["grids"][grid_key];
    std::vector<std::pair<std::string, json>> axes;
    for (const auto& [k, v] : grid.items()) {
        if (!v.is_array() || v.empty())
            throw value_error("tuning grid for '" + grid_key + "' has an empty axis '" + k + "'");
        axes.emplace_back(k, v);
    }
    std::sort(axes.begin(), axes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    points.push_back({});
    for (const auto& [key, values] : axes) {
        std::vector<std::map<std::string, json>> next;
        for (const auto& base : points)
            for (const auto& v : values) {
                auto p = base;
                p[key] = v;
                next.push_back(std::move(p));
            }
        points = std::move(next);
    }
    return points;
}

inline const Table& frame_arg(const ToolArgs& a, const char* param) {
    const ScratchpadEntry* e = a.bound.at(param);
    const Table* f = frame_of(*e->value);
    if (!f)
        throw type_error(std::string("parameter '") + param + "' does not hold a DataFrame");
    return *f;
}

/// Wraps a Table->Table transform as an override-style impl: the result is
/// re-emitted under the (defaulted) output name with the input's kind.
inline ToolImpl frame_transform(std::function<Table(const Table&, const ToolArgs&)> fn) {
    return [fn = std::move(fn)](const ToolArgs& a) {
        const ScratchpadEntry* e = a.bound.at("df");
        const Table* f = frame_of(*e->value);
        if (!f) throw type_error("parameter 'df' does not hold a DataFrame");
        ToolOutput out;
        out.created.push_back({a.output, e->kind, rewrap_frame(*e->value, fn(*f, a))});
        return out;
    };
}

inline int cv_arg(const ToolArgs& a) { return a.kwargs.value("cv", 5); }

inline ToolImpl make_fit_impl(const std::string& tool) {
    return [tool](const ToolArgs& a) {
        ModelKind kind = kind_of(tool);
        std::string grid_key = family_of(tool).grid_key;
        auto point = default_point(*a.ctx, grid_key);
        Hyperparams hp = translate_params(grid_key, point);
        ModelArtifact m = toolkit::fit_from_tables(kind, frame_arg(a, "X_train"),
                                                   frame_arg(a, "y_train"), hp, cv_arg(a),
                                                   a.ctx->seed);
        for (const auto& [k, v] : point) m.best_params.emplace_back(k, py_value(v));
        ToolOutput out;
        out.extra = "The CV score (" +
                    std::string(m.is_classifier ? "accuracy" : "negative RMSE") +
                    ") for this method is " + format_double(m.cv_score) + ".";
        out.created.push_back({a.output, ObjectKind::Model,
                               make_model_artifact(std::move(m))});
        return out;
    };
}

inline ToolImpl make_tune_impl(const std::string& tool) {
    return [tool](const ToolArgs& a) {
        ModelKind kind = kind_of(tool);
        std::string grid_key = family_of(tool).grid_key;
        auto points = grid_points(*a.ctx, grid_key);
        const Table& x = frame_arg(a, "X_train");
        const Table& y = frame_arg(a, "y_train");
        std::optional<ModelArtifact> best;
        std::map<std::string, json> best_point;
        for (const auto& point : points) {
            Hyperparams hp = translate_params(grid_key, point);
            ModelArtifact m =
                toolkit::fit_from_tables(kind, x, y, hp, cv_arg(a), a.ctx->seed);
            if (!best || m.cv_score > best->cv_score) {
                best = std::move(m);
                best_point = point;
            }
        }
        for (const auto& [k, v] : best_point) best->best_params.emplace_back(k, py_value(v));
        ToolOutput out;
        out.extra = "The Best params and CV score for this method are " +
                    py_params(best_point) + " and " + format_double(best->cv_score) +
                    " respectively.";
        ArtifactPtr artifact = make_model_artifact(std::move(*best));
        out.created.push_back({a.output, ObjectKind::Model, artifact});
        if (a.output != "best_estimator")
            out.created.push_back({"best_estimator", ObjectKind::Model, artifact});
        return out;
    };
}

}  // namespace detail

/// Binds every catalog entry to its native implementation.
inline std::map<std::string, ToolImpl> builtin_impls() {
    using namespace detail;
    std::map<std::string, ToolImpl> impls;

    impls["read_data"] = [](const ToolArgs& a) {
        Table t = toolkit::read_data(a.kwargs.at("filepath").get<std::string>());
        ToolOutput out;
        out.extra = "Loaded " + t.summary() + " from '" +
                    a.kwargs.at("filepath").get<std::string>() + "'.";
        out.created.push_back({a.output, ObjectKind::Table, make_table(std::move(t))});
        return out;
    };

    impls["get_missing_summary"] = [](const ToolArgs& a) {
        ToolOutput out;
        out.extra = toolkit::render_missing_summary(frame_arg(a, "df"));
        return out;
    };

    impls["get_dataframe_dtypes_summary"] = [](const ToolArgs& a) {
        ToolOutput out;
        out.extra = toolkit::render_dtypes_summary(frame_arg(a, "df"));
        return out;
    };

    impls["get_unique_values"] = [](const ToolArgs& a) {
        ToolOutput out;
        out.extra = toolkit::render_unique_values(
            frame_arg(a, "df"), a.kwargs.at("column").get<std::string>(),
            a.kwargs.value("sort", true), a.kwargs.value("include_counts", true));
        return out;
    };

    impls["get_features"] = [](const ToolArgs& a) {
        ToolOutput out;
        out.created.push_back({a.output, ObjectKind::Table,
                               make_table(toolkit::get_features(frame_arg(a, "df"),
                                                                a.kwargs.at("columns")))});
        return out;
    };

    impls["convert_to_dataframe"] = [](const ToolArgs& a) {
        ToolOutput out;
        out.created.push_back(
            {a.output, ObjectKind::Table,
             make_table(toolkit::convert_to_dataframe(*a.bound.at("data")->value))});
        return out;
    };

    impls["fillna_with_value"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::fillna_with_value(t, a.kwargs.at("columns"), a.kwargs.at("value"));
    });
    impls["fillna_with_mean"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::fillna_with_mean(t, a.kwargs.at("columns"));
    });
    impls["fillna_with_median"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::fillna_with_median(t, a.kwargs.at("columns"));
    });
    impls["fillna_with_mode"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::fillna_with_mode(t, a.kwargs.at("columns"));
    });
    impls["fillna_with_condition"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::fillna_with_condition(t, a.kwargs.at("target_column").get<std::string>(),
                                              a.kwargs.at("condition").get<std::string>(),
                                              a.kwargs.at("fill_value"));
    });
    impls["fillna_with_multiple_conditions"] =
        frame_transform([](const Table& t, const ToolArgs& a) {
            return toolkit::fillna_with_multiple_conditions(
                t, a.kwargs.at("target_column").get<std::string>(),
                a.kwargs.at("conditions_and_values"));
        });
    impls["fillna_with_conditional_aggregation"] =
        frame_transform([](const Table& t, const ToolArgs& a) {
            return toolkit::fillna_with_conditional_aggregation(
                t, a.kwargs.at("target_column").get<std::string>(),
                a.kwargs.at("condition_column").get<std::string>(),
                a.kwargs.at("condition_values"),
                a.kwargs.value("agg_func", std::string("mean")));
        });
    impls["drop_rows_with_missing"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::drop_rows_with_missing(t, a.kwargs.at("columns"),
                                               a.kwargs.at("threshold"));
    });

    impls["create_numeric_feature"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::create_numeric_feature(t, a.kwargs.at("name").get<std::string>(),
                                               a.kwargs.at("expression").get<std::string>());
    });
    impls["create_categorical_feature"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::create_categorical_feature(t, a.kwargs.at("name").get<std::string>(),
                                                   a.kwargs.at("source_column").get<std::string>(),
                                                   a.kwargs.at("mapping"));
    });
    impls["create_conditional_feature"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::create_conditional_feature(t, a.kwargs.at("name").get<std::string>(),
                                                   a.kwargs.at("condition").get<std::string>(),
                                                   a.kwargs.at("true_value"),
                                                   a.kwargs.at("false_value"));
    });
    impls["create_group_aggregation"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::create_group_aggregation(t, a.kwargs.at("name").get<std::string>(),
                                                 a.kwargs.at("group_column").get<std::string>(),
                                                 a.kwargs.at("agg_column").get<std::string>(),
                                                 a.kwargs.value("agg_func", std::string("mean")));
    });
    impls["get_group_aggregation"] = [](const ToolArgs& a) {
        auto report = toolkit::get_group_aggregation(
            frame_arg(a, "df"), a.kwargs.at("group_column").get<std::string>(),
            a.kwargs.at("agg_column").get<std::string>(),
            a.kwargs.value("agg_func", std::string("mean")));
        ToolOutput out;
        out.extra = "Aggregation result: " + report.render();
        return out;
    };

    impls["cast_columns"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::cast_columns(t, a.kwargs.at("column_type_mapping"));
    });
    impls["cast_numeric_columns"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::cast_numeric_columns(t, a.kwargs.at("columns"),
                                             a.kwargs.value("target_type", std::string("float")));
    });
    impls["cast_integer_columns_to_float"] =
        frame_transform([](const Table& t, const ToolArgs& a) {
            return toolkit::cast_integer_columns_to_float(t, a.kwargs.at("columns"));
        });
    impls["cast_categorical_columns"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::cast_categorical_columns(t, a.kwargs.at("columns"));
    });

    impls["one_hot_encode"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::one_hot_encode(t, a.kwargs.at("columns"),
                                       a.kwargs.value("drop_first", true),
                                       a.kwargs.at("prefix"));
    });
    impls["label_encode"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::label_encode(t, a.kwargs.at("columns"));
    });
    impls["normalize_features"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::normalize_features(t, a.kwargs.at("columns"),
                                           a.kwargs.value("method", std::string("standard")));
    });
    impls["encode_all_categorical_columns"] =
        frame_transform([](const Table& t, const ToolArgs& a) {
            return toolkit::encode_all_categorical_columns(
                t, a.kwargs.value("method", std::string("one_hot")),
                a.kwargs.value("drop_first", true));
        });
    impls["normalize_all_numerical_columns"] =
        frame_transform([](const Table& t, const ToolArgs& a) {
            return toolkit::normalize_all_numerical_columns(
                t, a.kwargs.value("method", std::string("standard")));
        });

    impls["drop_feature"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::drop_feature(t, a.kwargs.at("column"));
    });
    impls["rename_feature"] = frame_transform([](const Table& t, const ToolArgs& a) {
        return toolkit::rename_feature(t, a.kwargs.at("old_name").get<std::string>(),
                                       a.kwargs.at("new_name").get<std::string>());
    });
    impls["filter_dataframe"] = [](const ToolArgs& a) {
        const ScratchpadEntry* e = a.bound.at("df");
        const Table* f = frame_of(*e->value);
        Table filtered =
            toolkit::filter_dataframe(*f, a.kwargs.at("condition").get<std::string>());
        ToolOutput out;
        out.extra = "Filter kept " + std::to_string(filtered.n_rows()) + " of " +
                    std::to_string(f->n_rows()) + " rows.";
        out.created.push_back({a.output, e->kind, rewrap_frame(*e->value, std::move(filtered))});
        return out;
    };
    impls["concatenate_dataframes"] = [](const ToolArgs& a) {
        Table merged = toolkit::concatenate_dataframes(frame_arg(a, "df1"), frame_arg(a, "df2"),
                                                       a.kwargs.value("axis", 0));
        ToolOutput out;
        out.created.push_back({a.output, ObjectKind::Table, make_table(std::move(merged))});
        return out;
    };

    impls["concatenate_train_test"] = [](const ToolArgs& a) {
        TrainTestPair pair = toolkit::concatenate_train_test(frame_arg(a, "train_df"),
                                                             frame_arg(a, "test_df"));
        ToolOutput out;
        out.extra = "Combined data has " + std::to_string(pair.combined.n_rows()) +
                    " rows; tracking column '" + kTrackingColumn + "' added.";
        out.created.push_back(
            {a.output, ObjectKind::TrainTestPair, make_pair_artifact(std::move(pair))});
        return out;
    };

    impls["split_combined_into_train_test"] = [](const ToolArgs& a) {
        auto [train, test] = toolkit::split_combined_into_train_test(frame_arg(a, "combined"));
        ToolOutput out;
        out.extra = "Split into train (" + std::to_string(train.n_rows()) + " rows) and test (" +
                    std::to_string(test.n_rows()) +
                    " rows); stored as 'train_df' and 'test_df'.";
        out.created.push_back({a.output, ObjectKind::Text, make_text("(train_df, test_df)")});
        if (a.output != "train_df")
            out.created.push_back({"train_df", ObjectKind::Table, make_table(std::move(train))});
        if (a.output != "test_df")
            out.created.push_back({"test_df", ObjectKind::Table, make_table(std::move(test))});
        return out;
    };

    impls["convert_dataframe_to_features_target"] = [](const ToolArgs& a) {
        bool is_train = a.kwargs.value("is_train", true);
        std::string target = a.kwargs.at("target_column").get<std::string>();
        FeatureTargetSplit split =
            toolkit::convert_dataframe_to_features_target(frame_arg(a, "df"), target, is_train);
        ToolOutput out;
        Table x = split.features;
        std::optional<Column> y = split.target;
        out.created.push_back(
            {a.output, ObjectKind::FeatureTargetSplit, make_split_artifact(std::move(split))});
        const char* x_name = is_train ? "X_train" : "X_test";
        std::string stored = std::string("'") + x_name + "'";
        if (a.output != x_name)
            out.created.push_back({x_name, ObjectKind::Table, make_table(std::move(x))});
        if (is_train && y) {
            Table y_table;
            y_table.add_column(std::move(*y));
            stored += " and 'Y_train'";
            if (a.output != "Y_train")
                out.created.push_back({"Y_train", ObjectKind::Table, make_table(std::move(y_table))});
        }
        out.extra = "Features stored as " + stored + ".";
        return out;
    };

    for (const char* family : {"logistic_regressor", "linear_regressor",
                               "random_forest_regressor", "random_forest_classifier",
                               "xgboost_regressor", "xgboost_classifier", "lightgbm_regressor",
                               "lightgbm_classifier", "catboost_regressor",
                               "catboost_classifier"}) {
        impls["fit_" + std::string(family)] = make_fit_impl("fit_" + std::string(family));
        impls["tune_" + std::string(family)] = make_tune_impl("tune_" + std::string(family));
    }

    impls["evaluate_regression_model"] = [](const ToolArgs& a) {
        auto report = toolkit::evaluate_regression_model(a.bound.at("model")->value->model(),
                                                         frame_arg(a, "X_test"),
                                                         frame_arg(a, "y_test"));
        ToolOutput out;
        out.extra = "Evaluation results for " + a.kwargs.value("model_name", std::string("model")) +
                    " on " + a.kwargs.value("eval_data_label", std::string("test")) +
                    " data: " + report.render();
        return out;
    };
    impls["evaluate_classification_model"] = [](const ToolArgs& a) {
        auto report = toolkit::evaluate_classification_model(a.bound.at("model")->value->model(),
                                                             frame_arg(a, "X_test"),
                                                             frame_arg(a, "y_test"));
        ToolOutput out;
        out.extra = "Evaluation results for " + a.kwargs.value("model_name", std::string("model")) +
                    " on " + a.kwargs.value("eval_data_label", std::string("test")) +
                    " data: " + report.render();
        return out;
    };

    impls["predict_target"] = [](const ToolArgs& a) {
        const ModelArtifact& m = a.bound.at("model")->value->model();
        Table pred = toolkit::predict_target(m, frame_arg(a, "X_data"),
                                             a.kwargs.value("return_probabilities", false));
        // attach the competition id column when one is defined and the row
        // counts line up with the prepared test split
        const CompetitionSpec* comp = a.ctx ? a.ctx->competition : nullptr;
        if (comp && !comp->id_column.empty() && comp->test_ids &&
            comp->test_ids->size() == pred.n_rows() && !pred.has_column(comp->id_column)) {
            Table with_id;
            with_id.add_column(*comp->test_ids);
            for (const auto& c : pred.columns()) with_id.add_column(c);
            pred = std::move(with_id);
        }
        ToolOutput out;
        out.extra = "Generated " + std::to_string(pred.n_rows()) + " predictions using " +
                    a.kwargs.value("model_name", std::string("model")) + ".";
        out.created.push_back(
            {a.output, ObjectKind::PredictionTable,
             make_table(std::move(pred), ObjectKind::PredictionTable)});
        return out;
    };

    impls["save_model"] = [](const ToolArgs& a) {
        std::string path = a.kwargs.value("filepath", std::string("model_saves/model.bin"));
        learn::save_model_file(a.bound.at("model")->value->model(), path);
        ToolOutput out;
        out.extra = "Model saved to '" + path + "'.";
        return out;
    };
    impls["load_model"] = [](const ToolArgs& a) {
        ToolOutput out;
        out.created.push_back(
            {a.output, ObjectKind::Model,
             make_model_artifact(learn::load_model_file(a.kwargs.at("filepath").get<std::string>()))});
        return out;
    };
    impls["save_dataframe_to_csv"] = [](const ToolArgs& a) {
        const Table& t = frame_arg(a, "df");
        std::string path = a.kwargs.at("filepath").get<std::string>();
        csv::write_csv(t, path);
        ToolOutput out;
        out.extra = "DataFrame with " + std::to_string(t.n_rows()) + " rows and " +
                    std::to_string(t.n_cols()) + " columns saved to '" + path + "'.";
        return out;
    };

    return impls;
}

inline ToolDescriptor descriptor_from_config(const json& tool) {
    ToolDescriptor d;
    d.name = tool.at("name").get<std::string>();
    d.doc = tool.at("doc").get<std::string>();
    auto wrapper = wrapper_from_name(tool.at("wrapper").get<std::string>());
    if (!wrapper)
        throw value_error("tool '" + d.name + "' has unknown wrapper kind '" +
                          tool.at("wrapper").get<std::string>() + "'");
    d.wrapper = *wrapper;
    for (const auto& s : tool.at("stages")) {
        auto stage = stage_from_name(s.get<std::string>());
        if (!stage)
            throw value_error("tool '" + d.name + "' has unknown stage '" +
                              s.get<std::string>() + "'");
        d.stages.insert(*stage);
    }
    for (const auto& p : tool.at("params")) {
        ParamSpec spec;
        spec.name = p.at("name").get<std::string>();
        spec.description = p.value("description", std::string());
        if (p.contains("binds")) {
            spec.is_binding = true;
            for (const auto& k : p["binds"]) {
                auto kind = object_kind_from_name(k.get<std::string>());
                if (!kind)
                    throw value_error("tool '" + d.name + "' param '" + spec.name +
                                      "' has unknown kind '" + k.get<std::string>() + "'");
                spec.accepted.push_back(*kind);
            }
        } else {
            spec.literal_type = p.at("type").get<std::string>();
        }
        spec.required = p.value("required", true);
        if (p.contains("default")) spec.default_value = p["default"];
        d.params.push_back(std::move(spec));
    }
    return d;
}

inline Registry build_registry(const json& catalog_config) {
    Registry reg;
    auto impls = builtin_impls();
    for (const auto& tool : catalog_config.at("tools")) {
        ToolDescriptor d = descriptor_from_config(tool);
        auto impl = impls.find(d.name);
        if (impl == impls.end())
            throw value_error("tool '" + d.name + "' has no native implementation");
        reg.register_tool(std::move(d), impl->second);
    }
    return reg;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ToolError("FileNotFoundError",
                        "[Errno 2] No such file or directory: '" + path + "'");
    json j;
    in >> j;
    return j;
}

inline Registry load_registry(const std::string& catalog_path) {
    return build_registry(load_json_file(catalog_path));
}

}  // namespace toolplan::catalog
