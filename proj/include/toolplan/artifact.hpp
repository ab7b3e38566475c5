#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "toolplan/model.hpp"
#include "toolplan/table.hpp"
#include "toolplan/util.hpp"

namespace toolplan {

enum class ObjectKind {
    Table,
    Model,
    FeatureTargetSplit,
    TrainTestPair,
    PredictionTable,
    MetricsReport,
    Scalar,
    Text,
};

inline const char* object_kind_name(ObjectKind k) {
    switch (k) {
        case ObjectKind::Table: return "Table";
        case ObjectKind::Model: return "Model";
        case ObjectKind::FeatureTargetSplit: return "FeatureTargetSplit";
        case ObjectKind::TrainTestPair: return "TrainTestPair";
        case ObjectKind::PredictionTable: return "PredictionTable";
        case ObjectKind::MetricsReport: return "MetricsReport";
        case ObjectKind::Scalar: return "Scalar";
        case ObjectKind::Text: return "Text";
    }
    return "?";
}

inline std::optional<ObjectKind> object_kind_from_name(const std::string& s) {
    for (ObjectKind k : {ObjectKind::Table, ObjectKind::Model, ObjectKind::FeatureTargetSplit,
                         ObjectKind::TrainTestPair, ObjectKind::PredictionTable,
                         ObjectKind::MetricsReport, ObjectKind::Scalar, ObjectKind::Text})
        if (s == object_kind_name(k)) return k;
    return std::nullopt;
}

/// Train+test rows concatenated with a tracking column marking the train block.
inline constexpr const char* kTrackingColumn = "__is_train__";

struct TrainTestPair {
    Table combined;
};

struct FeatureTargetSplit {
    Table features;
    std::optional<Column> target;
};

struct MetricsReport {
    std::vector<std::pair<std::string, double>> values;

    std::optional<double> get(const std::string& name) const {
        for (const auto& [k, v] : values)
            if (k == name) return v;
        return std::nullopt;
    }

    std::string render() const {
        std::vector<std::string> parts;
        parts.reserve(values.size());
        for (const auto& [k, v] : values) parts.push_back(py_repr(k) + ": " + format_double(v));
        return "{" + join(parts, ", ") + "}";
    }
};

/// A named, immutable artifact. The kind tag is authoritative; Table and
/// PredictionTable both carry a Table payload.
struct Artifact {
    ObjectKind kind = ObjectKind::Text;
    std::variant<Table, ModelArtifact, FeatureTargetSplit, TrainTestPair, MetricsReport, double,
                 std::string>
        value;

    const Table& table() const { return std::get<Table>(value); }
    const ModelArtifact& model() const { return std::get<ModelArtifact>(value); }
    const FeatureTargetSplit& split() const { return std::get<FeatureTargetSplit>(value); }
    const TrainTestPair& pair() const { return std::get<TrainTestPair>(value); }
    const MetricsReport& metrics() const { return std::get<MetricsReport>(value); }
    double scalar() const { return std::get<double>(value); }
    const std::string& text() const { return std::get<std::string>(value); }

    std::string summary() const {
        switch (kind) {
            case ObjectKind::Table:
            case ObjectKind::PredictionTable: return table().summary();
            case ObjectKind::TrainTestPair:
                return "TrainTestPair(" + std::to_string(pair().combined.n_rows()) + " rows x " +
                       std::to_string(pair().combined.n_cols()) + " cols)";
            case ObjectKind::FeatureTargetSplit:
                return "FeatureTargetSplit(" + std::to_string(split().features.n_rows()) +
                       " rows, " + std::to_string(split().features.n_cols()) + " features" +
                       (split().target ? ", with target)" : ")");
            case ObjectKind::Model: return model().summary();
            case ObjectKind::MetricsReport: return "MetricsReport" + metrics().render();
            case ObjectKind::Scalar: return "Scalar(" + format_double(scalar()) + ")";
            case ObjectKind::Text:
                return "Text(" + std::to_string(text().size()) + " chars)";
        }
        return "?";
    }
};

using ArtifactPtr = std::shared_ptr<const Artifact>;

inline ArtifactPtr make_table(Table t, ObjectKind kind = ObjectKind::Table) {
    auto a = std::make_shared<Artifact>();
    a->kind = kind;
    a->value = std::move(t);
    return a;
}

inline ArtifactPtr make_pair_artifact(TrainTestPair p) {
    auto a = std::make_shared<Artifact>();
    a->kind = ObjectKind::TrainTestPair;
    a->value = std::move(p);
    return a;
}

inline ArtifactPtr make_split_artifact(FeatureTargetSplit s) {
    auto a = std::make_shared<Artifact>();
    a->kind = ObjectKind::FeatureTargetSplit;
    a->value = std::move(s);
    return a;
}

inline ArtifactPtr make_model_artifact(ModelArtifact m) {
    auto a = std::make_shared<Artifact>();
    a->kind = ObjectKind::Model;
    a->value = std::move(m);
    return a;
}

inline ArtifactPtr make_metrics(MetricsReport r) {
    auto a = std::make_shared<Artifact>();
    a->kind = ObjectKind::MetricsReport;
    a->value = std::move(r);
    return a;
}

inline ArtifactPtr make_scalar(double v) {
    auto a = std::make_shared<Artifact>();
    a->kind = ObjectKind::Scalar;
    a->value = v;
    return a;
}

inline ArtifactPtr make_text(std::string s) {
    auto a = std::make_shared<Artifact>();
    a->kind = ObjectKind::Text;
    a->value = std::move(s);
    return a;
}

/// The table payload a frame-transforming tool operates on: Table,
/// TrainTestPair and PredictionTable all expose one.
inline const Table* frame_of(const Artifact& a) {
    switch (a.kind) {
        case ObjectKind::Table:
        case ObjectKind::PredictionTable: return &a.table();
        case ObjectKind::TrainTestPair: return &a.pair().combined;
        default: return nullptr;
    }
}

/// Rewrap a transformed frame under the same kind as the source artifact.
inline ArtifactPtr rewrap_frame(const Artifact& src, Table t) {
    if (src.kind == ObjectKind::TrainTestPair) return make_pair_artifact(TrainTestPair{std::move(t)});
    return make_table(std::move(t), src.kind);
}

}  // namespace toolplan
