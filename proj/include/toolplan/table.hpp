#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolplan/error.hpp"
#include "toolplan/util.hpp"

namespace toolplan {

enum class Dtype { Int, Float, Bool, Category, Text, Datetime };

inline const char* dtype_name(Dtype d) {
    switch (d) {
        case Dtype::Int: return "int";
        case Dtype::Float: return "float";
        case Dtype::Bool: return "bool";
        case Dtype::Category: return "category";
        case Dtype::Text: return "text";
        case Dtype::Datetime: return "datetime";
    }
    return "?";
}

inline std::optional<Dtype> dtype_from_name(const std::string& s) {
    if (s == "int") return Dtype::Int;
    if (s == "float") return Dtype::Float;
    if (s == "bool") return Dtype::Bool;
    if (s == "category") return Dtype::Category;
    if (s == "text") return Dtype::Text;
    if (s == "datetime") return Dtype::Datetime;
    return std::nullopt;
}

inline bool dtype_is_numeric(Dtype d) {
    return d == Dtype::Int || d == Dtype::Float || d == Dtype::Bool;
}

/// Category/Text/Datetime columns must be encoded before modeling.
inline bool dtype_is_categorical(Dtype d) {
    return d == Dtype::Category || d == Dtype::Text || d == Dtype::Datetime;
}

/// One column: numeric dtypes live in `num` (bool as 0/1), string dtypes in
/// `str`. `missing[i]` marks the cell absent regardless of dtype.
struct Column {
    std::string name;
    Dtype dtype = Dtype::Float;
    std::vector<double> num;
    std::vector<std::string> str;
    std::vector<uint8_t> missing;

    size_t size() const { return missing.size(); }

    bool is_numeric() const { return dtype_is_numeric(dtype); }
    bool uses_strings() const { return !is_numeric(); }

    static Column make(std::string name, Dtype dtype, size_t n) {
        Column c;
        c.name = std::move(name);
        c.dtype = dtype;
        c.missing.assign(n, 0);
        if (dtype_is_numeric(dtype)) c.num.assign(n, 0.0);
        else c.str.assign(n, std::string());
        return c;
    }

    size_t missing_count() const {
        size_t k = 0;
        for (auto m : missing) k += m != 0;
        return k;
    }

    std::string cell_string(size_t i) const {
        if (missing[i]) return "";
        switch (dtype) {
            case Dtype::Int: return std::to_string(static_cast<long long>(num[i]));
            case Dtype::Float: return format_float_cell(num[i]);
            case Dtype::Bool: return num[i] != 0.0 ? "True" : "False";
            default: return str[i];
        }
    }
};

class Table {
public:
    Table() = default;

    size_t n_rows() const { return n_rows_; }
    size_t n_cols() const { return cols_.size(); }
    const std::vector<Column>& columns() const { return cols_; }
    std::vector<Column>& columns() { return cols_; }

    bool has_column(const std::string& name) const { return index_of(name) >= 0; }

    int index_of(const std::string& name) const {
        for (size_t i = 0; i < cols_.size(); ++i)
            if (cols_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    const Column& column(const std::string& name) const {
        int i = index_of(name);
        if (i < 0) throw key_error("column '" + name + "' not found");
        return cols_[i];
    }

    Column& column(const std::string& name) {
        int i = index_of(name);
        if (i < 0) throw key_error("column '" + name + "' not found");
        return cols_[i];
    }

    void add_column(Column c) {
        if (has_column(c.name)) throw value_error("duplicate column name '" + c.name + "'");
        if (!cols_.empty() && c.size() != n_rows_)
            throw value_error("column '" + c.name + "' has length " + std::to_string(c.size()) +
                              ", expected " + std::to_string(n_rows_));
        if (cols_.empty()) n_rows_ = c.size();
        cols_.push_back(std::move(c));
    }

    void drop_column(const std::string& name) {
        int i = index_of(name);
        if (i < 0) throw key_error("column '" + name + "' not found");
        cols_.erase(cols_.begin() + i);
    }

    std::vector<std::string> column_names() const {
        std::vector<std::string> out;
        out.reserve(cols_.size());
        for (const auto& c : cols_) out.push_back(c.name);
        return out;
    }

    size_t missing_cells() const {
        size_t k = 0;
        for (const auto& c : cols_) k += c.missing_count();
        return k;
    }

    /// Keep the rows where mask[i] is true; all columns filtered in lockstep.
    Table filter_rows(const std::vector<uint8_t>& mask) const {
        Table out;
        for (const auto& c : cols_) {
            Column nc;
            nc.name = c.name;
            nc.dtype = c.dtype;
            for (size_t i = 0; i < c.size(); ++i) {
                if (!mask[i]) continue;
                nc.missing.push_back(c.missing[i]);
                if (c.is_numeric()) nc.num.push_back(c.num[i]);
                else nc.str.push_back(c.str[i]);
            }
            out.add_column(std::move(nc));
        }
        if (out.cols_.empty()) out.n_rows_ = 0;
        return out;
    }

    std::string summary() const {
        return "Table(" + std::to_string(n_rows_) + " rows x " + std::to_string(n_cols()) +
               " cols)";
    }

private:
    std::vector<Column> cols_;
    size_t n_rows_ = 0;
};

namespace csv {

namespace detail {

inline bool needs_quoting(const std::string& s) {
    if (s.empty()) return false;
    if (s.front() == ' ' || s.back() == ' ') return true;
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += "\"";
    return out;
}

struct RawField {
    std::string text;
    bool quoted = false;
};

/// Parses the whole document, honoring quoted fields (embedded commas,
/// newlines, doubled quotes).
inline std::vector<std::vector<RawField>> parse_document(const std::string& body) {
    std::vector<std::vector<RawField>> rows;
    std::vector<RawField> row;
    RawField field;
    size_t i = 0;
    const size_t n = body.size();
    bool in_quotes = false;
    bool row_started = false;
    size_t line = 1;

    auto end_field = [&]() {
        row.push_back(field);
        field = RawField{};
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        row_started = false;
    };

    while (i < n) {
        char c = body[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && body[i + 1] == '"') {
                    field.text += '"';
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            if (c == '\n') ++line;
            field.text += c;
            ++i;
            continue;
        }
        switch (c) {
            case '"':
                if (!field.text.empty())
                    throw ToolError("ParserError",
                                    "unexpected quote in unquoted field at line " +
                                        std::to_string(line));
                field.quoted = true;
                in_quotes = true;
                row_started = true;
                ++i;
                break;
            case ',':
                end_field();
                row_started = true;
                ++i;
                break;
            case '\r':
                ++i;
                break;
            case '\n':
                if (row_started || !field.text.empty() || !row.empty()) end_row();
                ++line;
                ++i;
                break;
            default:
                field.text += c;
                row_started = true;
                ++i;
        }
    }
    if (in_quotes) throw ToolError("ParserError", "unterminated quoted field");
    if (row_started || !field.text.empty() || !row.empty()) end_row();
    return rows;
}

}  // namespace detail

/// Reads a CSV with a header row, inferring per-column dtypes over the
/// non-missing cells: all-int -> int, all-number -> float, all True/False ->
/// bool, anything else -> text. Empty unquoted cells are missing.
inline Table read_csv(const std::string& filepath) {
    std::ifstream in(filepath, std::ios::binary);
    if (!in)
        throw ToolError("FileNotFoundError",
                        "[Errno 2] No such file or directory: '" + filepath + "'");
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto rows = detail::parse_document(body);
    if (rows.empty()) throw ToolError("EmptyDataError", "No columns to parse from file");

    const auto& header = rows[0];
    const size_t n_cols = header.size();
    const size_t n_data = rows.size() - 1;

    for (size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != n_cols)
            throw ToolError("ParserError", "Expected " + std::to_string(n_cols) +
                                               " fields in line " + std::to_string(r + 1) +
                                               ", saw " + std::to_string(rows[r].size()));
    }

    Table t;
    for (size_t c = 0; c < n_cols; ++c) {
        bool all_int = true, all_float = true, all_bool = true;
        bool any_value = false;
        for (size_t r = 1; r < rows.size(); ++r) {
            const auto& f = rows[r][c];
            if (f.text.empty() && !f.quoted) continue;  // missing
            any_value = true;
            if (all_int && !parse_int(f.text)) all_int = false;
            if (all_float && !parse_double(f.text)) all_float = false;
            if (all_bool && f.text != "True" && f.text != "False") all_bool = false;
        }
        Dtype dt = Dtype::Text;
        if (any_value) {
            if (all_int) dt = Dtype::Int;
            else if (all_float) dt = Dtype::Float;
            else if (all_bool) dt = Dtype::Bool;
        }
        Column col = Column::make(header[c].text, dt, n_data);
        for (size_t r = 1; r < rows.size(); ++r) {
            const auto& f = rows[r][c];
            size_t i = r - 1;
            if (f.text.empty() && !f.quoted) {
                col.missing[i] = 1;
                continue;
            }
            switch (dt) {
                case Dtype::Int: col.num[i] = static_cast<double>(*parse_int(f.text)); break;
                case Dtype::Float: col.num[i] = *parse_double(f.text); break;
                case Dtype::Bool: col.num[i] = f.text == "True" ? 1.0 : 0.0; break;
                default: col.str[i] = f.text;
            }
        }
        t.add_column(std::move(col));
    }
    return t;
}

/// RFC 4180 output; bools as True/False, missing as empty, floats in shortest
/// round-trip form.
inline void write_csv(const Table& t, const std::string& filepath) {
    std::filesystem::path p(filepath);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(filepath, std::ios::binary);
    if (!out) throw ToolError("OSError", "cannot open file for writing: '" + filepath + "'");
    for (size_t c = 0; c < t.n_cols(); ++c) {
        if (c) out << ',';
        const std::string& name = t.columns()[c].name;
        out << (detail::needs_quoting(name) ? detail::quote(name) : name);
    }
    out << '\n';
    for (size_t i = 0; i < t.n_rows(); ++i) {
        for (size_t c = 0; c < t.n_cols(); ++c) {
            if (c) out << ',';
            const Column& col = t.columns()[c];
            if (col.missing[i]) continue;
            std::string cell = col.cell_string(i);
            if (col.uses_strings() && (cell.empty() || detail::needs_quoting(cell)))
                cell = detail::quote(cell);
            out << cell;
        }
        out << '\n';
    }
    if (!out) throw ToolError("OSError", "write failed: '" + filepath + "'");
}

}  // namespace csv

}  // namespace toolplan
