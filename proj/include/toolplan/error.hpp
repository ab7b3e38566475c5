#pragma once

#include <stdexcept>
#include <string>

namespace toolplan {

/// Failure raised by toolkit functions and the registry wrapper layer.
/// `what()` is rendered in the Python exception style the tool messages use,
/// e.g. ValueError('Input y contains NaN.').
class ToolError : public std::runtime_error {
public:
    ToolError(std::string exc_type, std::string detail)
        : std::runtime_error(render(exc_type, detail)),
          exc_type_(std::move(exc_type)),
          detail_(std::move(detail)) {}

    const std::string& exc_type() const { return exc_type_; }
    const std::string& detail() const { return detail_; }

    static std::string render(const std::string& exc_type, const std::string& detail) {
        bool has_double = detail.find('"') != std::string::npos;
        char q = has_double ? '\'' : '"';
        // mirror repr(): double quotes when the message itself contains one
        if (detail.find('\'') != std::string::npos && !has_double) q = '"';
        else if (!has_double) q = '\'';
        return exc_type + "(" + q + detail + q + ")";
    }

private:
    std::string exc_type_;
    std::string detail_;
};

inline ToolError value_error(const std::string& msg) { return ToolError("ValueError", msg); }
inline ToolError type_error(const std::string& msg) { return ToolError("TypeError", msg); }
inline ToolError key_error(const std::string& msg) { return ToolError("KeyError", msg); }

}  // namespace toolplan
