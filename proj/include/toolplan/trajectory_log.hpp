#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "toolplan/policy.hpp"
#include "toolplan/tool_registry.hpp"

namespace toolplan {

/// Timestamp source. Scripted trials use the deterministic clock so trajectory
/// logs are byte-identical across runs with the same seed.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::string now() = 0;
    virtual double elapsed_seconds() = 0;
};

class DeterministicClock : public Clock {
public:
    std::string now() override {
        ++ticks_;
        char buf[40];
        std::snprintf(buf, sizeof(buf), "2025-01-01T00:00:%02lld.%06lld", ticks_ / 1000000,
                      ticks_ % 1000000);
        return buf;
    }
    double elapsed_seconds() override { return static_cast<double>(ticks_) / 1e6; }

private:
    long long ticks_ = 0;
};

class SystemClock : public Clock {
public:
    SystemClock() : start_(std::chrono::system_clock::now()) {}

    std::string now() override {
        auto tp = std::chrono::system_clock::now();
        auto us = std::chrono::duration_cast<std::chrono::microseconds>(tp.time_since_epoch()) %
                  1000000;
        std::time_t t = std::chrono::system_clock::to_time_t(tp);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06lld",
                      tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                      tm.tm_sec, static_cast<long long>(us.count()));
        return buf;
    }

    double elapsed_seconds() override {
        return std::chrono::duration<double>(std::chrono::system_clock::now() - start_).count();
    }

private:
    std::chrono::system_clock::time_point start_;
};

namespace logs {

inline constexpr size_t kPreviewLimit = 300;

inline std::string preview(const std::string& text) {
    if (text.size() <= kPreviewLimit) return text;
    return text.substr(0, kPreviewLimit) + "... [truncated]";
}

/// Accumulates step records in the trajectory-log schema: step_number,
/// timestamp, step_type, action plus per-type payload fields.
class TrajectoryLog {
public:
    TrajectoryLog(std::string competition, std::string algorithm, uint64_t seed, Clock* clock)
        : competition_(std::move(competition)),
          algorithm_(std::move(algorithm)),
          seed_(seed),
          clock_(clock) {}

    void tool_selection(const std::string& content, const std::vector<ToolCall>& calls) {
        ordered_json rec = base("tool_selection", "selected_tools_for_execution");
        rec["message_type"] = "AIMessage";
        ordered_json names = ordered_json::array();
        ordered_json detail = ordered_json::array();
        for (const auto& c : calls) {
            names.push_back(c.tool);
            ordered_json d;
            d["name"] = c.tool;
            d["args"] = c.args_json();
            d["id"] = c.call_id;
            d["type"] = "tool_call";
            detail.push_back(d);
        }
        rec["tools_selected"] = names;
        rec["tool_calls_detail"] = detail;
        rec["content"] = content;
        steps_.push_back(std::move(rec));
    }

    void tool_result(const std::string& content, const ordered_json& scratchpad_dump) {
        ordered_json rec = base("tool_result", "received_tool_output");
        rec["message_type"] = "ToolMessage";
        rec["content_preview"] = preview(content);
        rec["content_length"] = content.size();
        if (!scratchpad_dump.empty()) rec["scratchpad"] = scratchpad_dump;
        steps_.push_back(std::move(rec));
    }

    void reward_feedback(const std::string& content) {
        ordered_json rec = base("reward_feedback", "generated_reward_feedback");
        rec["message_type"] = "HumanMessage";
        rec["content_preview"] = preview(content);
        rec["content_length"] = content.size();
        steps_.push_back(std::move(rec));
    }

    void reflection(const std::string& content, double extracted_score) {
        ordered_json rec = base("reflection", "llm_reflection");
        rec["message_type"] = "HumanMessage";
        rec["content_preview"] = preview(content);
        rec["content_length"] = content.size();
        rec["extracted_score"] = extracted_score;
        rec["full_reflection_content"] = content;
        steps_.push_back(std::move(rec));
    }

    void tool_execution_initiation(const ToolCall& call) {
        ordered_json rec = base("tool_execution_initiation", "tool_execution_started");
        ordered_json entry;
        entry["tool_name"] = call.tool;
        entry["tool_args"] = call.args_json();
        entry["tool_id"] = call.call_id;
        rec["tools_to_execute"] = ordered_json::array({entry});
        steps_.push_back(std::move(rec));
    }

    void tool_execution_completion(const std::string& content,
                                   const ordered_json& scratchpad_dump) {
        ordered_json rec = base("tool_execution_completion", "tool_execution_completed");
        ordered_json entry;
        entry["message_type"] = "ToolMessage";
        entry["content_preview"] = preview(content);
        entry["content_length"] = content.size();
        rec["tool_results"] = ordered_json::array({entry});
        if (!scratchpad_dump.empty()) rec["scratchpad"] = scratchpad_dump;
        steps_.push_back(std::move(rec));
    }

    void execution_summary(const Usage& usage, int final_message_count) {
        ordered_json rec = base("execution_summary", "agent_execution_completed");
        rec["total_execution_time"] = clock_->elapsed_seconds();
        rec["total_tokens"] = usage.total_tokens;
        rec["total_cost"] = usage.total_cost;
        rec["final_message_count"] = final_message_count;
        rec["competition_name"] = competition_;
        steps_.push_back(std::move(rec));
    }

    ordered_json to_json() const {
        ordered_json out;
        out["competition_name"] = competition_;
        out["algorithm"] = algorithm_;
        out["seed"] = seed_;
        out["steps"] = steps_;
        return out;
    }

    void write(const std::string& filepath) const {
        std::filesystem::path p(filepath);
        if (p.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(p.parent_path(), ec);
        }
        std::ofstream out(filepath, std::ios::binary);
        out << to_json().dump(2) << "\n";
    }

private:
    std::string competition_;
    std::string algorithm_;
    uint64_t seed_;
    Clock* clock_;
    ordered_json steps_ = ordered_json::array();
    int step_number_ = 0;

    ordered_json base(const char* step_type, const char* action) {
        ordered_json rec;
        rec["step_number"] = ++step_number_;
        rec["timestamp"] = clock_->now();
        rec["step_type"] = step_type;
        rec["action"] = action;
        return rec;
    }
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

inline const std::vector<std::string>& known_step_types() {
    static const std::vector<std::string> kinds = {
        "tool_selection",      "tool_execution_initiation", "tool_execution_completion",
        "tool_result",         "reflection",                "reward_feedback",
        "execution_summary"};
    return kinds;
}

/// Schema validation for replay: structural problems are errors, unknown
/// step_types only warn (forward compatibility).
inline ValidationReport validate_log(const nlohmann::json& log) {
    ValidationReport report;
    if (!log.is_object() || !log.contains("steps") || !log["steps"].is_array()) {
        report.errors.push_back("log must be an object with a 'steps' array");
        return report;
    }
    auto need = [&](const nlohmann::json& rec, const char* field, int idx) {
        if (!rec.contains(field))
            report.errors.push_back("step " + std::to_string(idx) + " missing field '" + field +
                                    "'");
    };
    int idx = 0;
    for (const auto& rec : log["steps"]) {
        ++idx;
        if (!rec.is_object()) {
            report.errors.push_back("step " + std::to_string(idx) + " is not an object");
            continue;
        }
        for (const char* f : {"step_number", "timestamp", "step_type"}) need(rec, f, idx);
        if (!rec.contains("step_type")) continue;
        std::string type = rec["step_type"].is_string() ? rec["step_type"].get<std::string>()
                                                        : std::string();
        const auto& known = known_step_types();
        if (std::find(known.begin(), known.end(), type) == known.end()) {
            report.warnings.push_back("step " + std::to_string(idx) + " has unknown step_type '" +
                                      type + "'");
            continue;
        }
        if (type == "tool_selection") {
            need(rec, "tools_selected", idx);
            need(rec, "tool_calls_detail", idx);
        } else if (type == "tool_execution_initiation") {
            need(rec, "tools_to_execute", idx);
        } else if (type == "tool_execution_completion") {
            need(rec, "tool_results", idx);
        } else if (type == "tool_result" || type == "reward_feedback") {
            need(rec, "content_preview", idx);
            need(rec, "content_length", idx);
        } else if (type == "reflection") {
            need(rec, "content_preview", idx);
            need(rec, "extracted_score", idx);
        } else if (type == "execution_summary") {
            for (const char* f : {"total_execution_time", "total_tokens", "total_cost",
                                  "final_message_count", "competition_name"})
                need(rec, f, idx);
        }
    }
    return report;
}

/// Human-readable rendering used by the replay command.
inline std::string render_log(const nlohmann::json& log) {
    std::string out;
    out += "competition: " + log.value("competition_name", std::string("?")) + "\n";
    out += "algorithm:   " + log.value("algorithm", std::string("?")) + "\n";
    if (log.contains("seed")) out += "seed:        " + log["seed"].dump() + "\n";
    out += "\n";
    for (const auto& rec : log.value("steps", nlohmann::json::array())) {
        std::string type = rec.value("step_type", std::string("?"));
        out += "[" + std::to_string(rec.value("step_number", 0)) + "] " + type;
        if (type == "tool_selection" && rec.contains("tools_selected")) {
            out += ": " + rec["tools_selected"].dump();
            if (rec.contains("content") && !rec["content"].get<std::string>().empty())
                out += "\n    thought: " + rec["content"].get<std::string>();
            for (const auto& d : rec.value("tool_calls_detail", nlohmann::json::array()))
                out += "\n    args: " + d.value("args", nlohmann::json::object()).dump();
        } else if (type == "tool_execution_initiation") {
            for (const auto& t : rec.value("tools_to_execute", nlohmann::json::array()))
                out += ": " + t.value("tool_name", std::string("?")) + " " +
                       t.value("tool_args", nlohmann::json::object()).dump();
        } else if (type == "tool_result") {
            out += ": " + rec.value("content_preview", std::string());
        } else if (type == "tool_execution_completion") {
            for (const auto& t : rec.value("tool_results", nlohmann::json::array()))
                out += ": " + t.value("content_preview", std::string());
        } else if (type == "reward_feedback") {
            out += ": " + rec.value("content_preview", std::string());
        } else if (type == "reflection") {
            out += " (score " + std::to_string(rec.value("extracted_score", 0.0)) + "): " +
                   rec.value("content_preview", std::string());
        } else if (type == "execution_summary") {
            out += ": tokens=" + std::to_string(rec.value("total_tokens", 0LL)) +
                   " cost=" + std::to_string(rec.value("total_cost", 0.0)) +
                   " messages=" + std::to_string(rec.value("final_message_count", 0));
        }
        if (rec.contains("scratchpad")) {
            out += "\n    scratchpad:";
            for (const auto& e : rec["scratchpad"])
                out += " " + e.value("name", std::string("?")) + "=" +
                       e.value("summary", std::string("?"));
        }
        out += "\n";
    }
    return out;
}

}  // namespace logs

}  // namespace toolplan
