#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "toolplan/competition.hpp"
#include "toolplan/table.hpp"
#include "toolplan/tool_registry.hpp"

namespace toolplan {

enum class Role { System, Human, AI, Tool };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::Human: return "user";
        case Role::AI: return "assistant";
        case Role::Tool: return "tool";
    }
    return "?";
}

inline const char* message_type_name(Role r) {
    switch (r) {
        case Role::System: return "SystemMessage";
        case Role::Human: return "HumanMessage";
        case Role::AI: return "AIMessage";
        case Role::Tool: return "ToolMessage";
    }
    return "?";
}

struct Message {
    Role role = Role::Human;
    std::string content;
    std::vector<ToolCall> tool_calls;  // AI messages only
    std::string tool_call_id;          // Tool messages answer one AI call

    static Message human(std::string text) { return {Role::Human, std::move(text), {}, {}}; }
    static Message ai(std::string text, std::vector<ToolCall> calls = {}) {
        return {Role::AI, std::move(text), std::move(calls), {}};
    }
    static Message tool(std::string text, std::string call_id) {
        return {Role::Tool, std::move(text), {}, std::move(call_id)};
    }
};

/// A proposed step: reasoning text, a tool call, both, or the explicit null
/// action (neither).
struct ActionProposal {
    std::string reasoning;
    std::optional<ToolCall> call;

    bool is_terminal() const { return !call.has_value(); }

    bool same_action(const ActionProposal& other) const {
        if (call.has_value() != other.call.has_value()) return false;
        if (call) return call->same_action(*other.call);
        return reasoning == other.reasoning;
    }
};

struct TrajectoryContext {
    const std::vector<Message>* messages = nullptr;  // chronological, root to node
    ordered_json tool_schemas;                       // exposed tools at this node
    std::string subtask_prefix;                      // hierarchical prompt prefix
};

struct Usage {
    long long total_tokens = 0;
    double total_cost = 0;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::vector<ActionProposal> propose(const TrajectoryContext& ctx, int k) = 0;
    virtual Usage usage() const { return {}; }
};

// ---------------------------------------------------------------------------
// scripted policy

struct PlaybookStep {
    std::string reasoning;
    ToolCall call;
};

struct Playbook {
    std::vector<PlaybookStep> steps;
};

class PlaybookExhausted : public std::runtime_error {
public:
    PlaybookExhausted() : std::runtime_error("playbook exhausted") {}
};

/// Deterministic test double for the LLM. Replays a fixed playbook; the next
/// step is chosen by matching the executed prefix visible in the context, so
/// failed or injected steps are simply retried/skipped over. With epsilon > 0
/// each proposal is replaced by a uniformly random exposed tool call with
/// probability epsilon (seeded), to exercise search recovery.
class ScriptedPolicy : public Policy {
public:
    ScriptedPolicy(Playbook playbook, uint64_t seed, double epsilon = 0.0)
        : playbook_(std::move(playbook)), rng_(seed), epsilon_(epsilon) {}

    /// Count of playbook steps already executed successfully in the context
    /// (in-order subsequence match over AI tool calls with ok observations).
    size_t matched_steps(const TrajectoryContext& ctx) const {
        size_t next = 0;
        if (!ctx.messages) return 0;
        const auto& msgs = *ctx.messages;
        for (size_t i = 0; i < msgs.size() && next < playbook_.steps.size(); ++i) {
            if (msgs[i].role != Role::AI || msgs[i].tool_calls.size() != 1) continue;
            if (!msgs[i].tool_calls[0].same_action(playbook_.steps[next].call)) continue;
            // the paired Tool observation must be a success
            for (size_t j = i + 1; j < msgs.size(); ++j) {
                if (msgs[j].role != Role::Tool) continue;
                if (msgs[j].tool_call_id != msgs[i].tool_calls[0].call_id) continue;
                if (msgs[j].content.rfind("Applied ", 0) == 0) ++next;
                break;
            }
        }
        return next;
    }

    PlaybookStep scripted_step(const TrajectoryContext& ctx) const {
        size_t next = matched_steps(ctx);
        if (next >= playbook_.steps.size()) throw PlaybookExhausted();
        return playbook_.steps[next];
    }

    std::vector<ActionProposal> propose(const TrajectoryContext& ctx, int k) override {
        std::vector<ActionProposal> out;
        size_t next = matched_steps(ctx);
        for (int i = 0; i < k; ++i) {
            ActionProposal p;
            bool noisy = epsilon_ > 0 && std::uniform_real_distribution<double>(0, 1)(rng_) <
                                             epsilon_;
            if (noisy) {
                auto noise = noise_call(ctx);
                if (!noise) continue;
                p.reasoning = "Trying an exploratory tool call.";
                p.call = std::move(*noise);
            } else if (next < playbook_.steps.size()) {
                p.reasoning = playbook_.steps[next].reasoning;
                p.call = playbook_.steps[next].call;
            } else {
                p.reasoning = "All pipeline steps are complete.";
            }
            bool dup = false;
            for (const auto& q : out) dup = dup || q.same_action(p);
            if (!dup) out.push_back(std::move(p));
        }
        for (size_t i = 0; i < out.size(); ++i)
            if (out[i].call) out[i].call->call_id = fresh_call_id();
        return out;
    }

    std::string fresh_call_id() { return "call_scripted_" + std::to_string(++call_counter_); }

private:
    Playbook playbook_;
    mutable std::mt19937_64 rng_;
    double epsilon_;
    long long call_counter_ = 0;

    /// A plausible random call against one of the exposed tools: bindings are
    /// drawn from the conventional pipeline names, literals from defaults.
    std::optional<ToolCall> noise_call(const TrajectoryContext& ctx) {
        if (ctx.tool_schemas.empty()) return std::nullopt;
        size_t pick = rng_() % ctx.tool_schemas.size();
        const auto& fn = ctx.tool_schemas[pick]["function"];
        ToolCall call;
        call.tool = fn["name"].get<std::string>();
        static const char* pool[] = {"train_df", "test_df",  "combined_df", "X_train",
                                     "Y_train",  "X_test",   "model",       "test_predictions",
                                     "best_estimator"};
        const auto& params = fn["parameters"]["properties"];
        if (params.contains("bindings") && params["bindings"].contains("required"))
            for (const auto& name : params["bindings"]["required"])
                call.bindings[name.get<std::string>()] = pool[rng_() % 9];
        if (params.contains("func_kwargs") && params["func_kwargs"].contains("required"))
            for (const auto& name : params["func_kwargs"]["required"]) {
                const auto& prop =
                    params["func_kwargs"]["properties"][name.get<std::string>()];
                std::string type = prop.value("type", "string");
                if (type == "string") call.func_kwargs[name.get<std::string>()] = "noise";
                else if (type == "boolean") call.func_kwargs[name.get<std::string>()] = true;
                else if (type == "array")
                    call.func_kwargs[name.get<std::string>()] = nlohmann::json::array();
                else if (type == "object")
                    call.func_kwargs[name.get<std::string>()] = nlohmann::json::object();
                else call.func_kwargs[name.get<std::string>()] = 1;
            }
        const auto& req = fn["parameters"]["required"];
        for (const auto& r : req)
            if (r == "output") call.output = "noise_" + std::to_string(rng_() % 1000);
        return call;
    }
};

/// Golden pipeline playbook for a prepared competition: load, combine, clean,
/// encode, split, convert, fit, predict, save.
inline Playbook build_playbook(const CompetitionSpec& comp, const std::string& submission_path,
                               const std::string& model_path) {
    Playbook pb;
    auto add = [&](std::string reasoning, std::string tool,
                   std::map<std::string, std::string> bindings, nlohmann::json kwargs,
                   std::optional<std::string> output) {
        PlaybookStep step;
        step.reasoning = std::move(reasoning);
        step.call.tool = std::move(tool);
        step.call.bindings = std::move(bindings);
        step.call.func_kwargs = std::move(kwargs);
        step.call.output = std::move(output);
        pb.steps.push_back(std::move(step));
    };

    add("Load the training data.", "read_data", {}, {{"filepath", comp.train_path}}, "train_df");
    add("Load the test data.", "read_data", {}, {{"filepath", comp.test_path}}, "test_df");
    add("Combine train and test for consistent preprocessing.", "concatenate_train_test",
        {{"train_df", "train_df"}, {"test_df", "test_df"}}, nlohmann::json::object(),
        "combined_df");
    add("Fill all missing values with per-column modes.", "fillna_with_mode",
        {{"df", "combined_df"}}, nlohmann::json::object(), std::nullopt);

    // encode every categorical feature except the target
    std::vector<std::string> to_encode;
    try {
        Table train = csv::read_csv(comp.train_path);
        for (const auto& c : train.columns())
            if (dtype_is_categorical(c.dtype) && c.name != comp.target)
                to_encode.push_back(c.name);
    } catch (const ToolError&) {
    }
    add("Label-encode the categorical feature columns.", "label_encode",
        {{"df", "combined_df"}}, {{"columns", to_encode}}, std::nullopt);

    add("Split the combined data back into train and test.", "split_combined_into_train_test",
        {{"combined", "combined_df"}}, nlohmann::json::object(), "splitted_dfs");
    add("Extract train features and target.", "convert_dataframe_to_features_target",
        {{"df", "train_df"}}, {{"target_column", comp.target}, {"is_train", true}}, "train_xy");
    add("Extract test features.", "convert_dataframe_to_features_target", {{"df", "test_df"}},
        {{"target_column", comp.target}, {"is_train", false}}, "test_x");
    std::string fit_tool =
        comp.task == "regression" ? "fit_lightgbm_regressor" : "fit_lightgbm_classifier";
    add("Fit a boosted-tree model with cross-validation.", fit_tool,
        {{"X_train", "X_train"}, {"y_train", "Y_train"}}, {{"cv", 3}}, "model");
    add("Predict the target for the test rows.", "predict_target",
        {{"model", "model"}, {"X_data", "X_test"}}, nlohmann::json::object(),
        "test_predictions");
    add("Persist the trained model.", "save_model", {{"model", "model"}},
        {{"filepath", model_path}}, std::nullopt);
    add("Write the submission file.", "save_dataframe_to_csv", {{"df", "test_predictions"}},
        {{"filepath", submission_path}}, std::nullopt);
    return pb;
}

// ---------------------------------------------------------------------------
// LLM policy over an OpenAI-compatible chat-completions endpoint

class BackendUnavailable : public std::runtime_error {
public:
    explicit BackendUnavailable(const std::string& why)
        : std::runtime_error("backend unavailable: " + why) {}
};

class MalformedBackendReply : public std::runtime_error {
public:
    explicit MalformedBackendReply(const std::string& why)
        : std::runtime_error("malformed backend reply: " + why) {}
};

struct LlmConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4.1-mini";
    std::string api_key_env = "TOOLPLAN_API_KEY";
    int retries = 3;
    int backoff_ms = 50;
    double prompt_price_per_1k = 0.0;
    double completion_price_per_1k = 0.0;
};

/// Transport seam: production uses HttpLlmClient; tests may substitute an
/// in-process client.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual ordered_json chat(const ordered_json& request) = 0;
};

inline constexpr const char* kProposerPrompt =
    "You are a Data Scientist tasked with solving the Kaggle competition provided below, with "
    "the tools available to you. Propose tool candidates that would help solve the problem at "
    "the current stage.";

inline constexpr const char* kJudgePrompt =
    "You are a Data Science judge, who evaluates the goodness of tool calling trajectories to "
    "solve Machine Learning tasks on Kaggle. Reflect and grade the agent's trajectory plan for "
    "the provided challenge. The trajectories should be aimed towards solving the challenge, "
    "i.e., generating a trained model and a valid submission file. Keep your reflections "
    "concise and to the point.";

inline ordered_json messages_to_wire(const std::string& system_prompt,
                                     const std::vector<Message>& messages) {
    ordered_json out = ordered_json::array();
    ordered_json sys;
    sys["role"] = "system";
    sys["content"] = system_prompt;
    out.push_back(sys);
    for (const auto& m : messages) {
        ordered_json w;
        w["role"] = role_name(m.role);
        w["content"] = m.content;
        if (m.role == Role::AI && !m.tool_calls.empty()) {
            ordered_json calls = ordered_json::array();
            for (const auto& c : m.tool_calls) {
                ordered_json fn;
                fn["name"] = c.tool;
                fn["arguments"] = c.args_json().dump();
                ordered_json call;
                call["id"] = c.call_id;
                call["type"] = "function";
                call["function"] = fn;
                calls.push_back(call);
            }
            w["tool_calls"] = calls;
        }
        if (m.role == Role::Tool) w["tool_call_id"] = m.tool_call_id;
        out.push_back(w);
    }
    return out;
}

inline std::string proposer_system_prompt(const std::string& subtask_prefix) {
    if (subtask_prefix.empty()) return kProposerPrompt;
    return subtask_prefix + ". Propose tool candidates that would help solve the problem at the "
                            "current stage.";
}

inline ordered_json build_chat_request(const LlmConfig& cfg, const TrajectoryContext& ctx,
                                       int k) {
    ordered_json req;
    req["model"] = cfg.model;
    req["messages"] =
        messages_to_wire(proposer_system_prompt(ctx.subtask_prefix), *ctx.messages);
    req["tools"] = ctx.tool_schemas;
    req["tool_choice"] = "auto";
    req["n"] = k;
    return req;
}

class HttpLlmClient : public LlmClient {
public:
    explicit HttpLlmClient(LlmConfig cfg) : cfg_(std::move(cfg)) {}

    ordered_json chat(const ordered_json& request) override;

private:
    LlmConfig cfg_;
};

/// Parses one assistant choice into a proposal. Unparsable tool-call argument
/// JSON degrades into a call with empty arguments so execution surfaces a
/// normal tool error instead of crashing the search.
inline std::optional<ActionProposal> proposal_from_choice(const nlohmann::json& message) {
    ActionProposal p;
    if (message.contains("content") && message["content"].is_string())
        p.reasoning = message["content"].get<std::string>();
    if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
        !message["tool_calls"].empty()) {
        const auto& tc = message["tool_calls"][0];
        if (!tc.contains("function") || !tc["function"].contains("name")) return std::nullopt;
        std::string name = tc["function"]["name"].get<std::string>();
        std::string id = tc.value("id", std::string("call_0"));
        nlohmann::json args = nlohmann::json::object();
        if (tc["function"].contains("arguments")) {
            const auto& raw = tc["function"]["arguments"];
            if (raw.is_object()) {
                args = raw;
            } else if (raw.is_string()) {
                nlohmann::json parsed =
                    nlohmann::json::parse(raw.get<std::string>(), nullptr, false);
                if (!parsed.is_discarded() && parsed.is_object()) args = parsed;
            }
        }
        p.call = ToolCall::from_args_json(name, args, id);
    }
    if (p.reasoning.empty() && !p.call) return std::nullopt;
    return p;
}

class LlmPolicy : public Policy {
public:
    LlmPolicy(LlmConfig cfg, std::shared_ptr<LlmClient> client)
        : cfg_(std::move(cfg)), client_(std::move(client)) {}

    std::vector<ActionProposal> propose(const TrajectoryContext& ctx, int k) override {
        ordered_json req = build_chat_request(cfg_, ctx, k);
        ordered_json resp = client_->chat(req);
        accumulate_usage(resp);
        if (!resp.contains("choices") || !resp["choices"].is_array())
            throw MalformedBackendReply("no choices array");
        std::vector<ActionProposal> out;
        for (const auto& choice : resp["choices"]) {
            if (!choice.contains("message")) continue;
            auto p = proposal_from_choice(choice["message"]);
            if (!p) continue;
            bool dup = false;
            for (const auto& q : out) dup = dup || q.same_action(*p);
            if (!dup && static_cast<int>(out.size()) < k) out.push_back(std::move(*p));
        }
        if (out.empty()) throw MalformedBackendReply("no parsable proposals in reply");
        return out;
    }

    Usage usage() const override { return usage_; }

private:
    LlmConfig cfg_;
    std::shared_ptr<LlmClient> client_;
    Usage usage_;

    void accumulate_usage(const ordered_json& resp) {
        if (!resp.contains("usage")) return;
        const auto& u = resp["usage"];
        usage_.total_tokens += u.value("total_tokens", 0LL);
        usage_.total_cost += u.value("prompt_tokens", 0LL) / 1000.0 * cfg_.prompt_price_per_1k +
                             u.value("completion_tokens", 0LL) / 1000.0 *
                                 cfg_.completion_price_per_1k;
    }
};

// ---------------------------------------------------------------------------
// evaluator (LATS-style trajectory judge)

struct EvalResult {
    double score01 = 0;       // Score line / 10
    double raw_score = 0;     // as extracted
    bool score_found = false;
    std::string reflection;
};

/// Extracts the final "Score: <n>" line; absence is treated as score 0.
inline EvalResult parse_reflection(const std::string& text) {
    EvalResult out;
    out.reflection = text;
    size_t pos = text.rfind("Score:");
    if (pos != std::string::npos) {
        const char* start = text.c_str() + pos + 6;
        char* end = nullptr;
        double v = std::strtod(start, &end);
        if (end != start) {
            out.raw_score = v;
            out.score01 = v / 10.0;
            out.score_found = true;
        }
    }
    return out;
}

class LlmEvaluator {
public:
    LlmEvaluator(LlmConfig cfg, std::shared_ptr<LlmClient> client)
        : cfg_(std::move(cfg)), client_(std::move(client)) {}

    EvalResult evaluate(const TrajectoryContext& ctx) {
        ordered_json req;
        req["model"] = cfg_.model;
        req["messages"] = messages_to_wire(kJudgePrompt, *ctx.messages);
        req["n"] = 1;
        ordered_json resp = client_->chat(req);
        if (resp.contains("usage")) {
            usage_.total_tokens += resp["usage"].value("total_tokens", 0LL);
        }
        if (!resp.contains("choices") || resp["choices"].empty() ||
            !resp["choices"][0].contains("message"))
            throw MalformedBackendReply("no judge reply");
        std::string text = resp["choices"][0]["message"].value("content", std::string());
        return parse_reflection(text);
    }

    Usage usage() const { return usage_; }

private:
    LlmConfig cfg_;
    std::shared_ptr<LlmClient> client_;
    Usage usage_;
};

}  // namespace toolplan

// httplib is heavy; keep its include at the bottom and the method out of line.
#include "httplib.h"

namespace toolplan {

inline ordered_json HttpLlmClient::chat(const ordered_json& request) {
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(cfg_.backoff_ms * (1 << (attempt - 1))));
        httplib::Client cli(cfg_.host, cfg_.port);
        cli.set_connection_timeout(5);
        cli.set_read_timeout(120);
        httplib::Headers headers;
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
        auto res = cli.Post(cfg_.path, headers, request.dump(), "application/json");
        if (!res) {
            last_error = "connection failed";
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendUnavailable("HTTP " + std::to_string(res->status) + ": " + res->body);
        ordered_json parsed = ordered_json::parse(res->body, nullptr, false);
        if (parsed.is_discarded()) throw MalformedBackendReply("response is not JSON");
        return parsed;
    }
    throw BackendUnavailable(last_error);
}

}  // namespace toolplan
