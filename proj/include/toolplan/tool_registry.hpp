#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "toolplan/competition.hpp"
#include "toolplan/error.hpp"
#include "toolplan/scratchpad.hpp"
#include "toolplan/stages.hpp"

namespace toolplan {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Read/write contract of a tool against the scratchpad. Set writes without
/// reading, Get reads without writing, GetSet does both, Override re-emits one
/// of its inputs' names as a shadowing entry.
enum class WrapperKind { Set, Get, GetSet, Override };

inline const char* wrapper_name(WrapperKind w) {
    switch (w) {
        case WrapperKind::Set: return "set";
        case WrapperKind::Get: return "get";
        case WrapperKind::GetSet: return "get_set";
        case WrapperKind::Override: return "override";
    }
    return "?";
}

inline std::optional<WrapperKind> wrapper_from_name(const std::string& s) {
    if (s == "set") return WrapperKind::Set;
    if (s == "get") return WrapperKind::Get;
    if (s == "get_set") return WrapperKind::GetSet;
    if (s == "override") return WrapperKind::Override;
    return std::nullopt;
}

enum class ToolErrorKind {
    UnknownTool,
    MaskedTool,
    MissingRequiredArg,
    BindingUnresolved,
    KindMismatch,
    ToolRuntimeError,
};

struct ParamSpec {
    std::string name;
    bool is_binding = false;
    std::vector<ObjectKind> accepted;  // binding params
    std::string literal_type;          // literal params: string/number/integer/boolean/array/object/any
    bool required = true;
    json default_value;
    std::string description;
};

struct ToolDescriptor {
    std::string name;
    std::string doc;  // first docstring line
    std::vector<ParamSpec> params;
    WrapperKind wrapper = WrapperKind::Get;
    std::set<StageId> stages;

    /// Python-style docstring rendered from the declared parameters; the
    /// "Applied ... with docstring:" tool messages embed this text verbatim.
    std::string docstring() const {
        std::string out = "\n    " + doc + "\n\n    Parameters\n    ----------\n";
        for (const auto& p : params) {
            std::string type;
            if (p.is_binding) {
                std::vector<std::string> kinds;
                for (ObjectKind k : p.accepted) kinds.push_back(object_kind_name(k));
                type = join(kinds, " or ");
            } else {
                type = p.literal_type;
                if (!p.required)
                    type += ", optional" + std::string(p.default_value.is_null()
                                                           ? ""
                                                           : ", default=" + p.default_value.dump());
            }
            out += "    " + p.name + " : " + type + "\n";
            if (!p.description.empty()) out += "        " + p.description + "\n";
        }
        if (wrapper == WrapperKind::Set || wrapper == WrapperKind::GetSet)
            out += "    output : str\n        Scratchpad name under which the result is "
                   "stored.\n";
        return out;
    }

    const ParamSpec* find_param(const std::string& name) const {
        for (const auto& p : params)
            if (p.name == name) return &p;
        return nullptr;
    }

    const ParamSpec* first_binding() const {
        for (const auto& p : params)
            if (p.is_binding) return &p;
        return nullptr;
    }
};

/// One parameterized invocation: scratchpad bindings plus literal kwargs.
struct ToolCall {
    std::string tool;
    std::map<std::string, std::string> bindings;
    json func_kwargs = json::object();
    std::optional<std::string> output;
    std::string call_id;

    ordered_json args_json() const {
        ordered_json args;
        ordered_json b = ordered_json::object();
        for (const auto& [k, v] : bindings) b[k] = v;
        args["bindings"] = b;
        if (!func_kwargs.empty()) args["func_kwargs"] = func_kwargs;
        if (output) args["output"] = *output;
        return args;
    }

    static ToolCall from_args_json(const std::string& tool, const json& args,
                                   const std::string& id) {
        ToolCall call;
        call.tool = tool;
        call.call_id = id;
        if (args.contains("bindings") && args["bindings"].is_object())
            for (const auto& [k, v] : args["bindings"].items())
                call.bindings[k] = v.is_string() ? v.get<std::string>() : v.dump();
        if (args.contains("func_kwargs") && args["func_kwargs"].is_object())
            call.func_kwargs = args["func_kwargs"];
        if (args.contains("output") && args["output"].is_string())
            call.output = args["output"].get<std::string>();
        return call;
    }

    bool same_action(const ToolCall& other) const {
        return tool == other.tool && bindings == other.bindings &&
               func_kwargs == other.func_kwargs && output == other.output;
    }
};

inline constexpr const char* kToolErrorSuffix = "\n Please fix your mistakes.";

struct ToolResult {
    bool ok = false;
    std::string message;
    std::vector<std::pair<std::string, ObjectKind>> created;
    std::optional<ToolErrorKind> error_kind;

    static ToolResult failure(ToolErrorKind kind, const std::string& detail) {
        ToolResult r;
        r.ok = false;
        r.error_kind = kind;
        r.message = "Error: " + detail + kToolErrorSuffix;
        return r;
    }
};

struct ToolArgs {
    std::map<std::string, const ScratchpadEntry*> bound;
    json kwargs;         // declared literals with defaults merged
    std::string output;  // resolved output name; empty for Get tools
    const TrialContext* ctx = nullptr;
};

struct CreatedEntry {
    std::string name;
    ObjectKind kind;
    ArtifactPtr value;
};

struct ToolOutput {
    std::vector<CreatedEntry> created;
    std::string extra;  // extra message line (tuning summary, rendered reports)
};

using ToolImpl = std::function<ToolOutput(const ToolArgs&)>;

class Registry;

/// A (possibly stage-masked) window onto the registry: schema export and
/// invocation go through a view so masking is enforced uniformly.
class RegistryView {
public:
    RegistryView(const Registry* reg, std::optional<StageId> stage) : reg_(reg), stage_(stage) {}

    std::vector<const ToolDescriptor*> exposed() const;
    bool is_exposed(const std::string& name) const;
    std::optional<StageId> stage() const { return stage_; }

    ordered_json export_schemas() const;

    ToolResult invoke(const ToolCall& call, const PathView& view, NodeScratchpad& child_pad,
                      const TrialContext& ctx) const;

private:
    const Registry* reg_;
    std::optional<StageId> stage_;
};

class Registry {
public:
    void register_tool(ToolDescriptor desc, ToolImpl impl) {
        if (by_name_.count(desc.name))
            throw value_error("tool '" + desc.name + "' is already registered");
        by_name_[desc.name] = tools_.size();
        tools_.push_back({std::move(desc), std::move(impl)});
    }

    size_t size() const { return tools_.size(); }

    const ToolDescriptor* find(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : &tools_[it->second].desc;
    }

    const ToolImpl* impl_of(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : &tools_[it->second].impl;
    }

    std::vector<const ToolDescriptor*> all() const {
        std::vector<const ToolDescriptor*> out;
        out.reserve(tools_.size());
        for (const auto& t : tools_) out.push_back(&t.desc);
        return out;
    }

    RegistryView full_view() const { return RegistryView(this, std::nullopt); }

    RegistryView masked_view(StageId stage) const {
        bool any = false;
        for (const auto& t : tools_)
            if (t.desc.stages.count(stage)) {
                any = true;
                break;
            }
        if (!any)
            throw value_error(std::string("no tools are assigned to subtask '") +
                              stage_name(stage) + "'");
        return RegistryView(this, stage);
    }

private:
    struct Slot {
        ToolDescriptor desc;
        ToolImpl impl;
    };
    std::vector<Slot> tools_;
    std::map<std::string, size_t> by_name_;
};

inline std::vector<const ToolDescriptor*> RegistryView::exposed() const {
    std::vector<const ToolDescriptor*> out;
    for (const ToolDescriptor* d : reg_->all())
        if (!stage_ || d->stages.count(*stage_)) out.push_back(d);
    return out;
}

inline bool RegistryView::is_exposed(const std::string& name) const {
    const ToolDescriptor* d = reg_->find(name);
    return d && (!stage_ || d->stages.count(*stage_));
}

inline ordered_json RegistryView::export_schemas() const {
    ordered_json out = ordered_json::array();
    for (const ToolDescriptor* d : exposed()) {
        ordered_json bindings_props = ordered_json::object();
        ordered_json kwargs_props = ordered_json::object();
        std::vector<std::string> bindings_req, kwargs_req;
        for (const auto& p : d->params) {
            if (p.is_binding) {
                std::vector<std::string> kinds;
                for (ObjectKind k : p.accepted) kinds.push_back(object_kind_name(k));
                ordered_json prop;
                prop["type"] = "string";
                prop["description"] = "scratchpad name of a " + join(kinds, " or ") +
                                      (p.description.empty() ? "" : ": " + p.description);
                bindings_props[p.name] = prop;
                if (p.required) bindings_req.push_back(p.name);
            } else {
                ordered_json prop;
                prop["type"] = p.literal_type == "any" ? "string" : p.literal_type;
                if (!p.description.empty()) prop["description"] = p.description;
                if (!p.default_value.is_null()) prop["default"] = p.default_value;
                kwargs_props[p.name] = prop;
                if (p.required) kwargs_req.push_back(p.name);
            }
        }
        ordered_json parameters;
        parameters["type"] = "object";
        ordered_json props = ordered_json::object();
        props["bindings"] = {{"type", "object"}, {"properties", bindings_props}};
        if (!bindings_req.empty()) props["bindings"]["required"] = bindings_req;
        props["func_kwargs"] = {{"type", "object"}, {"properties", kwargs_props}};
        if (!kwargs_req.empty()) props["func_kwargs"]["required"] = kwargs_req;
        std::vector<std::string> top_req;
        if (!bindings_req.empty()) top_req.push_back("bindings");
        if (!kwargs_req.empty()) top_req.push_back("func_kwargs");
        if (d->wrapper == WrapperKind::Set || d->wrapper == WrapperKind::GetSet) {
            props["output"] = {{"type", "string"},
                               {"description", "scratchpad name for the stored result"}};
            top_req.push_back("output");
        } else if (d->wrapper == WrapperKind::Override) {
            props["output"] = {{"type", "string"},
                               {"description",
                                "optional scratchpad name; defaults to the overridden input"}};
        }
        parameters["properties"] = props;
        parameters["required"] = top_req;

        ordered_json fn;
        fn["name"] = d->name;
        fn["description"] = d->docstring();
        fn["parameters"] = parameters;
        ordered_json tool;
        tool["type"] = "function";
        tool["function"] = fn;
        out.push_back(tool);
    }
    return out;
}

inline ToolResult RegistryView::invoke(const ToolCall& call, const PathView& view,
                                       NodeScratchpad& child_pad,
                                       const TrialContext& ctx) const {
    const ToolDescriptor* desc = reg_->find(call.tool);
    if (!desc)
        return ToolResult::failure(ToolErrorKind::UnknownTool,
                                   ToolError::render("KeyError", "unknown tool '" + call.tool + "'"));
    if (stage_ && !desc->stages.count(*stage_))
        return ToolResult::failure(
            ToolErrorKind::MaskedTool,
            ToolError::render("PermissionError", "tool '" + call.tool +
                                                     "' is not available in the current stage"));

    // required arguments, in declared order, python-style message
    std::vector<std::string> missing;
    for (const auto& p : desc->params) {
        if (!p.required) continue;
        bool present = p.is_binding ? call.bindings.count(p.name) > 0
                                    : call.func_kwargs.contains(p.name);
        if (!present) missing.push_back("'" + p.name + "'");
    }
    if (!missing.empty()) {
        std::string detail =
            call.tool + "() missing " + std::to_string(missing.size()) +
            " required positional argument" + (missing.size() > 1 ? "s" : "") + ": ";
        if (missing.size() == 1) detail += missing[0];
        else {
            std::vector<std::string> head(missing.begin(), missing.end() - 1);
            detail += join(head, ", ") + " and " + missing.back();
        }
        return ToolResult::failure(ToolErrorKind::MissingRequiredArg,
                                   ToolError::render("TypeError", detail));
    }

    for (const auto& [name, _] : call.bindings)
        if (!desc->find_param(name) || !desc->find_param(name)->is_binding)
            return ToolResult::failure(
                ToolErrorKind::ToolRuntimeError,
                ToolError::render("TypeError", call.tool + "() got an unexpected keyword argument '" +
                                                   name + "'"));
    for (const auto& [name, _] : call.func_kwargs.items())
        if (!desc->find_param(name) || desc->find_param(name)->is_binding)
            return ToolResult::failure(
                ToolErrorKind::ToolRuntimeError,
                ToolError::render("TypeError", call.tool + "() got an unexpected keyword argument '" +
                                                   name + "'"));

    // resolve bindings against the path view
    ToolArgs args;
    args.ctx = &ctx;
    for (const auto& p : desc->params) {
        if (!p.is_binding) continue;
        auto it = call.bindings.find(p.name);
        if (it == call.bindings.end()) continue;  // optional binding left out
        const ScratchpadEntry* entry = try_resolve(view, it->second);
        if (!entry)
            return ToolResult::failure(
                ToolErrorKind::BindingUnresolved,
                ToolError::render("KeyError", "'" + it->second +
                                                  "' not found in scratchpad. Available names: " +
                                                  py_list(available_names(view))));
        bool kind_ok = p.accepted.empty();
        for (ObjectKind k : p.accepted) kind_ok = kind_ok || entry->kind == k;
        if (!kind_ok) {
            std::vector<std::string> kinds;
            for (ObjectKind k : p.accepted) kinds.push_back(object_kind_name(k));
            return ToolResult::failure(
                ToolErrorKind::KindMismatch,
                ToolError::render("TypeError",
                                  "parameter '" + p.name + "' expects " + join(kinds, " or ") +
                                      ", got " + object_kind_name(entry->kind) + " ('" +
                                      it->second + "')"));
        }
        args.bound[p.name] = entry;
    }

    // literal kwargs with defaults
    args.kwargs = json::object();
    for (const auto& p : desc->params) {
        if (p.is_binding) continue;
        if (call.func_kwargs.contains(p.name)) args.kwargs[p.name] = call.func_kwargs[p.name];
        else if (!p.required) args.kwargs[p.name] = p.default_value;
    }

    // output naming per wrapper kind
    switch (desc->wrapper) {
        case WrapperKind::Set:
        case WrapperKind::GetSet:
            if (!call.output || call.output->empty())
                return ToolResult::failure(
                    ToolErrorKind::MissingRequiredArg,
                    ToolError::render("TypeError", call.tool +
                                                       "() missing 1 required positional "
                                                       "argument: 'output'"));
            args.output = *call.output;
            break;
        case WrapperKind::Override: {
            if (call.output && !call.output->empty()) {
                args.output = *call.output;
            } else {
                const ParamSpec* primary = desc->first_binding();
                auto it = primary ? call.bindings.find(primary->name) : call.bindings.end();
                if (it == call.bindings.end())
                    return ToolResult::failure(
                        ToolErrorKind::MissingRequiredArg,
                        ToolError::render("TypeError",
                                          call.tool + "() cannot infer its output name"));
                args.output = it->second;
            }
            break;
        }
        case WrapperKind::Get: args.output.clear(); break;
    }

    ToolOutput result;
    try {
        result = (*reg_->impl_of(call.tool))(args);
    } catch (const ToolError& e) {
        return ToolResult::failure(ToolErrorKind::ToolRuntimeError, e.what());
    } catch (const std::exception& e) {
        return ToolResult::failure(ToolErrorKind::ToolRuntimeError,
                                   ToolError::render("RuntimeError", e.what()));
    }

    // commit atomically: validate names first so a bad one leaves the pad empty
    for (const auto& c : result.created) {
        if (c.name.empty())
            return ToolResult::failure(ToolErrorKind::ToolRuntimeError,
                                       ToolError::render("ValueError",
                                                         "tool produced an unnamed output"));
        size_t dup = 0;
        for (const auto& other : result.created) dup += other.name == c.name;
        if (dup > 1 || child_pad.find(c.name))
            return ToolResult::failure(
                ToolErrorKind::ToolRuntimeError,
                ToolError::render("ValueError", "duplicate output name '" + c.name + "'"));
    }
    for (const auto& c : result.created) child_pad.put(c.name, c.kind, c.value, call.call_id);

    ToolResult out;
    out.ok = true;
    for (const auto& c : result.created) out.created.emplace_back(c.name, c.kind);
    std::vector<std::pair<std::string, std::string>> bind_kv(call.bindings.begin(),
                                                             call.bindings.end());
    out.message = "Applied " + call.tool + " with docstring: " + desc->docstring();
    if (!result.extra.empty()) out.message += "\n" + result.extra;
    out.message +=
        "\nThe mapping between the function parameters and the scratchpad keys is: " +
        py_dict(bind_kv) + ".";
    if (!out.created.empty()) {
        std::vector<std::string> names;
        for (const auto& [n, _] : out.created) names.push_back(n);
        out.message +=
            " The output(s) of the tool are stored in the scratchpad under: " + py_list(names) +
            ".";
    }
    return out;
}

}  // namespace toolplan
