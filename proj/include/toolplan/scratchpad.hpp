#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "json.hpp"
#include "toolplan/artifact.hpp"
#include "toolplan/error.hpp"

namespace toolplan {

struct ScratchpadEntry {
    std::string name;
    ObjectKind kind = ObjectKind::Text;
    ArtifactPtr value;
    std::string created_by;  // tool-call id
};

/// Per-node store. Holds only the objects produced by the tool call at that
/// node; entries are immutable once inserted and names are unique per node.
class NodeScratchpad {
public:
    int owner_node = -1;

    void put(const std::string& name, ObjectKind kind, ArtifactPtr value,
             const std::string& created_by = "") {
        if (name.empty()) throw value_error("scratchpad name must be non-empty");
        if (find(name))
            throw key_error("name '" + name + "' already exists in this node's scratchpad");
        entries_.push_back(ScratchpadEntry{name, kind, std::move(value), created_by});
    }

    const ScratchpadEntry* find(const std::string& name) const {
        for (const auto& e : entries_)
            if (e.name == name) return &e;
        return nullptr;
    }

    const std::vector<ScratchpadEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    void clear() { entries_.clear(); }

    nlohmann::json debug_dump() const {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& e : entries_)
            out.push_back({{"name", e.name},
                           {"kind", object_kind_name(e.kind)},
                           {"summary", e.value ? e.value->summary() : "null"}});
        return out;
    }

private:
    std::vector<ScratchpadEntry> entries_;
};

/// Root-to-node chain of scratchpads. Resolution never mutates the pads, so
/// sibling branches stay isolated while sharing ancestors.
struct PathView {
    std::vector<const NodeScratchpad*> pads;

    PathView branch(const NodeScratchpad* child_pad) const {
        PathView out = *this;
        out.pads.push_back(child_pad);
        return out;
    }
};

/// Deepest definition on the path wins when names collide.
inline const ScratchpadEntry* try_resolve(const PathView& view, const std::string& name) {
    for (auto it = view.pads.rbegin(); it != view.pads.rend(); ++it) {
        if (const ScratchpadEntry* e = (*it)->find(name)) return e;
    }
    return nullptr;
}

/// Distinct names visible from the path, in first-seen (deepest-wins) order,
/// sorted for stable error listings.
inline std::vector<std::string> available_names(const PathView& view) {
    std::vector<std::string> out;
    for (const auto* pad : view.pads)
        for (const auto& e : pad->entries())
            if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
    std::sort(out.begin(), out.end());
    return out;
}

inline const ScratchpadEntry& resolve(const PathView& view, const std::string& name) {
    if (const ScratchpadEntry* e = try_resolve(view, name)) return *e;
    throw key_error("'" + name + "' not found in scratchpad. Available names: " +
                    py_list(available_names(view)));
}

}  // namespace toolplan
