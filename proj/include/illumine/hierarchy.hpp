#pragma once

#include "illumine/corpus.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace illumine {

struct HierarchyEdge {
    std::string parent;
    std::string child;
    std::string user;
    std::int64_t created_at = 0;

    bool operator==(const HierarchyEdge&) const = default;
};

using EdgeKey = std::pair<std::string, std::string>;  // (parent, child)

struct AddNode {
    std::string label;
    bool is_new = false;
    bool operator==(const AddNode&) const = default;
};
struct AddEdge {
    std::string parent;
    std::string child;
    bool operator==(const AddEdge&) const = default;
};
struct RemoveEdge {
    std::string parent;
    std::string child;
    bool operator==(const RemoveEdge&) const = default;
};
using HierarchyChange = std::variant<AddNode, AddEdge, RemoveEdge>;

/// Directed parent -> child graph over label ids with per-edge attribution.
/// Cycles are allowed here; they are resolved only for layout.
class LabelHierarchy {
public:
    const std::map<std::string, bool>& nodes() const noexcept { return nodes_; }  // id -> is_new
    const std::map<EdgeKey, HierarchyEdge>& edges() const noexcept { return edges_; }
    std::uint64_t version() const noexcept { return version_; }

    bool has_node(const std::string& id) const { return nodes_.contains(id); }
    bool has_edge(const std::string& parent, const std::string& child) const {
        return edges_.contains({parent, child});
    }

    /// Throws NoOpChange if present.
    void add_node(const std::string& id, bool is_new);
    /// Throws SelfLoop, UnknownNode, DuplicateEdge.
    void add_edge(const std::string& parent, const std::string& child, const std::string& user, std::int64_t at);
    /// Throws UnknownEdge.
    void remove_edge(const std::string& parent, const std::string& child);

    bool operator==(const LabelHierarchy&) const = default;

private:
    std::map<std::string, bool> nodes_;
    std::map<EdgeKey, HierarchyEdge> edges_;
    std::uint64_t version_ = 0;
};

/// Applies one change attributed to `user`; returns the new version.
std::uint64_t mutate(LabelHierarchy& h, const HierarchyChange& change, const std::string& user, std::int64_t at);

nlohmann::json to_json(const HierarchyChange& change);
HierarchyChange hierarchy_change_from_json(const nlohmann::json& j);

/// {nodes:[{id,is_new}], edges:[{parent,child,user,created_at}]}
nlohmann::json export_hierarchy(const LabelHierarchy& h);
LabelHierarchy import_hierarchy(const nlohmann::json& j);

struct CycleSplit {
    std::vector<EdgeKey> acyclic;
    std::vector<EdgeKey> back_edges;
};

/// Depth-first search from every unvisited node in lexicographic order,
/// successors in lexicographic order; an edge into a node on the current
/// DFS stack is a back edge.
CycleSplit detect_cycles(const LabelHierarchy& h);

struct VisibleSubgraph {
    std::set<std::string> nodes;
    std::vector<HierarchyEdge> edges;
};

/// Labels of the selected images with all their ancestors and descendants
/// (over non-back edges), plus every hierarchy edge between those nodes.
VisibleSubgraph visible_subgraph(const LabelHierarchy& h, const std::vector<std::string>& image_ids,
                                 const Corpus& corpus);

}  // namespace illumine
