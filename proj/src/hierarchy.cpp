#include "illumine/hierarchy.hpp"

#include "illumine/error.hpp"

#include <json.hpp>

#include <deque>

namespace illumine {

using nlohmann::json;

void LabelHierarchy::add_node(const std::string& id, bool is_new) {
    if (id.empty()) throw Error(ErrorCode::InvalidArgument, "empty node id");
    if (!nodes_.emplace(id, is_new).second) throw Error(ErrorCode::NoOpChange, "node '" + id + "' already in hierarchy");
    ++version_;
}

void LabelHierarchy::add_edge(const std::string& parent, const std::string& child, const std::string& user,
                              std::int64_t at) {
    if (parent == child) throw Error(ErrorCode::SelfLoop, "edge '" + parent + "' -> itself");
    for (const auto* id : {&parent, &child})
        if (!nodes_.contains(*id)) throw Error(ErrorCode::UnknownNode, "node '" + *id + "' not in hierarchy");
    if (edges_.contains({parent, child}))
        throw Error(ErrorCode::DuplicateEdge, "edge '" + parent + "' -> '" + child + "' exists");
    edges_.emplace(EdgeKey{parent, child}, HierarchyEdge{parent, child, user, at});
    ++version_;
}

void LabelHierarchy::remove_edge(const std::string& parent, const std::string& child) {
    if (edges_.erase({parent, child}) == 0)
        throw Error(ErrorCode::UnknownEdge, "no edge '" + parent + "' -> '" + child + "'");
    ++version_;
}

std::uint64_t mutate(LabelHierarchy& h, const HierarchyChange& change, const std::string& user, std::int64_t at) {
    if (user.empty()) throw Error(ErrorCode::InvalidArgument, "mutations need a user id");
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, AddNode>)
                h.add_node(c.label, c.is_new);
            else if constexpr (std::is_same_v<T, AddEdge>)
                h.add_edge(c.parent, c.child, user, at);
            else
                h.remove_edge(c.parent, c.child);
        },
        change);
    return h.version();
}

json to_json(const HierarchyChange& change) {
    return std::visit(
        [](const auto& c) -> json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, AddNode>)
                return {{"op", "AddNode"}, {"label", c.label}, {"is_new", c.is_new}};
            else if constexpr (std::is_same_v<T, AddEdge>)
                return {{"op", "AddEdge"}, {"parent", c.parent}, {"child", c.child}};
            else
                return {{"op", "RemoveEdge"}, {"parent", c.parent}, {"child", c.child}};
        },
        change);
}

HierarchyChange hierarchy_change_from_json(const json& j) {
    const auto op = j.at("op").get<std::string>();
    if (op == "AddNode") return AddNode{j.at("label").get<std::string>(), j.value("is_new", false)};
    if (op == "AddEdge") return AddEdge{j.at("parent").get<std::string>(), j.at("child").get<std::string>()};
    if (op == "RemoveEdge") return RemoveEdge{j.at("parent").get<std::string>(), j.at("child").get<std::string>()};
    throw Error(ErrorCode::ParseError, "unknown hierarchy op '" + op + "'");
}

json export_hierarchy(const LabelHierarchy& h) {
    json nodes = json::array(), edges = json::array();
    for (const auto& [id, is_new] : h.nodes()) nodes.push_back({{"id", id}, {"is_new", is_new}});
    for (const auto& [key, e] : h.edges())
        edges.push_back({{"parent", e.parent}, {"child", e.child}, {"user", e.user}, {"created_at", e.created_at}});
    return json{{"nodes", nodes}, {"edges", edges}};
}

LabelHierarchy import_hierarchy(const json& j) {
    LabelHierarchy h;
    for (const auto& n : j.at("nodes")) h.add_node(n.at("id").get<std::string>(), n.value("is_new", false));
    for (const auto& e : j.at("edges"))
        h.add_edge(e.at("parent").get<std::string>(), e.at("child").get<std::string>(),
                   e.value("user", std::string("import")), e.value("created_at", std::int64_t{0}));
    return h;
}

CycleSplit detect_cycles(const LabelHierarchy& h) {
    std::map<std::string, std::vector<std::string>> succ;
    for (const auto& [key, e] : h.edges()) succ[key.first].push_back(key.second);  // map order: sorted

    enum class Mark { white, gray, black };
    std::map<std::string, Mark> mark;
    for (const auto& [id, is_new] : h.nodes()) mark[id] = Mark::white;

    CycleSplit split;
    struct Frame {
        const std::string* node;
        std::size_t next;
    };
    static const std::vector<std::string> kNone;
    const auto successors = [&](const std::string& n) -> const std::vector<std::string>& {
        const auto it = succ.find(n);
        return it == succ.end() ? kNone : it->second;
    };

    for (const auto& [root, is_new] : h.nodes()) {
        if (mark[root] != Mark::white) continue;
        std::vector<Frame> stack{{&root, 0}};
        mark[root] = Mark::gray;
        while (!stack.empty()) {
            auto& top = stack.back();
            const auto& out = successors(*top.node);
            if (top.next == out.size()) {
                mark[*top.node] = Mark::black;
                stack.pop_back();
                continue;
            }
            const std::string& child = out[top.next++];
            const EdgeKey key{*top.node, child};
            switch (mark[child]) {
                case Mark::gray: split.back_edges.push_back(key); break;
                case Mark::black: split.acyclic.push_back(key); break;
                case Mark::white:
                    split.acyclic.push_back(key);
                    mark[child] = Mark::gray;
                    stack.push_back({&mark.find(child)->first, 0});
                    break;
            }
        }
    }
    std::sort(split.acyclic.begin(), split.acyclic.end());
    std::sort(split.back_edges.begin(), split.back_edges.end());
    return split;
}

VisibleSubgraph visible_subgraph(const LabelHierarchy& h, const std::vector<std::string>& image_ids,
                                 const Corpus& corpus) {
    VisibleSubgraph out;
    std::set<std::string> seeds;
    for (const auto& id : image_ids) {
        const auto& img = corpus.image(id);
        for (const auto& l : img.label_ids)
            if (h.has_node(l)) seeds.insert(l);
    }
    if (seeds.empty()) return out;

    const CycleSplit split = detect_cycles(h);
    std::map<std::string, std::vector<std::string>> down, up;
    for (const auto& [p, c] : split.acyclic) {
        down[p].push_back(c);
        up[c].push_back(p);
    }
    out.nodes = seeds;
    for (const auto* adj : {&down, &up}) {
        std::deque<std::string> queue(seeds.begin(), seeds.end());
        std::set<std::string> seen = seeds;
        while (!queue.empty()) {
            const std::string n = queue.front();
            queue.pop_front();
            const auto it = adj->find(n);
            if (it == adj->end()) continue;
            for (const auto& next : it->second)
                if (seen.insert(next).second) {
                    out.nodes.insert(next);
                    queue.push_back(next);
                }
        }
    }
    for (const auto& [key, e] : h.edges())
        if (out.nodes.contains(key.first) && out.nodes.contains(key.second)) out.edges.push_back(e);
    return out;
}

}  // namespace illumine
