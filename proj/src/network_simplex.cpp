// Network simplex layering (feasible tight tree, cut values, edge exchange).

#include "illumine/error.hpp"
#include "illumine/sugiyama.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

namespace illumine {
namespace {

class Simplex {
public:
    Simplex(int n, std::vector<LayerEdge> edges) : n_(n), edges_(std::move(edges)), rank_(n, 0), in_tree_node_(n, false) {
        out_.resize(n);
        in_.resize(n);
        for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
            out_[edges_[e].tail].push_back(e);
            in_[edges_[e].head].push_back(e);
        }
        tree_edge_.assign(edges_.size(), false);
    }

    std::vector<int> solve() {
        if (n_ == 0) return {};
        init_rank();
        feasible_tree();
        compute_tree_structure();
        const long long cap = 100LL * (n_ + 1) * (static_cast<long long>(edges_.size()) + 1);
        for (long long it = 0; it < cap; ++it) {
            const int leave = leave_edge();
            if (leave < 0) break;
            const int enter = enter_edge(leave);
            if (enter < 0) break;  // cannot happen for a connected feasible tree
            tree_edge_[leave] = false;
            tree_edge_[enter] = true;
            compute_tree_structure();
        }
        const int lo = *std::min_element(rank_.begin(), rank_.end());
        for (int& r : rank_) r -= lo;
        return rank_;
    }

private:
    int slack(int e) const { return rank_[edges_[e].head] - rank_[edges_[e].tail] - edges_[e].min_length; }

    // Longest path from the sources, nodes released in index order.
    void init_rank() {
        std::vector<int> indeg(n_, 0);
        for (const auto& e : edges_) ++indeg[e.head];
        std::priority_queue<int, std::vector<int>, std::greater<>> ready;
        for (int v = 0; v < n_; ++v)
            if (indeg[v] == 0) ready.push(v);
        int seen = 0;
        while (!ready.empty()) {
            const int v = ready.top();
            ready.pop();
            ++seen;
            for (int e : out_[v]) {
                const int h = edges_[e].head;
                rank_[h] = std::max(rank_[h], rank_[v] + edges_[e].min_length);
                if (--indeg[h] == 0) ready.push(h);
            }
        }
        if (seen != n_) throw Error(ErrorCode::CycleDetected, "layering input contains a cycle");
    }

    // Adds every node reachable from the tree through tight edges.
    int tight_tree() {
        std::vector<int> stack;
        int size = 0;
        for (int v = 0; v < n_; ++v)
            if (in_tree_node_[v]) {
                stack.push_back(v);
                ++size;
            }
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (const auto* list : {&out_[v], &in_[v]}) {
                for (int e : *list) {
                    const int w = edges_[e].tail == v ? edges_[e].head : edges_[e].tail;
                    if (in_tree_node_[w] || slack(e) != 0) continue;
                    in_tree_node_[w] = true;
                    tree_edge_[e] = true;
                    stack.push_back(w);
                    ++size;
                }
            }
        }
        return size;
    }

    void feasible_tree() {
        in_tree_node_[0] = true;
        while (tight_tree() < n_) {
            int best = -1;
            for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
                if (in_tree_node_[edges_[e].tail] == in_tree_node_[edges_[e].head]) continue;
                if (best < 0 || slack(e) < slack(best)) best = e;
            }
            if (best < 0) throw Error(ErrorCode::InvalidArgument, "layering component is not connected");
            int delta = slack(best);
            if (in_tree_node_[edges_[best].head]) delta = -delta;
            for (int v = 0; v < n_; ++v)
                if (in_tree_node_[v]) rank_[v] += delta;
        }
    }

    // Roots the tree at node 0, assigns postorder numbers (low, lim), makes
    // every tree edge tight again and recomputes all cut values.
    void compute_tree_structure() {
        parent_edge_.assign(n_, -1);
        low_.assign(n_, 0);
        lim_.assign(n_, 0);
        std::vector<std::vector<int>> tree_adj(n_);
        for (int e = 0; e < static_cast<int>(edges_.size()); ++e)
            if (tree_edge_[e]) {
                tree_adj[edges_[e].tail].push_back(e);
                tree_adj[edges_[e].head].push_back(e);
            }

        struct Frame {
            int node;
            std::size_t next;
        };
        std::vector<Frame> stack{{0, 0}};
        std::vector<bool> visited(n_, false);
        visited[0] = true;
        int counter = 1;
        low_[0] = counter;
        while (!stack.empty()) {
            auto& top = stack.back();
            if (top.next == tree_adj[top.node].size()) {
                lim_[top.node] = counter++;
                stack.pop_back();
                continue;
            }
            const int e = tree_adj[top.node][top.next++];
            const int w = edges_[e].tail == top.node ? edges_[e].head : edges_[e].tail;
            if (visited[w]) continue;
            visited[w] = true;
            parent_edge_[w] = e;
            rank_[w] = edges_[e].tail == top.node ? rank_[top.node] + edges_[e].min_length
                                                  : rank_[top.node] - edges_[e].min_length;
            low_[w] = counter;
            stack.push_back({w, 0});
        }

        cut_.assign(edges_.size(), 0.0);
        for (int v = 0; v < n_; ++v) {
            const int e = parent_edge_[v];
            if (e < 0) continue;
            // v's subtree is one side of e.
            const bool tail_in_subtree = edges_[e].tail == v;
            double cut = 0.0;
            for (int f = 0; f < static_cast<int>(edges_.size()); ++f) {
                const bool t_in = in_subtree(edges_[f].tail, v);
                const bool h_in = in_subtree(edges_[f].head, v);
                if (t_in == h_in) continue;
                const bool from_tail_side = tail_in_subtree ? t_in : !t_in;
                cut += from_tail_side ? edges_[f].weight : -edges_[f].weight;
            }
            cut_[e] = cut;
        }
    }

    bool in_subtree(int x, int root) const { return low_[root] <= lim_[x] && lim_[x] <= lim_[root]; }

    int leave_edge() {
        const int m = static_cast<int>(edges_.size());
        for (int i = 0; i < m; ++i) {
            const int e = (search_start_ + i) % m;
            if (tree_edge_[e] && cut_[e] < 0.0) {
                search_start_ = (e + 1) % m;
                return e;
            }
        }
        return -1;
    }

    // Non-tree edge from the head component to the tail component with
    // minimum slack.
    int enter_edge(int leave) const {
        const int t = edges_[leave].tail, h = edges_[leave].head;
        const int sub = parent_edge_[t] == leave ? t : h;  // subtree side root
        const bool tail_in_subtree = sub == t;
        int best = -1;
        for (int f = 0; f < static_cast<int>(edges_.size()); ++f) {
            if (tree_edge_[f]) continue;
            const bool ft = in_subtree(edges_[f].tail, sub);
            const bool fh = in_subtree(edges_[f].head, sub);
            // f.tail on the head side, f.head on the tail side
            const bool tail_on_head_side = tail_in_subtree ? !ft : ft;
            const bool head_on_tail_side = tail_in_subtree ? fh : !fh;
            if (!tail_on_head_side || !head_on_tail_side) continue;
            if (best < 0 || slack(f) < slack(best)) best = f;
        }
        return best;
    }

    int n_;
    std::vector<LayerEdge> edges_;
    std::vector<int> rank_;
    std::vector<bool> in_tree_node_;
    std::vector<bool> tree_edge_;
    std::vector<std::vector<int>> out_, in_;
    std::vector<int> parent_edge_, low_, lim_;
    std::vector<double> cut_;
    int search_start_ = 0;
};

}  // namespace

std::vector<int> assign_layers(int node_count, const std::vector<LayerEdge>& edges) {
    for (const auto& e : edges) {
        if (e.tail < 0 || e.head < 0 || e.tail >= node_count || e.head >= node_count)
            throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
        if (e.tail == e.head) throw Error(ErrorCode::CycleDetected, "self loop in layering input");
    }

    // Weakly connected components, each solved on its own.
    std::vector<int> comp(node_count, -1);
    std::vector<std::vector<int>> adj(node_count);
    for (const auto& e : edges) {
        adj[e.tail].push_back(e.head);
        adj[e.head].push_back(e.tail);
    }
    int n_comp = 0;
    for (int s = 0; s < node_count; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = n_comp;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (comp[w] < 0) {
                    comp[w] = n_comp;
                    stack.push_back(w);
                }
        }
        ++n_comp;
    }

    std::vector<std::vector<int>> members(n_comp);
    for (int v = 0; v < node_count; ++v) members[comp[v]].push_back(v);
    std::vector<std::vector<LayerEdge>> comp_edges(n_comp);
    std::vector<int> local(node_count);
    for (const auto& m : members)
        for (std::size_t i = 0; i < m.size(); ++i) local[m[i]] = static_cast<int>(i);
    for (const auto& e : edges)
        comp_edges[comp[e.tail]].push_back({local[e.tail], local[e.head], e.min_length, e.weight});

    std::vector<int> layers(node_count, 0);
    for (int c = 0; c < n_comp; ++c) {
        if (members[c].size() == 1) continue;
        const auto ranks = Simplex(static_cast<int>(members[c].size()), comp_edges[c]).solve();
        for (std::size_t i = 0; i < members[c].size(); ++i) layers[members[c][i]] = ranks[i];
    }
    return layers;
}

double layering_cost(const std::vector<int>& layers, const std::vector<LayerEdge>& edges) {
    double cost = 0.0;
    for (const auto& e : edges) cost += e.weight * (layers[e.head] - layers[e.tail]);
    return cost;
}

}  // namespace illumine
