#pragma once

#include "illumine/corpus.hpp"
#include "illumine/rng.hpp"
#include "illumine/sugiyama.hpp"
#include "illumine/vecspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

namespace testing {

using namespace illumine;

inline std::filesystem::path temp_dir(const std::string& tag) {
    static int counter = 0;
    auto p = std::filesystem::temp_directory_path() /
             ("illumine-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string key_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "k%05zu", i);
    return buf;
}

inline VectorSpace random_space(Rng& rng, std::size_t n, std::size_t dim, const std::string& name = "s",
                                double sd = 1.0) {
    VectorSpace s(name, dim);
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& x : v) x = rng.normal(0.0, sd);
        s.add(key_name(i), v);
    }
    return s;
}

/// Full scan with a plain left-to-right sum, sorted by (distance, key).
inline std::vector<std::pair<std::string, double>> brute_knn(const VectorSpace& s, std::span<const double> q,
                                                             std::size_t k,
                                                             const std::set<std::string>& exclude = {}) {
    std::vector<std::pair<std::string, double>> all;
    for (std::size_t r = 0; r < s.size(); ++r) {
        if (exclude.contains(s.key(r))) continue;
        double acc = 0.0;
        const auto row = s.row(r);
        for (std::size_t d = 0; d < s.dim(); ++d) acc += (row[d] - q[d]) * (row[d] - q[d]);
        all.emplace_back(s.key(r), std::sqrt(acc));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

/// Random DAG on n nodes: edges only from lower to higher index of a random
/// permutation, each present with probability p.
inline std::vector<LayerEdge> random_dag(Rng& rng, int n, double p) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    std::vector<LayerEdge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) edges.push_back({perm[i], perm[j], 1, 1.0});
    return edges;
}

/// Exhaustive minimum of sum (layer(head) - layer(tail)) over integer
/// layerings with every edge >= 1 and layers within [0, n). Nodes are fixed
/// one at a time next to an already fixed neighbour, with cost pruning.
inline double exhaustive_min_layering(int n, const std::vector<LayerEdge>& edges) {
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (other, +1 if other is head)
    for (const auto& e : edges) {
        adj[e.tail].push_back({e.head, +1});
        adj[e.head].push_back({e.tail, -1});
    }
    // Connected components solved independently; each starts at layer n-1
    // so every relative placement within a span of n fits.
    std::vector<int> comp(n, -1);
    double total = 0.0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> order{s};
        comp[s] = s;
        for (std::size_t i = 0; i < order.size(); ++i)
            for (auto [o, dir] : adj[order[i]])
                if (comp[o] < 0) {
                    comp[o] = s;
                    order.push_back(o);
                }
        if (order.size() == 1) continue;
        std::size_t comp_edges = 0;
        for (const auto& e : edges)
            if (comp[e.tail] == s) ++comp_edges;

        std::vector<int> layer(n, std::numeric_limits<int>::min());
        double best = std::numeric_limits<double>::infinity();
        const int lo_bound = 0, hi_bound = 2 * n - 2;
        std::function<void(std::size_t, double, std::size_t)> place = [&](std::size_t idx, double cost, std::size_t done) {
            if (cost + static_cast<double>(comp_edges - done) >= best) return;
            if (idx == order.size()) {
                int mn = hi_bound, mx = lo_bound;
                for (int v : order) {
                    mn = std::min(mn, layer[v]);
                    mx = std::max(mx, layer[v]);
                }
                if (mx - mn < n) best = cost;
                return;
            }
            const int v = order[idx];
            int lo = lo_bound, hi = hi_bound;
            for (auto [o, dir] : adj[v]) {
                if (layer[o] == std::numeric_limits<int>::min()) continue;
                if (dir > 0) hi = std::min(hi, layer[o] - 1);  // o is v's head
                else lo = std::max(lo, layer[o] + 1);
            }
            for (int l = lo; l <= hi; ++l) {
                double add = 0.0;
                std::size_t add_edges = 0;
                for (auto [o, dir] : adj[v]) {
                    if (layer[o] == std::numeric_limits<int>::min()) continue;
                    add += dir > 0 ? layer[o] - l : l - layer[o];
                    ++add_edges;
                }
                layer[v] = l;
                place(idx + 1, cost + add, done + add_edges);
                layer[v] = std::numeric_limits<int>::min();
            }
        };
        layer[order[0]] = n - 1;
        place(1, 0.0, 0);
        total += best;
    }
    return total;
}

/// Pairwise segment crossing count.
inline long long quadratic_crossings(const LayeredGraph& g, const std::vector<std::vector<int>>& order) {
    std::vector<int> pos(g.ids.size());
    for (const auto& layer : order)
        for (std::size_t i = 0; i < layer.size(); ++i) pos[layer[i]] = static_cast<int>(i);
    long long c = 0;
    for (std::size_t i = 0; i < g.segments.size(); ++i)
        for (std::size_t j = i + 1; j < g.segments.size(); ++j) {
            const auto [a1, b1] = g.segments[i];
            const auto [a2, b2] = g.segments[j];
            if (g.layer[a1] != g.layer[a2]) continue;
            if (static_cast<long long>(pos[a1] - pos[a2]) * (pos[b1] - pos[b2]) < 0) ++c;
        }
    return c;
}

/// The coordinate objective written out from its definition.
inline double reference_objective(const LayeredGraph& g, const std::vector<std::vector<int>>& order,
                                  const std::vector<double>& x, const CoordinateParams& p) {
    double q = 0.0;
    for (const auto& [u, v] : g.segments) q += (x[u] - x[v]) * (x[u] - x[v]);
    for (const auto& chain : g.chains)
        for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
            const double c = x[chain[i - 1]] - 2.0 * x[chain[i]] + x[chain[i + 1]];
            q += p.curvature_weight * c * c;
        }
    // components by flood fill over segments
    std::vector<std::vector<int>> adj(g.ids.size());
    for (const auto& [u, v] : g.segments) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<int> comp(g.ids.size(), -1);
    for (std::size_t s = 0; s < g.ids.size(); ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{static_cast<int>(s)};
        comp[s] = static_cast<int>(s);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : adj[u])
                if (comp[v] < 0) {
                    comp[v] = static_cast<int>(s);
                    stack.push_back(v);
                }
        }
    }
    for (const auto& layer : order)
        for (std::size_t i = 0; i + 1 < layer.size(); ++i)
            if (comp[layer[i]] != comp[layer[i + 1]]) {
                const double gap = x[layer[i + 1]] - x[layer[i]] - p.min_gap;
                q += p.component_weight * gap * gap;
            }
    return q;
}

/// Random layered graph: node counts per layer, segments between
/// consecutive layers, a random order per layer.
inline LayeredGraph random_layered(Rng& rng, int layers, int max_width, double p) {
    LayeredGraph g;
    std::vector<std::vector<int>> nodes(layers);
    for (int l = 0; l < layers; ++l) {
        const int w = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_width)));
        for (int i = 0; i < w; ++i) {
            nodes[l].push_back(static_cast<int>(g.ids.size()));
            g.ids.push_back("n" + std::to_string(g.ids.size()));
            g.dummy.push_back(false);
            g.layer.push_back(l);
        }
    }
    for (int l = 0; l + 1 < layers; ++l)
        for (int u : nodes[l])
            for (int v : nodes[l + 1])
                if (rng.uniform() < p) g.segments.emplace_back(u, v);
    for (auto& layer : nodes)
        for (int i = static_cast<int>(layer.size()) - 1; i > 0; --i)
            std::swap(layer[i], layer[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    g.order = nodes;
    return g;
}

// Parallel vertical chains entering at staggered layers. Every layer holds a
// contiguous run of chain indices, so x = chain index * gap has objective 0.
inline LayeredGraph staggered_chains(Rng& rng, int chains, int layers) {
    LayeredGraph g;
    std::vector<int> first(chains), last(chains);
    int lo = 0, hi = layers - 1;
    for (int c = 0; c < chains; ++c) {
        // starts non-decreasing and ends non-decreasing keep each layer's run contiguous
        lo = std::min(layers - 1, lo + static_cast<int>(rng.below(2)));
        first[c] = lo;
        last[c] = std::max(lo, std::min(layers - 1, hi - static_cast<int>(rng.below(2))));
    }
    std::sort(last.begin(), last.end());
    for (int c = 0; c < chains; ++c) last[c] = std::max(last[c], first[c]);
    g.order.assign(layers, {});
    for (int c = 0; c < chains; ++c) {
        int prev = -1;
        for (int l = first[c]; l <= last[c]; ++l) {
            const int id = static_cast<int>(g.ids.size());
            g.ids.push_back("c" + std::to_string(c) + "l" + std::to_string(l));
            g.dummy.push_back(false);
            g.layer.push_back(l);
            g.order[l].push_back(id);
            if (prev >= 0) g.segments.emplace_back(prev, id);
            prev = id;
        }
    }
    return g;
}

}  // namespace testing
