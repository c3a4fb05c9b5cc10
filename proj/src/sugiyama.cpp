#include "illumine/sugiyama.hpp"

#include "illumine/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace illumine {

using nlohmann::json;

LayeredGraph insert_dummies(const std::vector<std::string>& ids, const std::vector<int>& layers,
                            const std::vector<EdgeKey>& edges) {
    LayeredGraph g;
    g.ids = ids;
    g.dummy.assign(ids.size(), false);
    g.layer = layers;

    std::map<std::string, int> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], static_cast<int>(i));

    for (const auto& key : edges) {
        const int u = index.at(key.first), v = index.at(key.second);
        const int span = g.layer[v] - g.layer[u];
        if (span < 1) throw Error(ErrorCode::InvalidArgument, "edge '" + key.first + "' -> '" + key.second + "' does not descend");
        if (span == 1) {
            g.segments.emplace_back(u, v);
            continue;
        }
        std::vector<int> chain{u};
        for (int k = 1; k < span; ++k) {
            const int d = static_cast<int>(g.ids.size());
            g.ids.push_back("~" + key.first + ">" + key.second + "#" + std::to_string(k));
            g.dummy.push_back(true);
            g.layer.push_back(g.layer[u] + k);
            g.segments.emplace_back(chain.back(), d);
            chain.push_back(d);
        }
        g.segments.emplace_back(chain.back(), v);
        chain.push_back(v);
        g.chains.push_back(std::move(chain));
        g.chain_edges.push_back(key);
    }

    const int n_layers = g.layer.empty() ? 0 : *std::max_element(g.layer.begin(), g.layer.end()) + 1;
    g.order.assign(n_layers, {});
    std::vector<int> real(ids.size());
    std::iota(real.begin(), real.end(), 0);
    std::sort(real.begin(), real.end(), [&](int a, int b) { return ids[a] < ids[b]; });
    for (int v : real) g.order[g.layer[v]].push_back(v);
    for (int v = static_cast<int>(ids.size()); v < static_cast<int>(g.ids.size()); ++v) g.order[g.layer[v]].push_back(v);
    return g;
}

namespace {

std::vector<int> positions(std::size_t n, const std::vector<std::vector<int>>& order) {
    std::vector<int> pos(n, 0);
    for (const auto& layer : order)
        for (std::size_t i = 0; i < layer.size(); ++i) pos[layer[i]] = static_cast<int>(i);
    return pos;
}

// Inversions by merge sort.
long long count_inversions(std::vector<int>& a, std::vector<int>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = (lo + hi) / 2;
    long long inv = count_inversions(a, buf, lo, mid) + count_inversions(a, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (a[j] < a[i]) {
            inv += static_cast<long long>(mid - i);
            buf[k++] = a[j++];
        } else {
            buf[k++] = a[i++];
        }
    }
    while (i < mid) buf[k++] = a[i++];
    while (j < hi) buf[k++] = a[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              a.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

}  // namespace

long long count_crossings(const LayeredGraph& g, const std::vector<std::vector<int>>& order) {
    const auto pos = positions(g.ids.size(), order);
    std::vector<std::vector<std::pair<int, int>>> between(order.size());
    for (const auto& [u, v] : g.segments) between[g.layer[u]].emplace_back(pos[u], pos[v]);
    long long total = 0;
    for (auto& segs : between) {
        std::sort(segs.begin(), segs.end());
        std::vector<int> lower(segs.size()), buf(segs.size());
        for (std::size_t i = 0; i < segs.size(); ++i) lower[i] = segs[i].second;
        total += count_inversions(lower, buf, 0, lower.size());
    }
    return total;
}

std::vector<std::vector<int>> order_layers(const LayeredGraph& g, std::vector<std::vector<int>> order, int sweeps) {
    std::vector<std::vector<int>> upper(g.ids.size());
    for (const auto& [u, v] : g.segments) upper[v].push_back(u);

    auto best = order;
    long long best_crossings = count_crossings(g, order);
    for (int s = 0; s < sweeps && best_crossings > 0; ++s) {
        for (std::size_t l = 1; l < order.size(); ++l) {
            const auto pos = positions(g.ids.size(), order);
            auto& layer = order[l];
            std::vector<double> key(g.ids.size());
            for (std::size_t i = 0; i < layer.size(); ++i) {
                const int v = layer[i];
                if (upper[v].empty()) {
                    key[v] = static_cast<double>(i);
                    continue;
                }
                double sum = 0.0;
                for (int u : upper[v]) sum += pos[u];
                key[v] = sum / static_cast<double>(upper[v].size());
            }
            std::stable_sort(layer.begin(), layer.end(), [&](int a, int b) { return key[a] < key[b]; });
        }
        const long long c = count_crossings(g, order);
        if (c < best_crossings) {
            best_crossings = c;
            best = order;
        }
    }
    return best;
}

namespace {

// One squared linear form: weight * (sum coeff_k x_{idx_k} + constant)^2.
struct Term {
    double weight;
    std::vector<std::pair<int, double>> coeffs;
    double constant;
};

std::vector<Term> objective_terms(const LayeredGraph& g, const std::vector<std::vector<int>>& order,
                                  const CoordinateParams& p) {
    std::vector<Term> terms;
    for (const auto& [u, v] : g.segments) terms.push_back({1.0, {{u, 1.0}, {v, -1.0}}, 0.0});
    for (const auto& chain : g.chains)
        for (std::size_t i = 1; i + 1 < chain.size(); ++i)
            terms.push_back({p.curvature_weight, {{chain[i - 1], 1.0}, {chain[i], -2.0}, {chain[i + 1], 1.0}}, 0.0});

    // Connected components of the layered graph.
    std::vector<int> parent(g.ids.size());
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [u, v] : g.segments) parent[find(u)] = find(v);
    for (const auto& layer : order)
        for (std::size_t i = 0; i + 1 < layer.size(); ++i)
            if (find(layer[i]) != find(layer[i + 1]))
                terms.push_back({p.component_weight, {{layer[i + 1], 1.0}, {layer[i], -1.0}}, -p.min_gap});
    return terms;
}

double evaluate(const std::vector<Term>& terms, const std::vector<double>& x) {
    double q = 0.0;
    for (const auto& t : terms) {
        double r = t.constant;
        for (const auto& [i, c] : t.coeffs) r += c * x[i];
        q += t.weight * r * r;
    }
    return q;
}

}  // namespace

double coordinate_objective(const LayeredGraph& g, const std::vector<std::vector<int>>& order,
                            const std::vector<double>& x, const CoordinateParams& params) {
    return evaluate(objective_terms(g, order, params), x);
}

std::vector<double> assign_coordinates(const LayeredGraph& g, const std::vector<std::vector<int>>& order,
                                       const CoordinateParams& p) {
    const std::size_t n = g.ids.size();
    std::vector<double> x(n, 0.0);
    if (n == 0) return x;
    for (const auto& layer : order)
        for (std::size_t i = 0; i < layer.size(); ++i) x[layer[i]] = static_cast<double>(i) * p.min_gap;

    const auto terms = objective_terms(g, order, p);
    std::vector<std::vector<int>> touching(n);
    for (int t = 0; t < static_cast<int>(terms.size()); ++t)
        for (const auto& [i, c] : terms[t].coeffs) touching[i].push_back(t);

    std::vector<int> left(n, -1), right(n, -1);
    for (const auto& layer : order)
        for (std::size_t i = 0; i < layer.size(); ++i) {
            if (i > 0) left[layer[i]] = layer[i - 1];
            if (i + 1 < layer.size()) right[layer[i]] = layer[i + 1];
        }

    const auto residual = [&](const Term& term) {
        double r = term.constant;
        for (const auto& [i, c] : term.coeffs) r += c * x[i];
        return r;
    };
    // gap_weight[v]: weight of the component gap term between v and its left neighbour
    std::vector<double> gap_weight(n, 0.0);
    std::vector<bool> is_gap(terms.size(), false);
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const auto& c = terms[t].coeffs;
        if (c.size() == 2 && g.layer[c[0].first] == g.layer[c[1].first]) {
            is_gap[t] = true;
            gap_weight[c[0].first] = terms[t].weight;
        }
    }

    // Two kinds of exact line minimization: single nodes, and suffixes of a
    // layer shifted together. In suffix variables the separation constraints
    // are simple bounds, so the combined descent reaches the optimum.
    std::vector<double> b_node, a_cross, shift;
    for (int sweep = 0; sweep < p.max_sweeps; ++sweep) {
        double max_move = 0.0;
        for (const auto& layer : order) {
            for (int v : layer) {
                double a = 0.0, b = 0.0;
                for (int t : touching[v]) {
                    const auto& term = terms[t];
                    double rest = term.constant, cv = 0.0;
                    for (const auto& [i, c] : term.coeffs) {
                        if (i == v)
                            cv += c;
                        else
                            rest += c * x[i];
                    }
                    a += term.weight * cv * cv;
                    b += term.weight * cv * rest;
                }
                double target = a > 0.0 ? -b / a : x[v];
                if (left[v] >= 0) target = std::max(target, x[left[v]] + p.min_gap);
                if (right[v] >= 0) target = std::min(target, x[right[v]] - p.min_gap);
                max_move = std::max(max_move, std::abs(target - x[v]));
                x[v] = target;
            }
        }
        for (const auto& layer : order) {
            const std::size_t m = layer.size();
            b_node.assign(m, 0.0);
            a_cross.assign(m, 0.0);
            shift.assign(m, 0.0);
            for (std::size_t k = 0; k < m; ++k)
                for (int t : touching[layer[k]]) {
                    const auto& term = terms[t];
                    double c = 0.0;
                    for (const auto& [i, ci] : term.coeffs)
                        if (i == layer[k]) c += ci;
                    b_node[k] += term.weight * c * residual(term);
                    if (!is_gap[t]) a_cross[k] += term.weight * c * c;
                }
            double grad = 0.0, curv_cross = 0.0;
            for (std::size_t i = m; i-- > 0;) {
                grad += b_node[i];
                curv_cross += a_cross[i];
                const double gw = i > 0 ? gap_weight[layer[i]] : 0.0;
                const double curv = curv_cross + gw;
                double d = curv > 0.0 ? -grad / curv : 0.0;
                if (i > 0) d = std::max(d, -(x[layer[i]] - x[layer[i - 1]] - p.min_gap));
                shift[i] = d;
                grad += curv * d;
                if (i > 0) b_node[i - 1] -= gw * d;
                max_move = std::max(max_move, std::abs(d));
            }
            double acc = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                acc += shift[k];
                x[layer[k]] += acc;
            }
        }
        if (max_move < p.tolerance) break;
    }
    const double lo = *std::min_element(x.begin(), x.end());
    for (double& xi : x) xi -= lo;
    return x;
}

LayoutResult layout(const LabelHierarchy& h, const LayoutParams& params) {
    LayoutResult r;
    r.version = h.version();
    if (h.nodes().empty()) return r;

    std::vector<std::string> ids;
    std::map<std::string, int> index;
    for (const auto& [id, is_new] : h.nodes()) {
        index.emplace(id, static_cast<int>(ids.size()));
        ids.push_back(id);
        r.is_new[id] = is_new;
    }

    const CycleSplit split = detect_cycles(h);
    std::vector<LayerEdge> edges;
    for (const auto& [p, c] : split.acyclic) edges.push_back({index.at(p), index.at(c), 1, 1.0});
    const auto layers = assign_layers(static_cast<int>(ids.size()), edges);

    LayeredGraph g = insert_dummies(ids, layers, split.acyclic);
    r.crossings_initial = count_crossings(g, g.order);
    const auto order = order_layers(g, g.order, params.ordering_sweeps);
    r.crossings = count_crossings(g, order);

    const CoordinateParams& cp = params.coords;
    std::vector<double> x0(g.ids.size());
    for (const auto& layer : order)
        for (std::size_t i = 0; i < layer.size(); ++i) x0[layer[i]] = static_cast<double>(i) * cp.min_gap;
    r.objective_initial = coordinate_objective(g, order, x0, cp);
    const auto x = assign_coordinates(g, order, cp);
    r.objective = coordinate_objective(g, order, x, cp);

    const auto point = [&](int v) { return Point2{x[v], g.layer[v] * cp.layer_gap}; };
    for (std::size_t v = 0; v < ids.size(); ++v) {
        r.layers[ids[v]] = g.layer[v];
        r.coords[ids[v]] = point(static_cast<int>(v));
    }
    for (const auto& layer : order) {
        r.order.emplace_back();
        for (int v : layer) r.order.back().push_back(g.ids[v]);
    }
    std::map<EdgeKey, const std::vector<int>*> chain_of;
    for (std::size_t c = 0; c < g.chains.size(); ++c) {
        chain_of[g.chain_edges[c]] = &g.chains[c];
        auto& names = r.dummy_chains[g.chain_edges[c]];
        for (std::size_t i = 1; i + 1 < g.chains[c].size(); ++i) names.push_back(g.ids[g.chains[c][i]]);
    }

    r.back_edges = split.back_edges;
    const std::set<EdgeKey> back(split.back_edges.begin(), split.back_edges.end());
    for (const auto& [key, e] : h.edges()) {
        LaidOutEdge le{e, back.contains(key), {}};
        if (const auto it = chain_of.find(key); it != chain_of.end())
            for (int v : *it->second) le.points.push_back(point(v));
        else
            le.points = {r.coords.at(key.first), r.coords.at(key.second)};
        r.edges.push_back(std::move(le));
    }
    return r;
}

json to_json(const LayoutResult& r) {
    json nodes = json::array(), edges = json::array(), back = json::array();
    for (const auto& [id, layer] : r.layers) {
        const auto& xy = r.coords.at(id);
        nodes.push_back({{"id", id}, {"layer", layer}, {"x", xy[0]}, {"y", xy[1]}, {"is_new", r.is_new.at(id)}});
    }
    for (const auto& e : r.edges) {
        json pts = json::array();
        for (const auto& p : e.points) pts.push_back({p[0], p[1]});
        edges.push_back({{"parent", e.edge.parent},
                         {"child", e.edge.child},
                         {"user", e.edge.user},
                         {"created_at", e.edge.created_at},
                         {"back", e.back},
                         {"points", pts}});
    }
    for (const auto& [p, c] : r.back_edges) back.push_back({{"parent", p}, {"child", c}});
    return json{{"version", r.version},
                {"nodes", nodes},
                {"edges", edges},
                {"order", r.order},
                {"back_edges", back},
                {"crossings", r.crossings},
                {"crossings_initial", r.crossings_initial},
                {"objective", r.objective},
                {"objective_initial", r.objective_initial}};
}

}  // namespace illumine
