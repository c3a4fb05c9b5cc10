#pragma once

#include "illumine/hierarchy.hpp"
#include "illumine/umap.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace illumine {

struct LayerEdge {
    int tail = 0;
    int head = 0;
    int min_length = 1;
    double weight = 1.0;
};

/// Minimum total weighted edge length layering of an acyclic graph, subject
/// to layer(head) - layer(tail) >= min_length, by network simplex on each
/// weakly connected component. Each component starts at layer 0. The initial
/// ranking and tree growth follow node index order, so the result is
/// deterministic. Throws CycleDetected.
std::vector<int> assign_layers(int node_count, const std::vector<LayerEdge>& edges);

double layering_cost(const std::vector<int>& layers, const std::vector<LayerEdge>& edges);

/// Layered graph with long edges split by dummy nodes.
struct LayeredGraph {
    std::vector<std::string> ids;
    std::vector<bool> dummy;
    std::vector<int> layer;
    std::vector<std::pair<int, int>> segments;  // upper -> lower, consecutive layers
    std::vector<std::vector<int>> chains;       // per long edge: endpoint, dummies..., endpoint
    std::vector<EdgeKey> chain_edges;           // the hierarchy edge of each chain
    std::vector<std::vector<int>> order;        // per layer, left to right
};

/// Real nodes come first in each layer (by id), dummies after them in the
/// order of their edges.
LayeredGraph insert_dummies(const std::vector<std::string>& ids, const std::vector<int>& layers,
                            const std::vector<EdgeKey>& edges);

/// Crossings between consecutive layers for the given order.
long long count_crossings(const LayeredGraph& g, const std::vector<std::vector<int>>& order);

/// Top-down barycenter sweeps: every layer below the first is sorted by the
/// mean position of its upper neighbours; nodes without upper neighbours keep
/// their position as key. The best order seen (starting with the input) is
/// returned, so crossings never increase.
std::vector<std::vector<int>> order_layers(const LayeredGraph& g, std::vector<std::vector<int>> order, int sweeps = 4);

struct CoordinateParams {
    double curvature_weight = 2.0;  // lambda_c
    double component_weight = 0.5;  // lambda_d
    double min_gap = 1.0;
    double layer_gap = 2.0;
    double tolerance = 1e-6;
    int max_sweeps = 500;
};

/// Objective over x: squared horizontal edge-segment lengths, weighted
/// second differences along dummy chains, and weighted squared excess gap
/// between horizontally adjacent nodes of different connected components.
double coordinate_objective(const LayeredGraph& g, const std::vector<std::vector<int>>& order,
                            const std::vector<double>& x, const CoordinateParams& params);

/// x positions (indexed like g.ids) by projected coordinate descent from
/// x = order index * min_gap, keeping x strictly increasing by min_gap within
/// each layer. The result is shifted so the smallest x is 0.
std::vector<double> assign_coordinates(const LayeredGraph& g, const std::vector<std::vector<int>>& order,
                                       const CoordinateParams& params = {});

struct LayoutParams {
    int ordering_sweeps = 4;
    CoordinateParams coords;
};

struct LaidOutEdge {
    HierarchyEdge edge;
    bool back = false;
    std::vector<Point2> points;  // tail, bends..., head
};

struct LayoutResult {
    std::uint64_t version = 0;
    std::map<std::string, int> layers;
    std::vector<std::vector<std::string>> order;  // includes dummy ids
    std::map<std::string, Point2> coords;         // real nodes
    std::map<std::string, bool> is_new;
    std::vector<EdgeKey> back_edges;
    std::vector<LaidOutEdge> edges;
    std::map<EdgeKey, std::vector<std::string>> dummy_chains;
    long long crossings_initial = 0;
    long long crossings = 0;
    double objective_initial = 0.0;
    double objective = 0.0;
};

/// Cycle removal, layering, dummy insertion, ordering, coordinates; back
/// edges are re-attached afterwards and flagged.
LayoutResult layout(const LabelHierarchy& h, const LayoutParams& params = {});

nlohmann::json to_json(const LayoutResult& r);

}  // namespace illumine
