#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace illumine {

struct UmapParams {
    std::size_t n_neighbors = 15;  // clamped to n - 1
    double min_dist = 0.1;
    double spread = 1.0;
    std::size_t n_epochs = 200;
    std::size_t negative_sample_rate = 5;
    double learning_rate = 1.0;
    double repulsion_strength = 1.0;
};

using Point2 = std::array<double, 2>;

/// Parameters (a, b) of the low-dimensional similarity 1 / (1 + a d^(2b))
/// fitted by least squares to the min_dist / spread target curve.
std::array<double, 2> fit_ab(double spread, double min_dist);

/// Membership strengths of the symmetrized fuzzy k-NN graph, one entry per
/// directed pair (both directions present).
struct FuzzyGraph {
    std::vector<std::size_t> head;
    std::vector<std::size_t> tail;
    std::vector<double> weight;
};

FuzzyGraph fuzzy_neighbor_graph(std::span<const double> data, std::size_t n, std::size_t dim,
                                std::size_t n_neighbors);

/// Uniform-manifold neighbor embedding into 2-D. Every stochastic step (random
/// initialization, edge sampling order, negative samples) draws from `seed`;
/// single-threaded, so output is bit-reproducible. Requires n >= 2.
std::vector<Point2> umap_embed(std::span<const double> data, std::size_t n, std::size_t dim,
                               const UmapParams& params, std::uint64_t seed);

/// Principal components onto 2 axes, each axis signed so that its
/// largest-magnitude loading is positive. n == 1 maps to the origin.
std::vector<Point2> pca_2d(std::span<const double> data, std::size_t n, std::size_t dim);

}  // namespace illumine
