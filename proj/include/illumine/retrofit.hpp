#pragma once

#include "illumine/hierarchy.hpp"
#include "illumine/vecspace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace illumine {

struct RetrofitParams {
    double alpha = 1.0;
    /// Same weight on every edge; unset means 1 / degree(i) for updates at i.
    std::optional<double> beta;
    int iterations = 10;
    /// Hierarchy edges as undirected adjacency. When false, a node is pulled
    /// towards its parents only.
    bool symmetrize = true;
};

struct RetrofitResult {
    VectorSpace space;
    std::vector<std::string> skipped;  // hierarchy nodes without a vector
    /// Max Euclidean displacement of any vector in each sweep.
    std::vector<double> displacements;
};

/// Gauss-Seidel sweeps in lexicographic node order over the hierarchy minus
/// its back edges: q_i <- (alpha q^_i + sum_j beta_ij q_j) / (alpha + sum_j beta_ij).
/// Returns a new space named "<orig>.retro.v<hierarchy version>".
/// Throws InvalidArgument for alpha <= 0, beta < 0 or iterations < 1.
RetrofitResult retrofit(const VectorSpace& orig, const LabelHierarchy& h, const RetrofitParams& params = {});

/// Per iterate, the max Euclidean displacement from the previous one (the
/// first relative to orig). Throws InvalidArgument on an empty list.
std::vector<double> convergence_report(const VectorSpace& orig, const std::vector<VectorSpace>& iterates);

/// Every sweep's space, for convergence_report.
std::vector<VectorSpace> retrofit_iterates(const VectorSpace& orig, const LabelHierarchy& h,
                                           const RetrofitParams& params = {});

}  // namespace illumine
