#pragma once

#include "illumine/corpus.hpp"
#include "illumine/simgraph.hpp"
#include "illumine/snapshot.hpp"
#include "illumine/umap.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace illumine {

/// Embedding bases share the metric names: image, label, description.
using Basis = std::set<SimilarityMetric>;

struct ProjectionParams {
    UmapParams umap;
    std::size_t pca_below = 5;  // inputs smaller than this use PCA
};

struct Projection {
    std::uint64_t snapshot_id = 0;  // 0 until stored
    Basis basis;
    std::uint64_t seed = 0;
    std::map<std::string, Point2> coords;
    std::vector<std::string> skipped;  // requested images without a basis vector
    std::string method;  // "umap" or "pca"
    std::optional<std::uint64_t> parent;
    std::int64_t created_at = 0;
    std::string user;
};

/// Feature rows for the images under a basis. A combined basis concatenates
/// per-basis blocks, each z-normalized per dimension over the input images.
/// Images lacking a vector for any selected basis are skipped.
struct BasisMatrix {
    std::vector<std::string> ids;  // sorted
    std::vector<double> rows;
    std::size_t dim = 0;
    std::vector<std::string> skipped;
};

BasisMatrix basis_matrix(const std::vector<std::string>& image_ids, const Basis& basis, const Corpus& corpus);

/// Deterministic 2-D layout of a set of images. Input order and duplicates
/// do not matter. Throws EmptyInput (no ids / empty basis), UnknownImage,
/// NoVector (no image has a vector under the basis).
Projection project_2d(const std::vector<std::string>& image_ids, const Basis& basis, std::uint64_t seed,
                      const Corpus& corpus, const ProjectionParams& params = {});

std::vector<std::string> basis_names(const Basis& basis);
Basis parse_basis(const std::vector<std::string>& names);

/// Stores a projection as a "projection" snapshot and returns it with its id.
Projection store_projection(SnapshotStore& store, Projection projection);
Projection projection_from_snapshot(const Snapshot& snapshot);

/// Fresh projection of a subset of a stored projection's images, recorded
/// with lineage. Throws UnknownSnapshot / NotASubset.
Projection reproject_subset(SnapshotStore& store, std::uint64_t snapshot_id,
                            const std::vector<std::string>& image_ids, std::uint64_t seed, const Corpus& corpus,
                            const std::string& user, const ProjectionParams& params = {});

struct SnapshotQuery {
    std::optional<Basis> basis;
    std::optional<std::string> user;
};

/// Projection snapshot descriptors in creation order.
std::vector<nlohmann::json> list_snapshots(const SnapshotStore& store, const SnapshotQuery& query = {});

}  // namespace illumine
