#include "illumine/projection.hpp"

#include "illumine/error.hpp"

#include <algorithm>
#include <cmath>

namespace illumine {

using nlohmann::json;

namespace {

std::optional<std::vector<double>> basis_vector(const ImageRecord& img, SimilarityMetric b, const Corpus& corpus) {
    const VectorSpace* space = nullptr;
    switch (b) {
        case SimilarityMetric::image: space = corpus.spaces.image.get(); break;
        case SimilarityMetric::description: space = corpus.spaces.description.get(); break;
        case SimilarityMetric::label: {
            if (!corpus.spaces.label || img.label_ids.empty()) return std::nullopt;
            const std::vector<std::string> keys(img.label_ids.begin(), img.label_ids.end());
            try {
                return mean_vector(keys, *corpus.spaces.label).components;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoVector) throw;
                return std::nullopt;
            }
        }
    }
    if (!space) return std::nullopt;
    const auto idx = space->index_of(img.id);
    if (!idx) return std::nullopt;
    const auto row = space->row(*idx);
    return std::vector<double>(row.begin(), row.end());
}

}  // namespace

BasisMatrix basis_matrix(const std::vector<std::string>& image_ids, const Basis& basis, const Corpus& corpus) {
    std::vector<std::string> ids = image_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    BasisMatrix m;
    std::vector<std::vector<std::vector<double>>> blocks;  // per image, per basis
    for (const auto& id : ids) {
        const auto& img = corpus.image(id);
        std::vector<std::vector<double>> parts;
        bool complete = true;
        for (SimilarityMetric b : basis) {
            auto v = basis_vector(img, b, corpus);
            if (!v) {
                complete = false;
                break;
            }
            parts.push_back(std::move(*v));
        }
        if (!complete) {
            m.skipped.push_back(id);
            continue;
        }
        m.ids.push_back(id);
        blocks.push_back(std::move(parts));
    }
    if (m.ids.empty()) return m;

    const std::size_t n = m.ids.size();
    const bool combined = basis.size() > 1;
    for (std::size_t p = 0; p < basis.size(); ++p) {
        const std::size_t d = blocks[0][p].size();
        if (!combined) continue;
        for (std::size_t c = 0; c < d; ++c) {
            double mean = 0.0, var = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += blocks[i][p][c];
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) var += (blocks[i][p][c] - mean) * (blocks[i][p][c] - mean);
            const double sd = std::sqrt(var / static_cast<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                blocks[i][p][c] = sd > 0.0 ? (blocks[i][p][c] - mean) / sd : 0.0;
        }
    }
    for (const auto& part : blocks[0]) m.dim += part.size();
    m.rows.reserve(n * m.dim);
    for (const auto& parts : blocks)
        for (const auto& part : parts) m.rows.insert(m.rows.end(), part.begin(), part.end());
    return m;
}

Projection project_2d(const std::vector<std::string>& image_ids, const Basis& basis, std::uint64_t seed,
                      const Corpus& corpus, const ProjectionParams& params) {
    if (image_ids.empty()) throw Error(ErrorCode::EmptyInput, "no images to project");
    if (basis.empty()) throw Error(ErrorCode::EmptyInput, "no embedding basis selected");

    BasisMatrix m = basis_matrix(image_ids, basis, corpus);
    if (m.ids.empty())
        throw Error(ErrorCode::NoVector, "none of " + std::to_string(image_ids.size()) + " images has a vector under the basis");

    Projection p;
    p.basis = basis;
    p.seed = seed;
    p.skipped = std::move(m.skipped);
    const std::size_t n = m.ids.size();
    std::vector<Point2> xy;
    if (n < params.pca_below) {
        p.method = "pca";
        xy = pca_2d(m.rows, n, m.dim);
    } else {
        p.method = "umap";
        xy = umap_embed(m.rows, n, m.dim, params.umap, seed);
    }
    for (std::size_t i = 0; i < n; ++i) p.coords.emplace(m.ids[i], xy[i]);
    return p;
}

std::vector<std::string> basis_names(const Basis& basis) {
    std::vector<std::string> names;
    for (auto b : basis) names.emplace_back(to_string(b));
    return names;
}

Basis parse_basis(const std::vector<std::string>& names) {
    Basis b;
    for (const auto& n : names) b.insert(parse_metric(n));
    return b;
}

Projection store_projection(SnapshotStore& store, Projection p) {
    json meta{{"basis", basis_names(p.basis)},
              {"seed", p.seed},
              {"method", p.method},
              {"image_count", p.coords.size()},
              {"parent", p.parent ? json(*p.parent) : json(nullptr)}};
    json coords = json::object();
    for (const auto& [id, xy] : p.coords) coords[id] = json::array({xy[0], xy[1]});
    const auto snap = store.add("projection", p.user, std::move(meta), json{{"coords", coords}, {"skipped", p.skipped}});
    p.snapshot_id = snap->id;
    p.created_at = snap->created_at;
    return p;
}

Projection projection_from_snapshot(const Snapshot& s) {
    if (s.kind != "projection")
        throw Error(ErrorCode::UnknownSnapshot, "snapshot " + std::to_string(s.id) + " is a " + s.kind + ", not a projection");
    Projection p;
    p.snapshot_id = s.id;
    p.created_at = s.created_at;
    p.user = s.user;
    p.basis = parse_basis(s.meta.at("basis").get<std::vector<std::string>>());
    p.seed = s.meta.at("seed").get<std::uint64_t>();
    p.method = s.meta.at("method").get<std::string>();
    if (const auto& parent = s.meta.at("parent"); !parent.is_null()) p.parent = parent.get<std::uint64_t>();
    for (const auto& [id, xy] : s.payload.at("coords").items()) p.coords.emplace(id, Point2{xy.at(0).get<double>(), xy.at(1).get<double>()});
    p.skipped = s.payload.at("skipped").get<std::vector<std::string>>();
    return p;
}

Projection reproject_subset(SnapshotStore& store, std::uint64_t snapshot_id, const std::vector<std::string>& image_ids,
                            std::uint64_t seed, const Corpus& corpus, const std::string& user,
                            const ProjectionParams& params) {
    const Projection parent = projection_from_snapshot(*store.get(snapshot_id));
    std::vector<std::string> outside;
    for (const auto& id : image_ids)
        if (!parent.coords.contains(id)) outside.push_back(id);
    if (!outside.empty())
        throw Error(ErrorCode::NotASubset, std::to_string(outside.size()) + " image(s) not in snapshot " +
                                               std::to_string(snapshot_id) + ", first '" + outside.front() + "'");
    Projection p = project_2d(image_ids, parent.basis, seed, corpus, params);
    p.parent = snapshot_id;
    p.user = user;
    return store_projection(store, std::move(p));
}

std::vector<json> list_snapshots(const SnapshotStore& store, const SnapshotQuery& query) {
    SnapshotFilter f;
    f.kind = "projection";
    f.user = query.user;
    if (query.basis) f.basis = basis_names(*query.basis);
    std::vector<json> out;
    for (const auto& s : store.list(f)) out.push_back(descriptor(*s));
    return out;
}

}  // namespace illumine
