#include "illumine/retrofit.hpp"

#include "illumine/error.hpp"
#include "illumine/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace illumine {

namespace {

struct Neighbor {
    std::size_t row;
    double beta;
};

// Adjacency in row indices, for rows processed in lexicographic key order.
std::vector<std::pair<std::size_t, std::vector<Neighbor>>> adjacency(const VectorSpace& orig, const LabelHierarchy& h,
                                                                     const RetrofitParams& p,
                                                                     std::vector<std::string>& skipped) {
    for (const auto& [id, is_new] : h.nodes())
        if (!orig.contains(id)) skipped.push_back(id);

    const CycleSplit split = detect_cycles(h);
    std::map<std::string, std::set<std::string>> nbrs;
    for (const auto& [parent, child] : split.acyclic) {
        if (!orig.contains(parent) || !orig.contains(child)) continue;
        nbrs[child].insert(parent);
        if (p.symmetrize) nbrs[parent].insert(child);
    }

    std::vector<std::pair<std::size_t, std::vector<Neighbor>>> adj;
    for (const auto& [id, set] : nbrs) {
        const double beta = p.beta ? *p.beta : 1.0 / static_cast<double>(set.size());
        std::vector<Neighbor> list;
        for (const auto& j : set) list.push_back({*orig.index_of(j), beta});
        adj.emplace_back(*orig.index_of(id), std::move(list));
    }
    return adj;
}

void check(const RetrofitParams& p) {
    if (!(p.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    if (p.beta && !(*p.beta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be non-negative");
    if (p.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be at least 1");
}

VectorSpace to_space(const VectorSpace& orig, const std::string& name, const std::vector<double>& q) {
    VectorSpace out(name, orig.dim());
    for (std::size_t r = 0; r < orig.size(); ++r) out.add(orig.key(r), {q.data() + r * orig.dim(), orig.dim()});
    return out;
}

template <class OnSweep>
std::vector<std::string> run(const VectorSpace& orig, const LabelHierarchy& h, const RetrofitParams& p,
                             std::vector<double>& q, OnSweep on_sweep) {
    check(p);
    std::vector<std::string> skipped;
    const auto adj = adjacency(orig, h, p, skipped);
    const std::size_t dim = orig.dim();
    const auto hat = orig.data();
    q.assign(hat.begin(), hat.end());
    std::vector<double> next(dim), diff(dim);
    for (int it = 0; it < p.iterations; ++it) {
        double max_move = 0.0;
        for (const auto& [i, list] : adj) {
            // Written as q^_i + sum beta_ij (q_j - q^_i) / (alpha + sum beta_ij)
            // so that agreeing neighbours leave q_i bit-identical.
            const auto hat_i = hat.subspan(i * dim, dim);
            double denom = p.alpha;
            std::fill(next.begin(), next.end(), 0.0);
            for (const auto& [j, beta] : list) {
                std::copy_n(q.data() + j * dim, dim, diff.begin());
                simd::axpy(-1.0, hat_i, diff);
                simd::axpy(beta, diff, next);
                denom += beta;
            }
            simd::scale(1.0 / denom, next);
            simd::axpy(1.0, hat_i, next);
            double* qi = q.data() + i * dim;
            max_move = std::max(max_move, std::sqrt(simd::squared_distance({qi, dim}, next)));
            std::copy(next.begin(), next.end(), qi);
        }
        on_sweep(max_move);
    }
    return skipped;
}

}  // namespace

RetrofitResult retrofit(const VectorSpace& orig, const LabelHierarchy& h, const RetrofitParams& params) {
    std::vector<double> q, moves;
    auto skipped = run(orig, h, params, q, [&](double m) { moves.push_back(m); });
    return {to_space(orig, orig.name() + ".retro.v" + std::to_string(h.version()), q), std::move(skipped),
            std::move(moves)};
}

std::vector<VectorSpace> retrofit_iterates(const VectorSpace& orig, const LabelHierarchy& h,
                                           const RetrofitParams& params) {
    std::vector<double> q;
    std::vector<VectorSpace> out;
    const std::string base = orig.name() + ".retro.v" + std::to_string(h.version()) + ".it";
    run(orig, h, params, q, [&](double) { out.push_back(to_space(orig, base + std::to_string(out.size() + 1), q)); });
    return out;
}

std::vector<double> convergence_report(const VectorSpace& orig, const std::vector<VectorSpace>& iterates) {
    if (iterates.empty()) throw Error(ErrorCode::InvalidArgument, "no iterations recorded");
    std::vector<double> out;
    const VectorSpace* prev = &orig;
    for (const auto& cur : iterates) {
        if (cur.dim() != prev->dim() || cur.keys() != prev->keys())
            throw Error(ErrorCode::DimensionMismatch, "iterate '" + cur.name() + "' does not match '" + prev->name() + "'");
        double m = 0.0;
        for (std::size_t r = 0; r < cur.size(); ++r)
            m = std::max(m, std::sqrt(simd::squared_distance(cur.row(r), prev->row(r))));
        out.push_back(m);
        prev = &cur;
    }
    return out;
}

}  // namespace illumine
