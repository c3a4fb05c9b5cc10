#include "illumine/vecspace.hpp"

#include "illumine/corpus.hpp"
#include "illumine/error.hpp"
#include "illumine/simd/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace illumine {

VectorSpace::VectorSpace(std::string name, std::size_t dim) : name_(std::move(name)), dim_(dim) {
    if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "vector space dimension must be >= 1");
}

void VectorSpace::add(std::string key, std::span<const double> components) {
    if (components.size() != dim_)
        throw Error(ErrorCode::DimensionMismatch, "'" + key + "' has " +
                                                      std::to_string(components.size()) +
                                                      " components, space '" + name_ + "' has " +
                                                      std::to_string(dim_));
    for (double c : components)
        if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite component in '" + key + "'");
    if (index_.contains(key))
        throw Error(ErrorCode::InvalidArgument, "duplicate key '" + key + "' in space '" + name_ + "'");
    index_.emplace(key, keys_.size());
    keys_.push_back(std::move(key));
    data_.insert(data_.end(), components.begin(), components.end());
}

std::optional<std::size_t> VectorSpace::index_of(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> VectorSpace::vector(const std::string& key) const {
    const auto idx = index_of(key);
    if (!idx) throw Error(ErrorCode::KeyMissing, "'" + key + "' not in space '" + name_ + "'");
    return row(*idx);
}

VectorSpace VectorSpace::renamed(std::string name) const {
    VectorSpace copy = *this;
    copy.name_ = std::move(name);
    return copy;
}

MeanVector mean_vector(std::span<const std::string> keys, const VectorSpace& space) {
    MeanVector mean;
    mean.components.assign(space.dim(), 0.0);
    for (const auto& key : keys) {
        const auto idx = space.index_of(key);
        if (!idx) {
            ++mean.skipped;
            continue;
        }
        simd::axpy(1.0, space.row(*idx), mean.components);
        ++mean.used;
    }
    if (mean.used == 0)
        throw Error(ErrorCode::NoVector, "none of " + std::to_string(keys.size()) +
                                             " keys resolve in space '" + space.name() + "'");
    simd::scale(1.0 / static_cast<double>(mean.used), mean.components);
    return mean;
}

std::vector<double> term_vector(const LabelTerm& term, const VectorSpace& word_space) {
    try {
        return mean_vector(term.tokens, word_space).components;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoVector) throw;
        throw Error(ErrorCode::NoVector, "no token of '" + term.normalized + "' in vocabulary");
    }
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "vector sizes differ");
    return std::sqrt(simd::squared_distance(a, b));
}

std::vector<NeighborResult> knn(const VectorSpace& space, std::span<const double> query,
                                std::size_t k, const std::set<std::string>& exclude) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    if (space.empty()) throw Error(ErrorCode::EmptySpace, "space '" + space.name() + "' is empty");
    if (query.size() != space.dim())
        throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(query.size()) +
                                                      " components, space has " + std::to_string(space.dim()));

    std::vector<double> dist(space.size());
    simd::squared_distances(query, space.data(), space.dim(), dist);

    std::vector<std::size_t> candidates;
    candidates.reserve(space.size());
    for (std::size_t r = 0; r < space.size(); ++r) {
        if (!exclude.empty() && exclude.contains(space.key(r))) continue;
        dist[r] = std::sqrt(dist[r]);
        candidates.push_back(r);
    }
    const auto closer = [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return space.key(a) < space.key(b);
    };
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), closer);

    std::vector<NeighborResult> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({space.key(candidates[i]), dist[candidates[i]], {space.name()}});
    return out;
}

std::vector<NeighborResult> union_knn(const VectorSpace& original, const VectorSpace& retrofitted,
                                      const std::string& query_key, std::size_t k,
                                      const std::set<std::string>& exclude) {
    for (const VectorSpace* s : {&original, &retrofitted})
        if (!s->contains(query_key))
            throw Error(ErrorCode::KeyMissing, "'" + query_key + "' not in space '" + s->name() + "'");

    std::set<std::string> skip = exclude;
    skip.insert(query_key);

    std::map<std::string, NeighborResult> merged;
    for (const VectorSpace* s : {&original, &retrofitted}) {
        for (auto& hit : knn(*s, s->vector(query_key), k, skip)) {
            auto [it, inserted] = merged.try_emplace(hit.key, hit);
            if (inserted) continue;
            it->second.distance = std::min(it->second.distance, hit.distance);
            auto& tags = it->second.source_spaces;
            if (std::find(tags.begin(), tags.end(), s->name()) == tags.end()) tags.push_back(s->name());
        }
    }

    std::vector<NeighborResult> out;
    out.reserve(merged.size());
    for (auto& [key, hit] : merged) out.push_back(std::move(hit));
    std::stable_sort(out.begin(), out.end(), [](const NeighborResult& a, const NeighborResult& b) {
        return a.distance < b.distance;  // map order already sorts keys
    });
    return out;
}

namespace {

std::string_view next_field(std::string_view line, std::size_t& pos) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    return line.substr(start, pos - start);
}

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::ParseError, origin + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

VectorSpace parse_vector_text(const std::string& text, const std::string& name, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) parse_fail(origin, 1, "missing header");
    ++line_no;
    std::size_t n = 0, d = 0;
    {
        std::size_t pos = 0;
        const auto nf = next_field(line, pos);
        const auto df = next_field(line, pos);
        if (std::from_chars(nf.data(), nf.data() + nf.size(), n).ec != std::errc{} ||
            std::from_chars(df.data(), df.data() + df.size(), d).ec != std::errc{} || d == 0)
            parse_fail(origin, line_no, "header must be \"N D\"");
    }

    VectorSpace space(name, d);
    std::vector<double> comps(d);
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t pos = 0;
        const auto key = next_field(line, pos);
        for (std::size_t i = 0; i < d; ++i) {
            const auto f = next_field(line, pos);
            if (f.empty()) parse_fail(origin, line_no, "expected " + std::to_string(d) + " components");
            if (std::from_chars(f.data(), f.data() + f.size(), comps[i]).ec != std::errc{})
                parse_fail(origin, line_no, "bad number '" + std::string(f) + "'");
        }
        if (!next_field(line, pos).empty()) parse_fail(origin, line_no, "too many components");
        try {
            space.add(std::string(key), comps);
        } catch (const Error& e) {
            parse_fail(origin, line_no, e.what());
        }
    }
    if (space.size() != n)
        parse_fail(origin, line_no, "header declares " + std::to_string(n) + " entries, found " +
                                        std::to_string(space.size()));
    return space;
}

VectorSpace read_vector_file(const std::string& path, const std::string& name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open vector file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_vector_text(buf.str(), name, path);
}

std::string format_vector_text(const VectorSpace& space) {
    std::string out = std::to_string(space.size()) + " " + std::to_string(space.dim()) + "\n";
    char buf[64];
    for (std::size_t r = 0; r < space.size(); ++r) {
        out += space.key(r);
        for (double c : space.row(r)) {
            const auto res = std::to_chars(buf, buf + sizeof buf, c);
            out.push_back(' ');
            out.append(buf, res.ptr);
        }
        out.push_back('\n');
    }
    return out;
}

void write_vector_file(const VectorSpace& space, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write vector file " + path);
    out << format_vector_text(space);
}

}  // namespace illumine
