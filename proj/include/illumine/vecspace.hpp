#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace illumine {

struct LabelTerm;

/// Named set of fixed-dimension vectors under the Euclidean metric. Rows are
/// stored contiguously in insertion order.
class VectorSpace {
public:
    VectorSpace(std::string name, std::size_t dim);

    const std::string& name() const noexcept { return name_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return keys_.size(); }
    bool empty() const noexcept { return keys_.empty(); }

    /// Throws on duplicate key, wrong dimension or non-finite component.
    void add(std::string key, std::span<const double> components);

    bool contains(const std::string& key) const { return index_.contains(key); }
    std::optional<std::size_t> index_of(const std::string& key) const;
    const std::string& key(std::size_t row) const { return keys_[row]; }
    std::span<const double> row(std::size_t row) const {
        return {data_.data() + row * dim_, dim_};
    }
    /// Throws Error(KeyMissing).
    std::span<const double> vector(const std::string& key) const;
    const std::vector<std::string>& keys() const noexcept { return keys_; }
    std::span<const double> data() const noexcept { return data_; }

    VectorSpace renamed(std::string name) const;

    bool operator==(const VectorSpace& other) const {
        return name_ == other.name_ && dim_ == other.dim_ && keys_ == other.keys_ &&
               data_ == other.data_;
    }

private:
    std::string name_;
    std::size_t dim_;
    std::vector<std::string> keys_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct NeighborResult {
    std::string key;
    double distance = 0.0;
    /// Names of the spaces the key was retrieved from (one or two).
    std::vector<std::string> source_spaces;

    bool operator==(const NeighborResult&) const = default;
};

struct MeanVector {
    std::vector<double> components;
    std::size_t used = 0;
    std::size_t skipped = 0;
};

/// Mean of the vectors of `keys` that resolve in `space`. Throws NoVector if
/// none resolves.
MeanVector mean_vector(std::span<const std::string> keys, const VectorSpace& space);

/// A term's vector: its token vector, or the mean over its in-vocabulary
/// tokens. Throws NoVector when no token is in the vocabulary.
std::vector<double> term_vector(const LabelTerm& term, const VectorSpace& word_space);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Exact k nearest entries, ascending by distance, ties by key. Entries in
/// `exclude` are skipped. Throws EmptySpace / InvalidArgument (k < 1) /
/// DimensionMismatch.
std::vector<NeighborResult> knn(const VectorSpace& space, std::span<const double> query,
                                std::size_t k, const std::set<std::string>& exclude = {});

/// Union of the k nearest neighbours of `query_key` in both spaces, itself
/// and `exclude` excluded. Keys found in both are merged, tagged with both
/// space names, and carry the smaller distance. Throws KeyMissing naming the
/// space that lacks the key.
std::vector<NeighborResult> union_knn(const VectorSpace& original, const VectorSpace& retrofitted,
                                      const std::string& query_key, std::size_t k,
                                      const std::set<std::string>& exclude = {});

/// Text format: header "N D", then one "key v1 ... vD" line per entry.
VectorSpace read_vector_file(const std::string& path, const std::string& name);
VectorSpace parse_vector_text(const std::string& text, const std::string& name,
                              const std::string& origin = "<memory>");
void write_vector_file(const VectorSpace& space, const std::string& path);
std::string format_vector_text(const VectorSpace& space);

}  // namespace illumine
