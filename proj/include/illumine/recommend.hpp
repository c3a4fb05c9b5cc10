#pragma once

#include "illumine/corpus.hpp"
#include "illumine/vecspace.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace illumine {

/// Symmetric label x label counts over images. The diagonal holds label
/// frequencies. Zero entries are never stored, so two matrices describing
/// the same state compare equal.
class CooccurrenceMatrix {
public:
    int count(const std::string& a, const std::string& b) const;
    int count(const std::string& a, const std::string& b, Dataset d) const;
    /// Off-diagonal and diagonal entries of one label (empty if unknown).
    const std::map<std::string, int>& row(const std::string& label) const;
    std::uint64_t version() const noexcept { return version_; }

    /// Incremental update for `label` being added to / removed from an
    /// image that currently carries `others` (which must not contain it).
    void label_added(const std::string& label, const std::set<std::string>& others, Dataset d);
    void label_removed(const std::string& label, const std::set<std::string>& others, Dataset d);

    /// Adds a whole image's labels; used for full rebuilds.
    void add_image(const std::set<std::string>& labels, Dataset d);

    bool same_counts(const CooccurrenceMatrix& other) const;
    bool is_symmetric() const;
    std::size_t nonzero() const;

private:
    using Table = std::map<std::string, std::map<std::string, int>>;
    void bump(Table& t, const std::string& a, const std::string& b, int delta);
    void apply(const std::string& label, const std::set<std::string>& others, Dataset d, int delta);

    Table total_;
    std::array<Table, 2> by_dataset_;
    std::uint64_t version_ = 0;
};

CooccurrenceMatrix build_cooccurrence(const Corpus& corpus);

enum class RecFamily { word_space, cooccurrence, image_neighbor };

struct Recommendation {
    std::string label_id;
    double score = 0.0;
    LabelOrigin origin = LabelOrigin::A;
    // word space: nearest selected label and its distance
    std::optional<std::string> nearest_target;
    std::optional<double> distance;
    std::vector<std::string> source_spaces;
    // co-occurrence: counts against each selected label, in selection order
    std::vector<int> breakdown;
    // image neighbours: neighbour images carrying the label
    std::vector<std::string> neighbor_images;
};

struct WordSpaceOptions {
    std::size_t k = 20;         // neighbours per target and space
    bool full_scan = false;     // rank the whole vocabulary instead
};

struct RecReport {
    std::vector<Recommendation> recs;
    std::vector<std::string> skipped;  // selections without a vector
};

/// Candidates from the union k-NN of every selected label over the original
/// and retrofitted label spaces; score is the minimum distance to any
/// target, ascending. Selected labels are never returned.
RecReport word_space_recs(const std::vector<std::string>& selected, const VectorSpace& original,
                          const VectorSpace& retrofitted, const Corpus& corpus, const WordSpaceOptions& options = {});

/// Labels co-occurring with the selection, scored by the summed counts,
/// descending, ties by label id.
std::vector<Recommendation> cooccurrence_recs(const std::vector<std::string>& selected, std::size_t limit,
                                              const CooccurrenceMatrix& matrix, const Corpus& corpus);

/// Labels of the nearest images of the selection, scored by how many of
/// those neighbours carry them; ties by smaller neighbour distance, then id.
std::vector<Recommendation> image_neighbor_recs(const std::vector<std::string>& selected_images, std::size_t k_images,
                                                std::size_t limit, const VectorSpace& image_space,
                                                const Corpus& corpus);

struct LabelFrequency {
    std::string label_id;
    std::size_t count_a = 0;
    std::size_t count_b = 0;
};

std::vector<LabelFrequency> label_frequencies(const std::vector<std::string>& label_ids, const Corpus& corpus);

nlohmann::json to_json(const Recommendation& r);

}  // namespace illumine
