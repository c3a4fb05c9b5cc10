#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace illumine {

/// Proportion of shared labels in the two source vocabularies (279 of 1985).
inline constexpr double kDefaultSharedFraction = 279.0 / 1985.0;

struct FixtureParams {
    std::uint64_t seed = 7;
    std::size_t n_manuscripts = 12;
    std::size_t n_images = 200;
    std::size_t n_labels = 80;  // distinct terms after merging
    std::size_t dim = 16;
    double shared_fraction = kDefaultSharedFraction;
    double unlabeled_fraction = 0.15;
    std::size_t hierarchy_terms = 0;  // 0: no hierarchy.json
};

struct FixtureSummary {
    std::size_t manuscripts_a = 0, manuscripts_b = 0;
    std::size_t images_a = 0, images_b = 0;
    std::size_t labels_a_only = 0, labels_b_only = 0, labels_shared = 0;
    std::size_t raw_label_records = 0;
    std::size_t hierarchy_nodes = 0, hierarchy_edges = 0;
};

/// Writes a synthetic two-dataset corpus (manifest.json, jsonl records,
/// word/image vector files, stopwords, optional hierarchy.json) into
/// `out_dir`. Output is a pure function of `params`.
///
/// The vocabulary carries themed clusters used by the qualitative checks:
/// musical instruments co-occurring with kingship terms on David scenes,
/// birds under "oiseaux", animals with a shared image-embedding cluster.
/// Shared terms are written once per dataset under different ids and
/// surface variants so that loading exercises the merge.
FixtureSummary generate_fixture(const FixtureParams& params, const std::string& out_dir);

}  // namespace illumine
