#pragma once

#include "illumine/normalize.hpp"
#include "illumine/vecspace.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace illumine {

/// The two source databases.
enum class Dataset { A = 0, B = 1 };

/// Where a label term comes from after merging.
enum class LabelOrigin { A, B, both, added };

enum class LabelCategory { descriptive, decorative, interpretive };

std::string_view to_string(Dataset d) noexcept;
std::string_view to_string(LabelOrigin o) noexcept;
std::string_view to_string(LabelCategory c) noexcept;
Dataset parse_dataset(std::string_view s);
LabelOrigin parse_origin(std::string_view s);
LabelCategory parse_category(std::string_view s);

struct YearRange {
    int start = 0;
    int end = 0;
    bool operator==(const YearRange&) const = default;
};

struct Manuscript {
    std::string id;
    Dataset dataset = Dataset::A;
    std::string shelfmark;
    std::optional<std::string> origin_place;
    std::optional<YearRange> date_range;
    std::vector<std::string> image_ids;

    bool operator==(const Manuscript&) const = default;
};

struct ImageRecord {
    std::string id;
    std::string manuscript_id;
    Dataset dataset = Dataset::A;
    std::string folio;
    std::optional<std::string> book;
    std::optional<std::string> subject;
    std::optional<std::string> description;
    std::set<std::string> label_ids;
    std::optional<std::string> image_uri;

    bool operator==(const ImageRecord&) const = default;
};

struct LabelTerm {
    std::string id;
    std::string surface;
    std::string normalized;
    std::vector<std::string> tokens;
    LabelOrigin dataset_origin = LabelOrigin::A;
    std::optional<LabelCategory> category;

    bool operator==(const LabelTerm&) const = default;
};

/// Vector spaces attached to a corpus. `label` (keyed by label id) is derived
/// from `word`; `description` is keyed by image id.
struct SpaceSet {
    std::shared_ptr<const VectorSpace> word;
    std::shared_ptr<const VectorSpace> image;
    std::shared_ptr<const VectorSpace> description;
    std::shared_ptr<const VectorSpace> label;
};

/// Unified, cross-linked data model of both corpora. Loading produces an
/// immutable instance; the annotation store owns the mutable copy.
class Corpus {
public:
    std::array<std::string, 2> dataset_names{"A", "B"};
    StopwordSet stopwords;
    SpaceSet spaces;

    const std::vector<Manuscript>& manuscripts() const noexcept { return manuscripts_; }
    const std::vector<ImageRecord>& images() const noexcept { return images_; }
    const std::vector<LabelTerm>& labels() const noexcept { return labels_; }

    const Manuscript* find_manuscript(const std::string& id) const;
    const ImageRecord* find_image(const std::string& id) const;
    const LabelTerm* find_label(const std::string& id) const;
    const LabelTerm* find_label_by_normalized(const std::string& normalized) const;

    /// Throw UnknownImage / UnknownLabel.
    const ImageRecord& image(const std::string& id) const;
    const LabelTerm& label(const std::string& id) const;

    void add_manuscript(Manuscript m);
    void add_image(ImageRecord img);
    void add_label(LabelTerm term);

    /// Assignment edits; no bookkeeping beyond the image record itself.
    void set_image_label(const std::string& image_id, const std::string& label_id, bool present);
    void set_label_category(const std::string& label_id, std::optional<LabelCategory> category);

    /// Raises DanglingReference listing every unresolved id.
    void validate() const;

    /// Rebuild `spaces.label` from `spaces.word` for all terms with a vector.
    void rebuild_label_space();
    /// Derive `spaces.description` from description tokens when no file gave one.
    void derive_description_space();

    std::array<std::size_t, 2> manuscript_counts() const;
    std::array<std::size_t, 2> image_counts() const;
    std::map<LabelOrigin, std::size_t> label_origin_counts() const;

    /// Data-model equality (vector spaces compared by content).
    bool same_data(const Corpus& other) const;

private:
    std::vector<Manuscript> manuscripts_;
    std::vector<ImageRecord> images_;
    std::vector<LabelTerm> labels_;
    std::map<std::string, std::size_t> manuscript_index_;
    std::map<std::string, std::size_t> image_index_;
    std::map<std::string, std::size_t> label_index_;
    std::map<std::string, std::size_t> normalized_index_;
};

struct LoadReport {
    std::size_t merged_labels = 0;  // raw label records folded into an existing term
    std::map<std::string, std::string> label_aliases;  // raw id -> canonical id
};

/// Reads the manifest and everything it references. Labels that normalize
/// identically are merged into one term (the smallest raw id survives;
/// origins A and B combine into both) and image assignments are remapped.
Corpus load_corpus(const std::string& manifest_path, LoadReport* report = nullptr,
                   const StopwordSet* stopwords_override = nullptr);

/// Writes manifest.json plus the referenced files into `dir`.
void save_corpus(const Corpus& corpus, const std::string& dir);

nlohmann::json to_json(const Manuscript& m);
nlohmann::json to_json(const ImageRecord& img);
nlohmann::json to_json(const LabelTerm& term);
Manuscript manuscript_from_json(const nlohmann::json& j);
ImageRecord image_from_json(const nlohmann::json& j);

/// Summary counts used by ingest and GET /corpus/summary.
nlohmann::json corpus_summary(const Corpus& corpus);

}  // namespace illumine
