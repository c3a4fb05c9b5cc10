#pragma once

#include "illumine/corpus.hpp"
#include "illumine/hierarchy.hpp"
#include "illumine/recommend.hpp"
#include "illumine/snapshot.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace illumine {

struct AddLabel {
    std::string image;
    std::string label;
    bool operator==(const AddLabel&) const = default;
};
struct RemoveLabel {
    std::string image;
    std::string label;
    bool operator==(const RemoveLabel&) const = default;
};
/// `id` is assigned when the change is applied and recorded for replay.
struct CreateLabel {
    std::string surface;
    std::string id;
    bool operator==(const CreateLabel&) const = default;
};
struct Categorize {
    std::string label;
    std::optional<LabelCategory> category;
    bool operator==(const Categorize&) const = default;
};
struct HierarchyMutation {
    HierarchyChange change;
    bool operator==(const HierarchyMutation&) const = default;
};

using Change = std::variant<AddLabel, RemoveLabel, CreateLabel, Categorize, HierarchyMutation>;

struct HistoryEntry {
    std::uint64_t seq = 0;
    std::int64_t timestamp = 0;
    std::string user;
    Change change;

    bool operator==(const HistoryEntry&) const = default;
};

nlohmann::json to_json(const Change& c);
Change change_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HistoryEntry& e);
HistoryEntry history_entry_from_json(const nlohmann::json& j);

/// Append-only newline-delimited JSON log, synced to disk once per batch.
class HistoryLog {
public:
    explicit HistoryLog(const std::filesystem::path& path);
    ~HistoryLog();
    HistoryLog(const HistoryLog&) = delete;
    HistoryLog& operator=(const HistoryLog&) = delete;

    void append(const std::vector<HistoryEntry>& batch);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    int fd_ = -1;
};

/// Reads a log file; a missing file is an empty log. Throws CorruptLog with
/// the seq the bad line should have carried.
std::vector<HistoryEntry> read_history(const std::filesystem::path& path);

/// Live annotation state: the corpus assignments, the label hierarchy and
/// the co-occurrence counts, all derived from a base state plus the history.
/// Not internally synchronized.
class AnnotationStore {
public:
    AnnotationStore(Corpus base, LabelHierarchy base_hierarchy = {}, Clock clock = system_clock());

    const Corpus& corpus() const noexcept { return corpus_; }
    const LabelHierarchy& hierarchy() const noexcept { return hierarchy_; }
    const CooccurrenceMatrix& cooccurrence() const noexcept { return cooc_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }
    std::uint64_t seq() const noexcept { return history_.empty() ? 0 : history_.back().seq; }
    std::vector<HistoryEntry> since(std::uint64_t seq) const;

    /// Every later batch is appended to this log.
    void attach_log(const std::filesystem::path& path);

    /// Throws UnknownImage / UnknownLabel / NoOpChange / InvalidArgument.
    HistoryEntry set_label(const std::string& image_id, const std::string& label_id, bool present,
                           const std::string& user);
    /// Throws EmptyTerm / DuplicateLabel (with the existing id).
    std::pair<LabelTerm, HistoryEntry> create_label(const std::string& surface, const std::string& user);
    /// Throws UnknownLabel.
    HistoryEntry categorize_label(const std::string& label_id, std::optional<LabelCategory> category,
                                  const std::string& user);
    /// Hierarchy nodes must be known labels; AddNode takes is_new from the
    /// label's origin. Throws the hierarchy errors and UnknownLabel.
    HistoryEntry mutate_hierarchy(const HierarchyChange& change, const std::string& user);

    /// All-or-nothing: on the first failing change nothing is applied.
    std::vector<HistoryEntry> apply_batch(const std::vector<std::pair<Change, std::string>>& batch);

    /// Re-applies a recorded entry (seq must be the next one).
    void replay_entry(const HistoryEntry& entry);

    /// Same corpus data, hierarchy, counts and history.
    bool same_state(const AnnotationStore& other) const;

private:
    HistoryEntry commit(Change change, const std::string& user);
    void apply(Change& change, const std::string& user, std::int64_t at);
    std::string next_label_id() const;

    Corpus corpus_;
    LabelHierarchy hierarchy_;
    CooccurrenceMatrix cooc_;
    std::vector<HistoryEntry> history_;
    Clock clock_;
    std::unique_ptr<HistoryLog> log_;
};

/// Rebuilds the state at the head of `log` from the base state. Throws
/// CorruptLog with the first seq that is missing or whose entry does not
/// apply.
AnnotationStore replay(const Corpus& base, const LabelHierarchy& base_hierarchy,
                       const std::vector<HistoryEntry>& log, Clock clock = system_clock());

/// Current assignments in the corpus image record format, one per line.
void export_assignments(const AnnotationStore& store, const std::filesystem::path& path);

}  // namespace illumine
