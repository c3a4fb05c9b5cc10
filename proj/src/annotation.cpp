#include "illumine/annotation.hpp"

#include "illumine/error.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace illumine {

using nlohmann::json;

json to_json(const Change& c) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, AddLabel>)
                return {{"type", "AddLabel"}, {"image", x.image}, {"label", x.label}};
            else if constexpr (std::is_same_v<T, RemoveLabel>)
                return {{"type", "RemoveLabel"}, {"image", x.image}, {"label", x.label}};
            else if constexpr (std::is_same_v<T, CreateLabel>)
                return {{"type", "CreateLabel"}, {"surface", x.surface}, {"id", x.id}};
            else if constexpr (std::is_same_v<T, Categorize>)
                return {{"type", "Categorize"},
                        {"label", x.label},
                        {"category", x.category ? json(to_string(*x.category)) : json(nullptr)}};
            else
                return {{"type", "HierarchyMutation"}, {"change", to_json(x.change)}};
        },
        c);
}

Change change_from_json(const json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "AddLabel") return AddLabel{j.at("image").get<std::string>(), j.at("label").get<std::string>()};
    if (type == "RemoveLabel") return RemoveLabel{j.at("image").get<std::string>(), j.at("label").get<std::string>()};
    if (type == "CreateLabel") return CreateLabel{j.at("surface").get<std::string>(), j.value("id", std::string())};
    if (type == "Categorize") {
        Categorize c{j.at("label").get<std::string>(), std::nullopt};
        if (const auto it = j.find("category"); it != j.end() && !it->is_null())
            c.category = parse_category(it->get<std::string>());
        return c;
    }
    if (type == "HierarchyMutation") return HierarchyMutation{hierarchy_change_from_json(j.at("change"))};
    throw Error(ErrorCode::ParseError, "unknown change type '" + type + "'");
}

json to_json(const HistoryEntry& e) {
    return {{"seq", e.seq}, {"timestamp", e.timestamp}, {"user", e.user}, {"change", to_json(e.change)}};
}

HistoryEntry history_entry_from_json(const json& j) {
    return {j.at("seq").get<std::uint64_t>(), j.at("timestamp").get<std::int64_t>(), j.at("user").get<std::string>(),
            change_from_json(j.at("change"))};
}

HistoryLog::HistoryLog(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open " + path.string() + ": " + std::strerror(errno));
}

HistoryLog::~HistoryLog() {
    if (fd_ >= 0) ::close(fd_);
}

void HistoryLog::append(const std::vector<HistoryEntry>& batch) {
    std::string text;
    for (const auto& e : batch) text += to_json(e).dump() + '\n';
    const char* p = text.data();
    std::size_t left = text.size();
    while (left > 0) {
        const ssize_t n = ::write(fd_, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorCode::Io, "write " + path_.string() + ": " + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error(ErrorCode::Io, "fsync " + path_.string() + ": " + std::strerror(errno));
}

std::vector<HistoryEntry> read_history(const std::filesystem::path& path) {
    std::vector<HistoryEntry> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto expected = static_cast<long long>(out.size() + 1);
        try {
            out.push_back(history_entry_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw CorruptLogError(expected, e.what());
        } catch (const Error& e) {
            throw CorruptLogError(expected, e.what());
        }
    }
    return out;
}

AnnotationStore::AnnotationStore(Corpus base, LabelHierarchy base_hierarchy, Clock clock)
    : corpus_(std::move(base)), hierarchy_(std::move(base_hierarchy)), clock_(std::move(clock)) {
    cooc_ = build_cooccurrence(corpus_);
}

std::vector<HistoryEntry> AnnotationStore::since(std::uint64_t seq) const {
    std::vector<HistoryEntry> out;
    for (const auto& e : history_)
        if (e.seq > seq) out.push_back(e);
    return out;
}

void AnnotationStore::attach_log(const std::filesystem::path& path) { log_ = std::make_unique<HistoryLog>(path); }

std::string AnnotationStore::next_label_id() const {
    std::size_t n = 0;
    for (const auto& t : corpus_.labels())
        if (t.dataset_origin == LabelOrigin::added) ++n;
    char buf[32];
    for (;; ++n) {
        std::snprintf(buf, sizeof buf, "n-l%04zu", n);
        if (!corpus_.find_label(buf)) return buf;
    }
}

// Validates before touching anything, so a throwing change leaves the state
// as it was.
void AnnotationStore::apply(Change& change, const std::string& user, std::int64_t at) {
    if (user.empty()) throw Error(ErrorCode::InvalidArgument, "mutations need a user id");
    std::visit(
        [&](auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, AddLabel> || std::is_same_v<T, RemoveLabel>) {
                constexpr bool add = std::is_same_v<T, AddLabel>;
                const ImageRecord& img = corpus_.image(c.image);
                corpus_.label(c.label);
                if (img.label_ids.contains(c.label) == add)
                    throw Error(ErrorCode::NoOpChange, "label '" + c.label + (add ? "' already on '" : "' not on '") +
                                                           c.image + "'");
                std::set<std::string> others = img.label_ids;
                others.erase(c.label);
                if (add)
                    cooc_.label_added(c.label, others, img.dataset);
                else
                    cooc_.label_removed(c.label, others, img.dataset);
                corpus_.set_image_label(c.image, c.label, add);
            } else if constexpr (std::is_same_v<T, CreateLabel>) {
                const NormalizedTerm norm = normalize_term(c.surface, corpus_.stopwords);
                if (const auto* existing = corpus_.find_label_by_normalized(norm.normalized))
                    throw DuplicateLabelError(existing->id);
                const std::string id = next_label_id();
                if (!c.id.empty() && c.id != id)
                    throw Error(ErrorCode::InvalidArgument, "recorded id '" + c.id + "' differs from '" + id + "'");
                c.id = id;
                LabelTerm term{id, c.surface, norm.normalized, norm.tokens, LabelOrigin::added, std::nullopt};
                if (corpus_.spaces.word && corpus_.spaces.label) {
                    try {
                        const auto v = term_vector(term, *corpus_.spaces.word);
                        auto space = std::make_shared<VectorSpace>(*corpus_.spaces.label);
                        space->add(id, v);
                        corpus_.spaces.label = std::move(space);
                    } catch (const Error& e) {
                        if (e.code() != ErrorCode::NoVector) throw;
                    }
                }
                corpus_.add_label(std::move(term));
            } else if constexpr (std::is_same_v<T, Categorize>) {
                corpus_.set_label_category(c.label, c.category);
            } else {
                if (auto* node = std::get_if<AddNode>(&c.change)) node->is_new = corpus_.label(node->label).dataset_origin == LabelOrigin::added;
                mutate(hierarchy_, c.change, user, at);
            }
        },
        change);
}

HistoryEntry AnnotationStore::commit(Change change, const std::string& user) {
    return apply_batch({{std::move(change), user}}).front();
}

std::vector<HistoryEntry> AnnotationStore::apply_batch(const std::vector<std::pair<Change, std::string>>& batch) {
    std::vector<HistoryEntry> entries;
    if (batch.empty()) return entries;
    const std::int64_t at = clock_();
    std::optional<std::tuple<Corpus, LabelHierarchy, CooccurrenceMatrix>> saved;
    if (batch.size() > 1) saved.emplace(corpus_, hierarchy_, cooc_);
    try {
        for (const auto& [change, user] : batch) {
            Change c = change;
            apply(c, user, at);
            entries.push_back({seq() + entries.size() + 1, at, user, std::move(c)});
        }
    } catch (...) {
        if (saved) std::tie(corpus_, hierarchy_, cooc_) = std::move(*saved);
        throw;
    }
    if (log_) log_->append(entries);
    history_.insert(history_.end(), entries.begin(), entries.end());
    return entries;
}

HistoryEntry AnnotationStore::set_label(const std::string& image_id, const std::string& label_id, bool present,
                                        const std::string& user) {
    if (present) return commit(AddLabel{image_id, label_id}, user);
    return commit(RemoveLabel{image_id, label_id}, user);
}

std::pair<LabelTerm, HistoryEntry> AnnotationStore::create_label(const std::string& surface, const std::string& user) {
    HistoryEntry e = commit(CreateLabel{surface, {}}, user);
    return {corpus_.label(std::get<CreateLabel>(e.change).id), std::move(e)};
}

HistoryEntry AnnotationStore::categorize_label(const std::string& label_id, std::optional<LabelCategory> category,
                                               const std::string& user) {
    return commit(Categorize{label_id, category}, user);
}

HistoryEntry AnnotationStore::mutate_hierarchy(const HierarchyChange& change, const std::string& user) {
    return commit(HierarchyMutation{change}, user);
}

void AnnotationStore::replay_entry(const HistoryEntry& entry) {
    const auto expected = seq() + 1;
    if (entry.seq != expected)
        throw CorruptLogError(static_cast<long long>(expected),
                              "expected seq " + std::to_string(expected) + ", found " + std::to_string(entry.seq));
    Change c = entry.change;
    try {
        apply(c, entry.user, entry.timestamp);
    } catch (const Error& e) {
        throw CorruptLogError(static_cast<long long>(entry.seq), e.what());
    }
    if (log_) log_->append({entry});
    history_.push_back(entry);
    history_.back().change = std::move(c);
}

bool AnnotationStore::same_state(const AnnotationStore& other) const {
    return corpus_.same_data(other.corpus_) && hierarchy_ == other.hierarchy_ && cooc_.same_counts(other.cooc_) &&
           history_ == other.history_;
}

AnnotationStore replay(const Corpus& base, const LabelHierarchy& base_hierarchy, const std::vector<HistoryEntry>& log,
                       Clock clock) {
    AnnotationStore store(base, base_hierarchy, std::move(clock));
    for (const auto& e : log) store.replay_entry(e);
    return store;
}

void export_assignments(const AnnotationStore& store, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const auto& img : store.corpus().images()) f << to_json(img).dump() << '\n';
}

}  // namespace illumine
