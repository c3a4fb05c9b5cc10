#include "illumine/corpus.hpp"

#include "illumine/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace illumine {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Dataset d) noexcept { return d == Dataset::A ? "A" : "B"; }

std::string_view to_string(LabelOrigin o) noexcept {
    switch (o) {
        case LabelOrigin::A: return "A";
        case LabelOrigin::B: return "B";
        case LabelOrigin::both: return "both";
        case LabelOrigin::added: return "new";
    }
    return "?";
}

std::string_view to_string(LabelCategory c) noexcept {
    switch (c) {
        case LabelCategory::descriptive: return "descriptive";
        case LabelCategory::decorative: return "decorative";
        case LabelCategory::interpretive: return "interpretive";
    }
    return "?";
}

Dataset parse_dataset(std::string_view s) {
    if (s == "A") return Dataset::A;
    if (s == "B") return Dataset::B;
    throw Error(ErrorCode::InvalidArgument, "unknown dataset '" + std::string(s) + "'");
}

LabelOrigin parse_origin(std::string_view s) {
    if (s == "A") return LabelOrigin::A;
    if (s == "B") return LabelOrigin::B;
    if (s == "both") return LabelOrigin::both;
    if (s == "new") return LabelOrigin::added;
    throw Error(ErrorCode::InvalidArgument, "unknown dataset_origin '" + std::string(s) + "'");
}

LabelCategory parse_category(std::string_view s) {
    if (s == "descriptive") return LabelCategory::descriptive;
    if (s == "decorative") return LabelCategory::decorative;
    if (s == "interpretive") return LabelCategory::interpretive;
    throw Error(ErrorCode::InvalidArgument, "unknown category '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Corpus

const Manuscript* Corpus::find_manuscript(const std::string& id) const {
    const auto it = manuscript_index_.find(id);
    return it == manuscript_index_.end() ? nullptr : &manuscripts_[it->second];
}

const ImageRecord* Corpus::find_image(const std::string& id) const {
    const auto it = image_index_.find(id);
    return it == image_index_.end() ? nullptr : &images_[it->second];
}

const LabelTerm* Corpus::find_label(const std::string& id) const {
    const auto it = label_index_.find(id);
    return it == label_index_.end() ? nullptr : &labels_[it->second];
}

const LabelTerm* Corpus::find_label_by_normalized(const std::string& normalized) const {
    const auto it = normalized_index_.find(normalized);
    return it == normalized_index_.end() ? nullptr : &labels_[it->second];
}

const ImageRecord& Corpus::image(const std::string& id) const {
    if (const auto* img = find_image(id)) return *img;
    throw Error(ErrorCode::UnknownImage, "no image '" + id + "'");
}

const LabelTerm& Corpus::label(const std::string& id) const {
    if (const auto* term = find_label(id)) return *term;
    throw Error(ErrorCode::UnknownLabel, "no label '" + id + "'");
}

void Corpus::add_manuscript(Manuscript m) {
    if (manuscript_index_.contains(m.id))
        throw Error(ErrorCode::InvalidArgument, "duplicate manuscript id '" + m.id + "'");
    manuscript_index_.emplace(m.id, manuscripts_.size());
    manuscripts_.push_back(std::move(m));
}

void Corpus::add_image(ImageRecord img) {
    if (image_index_.contains(img.id))
        throw Error(ErrorCode::InvalidArgument, "duplicate image id '" + img.id + "'");
    image_index_.emplace(img.id, images_.size());
    images_.push_back(std::move(img));
}

void Corpus::add_label(LabelTerm term) {
    if (label_index_.contains(term.id))
        throw Error(ErrorCode::InvalidArgument, "duplicate label id '" + term.id + "'");
    if (const auto* existing = find_label_by_normalized(term.normalized))
        throw DuplicateLabelError(existing->id);
    label_index_.emplace(term.id, labels_.size());
    normalized_index_.emplace(term.normalized, labels_.size());
    labels_.push_back(std::move(term));
}

void Corpus::set_image_label(const std::string& image_id, const std::string& label_id, bool present) {
    const auto it = image_index_.find(image_id);
    if (it == image_index_.end()) throw Error(ErrorCode::UnknownImage, "no image '" + image_id + "'");
    if (!find_label(label_id)) throw Error(ErrorCode::UnknownLabel, "no label '" + label_id + "'");
    auto& labels = images_[it->second].label_ids;
    if (present)
        labels.insert(label_id);
    else
        labels.erase(label_id);
}

void Corpus::set_label_category(const std::string& label_id, std::optional<LabelCategory> category) {
    const auto it = label_index_.find(label_id);
    if (it == label_index_.end()) throw Error(ErrorCode::UnknownLabel, "no label '" + label_id + "'");
    labels_[it->second].category = category;
}

void Corpus::validate() const {
    std::vector<std::string> dangling;
    for (const auto& m : manuscripts_) {
        for (const auto& img_id : m.image_ids) {
            const auto* img = find_image(img_id);
            if (!img)
                dangling.push_back("manuscript " + m.id + " -> image " + img_id);
            else if (img->manuscript_id != m.id)
                dangling.push_back("manuscript " + m.id + " lists image " + img_id + " owned by " +
                                   img->manuscript_id);
        }
    }
    for (const auto& img : images_) {
        if (!find_manuscript(img.manuscript_id))
            dangling.push_back("image " + img.id + " -> manuscript " + img.manuscript_id);
        for (const auto& l : img.label_ids)
            if (!find_label(l)) dangling.push_back("image " + img.id + " -> label " + l);
    }
    if (dangling.empty()) return;
    std::string msg = std::to_string(dangling.size()) + " unresolved reference(s):";
    for (const auto& d : dangling) msg += "\n  " + d;
    throw Error(ErrorCode::DanglingReference, msg);
}

void Corpus::rebuild_label_space() {
    if (!spaces.word) {
        spaces.label.reset();
        return;
    }
    auto space = std::make_shared<VectorSpace>("label", spaces.word->dim());
    for (const auto& term : labels_) {
        try {
            space->add(term.id, term_vector(term, *spaces.word));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoVector) throw;
        }
    }
    spaces.label = std::move(space);
}

void Corpus::derive_description_space() {
    if (!spaces.word) return;
    auto space = std::make_shared<VectorSpace>("description", spaces.word->dim());
    for (const auto& img : images_) {
        if (!img.description) continue;
        auto words = split_words(fold_text(*img.description));
        if (words.size() > 1)
            std::erase_if(words, [&](const std::string& w) { return stopwords.contains(w); });
        if (words.empty()) continue;
        try {
            space->add(img.id, mean_vector(words, *spaces.word).components);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoVector) throw;
        }
    }
    spaces.description = std::move(space);
}

std::array<std::size_t, 2> Corpus::manuscript_counts() const {
    std::array<std::size_t, 2> c{0, 0};
    for (const auto& m : manuscripts_) ++c[static_cast<int>(m.dataset)];
    return c;
}

std::array<std::size_t, 2> Corpus::image_counts() const {
    std::array<std::size_t, 2> c{0, 0};
    for (const auto& img : images_) ++c[static_cast<int>(img.dataset)];
    return c;
}

std::map<LabelOrigin, std::size_t> Corpus::label_origin_counts() const {
    std::map<LabelOrigin, std::size_t> c;
    for (const auto& t : labels_) ++c[t.dataset_origin];
    return c;
}

namespace {

bool same_space(const std::shared_ptr<const VectorSpace>& a, const std::shared_ptr<const VectorSpace>& b) {
    if (!a || !b) return !a && !b;
    return *a == *b;
}

}  // namespace

bool Corpus::same_data(const Corpus& other) const {
    return dataset_names == other.dataset_names && manuscripts_ == other.manuscripts_ &&
           images_ == other.images_ && labels_ == other.labels_ &&
           same_space(spaces.word, other.spaces.word) && same_space(spaces.image, other.spaces.image) &&
           same_space(spaces.description, other.spaces.description) &&
           same_space(spaces.label, other.spaces.label);
}

// ---------------------------------------------------------------------------
// JSON records

namespace {

std::optional<std::string> opt_string(const json& j, const char* field) {
    const auto it = j.find(field);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

void put_opt(json& j, const char* field, const std::optional<std::string>& v) {
    j[field] = v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const Manuscript& m) {
    json j{{"id", m.id}, {"dataset", to_string(m.dataset)}, {"shelfmark", m.shelfmark}};
    put_opt(j, "origin_place", m.origin_place);
    j["date_range"] = m.date_range ? json::array({m.date_range->start, m.date_range->end}) : json(nullptr);
    j["image_ids"] = m.image_ids;
    return j;
}

json to_json(const ImageRecord& img) {
    json j{{"id", img.id},
           {"manuscript_id", img.manuscript_id},
           {"dataset", to_string(img.dataset)},
           {"folio", img.folio}};
    put_opt(j, "book", img.book);
    put_opt(j, "subject", img.subject);
    put_opt(j, "description", img.description);
    j["label_ids"] = img.label_ids;
    put_opt(j, "image_uri", img.image_uri);
    return j;
}

json to_json(const LabelTerm& term) {
    json j{{"id", term.id},
           {"surface", term.surface},
           {"normalized", term.normalized},
           {"tokens", term.tokens},
           {"dataset_origin", to_string(term.dataset_origin)}};
    j["category"] = term.category ? json(to_string(*term.category)) : json(nullptr);
    return j;
}

Manuscript manuscript_from_json(const json& j) {
    Manuscript m;
    m.id = j.at("id").get<std::string>();
    m.dataset = parse_dataset(j.at("dataset").get<std::string>());
    m.shelfmark = j.value("shelfmark", std::string{});
    m.origin_place = opt_string(j, "origin_place");
    if (const auto it = j.find("date_range"); it != j.end() && !it->is_null()) {
        m.date_range = YearRange{it->at(0).get<int>(), it->at(1).get<int>()};
        if (m.date_range->start > m.date_range->end)
            throw Error(ErrorCode::InvalidArgument, "date_range start after end in manuscript '" + m.id + "'");
    }
    m.image_ids = j.at("image_ids").get<std::vector<std::string>>();
    if (m.image_ids.empty())
        throw Error(ErrorCode::InvalidArgument, "manuscript '" + m.id + "' has no images");
    return m;
}

ImageRecord image_from_json(const json& j) {
    ImageRecord img;
    img.id = j.at("id").get<std::string>();
    img.manuscript_id = j.at("manuscript_id").get<std::string>();
    img.dataset = parse_dataset(j.at("dataset").get<std::string>());
    img.folio = j.value("folio", std::string{});
    img.book = opt_string(j, "book");
    img.subject = opt_string(j, "subject");
    img.description = opt_string(j, "description");
    if (const auto it = j.find("label_ids"); it != j.end() && !it->is_null())
        for (const auto& l : *it) img.label_ids.insert(l.get<std::string>());
    img.image_uri = opt_string(j, "image_uri");
    return img;
}

json corpus_summary(const Corpus& corpus) {
    const auto m = corpus.manuscript_counts();
    const auto i = corpus.image_counts();
    json origins = json::object();
    for (const auto& [origin, n] : corpus.label_origin_counts()) origins[std::string(to_string(origin))] = n;
    std::size_t labeled = 0;
    for (const auto& img : corpus.images()) labeled += img.label_ids.empty() ? 0 : 1;
    const auto space_size = [](const std::shared_ptr<const VectorSpace>& s) {
        return s ? json{{"name", s->name()}, {"size", s->size()}, {"dim", s->dim()}} : json(nullptr);
    };
    return json{
        {"datasets", {{"A", corpus.dataset_names[0]}, {"B", corpus.dataset_names[1]}}},
        {"manuscripts", {{"total", corpus.manuscripts().size()}, {"A", m[0]}, {"B", m[1]}}},
        {"images", {{"total", corpus.images().size()}, {"A", i[0]}, {"B", i[1]}, {"labeled", labeled}}},
        {"labels", {{"total", corpus.labels().size()}, {"by_origin", origins}}},
        {"spaces",
         {{"word", space_size(corpus.spaces.word)},
          {"image", space_size(corpus.spaces.image)},
          {"description", space_size(corpus.spaces.description)},
          {"label", space_size(corpus.spaces.label)}}},
    };
}

// ---------------------------------------------------------------------------
// Loading and saving

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <class Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            fn(json::parse(line));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            if (e.code() == ErrorCode::DanglingReference) throw;
            throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

struct RawLabel {
    std::string id;
    std::string surface;
    LabelOrigin origin;
    std::optional<LabelCategory> category;
    NormalizedTerm norm;
};

LabelOrigin combine(LabelOrigin a, LabelOrigin b) {
    if (a == b) return a;
    if (a == LabelOrigin::added) return b;
    if (b == LabelOrigin::added) return a;
    return LabelOrigin::both;
}

}  // namespace

Corpus load_corpus(const std::string& manifest_path, LoadReport* report, const StopwordSet* stopwords_override) {
    const fs::path manifest_file(manifest_path);
    const fs::path base = manifest_file.parent_path();
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_file));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, manifest_path + ":1: " + e.what());
    }
    const auto resolve = [&](const std::string& rel) { return base / rel; };

    Corpus corpus;
    if (const auto it = manifest.find("datasets"); it != manifest.end()) {
        corpus.dataset_names[0] = it->value("A", std::string("A"));
        corpus.dataset_names[1] = it->value("B", std::string("B"));
    }
    if (stopwords_override)
        corpus.stopwords = *stopwords_override;
    else if (const auto it = manifest.find("stopwords"); it != manifest.end() && it->is_string())
        corpus.stopwords = load_stopwords(resolve(it->get<std::string>()).string());
    else
        corpus.stopwords = default_stopwords();

    // Labels: normalize, then merge identical normalized forms.
    std::vector<RawLabel> raw;
    for_each_record(resolve(manifest.at("labels").get<std::string>()), [&](const json& j) {
        RawLabel r;
        r.id = j.at("id").get<std::string>();
        r.surface = j.at("surface").get<std::string>();
        r.origin = parse_origin(j.value("dataset_origin", std::string("A")));
        if (const auto c = j.find("category"); c != j.end() && !c->is_null())
            r.category = parse_category(c->get<std::string>());
        r.norm = normalize_term(r.surface, corpus.stopwords);
        raw.push_back(std::move(r));
    });

    std::map<std::string, std::vector<std::size_t>> by_normalized;
    std::vector<std::string> first_seen;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto& group = by_normalized[raw[i].norm.normalized];
        if (group.empty()) first_seen.push_back(raw[i].norm.normalized);
        group.push_back(i);
    }
    LoadReport local_report;
    std::set<std::string> seen_ids;
    for (const auto& normalized : first_seen) {
        const auto& group = by_normalized[normalized];
        std::size_t canon = group.front();
        for (std::size_t i : group)
            if (raw[i].id < raw[canon].id) canon = i;
        LabelTerm term;
        term.id = raw[canon].id;
        term.surface = raw[canon].surface;
        term.normalized = raw[canon].norm.normalized;
        term.tokens = raw[canon].norm.tokens;
        term.dataset_origin = raw[canon].origin;
        term.category = raw[canon].category;
        for (std::size_t i : group) {
            if (!seen_ids.insert(raw[i].id).second)
                throw Error(ErrorCode::ParseError, "duplicate label id '" + raw[i].id + "'");
            term.dataset_origin = combine(term.dataset_origin, raw[i].origin);
            if (!term.category) term.category = raw[i].category;
            if (i != canon) {
                local_report.label_aliases[raw[i].id] = term.id;
                ++local_report.merged_labels;
            }
        }
        corpus.add_label(std::move(term));
    }

    for_each_record(resolve(manifest.at("manuscripts").get<std::string>()),
                    [&](const json& j) { corpus.add_manuscript(manuscript_from_json(j)); });
    for_each_record(resolve(manifest.at("images").get<std::string>()), [&](const json& j) {
        ImageRecord img = image_from_json(j);
        std::set<std::string> remapped;
        for (const auto& l : img.label_ids) {
            const auto alias = local_report.label_aliases.find(l);
            remapped.insert(alias == local_report.label_aliases.end() ? l : alias->second);
        }
        img.label_ids = std::move(remapped);
        corpus.add_image(std::move(img));
    });
    corpus.validate();

    if (const auto it = manifest.find("vectors"); it != manifest.end()) {
        const auto load_space = [&](const char* name) -> std::shared_ptr<const VectorSpace> {
            const auto f = it->find(name);
            if (f == it->end() || f->is_null()) return nullptr;
            return std::make_shared<VectorSpace>(read_vector_file(resolve(f->get<std::string>()).string(), name));
        };
        corpus.spaces.word = load_space("word");
        corpus.spaces.image = load_space("image");
        corpus.spaces.description = load_space("description");
    }
    if (!corpus.spaces.description) corpus.derive_description_space();
    corpus.rebuild_label_space();

    if (report) *report = std::move(local_report);
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
    const fs::path out(dir);
    fs::create_directories(out);
    const auto write_lines = [&](const char* name, const auto& records) {
        std::ofstream f(out / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + (out / name).string());
        for (const auto& r : records) f << to_json(r).dump() << '\n';
    };
    write_lines("manuscripts.jsonl", corpus.manuscripts());
    write_lines("images.jsonl", corpus.images());
    write_lines("labels.jsonl", corpus.labels());

    std::vector<std::string> stop(corpus.stopwords.begin(), corpus.stopwords.end());
    std::sort(stop.begin(), stop.end());
    {
        std::ofstream f(out / "stopwords.txt", std::ios::binary | std::ios::trunc);
        for (const auto& w : stop) f << w << '\n';
    }

    json vectors = json::object();
    const auto save_space = [&](const char* name, const std::shared_ptr<const VectorSpace>& s) {
        if (!s) return;
        const std::string file = std::string(name) + ".vec";
        write_vector_file(*s, (out / file).string());
        vectors[name] = file;
    };
    save_space("word", corpus.spaces.word);
    save_space("image", corpus.spaces.image);
    save_space("description", corpus.spaces.description);

    json manifest{
        {"datasets", {{"A", corpus.dataset_names[0]}, {"B", corpus.dataset_names[1]}}},
        {"manuscripts", "manuscripts.jsonl"},
        {"images", "images.jsonl"},
        {"labels", "labels.jsonl"},
        {"stopwords", "stopwords.txt"},
        {"vectors", vectors},
    };
    std::ofstream f(out / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot write manifest in " + dir);
    f << manifest.dump(2) << '\n';
}

}  // namespace illumine
