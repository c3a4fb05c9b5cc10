#include "illumine/recommend.hpp"

#include "illumine/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>

namespace illumine {

using nlohmann::json;

namespace {
const std::map<std::string, int> kEmptyRow;
}

int CooccurrenceMatrix::count(const std::string& a, const std::string& b) const {
    const auto it = total_.find(a);
    if (it == total_.end()) return 0;
    const auto jt = it->second.find(b);
    return jt == it->second.end() ? 0 : jt->second;
}

int CooccurrenceMatrix::count(const std::string& a, const std::string& b, Dataset d) const {
    const auto& t = by_dataset_[static_cast<int>(d)];
    const auto it = t.find(a);
    if (it == t.end()) return 0;
    const auto jt = it->second.find(b);
    return jt == it->second.end() ? 0 : jt->second;
}

const std::map<std::string, int>& CooccurrenceMatrix::row(const std::string& label) const {
    const auto it = total_.find(label);
    return it == total_.end() ? kEmptyRow : it->second;
}

void CooccurrenceMatrix::bump(Table& t, const std::string& a, const std::string& b, int delta) {
    auto& row = t[a];
    const int v = (row[b] += delta);
    if (v == 0) {
        row.erase(b);
        if (row.empty()) t.erase(a);
    }
}

void CooccurrenceMatrix::apply(const std::string& label, const std::set<std::string>& others, Dataset d, int delta) {
    for (Table* t : {&total_, &by_dataset_[static_cast<int>(d)]}) {
        bump(*t, label, label, delta);
        for (const auto& o : others) {
            if (o == label) continue;
            bump(*t, label, o, delta);
            bump(*t, o, label, delta);
        }
    }
    ++version_;
}

void CooccurrenceMatrix::label_added(const std::string& label, const std::set<std::string>& others, Dataset d) {
    apply(label, others, d, +1);
}

void CooccurrenceMatrix::label_removed(const std::string& label, const std::set<std::string>& others, Dataset d) {
    apply(label, others, d, -1);
}

void CooccurrenceMatrix::add_image(const std::set<std::string>& labels, Dataset d) {
    for (Table* t : {&total_, &by_dataset_[static_cast<int>(d)]}) {
        for (const auto& a : labels)
            for (const auto& b : labels) bump(*t, a, b, +1);
    }
}

bool CooccurrenceMatrix::same_counts(const CooccurrenceMatrix& other) const {
    return total_ == other.total_ && by_dataset_ == other.by_dataset_;
}

bool CooccurrenceMatrix::is_symmetric() const {
    for (const auto& [a, row] : total_)
        for (const auto& [b, c] : row)
            if (count(b, a) != c) return false;
    return true;
}

std::size_t CooccurrenceMatrix::nonzero() const {
    std::size_t n = 0;
    for (const auto& [a, row] : total_) n += row.size();
    return n;
}

CooccurrenceMatrix build_cooccurrence(const Corpus& corpus) {
    CooccurrenceMatrix m;
    for (const auto& img : corpus.images()) m.add_image(img.label_ids, img.dataset);
    return m;
}

RecReport word_space_recs(const std::vector<std::string>& selected, const VectorSpace& original,
                          const VectorSpace& retrofitted, const Corpus& corpus, const WordSpaceOptions& options) {
    if (selected.empty()) throw Error(ErrorCode::EmptySelection, "no labels selected");
    const std::set<std::string> exclude(selected.begin(), selected.end());

    RecReport report;
    std::map<std::string, Recommendation> best;
    const auto offer = [&](const std::string& key, double d, const std::string& target,
                           const std::vector<std::string>& sources) {
        auto [it, inserted] = best.try_emplace(key);
        auto& r = it->second;
        if (inserted || d < r.score) {
            r.label_id = key;
            r.score = d;
            r.distance = d;
            r.nearest_target = target;
        }
        for (const auto& s : sources)
            if (std::find(r.source_spaces.begin(), r.source_spaces.end(), s) == r.source_spaces.end())
                r.source_spaces.push_back(s);
    };

    for (const auto& target : selected) {
        if (!original.contains(target) || !retrofitted.contains(target)) {
            report.skipped.push_back(target);
            continue;
        }
        if (options.full_scan) {
            for (const VectorSpace* s : {&original, &retrofitted})
                for (auto& hit : knn(*s, s->vector(target), s->size(), exclude)) offer(hit.key, hit.distance, target, hit.source_spaces);
        } else {
            for (auto& hit : union_knn(original, retrofitted, target, options.k, exclude))
                offer(hit.key, hit.distance, target, hit.source_spaces);
        }
    }
    if (report.skipped.size() == selected.size())
        throw Error(ErrorCode::NoVector, "no selected label has a vector");

    for (auto& [key, r] : best) {
        if (const auto* term = corpus.find_label(key)) r.origin = term->dataset_origin;
        report.recs.push_back(std::move(r));
    }
    std::stable_sort(report.recs.begin(), report.recs.end(),
                     [](const Recommendation& a, const Recommendation& b) { return a.score < b.score; });
    return report;
}

std::vector<Recommendation> cooccurrence_recs(const std::vector<std::string>& selected, std::size_t limit,
                                              const CooccurrenceMatrix& matrix, const Corpus& corpus) {
    if (selected.empty()) throw Error(ErrorCode::EmptySelection, "no labels selected");
    const std::set<std::string> chosen(selected.begin(), selected.end());
    std::map<std::string, Recommendation> recs;
    for (std::size_t s = 0; s < selected.size(); ++s) {
        for (const auto& [candidate, c] : matrix.row(selected[s])) {
            if (chosen.contains(candidate)) continue;
            auto& r = recs[candidate];
            if (r.breakdown.empty()) {
                r.label_id = candidate;
                r.breakdown.assign(selected.size(), 0);
            }
            r.breakdown[s] = c;
            r.score += c;
        }
    }
    std::vector<Recommendation> out;
    for (auto& [id, r] : recs) {
        if (r.score <= 0) continue;
        if (const auto* term = corpus.find_label(id)) r.origin = term->dataset_origin;
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    if (out.size() > limit) out.resize(limit);
    return out;
}

std::vector<Recommendation> image_neighbor_recs(const std::vector<std::string>& selected_images, std::size_t k_images,
                                                std::size_t limit, const VectorSpace& image_space,
                                                const Corpus& corpus) {
    if (selected_images.empty()) throw Error(ErrorCode::EmptySelection, "no images selected");
    const std::set<std::string> chosen(selected_images.begin(), selected_images.end());

    std::map<std::string, double> neighbors;  // image -> min distance to the selection
    std::size_t with_vector = 0;
    for (const auto& id : selected_images) {
        corpus.image(id);
        if (!image_space.contains(id)) continue;
        ++with_vector;
        for (const auto& hit : knn(image_space, image_space.vector(id), k_images, chosen)) {
            auto [it, inserted] = neighbors.try_emplace(hit.key, hit.distance);
            if (!inserted) it->second = std::min(it->second, hit.distance);
        }
    }
    if (with_vector == 0) throw Error(ErrorCode::NoVector, "no selected image has an embedding");

    struct Tally {
        std::size_t count = 0;
        double min_distance = std::numeric_limits<double>::infinity();
        std::vector<std::string> images;
    };
    std::map<std::string, Tally> tally;
    for (const auto& [img_id, d] : neighbors) {
        const auto* img = corpus.find_image(img_id);
        if (!img) continue;
        for (const auto& l : img->label_ids) {
            auto& t = tally[l];
            ++t.count;
            t.min_distance = std::min(t.min_distance, d);
            t.images.push_back(img_id);
        }
    }
    std::vector<Recommendation> out;
    std::vector<double> min_dist;
    for (auto& [label, t] : tally) {
        Recommendation r;
        r.label_id = label;
        r.score = static_cast<double>(t.count);
        r.distance = t.min_distance;
        r.neighbor_images = std::move(t.images);
        if (const auto* term = corpus.find_label(label)) r.origin = term->dataset_origin;
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.score != b.score) return a.score > b.score;
        return *a.distance < *b.distance;
    });
    if (out.size() > limit) out.resize(limit);
    return out;
}

std::vector<LabelFrequency> label_frequencies(const std::vector<std::string>& label_ids, const Corpus& corpus) {
    std::map<std::string, std::array<std::size_t, 2>> counts;
    for (const auto& id : label_ids) counts[id];
    for (const auto& img : corpus.images())
        for (const auto& l : img.label_ids)
            if (const auto it = counts.find(l); it != counts.end()) ++it->second[static_cast<int>(img.dataset)];
    std::vector<LabelFrequency> out;
    for (const auto& id : label_ids) out.push_back({id, counts[id][0], counts[id][1]});
    return out;
}

json to_json(const Recommendation& r) {
    json j{{"label", r.label_id}, {"score", r.score}, {"origin", to_string(r.origin)}};
    if (r.nearest_target) j["nearest_target"] = *r.nearest_target;
    if (r.distance) j["distance"] = *r.distance;
    if (!r.source_spaces.empty()) j["source_spaces"] = r.source_spaces;
    if (!r.breakdown.empty()) j["breakdown"] = r.breakdown;
    if (!r.neighbor_images.empty()) j["neighbor_images"] = r.neighbor_images;
    return j;
}

}  // namespace illumine
