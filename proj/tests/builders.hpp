#pragma once

#include "illumine/corpus.hpp"
#include "illumine/normalize.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace testing {

using namespace illumine;

/// In-memory corpus assembly for tests.
class CorpusBuilder {
public:
    CorpusBuilder& label(const std::string& id, const std::string& surface, LabelOrigin origin = LabelOrigin::A) {
        const auto n = normalize_term(surface, stop_);
        labels_.push_back({id, surface, n.normalized, n.tokens, origin, std::nullopt});
        return *this;
    }
    CorpusBuilder& manuscript(const std::string& id, Dataset d, std::optional<YearRange> dates = std::nullopt) {
        manuscripts_.push_back({id, d, "shelf " + id, std::nullopt, dates, {}});
        return *this;
    }
    CorpusBuilder& image(const std::string& id, const std::string& ms, std::set<std::string> labels,
                         std::optional<std::vector<double>> vec = std::nullopt,
                         std::optional<std::string> description = std::nullopt) {
        Dataset d = Dataset::A;
        for (auto& m : manuscripts_)
            if (m.id == ms) {
                m.image_ids.push_back(id);
                d = m.dataset;
            }
        images_.push_back({id, ms, d, "1r", std::nullopt, std::nullopt, description, std::move(labels), std::nullopt});
        if (vec) image_vectors_.emplace_back(id, *vec);
        return *this;
    }
    CorpusBuilder& word(const std::string& w, std::vector<double> v) {
        words_.emplace_back(w, std::move(v));
        return *this;
    }

    Corpus build() const {
        Corpus c;
        c.stopwords = stop_;
        for (const auto& t : labels_) c.add_label(t);
        for (const auto& m : manuscripts_) c.add_manuscript(m);
        for (const auto& i : images_) c.add_image(i);
        if (!image_vectors_.empty()) {
            auto s = std::make_shared<VectorSpace>("image", image_vectors_.front().second.size());
            for (const auto& [k, v] : image_vectors_) s->add(k, v);
            c.spaces.image = s;
        }
        if (!words_.empty()) {
            auto s = std::make_shared<VectorSpace>("word", words_.front().second.size());
            for (const auto& [k, v] : words_) s->add(k, v);
            c.spaces.word = s;
            c.rebuild_label_space();
            c.derive_description_space();
        }
        c.validate();
        return c;
    }

private:
    StopwordSet stop_{"de", "la", "le", "et", "un", "une", "avec"};
    std::vector<LabelTerm> labels_;
    std::vector<Manuscript> manuscripts_;
    std::vector<ImageRecord> images_;
    std::vector<std::pair<std::string, std::vector<double>>> image_vectors_;
    std::vector<std::pair<std::string, std::vector<double>>> words_;
};

}  // namespace testing
