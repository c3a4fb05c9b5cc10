#include "illumine/fixture.hpp"

#include "illumine/corpus.hpp"
#include "illumine/error.hpp"
#include "illumine/normalize.hpp"
#include "illumine/rng.hpp"
#include "illumine/vecspace.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace illumine {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Theme {
    const char* name;
    std::vector<const char*> terms;  // first term is the theme's hierarchy root
};

const std::vector<Theme>& engineered_themes() {
    static const std::vector<Theme> themes{
        {"musique", {"instrument de musique", "harpe", "vielle", "psaltérion", "cithare", "orgue", "cor",
                     "trompette", "cloche"}},
        {"royauté", {"couronne", "roi", "sceptre", "trône", "reine"}},
        {"david", {"David", "Abishag", "lit", "malade", "sommeil"}},
        {"oiseaux", {"oiseaux", "cigogne", "grue", "aigle", "colombe", "hibou"}},
        {"animaux", {"animal", "lion", "chien", "cheval", "cerf", "ours", "serpent"}},
        {"armes", {"arme", "épée", "lance", "bouclier", "casque"}},
        {"décor", {"décor", "rinceau", "initiale ornée", "feuillage", "entrelacs"}},
        {"mobilier", {"mobilier", "pupitre", "siège", "table", "livre"}},
        {"posture", {"posture", "assis", "debout", "agenouillé", "couché"}},
    };
    return themes;
}

// Scenes group themes that appear together on one image.
struct Scene {
    std::string subject;
    std::vector<std::size_t> themes;
    std::vector<std::string> anchors;  // surfaces added with high probability
};

constexpr const char* kBooks[] = {"Genèse", "Exode", "Rois", "Psaumes", "Isaïe", "Daniel",
                                  "Matthieu", "Jean", "Apocalypse"};
constexpr const char* kPlaces[] = {"Paris", "Cîteaux", "Tours", "Reims", "Metz", "Laon", "Corbie", "Saint-Denis"};
constexpr const char* kSyllables[] = {"ba", "ro", "mi", "tel", "sar", "vo", "lin", "qua", "dré", "mon",
                                      "fé", "ci", "gra", "tor", "pe", "lu", "nar", "si", "bé", "ol"};
constexpr const char* kDescriptionGlue[] = {"avec", "et", "de", "la", "le", "sur"};

struct Term {
    std::string surface;
    std::string normalized;
    std::size_t theme = 0;
    LabelOrigin origin = LabelOrigin::A;  // A, B or both
};

std::string label_id(char dataset, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c-l%04zu", dataset, index);
    return buf;
}

std::string canonical_id(const Term& t, std::size_t index) {
    return label_id(t.origin == LabelOrigin::B ? 'b' : 'a', index);
}

// Accent-free lowercase if that differs, otherwise capitalize.
std::string surface_variant(const std::string& surface) {
    std::string folded = fold_text(surface);
    if (folded != surface) return folded;
    if (!folded.empty() && folded[0] >= 'a' && folded[0] <= 'z') folded[0] = static_cast<char>(folded[0] - 32);
    return folded;
}

std::vector<double> gaussian(Rng& rng, std::size_t dim, double stddev) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal(0.0, stddev);
    return v;
}

std::vector<double> around(Rng& rng, const std::vector<double>& center, double stddev) {
    std::vector<double> v = center;
    for (auto& x : v) x += rng.normal(0.0, stddev);
    return v;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
}

}  // namespace

FixtureSummary generate_fixture(const FixtureParams& p, const std::string& out_dir) {
    if (p.n_manuscripts < 1 || p.n_images < 1 || p.n_labels < 1)
        throw Error(ErrorCode::InvalidArgument, "fixture counts must be >= 1");
    if (p.dim < 2) throw Error(ErrorCode::InvalidArgument, "fixture dim must be >= 2");
    if (p.n_images < p.n_manuscripts)
        throw Error(ErrorCode::InvalidArgument, "every manuscript needs at least one image");
    if (p.shared_fraction < 0.0 || p.shared_fraction > 1.0)
        throw Error(ErrorCode::InvalidArgument, "shared_fraction must be in [0, 1]");

    Rng rng(p.seed);
    const auto& stop = default_stopwords();

    // Vocabulary: engineered themes first, synthetic terms fill the rest.
    std::vector<Term> terms;
    std::vector<std::string> theme_names;
    std::set<std::string> used;
    for (const auto& theme : engineered_themes()) {
        theme_names.push_back(theme.name);
        for (const char* s : theme.terms) {
            if (terms.size() == p.n_labels) break;
            terms.push_back({s, fold_text(s), theme_names.size() - 1, LabelOrigin::A});
            used.insert(terms.back().normalized);
        }
    }
    const std::size_t n_synthetic = p.n_labels - terms.size();
    const std::size_t n_synth_themes = n_synthetic == 0 ? 0 : std::max<std::size_t>(3, n_synthetic / 15);
    for (std::size_t t = 0; t < n_synth_themes; ++t) theme_names.push_back("thème " + std::to_string(t));
    while (terms.size() < p.n_labels) {
        std::string surface;
        const std::size_t syllables = 2 + rng.below(2);
        for (std::size_t s = 0; s < syllables; ++s) surface += kSyllables[rng.below(std::size(kSyllables))];
        std::string normalized = fold_text(surface);
        if (!used.insert(normalized).second) continue;
        const std::size_t theme = engineered_themes().size() + rng.below(n_synth_themes);
        terms.push_back({surface, normalized, theme, LabelOrigin::A});
    }

    // Dataset membership of each term.
    const std::size_t n = terms.size();
    const auto n_shared = static_cast<std::size_t>(std::llround(p.shared_fraction * static_cast<double>(n)));
    const std::size_t rest = n - n_shared;
    std::size_t n_a_only = static_cast<std::size_t>(std::llround(static_cast<double>(rest) * 251.0 / 1706.0));
    if (rest >= 2) n_a_only = std::clamp<std::size_t>(n_a_only, 1, rest - 1);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    // Scene anchors take the first shared slots.
    std::size_t front = 0;
    for (const char* anchor : {"instrument de musique", "couronne"})
        for (std::size_t r = front; r < n; ++r)
            if (terms[perm[r]].surface == anchor) {
                std::swap(perm[front++], perm[r]);
                break;
            }
    for (std::size_t r = 0; r < n; ++r) {
        auto& t = terms[perm[r]];
        t.origin = r < n_shared ? LabelOrigin::both : (r < n_shared + n_a_only ? LabelOrigin::A : LabelOrigin::B);
    }

    // Scenes.
    std::vector<Scene> scenes{
        {"David et Abishag", {2, 0, 1}, {"instrument de musique", "couronne"}},
        {"Oiseaux", {3}, {}},
        {"Animaux", {4}, {}},
        {"Combat", {5, 1}, {}},
        {"Ornement", {6}, {}},
        {"Scène d'étude", {7, 8}, {}},
    };
    for (std::size_t t = 0; t < n_synth_themes; ++t)
        scenes.push_back({"Scène " + std::to_string(t), {engineered_themes().size() + t}, {}});

    std::vector<std::vector<std::size_t>> theme_terms(theme_names.size());
    for (std::size_t i = 0; i < n; ++i) theme_terms[terms[i].theme].push_back(i);
    const auto available = [&](std::size_t i, Dataset d) {
        return terms[i].origin == LabelOrigin::both ||
               (d == Dataset::A ? terms[i].origin == LabelOrigin::A : terms[i].origin == LabelOrigin::B);
    };

    // Word vectors: one centre per theme, tokens scattered around it.
    const std::size_t dim = p.dim;
    std::vector<std::vector<double>> theme_center;
    for (std::size_t t = 0; t < theme_names.size(); ++t) theme_center.push_back(gaussian(rng, dim, 1.0));
    VectorSpace word("word", dim);
    for (const auto& t : terms) {
        for (const auto& tok : split_words(t.normalized)) {
            if (word.contains(tok)) continue;
            word.add(tok, stop.contains(tok) ? gaussian(rng, dim, 1.0) : around(rng, theme_center[t.theme], 0.25));
        }
    }
    for (const char* g : kDescriptionGlue)
        if (!word.contains(g)) word.add(g, gaussian(rng, dim, 1.0));

    // Manuscripts.
    std::size_t n_ms_a = p.n_manuscripts;
    if (p.n_manuscripts >= 2)
        n_ms_a = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(static_cast<double>(p.n_manuscripts) * 53.0 / 294.0)), 1,
            p.n_manuscripts - 1);
    std::vector<std::size_t> images_per_ms(p.n_manuscripts, 1);
    for (std::size_t i = p.n_manuscripts; i < p.n_images; ++i) ++images_per_ms[rng.below(p.n_manuscripts)];

    std::vector<std::vector<double>> scene_center;
    for (std::size_t s = 0; s < scenes.size(); ++s) scene_center.push_back(gaussian(rng, dim, 1.0));
    VectorSpace image_space("image", dim);

    struct Image {
        json record;
        Dataset dataset;
        std::set<std::size_t> terms;
    };
    std::vector<json> manuscripts;
    std::vector<Image> images;
    FixtureSummary summary;

    for (std::size_t m = 0; m < p.n_manuscripts; ++m) {
        const Dataset ds = m < n_ms_a ? Dataset::A : Dataset::B;
        char ms_id[32];
        std::snprintf(ms_id, sizeof ms_id, "%s-ms%03zu", ds == Dataset::A ? "A" : "B", m);
        const std::size_t dominant = rng.below(scenes.size());
        json ms{{"id", ms_id},
                {"dataset", to_string(ds)},
                {"shelfmark", (ds == Dataset::A ? "Latin " : "Ms. ") + std::to_string(1000 + rng.below(9000))},
                {"origin_place", kPlaces[rng.below(std::size(kPlaces))]}};
        if (rng.uniform() < 0.9) {
            const int start = 1100 + static_cast<int>(rng.below(350));
            ms["date_range"] = json::array({start, start + static_cast<int>(rng.below(61))});
        } else {
            ms["date_range"] = nullptr;
        }
        json image_ids = json::array();
        for (std::size_t f = 0; f < images_per_ms[m]; ++f) {
            char img_id[48];
            std::snprintf(img_id, sizeof img_id, "%s-f%03zu", ms_id, f + 1);
            const std::size_t scene = rng.uniform() < 0.75 ? dominant : rng.below(scenes.size());
            Image img{json{{"id", img_id},
                           {"manuscript_id", ms_id},
                           {"dataset", to_string(ds)},
                           {"folio", std::to_string(f / 2 + 1) + (f % 2 ? "v" : "r")},
                           {"book", kBooks[rng.below(std::size(kBooks))]},
                           {"subject", scenes[scene].subject}},
                      ds,
                      {}};
            if (rng.uniform() >= p.unlabeled_fraction) {
                std::vector<std::size_t> pool;
                for (std::size_t t : scenes[scene].themes)
                    for (std::size_t i : theme_terms[t])
                        if (available(i, ds)) pool.push_back(i);
                if (pool.empty())
                    for (std::size_t i = 0; i < n; ++i)
                        if (available(i, ds)) pool.push_back(i);
                if (!pool.empty()) {
                    const std::size_t k = 1 + rng.below(3);
                    for (std::size_t j = 0; j < k; ++j) img.terms.insert(pool[rng.below(pool.size())]);
                }
                for (const auto& anchor : scenes[scene].anchors) {
                    const bool take = rng.uniform() < 0.7;
                    for (std::size_t i = 0; i < n; ++i)
                        if (take && terms[i].surface == anchor && available(i, ds)) img.terms.insert(i);
                }
            }
            image_space.add(img_id, around(rng, scene_center[scene], 0.3));
            image_ids.push_back(img_id);
            images.push_back(std::move(img));
        }
        ms["image_ids"] = std::move(image_ids);
        manuscripts.push_back(std::move(ms));
        (ds == Dataset::A ? summary.manuscripts_a : summary.manuscripts_b) += 1;
    }

    // Every shared term is carried by at least one image of each dataset.
    for (std::size_t i = 0; i < n; ++i) {
        if (terms[i].origin != LabelOrigin::both) continue;
        for (Dataset ds : {Dataset::A, Dataset::B}) {
            std::vector<std::size_t> candidates;
            bool carried = false;
            for (std::size_t k = 0; k < images.size(); ++k) {
                if (images[k].dataset != ds) continue;
                candidates.push_back(k);
                carried = carried || images[k].terms.contains(i);
            }
            if (!carried && !candidates.empty()) images[candidates[rng.below(candidates.size())]].terms.insert(i);
        }
    }

    // Final label assignments and descriptions.
    for (auto& img : images) {
        json ids = json::array();
        std::vector<std::string> words;
        for (std::size_t i : img.terms) {
            ids.push_back(img.dataset == Dataset::A || terms[i].origin == LabelOrigin::B ? canonical_id(terms[i], i)
                                                                                         : label_id('b', i));
            words.push_back(terms[i].surface);
        }
        img.record["label_ids"] = std::move(ids);
        if (!words.empty() && rng.uniform() < 0.4) {
            std::string text = words[0];
            for (std::size_t w = 1; w < words.size(); ++w)
                text += std::string(" ") + kDescriptionGlue[rng.below(2)] + " " + words[w];
            img.record["description"] = text;
        } else {
            img.record["description"] = nullptr;
        }
        img.record["image_uri"] = nullptr;
        (img.dataset == Dataset::A ? summary.images_a : summary.images_b) += 1;
    }

    // Raw label records: shared terms appear in both datasets.
    std::string labels_text;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = terms[i];
        if (t.origin != LabelOrigin::B)
            labels_text += json{{"id", label_id('a', i)}, {"surface", t.surface}, {"dataset_origin", "A"}}.dump() + "\n";
        if (t.origin != LabelOrigin::A)
            labels_text += json{{"id", label_id('b', i)},
                                {"surface", t.origin == LabelOrigin::both ? surface_variant(t.surface) : t.surface},
                                {"dataset_origin", "B"}}
                               .dump() +
                           "\n";
        summary.raw_label_records += t.origin == LabelOrigin::both ? 2 : 1;
        if (t.origin == LabelOrigin::both) ++summary.labels_shared;
        else if (t.origin == LabelOrigin::A) ++summary.labels_a_only;
        else ++summary.labels_b_only;
    }

    const fs::path out(out_dir);
    fs::create_directories(out);
    std::string ms_text, img_text;
    for (const auto& m : manuscripts) ms_text += m.dump() + "\n";
    for (const auto& img : images) img_text += img.record.dump() + "\n";
    write_text(out / "manuscripts.jsonl", ms_text);
    write_text(out / "images.jsonl", img_text);
    write_text(out / "labels.jsonl", labels_text);
    write_text(out / "word.vec", format_vector_text(word));
    write_text(out / "image.vec", format_vector_text(image_space));
    {
        std::vector<std::string> sw(stop.begin(), stop.end());
        std::sort(sw.begin(), sw.end());
        std::string text;
        for (const auto& w : sw) text += w + "\n";
        write_text(out / "stopwords.txt", text);
    }

    json manifest{{"datasets", {{"A", "Mandragore"}, {"B", "Initiale"}}},
                  {"manuscripts", "manuscripts.jsonl"},
                  {"images", "images.jsonl"},
                  {"labels", "labels.jsonl"},
                  {"stopwords", "stopwords.txt"},
                  {"vectors", {{"word", "word.vec"}, {"image", "image.vec"}}}};

    if (p.hierarchy_terms > 0) {
        // A forest per theme: the first term is the root, the others hang
        // below the root or below an earlier term of the same theme.
        json nodes = json::array(), edges = json::array();
        std::size_t budget = std::min(p.hierarchy_terms, n);
        for (std::size_t t = 0; t < theme_terms.size() && budget > 0; ++t) {
            std::vector<std::size_t> placed;
            for (std::size_t i : theme_terms[t]) {
                if (budget == 0) break;
                --budget;
                nodes.push_back({{"id", canonical_id(terms[i], i)}, {"is_new", false}});
                if (!placed.empty()) {
                    std::size_t parent = placed.front();
                    if (placed.size() > 1 && rng.uniform() < 0.3) parent = placed[1 + rng.below(placed.size() - 1)];
                    edges.push_back({{"parent", canonical_id(terms[parent], parent)},
                                     {"child", canonical_id(terms[i], i)},
                                     {"user", "fixture"},
                                     {"created_at", 0}});
                }
                placed.push_back(i);
            }
        }
        summary.hierarchy_nodes = nodes.size();
        summary.hierarchy_edges = edges.size();
        write_text(out / "hierarchy.json", json{{"nodes", nodes}, {"edges", edges}}.dump(2) + "\n");
        manifest["hierarchy"] = "hierarchy.json";
    }
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

}  // namespace illumine
