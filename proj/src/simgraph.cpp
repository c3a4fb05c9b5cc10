#include "illumine/simgraph.hpp"

#include "illumine/error.hpp"
#include "illumine/simd/kernels.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace illumine {

using nlohmann::json;

std::string_view to_string(SimilarityMetric m) noexcept {
    switch (m) {
        case SimilarityMetric::image: return "image";
        case SimilarityMetric::label: return "label";
        case SimilarityMetric::description: return "description";
    }
    return "?";
}

SimilarityMetric parse_metric(std::string_view s) {
    if (s == "image") return SimilarityMetric::image;
    if (s == "label") return SimilarityMetric::label;
    if (s == "description") return SimilarityMetric::description;
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(s) + "'");
}

std::optional<std::vector<double>> manuscript_vector(const Manuscript& m, SimilarityMetric metric,
                                                     const Corpus& corpus) {
    // Label vectors are averaged over every (image, label) occurrence.
    std::vector<std::string> keys;
    const VectorSpace* space = nullptr;
    switch (metric) {
        case SimilarityMetric::image:
            space = corpus.spaces.image.get();
            keys = m.image_ids;
            break;
        case SimilarityMetric::description:
            space = corpus.spaces.description.get();
            keys = m.image_ids;
            break;
        case SimilarityMetric::label:
            space = corpus.spaces.label.get();
            for (const auto& img_id : m.image_ids)
                if (const auto* img = corpus.find_image(img_id))
                    keys.insert(keys.end(), img->label_ids.begin(), img->label_ids.end());
            break;
    }
    if (!space || keys.empty()) return std::nullopt;
    try {
        return mean_vector(keys, *space).components;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoVector) throw;
        return std::nullopt;
    }
}

double similarity_from_distance(double distance) noexcept { return 1.0 / (1.0 + distance); }

double manuscript_similarity(const Manuscript& a, const Manuscript& b, SimilarityMetric metric,
                             const Corpus& corpus) {
    const auto va = manuscript_vector(a, metric, corpus);
    if (!va) throw Error(ErrorCode::NoVector, "manuscript '" + a.id + "' has no " + std::string(to_string(metric)) + " vector");
    const auto vb = manuscript_vector(b, metric, corpus);
    if (!vb) throw Error(ErrorCode::NoVector, "manuscript '" + b.id + "' has no " + std::string(to_string(metric)) + " vector");
    return similarity_from_distance(euclidean_distance(*va, *vb));
}

double combine_metrics(const std::map<SimilarityMetric, double>& values) {
    if (values.empty()) throw Error(ErrorCode::EmptySelection, "no metric values to combine");
    double sum = 0.0;
    for (const auto& [metric, v] : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::vector<GraphEdge> filter_edges(std::vector<GraphEdge> candidates, std::size_t max_degree, double threshold) {
    std::erase_if(candidates, [&](const GraphEdge& e) { return e.value < threshold; });
    for (auto& e : candidates)
        if (e.v < e.u) std::swap(e.u, e.v);
    std::sort(candidates.begin(), candidates.end(),
              [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });

    // Mutual top-k; stable sorting over (u, v) order gives the pair-id tie break.
    std::map<std::string, std::vector<std::size_t>> incident;
    for (std::size_t e = 0; e < candidates.size(); ++e) {
        incident[candidates[e].u].push_back(e);
        incident[candidates[e].v].push_back(e);
    }
    std::vector<int> kept_by(candidates.size(), 0);
    for (auto& [node, list] : incident) {
        std::stable_sort(list.begin(), list.end(),
                         [&](std::size_t a, std::size_t b) { return candidates[a].value > candidates[b].value; });
        for (std::size_t r = 0; r < list.size() && r < max_degree; ++r) ++kept_by[list[r]];
    }
    std::vector<GraphEdge> out;
    for (std::size_t e = 0; e < candidates.size(); ++e)
        if (kept_by[e] == 2) out.push_back(std::move(candidates[e]));
    return out;
}

ManuscriptGraph build_graph(const Corpus& corpus, const GraphParams& params) {
    if (params.max_degree < 1) throw Error(ErrorCode::InvalidArgument, "max_degree must be >= 1");
    if (!(params.threshold >= 0.0 && params.threshold <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "threshold must be in [0, 1]");
    if (params.metrics.empty()) throw Error(ErrorCode::InvalidArgument, "select at least one metric");

    ManuscriptGraph graph;
    graph.params = params;
    std::vector<const Manuscript*> ms;
    for (const auto& m : corpus.manuscripts()) ms.push_back(&m);
    std::sort(ms.begin(), ms.end(), [](auto* a, auto* b) { return a->id < b->id; });
    for (const auto* m : ms) graph.nodes.push_back({m->id, m->dataset, m->image_ids.size()});

    const std::size_t n = ms.size();
    std::map<SimilarityMetric, std::vector<std::optional<std::vector<double>>>> vectors;
    for (SimilarityMetric metric : params.metrics) {
        auto& vs = vectors[metric];
        for (const auto* m : ms) {
            vs.push_back(manuscript_vector(*m, metric, corpus));
            if (!vs.back()) graph.uncomputable.emplace_back(m->id, metric);
        }
    }

    std::vector<GraphEdge> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            std::map<SimilarityMetric, double> values;
            for (const auto& [metric, vs] : vectors)
                if (vs[i] && vs[j]) values[metric] = similarity_from_distance(std::sqrt(simd::squared_distance(*vs[i], *vs[j])));
            if (values.empty()) continue;
            candidates.push_back({ms[i]->id, ms[j]->id, combine_metrics(values)});
        }
    }
    graph.edges = filter_edges(std::move(candidates), params.max_degree, params.threshold);
    return graph;
}

SelectionSummary selection_summary(const std::set<std::string>& manuscript_ids, const Corpus& corpus) {
    if (manuscript_ids.empty()) throw Error(ErrorCode::EmptySelection, "no manuscripts selected");
    SelectionSummary s;
    std::map<std::string, std::size_t> label_counts;
    for (const auto& id : manuscript_ids) {
        const auto* m = corpus.find_manuscript(id);
        if (!m) throw Error(ErrorCode::DanglingReference, "unknown manuscript '" + id + "'");
        s.image_counts.emplace_back(id, m->image_ids.size());
        if (m->date_range) {
            const auto decade = [](int year) { return static_cast<int>(std::floor(year / 10.0)) * 10; };
            for (int d = decade(m->date_range->start); d <= decade(m->date_range->end); d += 10) ++s.decades[d];
        }
        for (const auto& img_id : m->image_ids)
            if (const auto* img = corpus.find_image(img_id))
                for (const auto& l : img->label_ids) ++label_counts[l];
    }
    s.label_frequencies.assign(label_counts.begin(), label_counts.end());
    std::stable_sort(s.label_frequencies.begin(), s.label_frequencies.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return s;
}

json to_json(const ManuscriptGraph& graph) {
    json nodes = json::array(), edges = json::array(), metrics = json::array(), missing = json::array();
    for (const auto& nd : graph.nodes)
        nodes.push_back({{"id", nd.manuscript_id}, {"dataset", to_string(nd.dataset)}, {"image_count", nd.image_count}});
    for (const auto& e : graph.edges) edges.push_back({{"source", e.u}, {"target", e.v}, {"value", e.value}});
    for (auto m : graph.params.metrics) metrics.push_back(to_string(m));
    for (const auto& [id, m] : graph.uncomputable) missing.push_back({{"manuscript", id}, {"metric", to_string(m)}});
    return json{{"nodes", nodes},
                {"edges", edges},
                {"params",
                 {{"metrics", metrics}, {"max_degree", graph.params.max_degree}, {"threshold", graph.params.threshold}}},
                {"uncomputable", missing}};
}

json to_json(const SelectionSummary& s) {
    json counts = json::array(), decades = json::array(), labels = json::array();
    for (const auto& [id, c] : s.image_counts) counts.push_back({{"manuscript", id}, {"images", c}});
    for (const auto& [d, c] : s.decades) decades.push_back({{"decade", d}, {"manuscripts", c}});
    for (const auto& [id, c] : s.label_frequencies) labels.push_back({{"label", id}, {"count", c}});
    return json{{"image_counts", counts}, {"decades", decades}, {"labels", labels}};
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string to_graphml(const ManuscriptGraph& graph) {
    std::ostringstream out;
    out.precision(17);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"dataset\" for=\"node\" attr.name=\"dataset\" attr.type=\"string\"/>\n"
        << "  <key id=\"images\" for=\"node\" attr.name=\"image_count\" attr.type=\"int\"/>\n"
        << "  <key id=\"value\" for=\"edge\" attr.name=\"value\" attr.type=\"double\"/>\n"
        << "  <graph id=\"manuscripts\" edgedefault=\"undirected\">\n";
    for (const auto& n : graph.nodes)
        out << "    <node id=\"" << xml_escape(n.manuscript_id) << "\"><data key=\"dataset\">" << to_string(n.dataset)
            << "</data><data key=\"images\">" << n.image_count << "</data></node>\n";
    for (const auto& e : graph.edges)
        out << "    <edge source=\"" << xml_escape(e.u) << "\" target=\"" << xml_escape(e.v)
            << "\"><data key=\"value\">" << e.value << "</data></edge>\n";
    out << "  </graph>\n</graphml>\n";
    return out.str();
}

}  // namespace illumine
