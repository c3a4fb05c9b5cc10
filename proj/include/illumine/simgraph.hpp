#pragma once

#include "illumine/corpus.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace illumine {

enum class SimilarityMetric { image, label, description };

std::string_view to_string(SimilarityMetric m) noexcept;
SimilarityMetric parse_metric(std::string_view s);

/// Mean vector of a manuscript under a metric, or nullopt when no image
/// contributes (images lacking the field are skipped).
std::optional<std::vector<double>> manuscript_vector(const Manuscript& m, SimilarityMetric metric,
                                                     const Corpus& corpus);

/// 1 / (1 + d) of the Euclidean distance between the two mean vectors.
double similarity_from_distance(double distance) noexcept;

/// Throws NoVector when either manuscript contributes nothing.
double manuscript_similarity(const Manuscript& a, const Manuscript& b, SimilarityMetric metric,
                             const Corpus& corpus);

/// Arithmetic mean of the supplied values. Throws EmptySelection when empty.
double combine_metrics(const std::map<SimilarityMetric, double>& values);

struct GraphNode {
    std::string manuscript_id;
    Dataset dataset = Dataset::A;
    std::size_t image_count = 0;
};

struct GraphEdge {
    std::string u;  // u < v
    std::string v;
    double value = 0.0;
};

struct GraphParams {
    std::set<SimilarityMetric> metrics;
    std::size_t max_degree = 5;
    double threshold = 0.0;
};

struct ManuscriptGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;  // sorted by (u, v)
    GraphParams params;
    /// (manuscript, metric) pairs excluded because the manuscript had no vector.
    std::vector<std::pair<std::string, SimilarityMetric>> uncomputable;
};

/// Drops edges below the threshold, then keeps an edge only when both
/// endpoints rank it among their max_degree strongest (value desc, pair id
/// asc). Output sorted by (u, v).
std::vector<GraphEdge> filter_edges(std::vector<GraphEdge> candidates, std::size_t max_degree, double threshold);

/// Pairwise combined similarity, threshold filter, then the mutual
/// max-degree rule: each node ranks its surviving edges by (value desc,
/// pair id asc) and keeps the first max_degree; an edge stays only when
/// both endpoints keep it.
ManuscriptGraph build_graph(const Corpus& corpus, const GraphParams& params);

struct SelectionSummary {
    std::vector<std::pair<std::string, std::size_t>> image_counts;  // by manuscript id
    std::map<int, std::size_t> decades;  // decade start -> manuscripts whose range touches it
    std::vector<std::pair<std::string, std::size_t>> label_frequencies;  // descending
};

/// Throws EmptySelection / DanglingReference for unknown ids.
SelectionSummary selection_summary(const std::set<std::string>& manuscript_ids, const Corpus& corpus);

nlohmann::json to_json(const ManuscriptGraph& graph);
nlohmann::json to_json(const SelectionSummary& summary);
std::string to_graphml(const ManuscriptGraph& graph);

}  // namespace illumine
