#include "illumine/error.hpp"
#include "illumine/fixture.hpp"
#include "illumine/sugiyama.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace illumine;

namespace {

LabelHierarchy make(std::initializer_list<const char*> nodes, std::initializer_list<std::pair<const char*, const char*>> edges) {
    LabelHierarchy h;
    for (const char* n : nodes) h.add_node(n, false);
    for (const auto& [p, c] : edges) h.add_edge(p, c, "u", 0);
    return h;
}

}  // namespace

TEST_CASE("assign_layers small cases") {
    CHECK(assign_layers(3, {{0, 1}, {1, 2}}) == std::vector<int>{0, 1, 2});
    CHECK(assign_layers(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}) == std::vector<int>{0, 1, 1, 2});
    CHECK(assign_layers(0, {}).empty());
    CHECK(assign_layers(2, {}) == std::vector<int>{0, 0});
    // a short edge is preferred over two tight ones
    const auto l = assign_layers(4, {{0, 1}, {1, 2}, {0, 3}, {3, 2}, {0, 2}});
    CHECK(layering_cost(l, {{0, 1}, {1, 2}, {0, 3}, {3, 2}, {0, 2}}) == 6);
    CHECK_THROWS_AS(assign_layers(2, {{0, 1}, {1, 0}}), Error);
}

TEST_CASE("assign_layers is optimal on random dags") {
    Rng rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng.below(8));
        const auto edges = testing::random_dag(rng, n, 0.2 + 0.5 * rng.uniform());
        const auto layers = assign_layers(n, edges);
        for (const auto& e : edges) CHECK(layers[e.head] - layers[e.tail] >= 1);
        CHECK(layering_cost(layers, edges) == testing::exhaustive_min_layering(n, edges));
    }
}

TEST_CASE("order_layers") {
    SUBCASE("single crossing is removed") {
        const auto h = make({"a1", "a2", "b1", "b2"}, {{"a1", "b2"}, {"a2", "b1"}});
        const auto cs = detect_cycles(h);
        std::vector<std::string> ids{"a1", "a2", "b1", "b2"};
        const auto g = insert_dummies(ids, {0, 0, 1, 1}, cs.acyclic);
        CHECK(count_crossings(g, g.order) == 1);
        const auto o = order_layers(g, g.order);
        CHECK(count_crossings(g, o) == 0);
        CHECK(testing::quadratic_crossings(g, o) == 0);
    }
    SUBCASE("edgeless graph keeps its order") {
        const auto g = insert_dummies({"x", "y", "z"}, {0, 0, 0}, {});
        CHECK(order_layers(g, g.order) == g.order);
    }
    SUBCASE("one node per layer keeps its order") {
        const auto g = insert_dummies({"x", "y", "z"}, {0, 1, 2}, {{"x", "y"}, {"y", "z"}});
        CHECK(order_layers(g, g.order) == g.order);
    }
    SUBCASE("never increases crossings; fast count matches pairwise count") {
        Rng rng(23);
        for (int t = 0; t < 200; ++t) {
            const auto g = testing::random_layered(rng, 2 + static_cast<int>(rng.below(4)), 6, 0.35);
            const auto before = count_crossings(g, g.order);
            CHECK(before == testing::quadratic_crossings(g, g.order));
            const auto o = order_layers(g, g.order);
            CHECK(count_crossings(g, o) <= before);
            CHECK(count_crossings(g, o) == testing::quadratic_crossings(g, o));
        }
    }
}

TEST_CASE("insert_dummies") {
    const auto g = insert_dummies({"a", "b", "c"}, {0, 1, 3}, {{"a", "b"}, {"a", "c"}});
    CHECK(g.ids.size() == 5);
    REQUIRE(g.chains.size() == 1);
    CHECK(g.chains[0].size() == 4);
    CHECK(g.segments.size() == 4);
    for (const auto& [u, v] : g.segments) CHECK(g.layer[v] == g.layer[u] + 1);
    CHECK_THROWS_AS(insert_dummies({"a", "b"}, {1, 0}, {{"a", "b"}}), Error);
}

TEST_CASE("assign_coordinates") {
    const CoordinateParams p;
    SUBCASE("chain is vertical") {
        const auto g = insert_dummies({"a", "b", "c"}, {0, 1, 2}, {{"a", "b"}, {"b", "c"}});
        const auto x = assign_coordinates(g, g.order, p);
        CHECK(x[0] == doctest::Approx(x[1]));
        CHECK(x[1] == doctest::Approx(x[2]));
    }
    SUBCASE("disconnected singletons keep the gap") {
        const auto g = insert_dummies({"a", "b"}, {0, 0}, {});
        const auto x = assign_coordinates(g, g.order, p);
        CHECK(std::abs(x[1] - x[0]) >= p.min_gap - 1e-12);
    }
    SUBCASE("objective matches its definition and never rises") {
        Rng rng(29);
        for (int t = 0; t < 100; ++t) {
            const auto g = testing::random_layered(rng, 2 + static_cast<int>(rng.below(4)), 5, 0.3);
            std::vector<double> x0(g.ids.size());
            for (const auto& layer : g.order)
                for (std::size_t i = 0; i < layer.size(); ++i) x0[layer[i]] = static_cast<double>(i) * p.min_gap;
            const double q0 = coordinate_objective(g, g.order, x0, p);
            CHECK(q0 == doctest::Approx(testing::reference_objective(g, g.order, x0, p)));
            const auto x = assign_coordinates(g, g.order, p);
            CHECK(coordinate_objective(g, g.order, x, p) <= q0 + 1e-12);
            for (const auto& layer : g.order)
                for (std::size_t i = 1; i < layer.size(); ++i) CHECK(x[layer[i]] - x[layer[i - 1]] >= p.min_gap - 1e-9);
        }
    }
    SUBCASE("staggered chains straighten") {
        Rng rng(31);
        for (int t = 0; t < 40; ++t) {
            const auto g = testing::staggered_chains(rng, 2 + static_cast<int>(rng.below(4)), 3 + static_cast<int>(rng.below(4)));
            const auto x = assign_coordinates(g, g.order, p);
            CHECK(coordinate_objective(g, g.order, x, p) < 1e-6);
        }
    }
}

TEST_CASE("layout") {
    SUBCASE("birds subtree") {
        const auto h = make({"oiseaux", "cigogne", "aigle", "colombe", "corbeau"},
                            {{"oiseaux", "cigogne"}, {"oiseaux", "aigle"}, {"oiseaux", "colombe"}, {"oiseaux", "corbeau"}});
        const auto r = layout(h);
        CHECK(r.layers.at("oiseaux") == 0);
        for (const char* c : {"cigogne", "aigle", "colombe", "corbeau"}) {
            CHECK(r.layers.at(c) == 1);
            CHECK(r.coords.at(c)[1] > r.coords.at("oiseaux")[1]);
        }
        CHECK(r.order.size() == 2);
        CHECK(r.crossings == 0);
    }
    SUBCASE("empty") {
        const auto r = layout(LabelHierarchy{});
        CHECK(r.layers.empty());
        CHECK(r.order.empty());
        CHECK(r.edges.empty());
    }
    SUBCASE("one big cycle") {
        LabelHierarchy h;
        for (int i = 0; i < 6; ++i) h.add_node("n" + std::to_string(i), false);
        for (int i = 0; i < 6; ++i) h.add_edge("n" + std::to_string(i), "n" + std::to_string((i + 1) % 6), "u", 0);
        const auto r = layout(h);
        CHECK(r.back_edges == std::vector<EdgeKey>{{"n5", "n0"}});
        REQUIRE(r.edges.size() == 6);
        for (const auto& e : r.edges) {
            CHECK(e.back == (e.edge.parent == "n5"));
            CHECK(e.points.size() >= 2);
        }
        for (int i = 0; i < 6; ++i) CHECK(r.layers.at("n" + std::to_string(i)) == i);
    }
    SUBCASE("long edges get dummy chains") {
        const auto h = make({"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"a", "d"}});
        const auto r = layout(h);
        REQUIRE(r.dummy_chains.size() == 1);
        CHECK(r.dummy_chains.at({"a", "d"}).size() == 2);
        for (const auto& e : r.edges)
            if (e.edge.parent == "a" && e.edge.child == "d") CHECK(e.points.size() == 4);
        CHECK(r.objective <= r.objective_initial);
        CHECK(r.crossings <= r.crossings_initial);
    }
}

TEST_CASE("layout of a large fixture hierarchy") {
    const auto dir = testing::temp_dir("layout_fixture");
    FixtureParams fp;
    fp.n_labels = 1100;
    fp.n_images = 300;
    fp.hierarchy_terms = 842;
    const auto summary = generate_fixture(fp, dir.string());
    CHECK(summary.hierarchy_nodes == 842);
    std::ifstream in(dir / "hierarchy.json");
    const auto h = import_hierarchy(nlohmann::json::parse(in));
    const auto r = layout(h);
    CHECK(r.coords.size() == 842);
    for (const auto& e : r.edges) {
        if (e.back) continue;
        CHECK(r.layers.at(e.edge.child) > r.layers.at(e.edge.parent));
    }
    for (const auto& layer : r.order) {
        const double y = r.coords.count(layer.front()) ? r.coords.at(layer.front())[1] : 0.0;
        for (const auto& id : layer)
            if (r.coords.count(id)) CHECK(r.coords.at(id)[1] == y);
    }
    CHECK(r.crossings <= r.crossings_initial);
    CHECK(r.objective <= r.objective_initial + 1e-9);
    std::filesystem::remove_all(dir);
}
