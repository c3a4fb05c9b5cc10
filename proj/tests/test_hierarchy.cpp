#include "illumine/error.hpp"
#include "illumine/hierarchy.hpp"
#include "illumine/rng.hpp"
#include "builders.hpp"

#include <doctest.h>

using namespace illumine;
using testing::CorpusBuilder;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::Io;
}

LabelHierarchy with_nodes(std::initializer_list<const char*> ids) {
    LabelHierarchy h;
    for (const char* id : ids) h.add_node(id, false);
    return h;
}

bool acyclic(const std::set<std::string>& nodes, const std::vector<EdgeKey>& edges) {
    std::map<std::string, int> indeg;
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& n : nodes) indeg[n] = 0;
    for (const auto& [p, c] : edges) {
        ++indeg[c];
        out[p].push_back(c);
    }
    std::vector<std::string> ready;
    for (const auto& [n, d] : indeg)
        if (d == 0) ready.push_back(n);
    std::size_t seen = 0;
    while (!ready.empty()) {
        const auto n = ready.back();
        ready.pop_back();
        ++seen;
        for (const auto& c : out[n])
            if (--indeg[c] == 0) ready.push_back(c);
    }
    return seen == nodes.size();
}

}  // namespace

TEST_CASE("mutate") {
    LabelHierarchy h = with_nodes({"oiseau", "cigogne", "a"});
    const auto v0 = h.version();
    const auto v1 = mutate(h, AddEdge{"oiseau", "cigogne"}, "ana", 10);
    CHECK(v1 == v0 + 1);
    REQUIRE(h.has_edge("oiseau", "cigogne"));
    CHECK(h.edges().at({"oiseau", "cigogne"}).user == "ana");
    CHECK(h.edges().at({"oiseau", "cigogne"}).created_at == 10);

    CHECK(code_of([&] { mutate(h, AddEdge{"a", "a"}, "ana", 11); }) == ErrorCode::SelfLoop);
    CHECK(code_of([&] { mutate(h, AddEdge{"oiseau", "cigogne"}, "bo", 11); }) == ErrorCode::DuplicateEdge);
    CHECK(code_of([&] { mutate(h, AddEdge{"oiseau", "ghost"}, "bo", 11); }) == ErrorCode::UnknownNode);
    CHECK(code_of([&] { mutate(h, RemoveEdge{"a", "oiseau"}, "bo", 11); }) == ErrorCode::UnknownEdge);
    CHECK(code_of([&] { mutate(h, AddNode{"a", false}, "bo", 11); }) == ErrorCode::NoOpChange);
    CHECK(code_of([&] { mutate(h, AddNode{"b", false}, "", 11); }) == ErrorCode::InvalidArgument);
    CHECK(h.version() == v1);

    mutate(h, RemoveEdge{"oiseau", "cigogne"}, "bo", 12);
    mutate(h, AddEdge{"oiseau", "cigogne"}, "bo", 13);
    CHECK(h.edges().size() == 1);
    CHECK(h.edges().at({"oiseau", "cigogne"}).user == "bo");
    CHECK(h.edges().at({"oiseau", "cigogne"}).created_at == 13);
}

TEST_CASE("hierarchy change json round trip") {
    for (const HierarchyChange& c : {HierarchyChange{AddNode{"x", true}}, HierarchyChange{AddEdge{"p", "c"}},
                                     HierarchyChange{RemoveEdge{"p", "c"}}})
        CHECK(hierarchy_change_from_json(to_json(c)) == c);
    CHECK_THROWS_AS(hierarchy_change_from_json({{"op", "Rename"}}), Error);
}

TEST_CASE("export and import") {
    LabelHierarchy h = with_nodes({"p", "q"});
    h.add_node("new", true);
    h.add_edge("p", "q", "ana", 1);
    h.add_edge("q", "new", "bo", 2);
    const auto j = export_hierarchy(h);
    const LabelHierarchy back = import_hierarchy(j);
    CHECK(back.nodes() == h.nodes());
    CHECK(back.edges() == h.edges());
    CHECK(export_hierarchy(back) == j);
}

TEST_CASE("detect_cycles") {
    SUBCASE("three-cycle") {
        LabelHierarchy h = with_nodes({"A", "B", "C"});
        h.add_edge("A", "B", "u", 0);
        h.add_edge("B", "C", "u", 0);
        h.add_edge("C", "A", "u", 0);
        const auto s = detect_cycles(h);
        CHECK(s.back_edges == std::vector<EdgeKey>{{"C", "A"}});
        CHECK(s.acyclic.size() == 2);
    }
    SUBCASE("dag") {
        LabelHierarchy h = with_nodes({"a", "b", "c", "d"});
        h.add_edge("a", "b", "u", 0);
        h.add_edge("a", "c", "u", 0);
        h.add_edge("b", "d", "u", 0);
        h.add_edge("c", "d", "u", 0);
        CHECK(detect_cycles(h).back_edges.empty());
    }
    SUBCASE("two disjoint two-cycles") {
        LabelHierarchy h = with_nodes({"a", "b", "c", "d"});
        h.add_edge("a", "b", "u", 0);
        h.add_edge("b", "a", "u", 0);
        h.add_edge("c", "d", "u", 0);
        h.add_edge("d", "c", "u", 0);
        const auto s = detect_cycles(h);
        CHECK(s.back_edges.size() == 2);
        CHECK(acyclic({"a", "b", "c", "d"}, s.acyclic));
    }
    SUBCASE("random graphs split into a dag") {
        Rng rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            LabelHierarchy h;
            const int n = 2 + static_cast<int>(rng.below(9));
            std::set<std::string> ids;
            for (int i = 0; i < n; ++i) {
                ids.insert("v" + std::to_string(i));
                h.add_node("v" + std::to_string(i), false);
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j && rng.uniform() < 0.25) h.add_edge("v" + std::to_string(i), "v" + std::to_string(j), "u", 0);
            const auto s = detect_cycles(h);
            CHECK(s.acyclic.size() + s.back_edges.size() == h.edges().size());
            CHECK(acyclic(ids, s.acyclic));
            // re-adding any back edge alone closes a cycle
            for (const auto& b : s.back_edges) {
                auto with = s.acyclic;
                with.push_back(b);
                CHECK_FALSE(acyclic(ids, with));
            }
        }
    }
}

TEST_CASE("visible_subgraph") {
    CorpusBuilder b;
    b.label("oiseau", "oiseau").label("cigogne", "cigogne").label("animal", "animal").label("other", "autre");
    b.label("aigle", "aigle").manuscript("m", Dataset::A);
    b.image("i1", "m", {"cigogne"}).image("i2", "m", {"oiseau", "other"}).image("i3", "m", {});
    const Corpus c = b.build();

    LabelHierarchy h = with_nodes({"animal", "oiseau", "cigogne", "aigle"});
    h.add_edge("oiseau", "cigogne", "u", 0);

    auto v = visible_subgraph(h, {"i1"}, c);
    CHECK(v.nodes == std::set<std::string>{"cigogne", "oiseau"});
    CHECK(v.edges.size() == 1);

    CHECK(visible_subgraph(h, {}, c).nodes.empty());
    CHECK(visible_subgraph(h, {"i3"}, c).nodes.empty());

    h.add_edge("animal", "oiseau", "u", 0);
    h.add_edge("oiseau", "aigle", "u", 0);
    v = visible_subgraph(h, {"i2"}, c);
    CHECK(v.nodes == std::set<std::string>{"aigle", "animal", "cigogne", "oiseau"});
    CHECK(v.edges.size() == 3);

    v = visible_subgraph(h, {"i1"}, c);
    CHECK(v.nodes == std::set<std::string>{"animal", "cigogne", "oiseau"});
    CHECK(v.edges.size() == 2);

    CHECK_THROWS_AS(visible_subgraph(h, {"nope"}, c), Error);
}
