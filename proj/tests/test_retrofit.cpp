#include "illumine/error.hpp"
#include "illumine/retrofit.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace illumine;

namespace {

VectorSpace space_of(std::initializer_list<std::pair<const char*, std::vector<double>>> rows) {
    VectorSpace s("label", rows.begin()->second.size());
    for (const auto& [k, v] : rows) s.add(k, v);
    return s;
}

LabelHierarchy random_hierarchy(Rng& rng, const VectorSpace& s, double p) {
    LabelHierarchy h;
    for (const auto& k : s.keys()) h.add_node(k, false);
    const auto& keys = s.keys();
    for (std::size_t i = 0; i < keys.size(); ++i)
        for (std::size_t j = 0; j < keys.size(); ++j)
            if (i != j && rng.uniform() < p && !h.has_edge(keys[j], keys[i])) h.add_edge(keys[i], keys[j], "u", 0);
    return h;
}

}  // namespace

TEST_CASE("retrofit two connected nodes, one sweep") {
    const auto orig = space_of({{"q1", {1, 0}}, {"q2", {0, 1}}});
    LabelHierarchy h;
    h.add_node("q1", false);
    h.add_node("q2", false);
    h.add_edge("q1", "q2", "u", 0);
    const auto r = retrofit(orig, h, {1.0, 1.0, 1, true});
    CHECK(r.space.vector("q1")[0] == doctest::Approx(0.5));
    CHECK(r.space.vector("q1")[1] == doctest::Approx(0.5));
    CHECK(r.space.vector("q2")[0] == doctest::Approx(0.25));
    CHECK(r.space.vector("q2")[1] == doctest::Approx(0.75));
    CHECK(r.displacements.size() == 1);
    CHECK(orig.vector("q1")[0] == 1.0);
    CHECK(r.space.name() == "label.retro.v" + std::to_string(h.version()));
}

TEST_CASE("retrofit edge cases") {
    const auto orig = space_of({{"a", {1, 2}}, {"b", {3, 4}}, {"iso", {5, 6}}});
    LabelHierarchy h;
    for (const char* k : {"a", "b", "iso", "ghost"}) h.add_node(k, false);
    h.add_edge("a", "b", "u", 0);
    h.add_edge("b", "ghost", "u", 0);

    const auto r = retrofit(orig, h);
    CHECK(std::equal(r.space.vector("iso").begin(), r.space.vector("iso").end(), orig.vector("iso").begin()));
    CHECK(r.skipped == std::vector<std::string>{"ghost"});
    CHECK(r.space.size() == orig.size());

    const auto zero = retrofit(orig, h, {1.0, 0.0, 10, true});
    CHECK(zero.space.data().size() == orig.data().size());
    CHECK(std::equal(zero.space.data().begin(), zero.space.data().end(), orig.data().begin()));
    for (double d : zero.displacements) CHECK(d == 0.0);

    const auto empty = retrofit(orig, LabelHierarchy{});
    CHECK(std::equal(empty.space.data().begin(), empty.space.data().end(), orig.data().begin()));

    CHECK_THROWS_AS(retrofit(orig, h, {0.0, std::nullopt, 10, true}), Error);
    CHECK_THROWS_AS(retrofit(orig, h, {1.0, -1.0, 10, true}), Error);
    CHECK_THROWS_AS(retrofit(orig, h, {1.0, std::nullopt, 0, true}), Error);
}

TEST_CASE("directed retrofit pulls towards parents only") {
    const auto orig = space_of({{"p", {0, 0}}, {"c", {2, 0}}});
    LabelHierarchy h;
    h.add_node("p", false);
    h.add_node("c", false);
    h.add_edge("p", "c", "u", 0);
    const auto r = retrofit(orig, h, {1.0, 1.0, 3, false});
    CHECK(r.space.vector("p")[0] == 0.0);
    CHECK(r.space.vector("c")[0] == doctest::Approx(1.0));
}

TEST_CASE("retrofit back edges are ignored") {
    const auto orig = space_of({{"a", {0.0}}, {"b", {1.0}}, {"c", {4.0}}});
    LabelHierarchy cyc, dag;
    for (auto* h : {&cyc, &dag})
        for (const char* k : {"a", "b", "c"}) h->add_node(k, false);
    for (auto* h : {&cyc, &dag}) {
        h->add_edge("a", "b", "u", 0);
        h->add_edge("b", "c", "u", 0);
    }
    cyc.add_edge("c", "a", "u", 0);
    const auto r1 = retrofit(orig, cyc).space;
    const auto r2 = retrofit(orig, dag).space;
    CHECK(std::equal(r1.data().begin(), r1.data().end(), r2.data().begin()));
}

TEST_CASE("retrofit convergence") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.below(60);
        auto orig = testing::random_space(rng, n, 16, "label");
        const auto h = random_hierarchy(rng, orig, 3.0 / static_cast<double>(n));
        const auto iterates = retrofit_iterates(orig, h);
        REQUIRE(iterates.size() == 10);
        const auto report = convergence_report(orig, iterates);
        REQUIRE(report.size() == 10);
        CHECK(report.back() < 1e-2);
        const auto r = retrofit(orig, h);
        CHECK(r.displacements == report);
        CHECK(r.space.data().size() == iterates.back().data().size());
        CHECK(std::equal(r.space.data().begin(), r.space.data().end(), iterates.back().data().begin()));
        const auto one = retrofit(orig, h, {1.0, std::nullopt, 1, true}).space;
        for (const auto& [key, e] : h.edges()) {
            const double before = euclidean_distance(orig.vector(key.first), orig.vector(key.second));
            CHECK(euclidean_distance(one.vector(key.first), one.vector(key.second)) < before);
        }
    }
    CHECK(convergence_report(space_of({{"a", {1.0}}}), {space_of({{"a", {1.5}}})}) == std::vector<double>{0.5});
    CHECK_THROWS_AS(convergence_report(space_of({{"a", {1.0}}}), {}), Error);
}

TEST_CASE("retrofitting the fixed point changes nothing") {
    const auto orig = space_of({{"a", {1, 1}}, {"b", {1, 1}}, {"c", {1, 1}}});
    LabelHierarchy h;
    for (const char* k : {"a", "b", "c"}) h.add_node(k, false);
    h.add_edge("a", "b", "u", 0);
    h.add_edge("a", "c", "u", 0);
    const auto r = retrofit(orig, h);
    CHECK(std::equal(r.space.data().begin(), r.space.data().end(), orig.data().begin()));
}
