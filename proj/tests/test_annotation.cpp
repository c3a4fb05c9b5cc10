#include "illumine/annotation.hpp"
#include "illumine/error.hpp"
#include "builders.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace illumine;
using testing::CorpusBuilder;

namespace {

Clock counter() {
    auto t = std::make_shared<std::int64_t>(1000);
    return [t] { return (*t)++; };
}

Corpus david_corpus() {
    CorpusBuilder b;
    b.label("l-david", "David").label("l-abishag", "Abishag").label("l-lit", "lit").label("l-sick", "malade");
    b.label("l-epee", "épée").label("l-rinceau", "rinceau").label("l-sommeil", "sommeil");
    b.label("l-oiseau", "oiseau", LabelOrigin::B).label("l-cigogne", "cigogne", LabelOrigin::B);
    b.word("david", {1, 0, 0}).word("lit", {0, 1, 0}).word("pupitre", {0, 0, 1}).word("epee", {1, 1, 0});
    b.manuscript("m1", Dataset::A).manuscript("m2", Dataset::B);
    b.image("img-1", "m1", {"l-david", "l-abishag"}).image("img-2", "m1", {});
    b.image("img-3", "m2", {"l-oiseau"}).image("img-4", "m2", {"l-cigogne", "l-oiseau"});
    return b.build();
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::Io;
}

}  // namespace

TEST_CASE("set_label") {
    AnnotationStore s(david_corpus(), {}, counter());
    const auto e = s.set_label("img-1", "l-lit", true, "ana");
    CHECK(e.seq == 1);
    CHECK(e.user == "ana");
    CHECK(e.change == Change{AddLabel{"img-1", "l-lit"}});
    CHECK(s.corpus().image("img-1").label_ids.contains("l-lit"));
    CHECK(s.history().size() == 1);
    CHECK(s.cooccurrence().count("l-lit", "l-david") == 1);

    const Corpus before = s.corpus();
    s.set_label("img-2", "l-sick", true, "bo");
    s.set_label("img-2", "l-sick", false, "bo");
    CHECK(s.corpus().same_data(before));
    CHECK(s.history().size() == 3);
    CHECK(s.cooccurrence().same_counts(build_cooccurrence(s.corpus())));

    CHECK(code_of([&] { s.set_label("img-1", "l-lit", true, "ana"); }) == ErrorCode::NoOpChange);
    CHECK(code_of([&] { s.set_label("img-2", "l-lit", false, "ana"); }) == ErrorCode::NoOpChange);
    CHECK(code_of([&] { s.set_label("ghost", "l-lit", true, "ana"); }) == ErrorCode::UnknownImage);
    CHECK(code_of([&] { s.set_label("img-2", "ghost", true, "ana"); }) == ErrorCode::UnknownLabel);
    CHECK(code_of([&] { s.set_label("img-2", "l-lit", true, ""); }) == ErrorCode::InvalidArgument);
    CHECK(s.history().size() == 3);
    CHECK(s.since(1).size() == 2);
    CHECK(s.since(3).empty());
}

TEST_CASE("create_label") {
    AnnotationStore s(david_corpus(), {}, counter());
    const auto [term, entry] = s.create_label("Pupitre", "ana");
    CHECK(term.normalized == "pupitre");
    CHECK(term.dataset_origin == LabelOrigin::added);
    CHECK(s.corpus().find_label(term.id) != nullptr);
    CHECK(s.corpus().spaces.label->contains(term.id));
    CHECK(std::get<CreateLabel>(entry.change).id == term.id);

    try {
        s.create_label("epee", "ana");
        FAIL("expected DuplicateLabel");
    } catch (const DuplicateLabelError& e) {
        CHECK(e.existing_id() == "l-epee");
    }
    CHECK(code_of([&] { s.create_label("!!!", "ana"); }) == ErrorCode::EmptyTerm);
    CHECK(s.history().size() == 1);

    const auto [oov, oov_entry] = s.create_label("licorne", "ana");
    CHECK_FALSE(s.corpus().spaces.label->contains(oov.id));
    CHECK(oov.id != term.id);
}

TEST_CASE("categorize_label") {
    AnnotationStore s(david_corpus(), {}, counter());
    s.categorize_label("l-epee", LabelCategory::descriptive, "ana");
    s.categorize_label("l-rinceau", LabelCategory::decorative, "ana");
    s.categorize_label("l-sommeil", LabelCategory::interpretive, "ana");
    CHECK(s.corpus().label("l-epee").category == LabelCategory::descriptive);
    CHECK(s.corpus().label("l-rinceau").category == LabelCategory::decorative);
    CHECK(s.corpus().label("l-sommeil").category == LabelCategory::interpretive);
    s.categorize_label("l-epee", LabelCategory::interpretive, "bo");
    CHECK(s.corpus().label("l-epee").category == LabelCategory::interpretive);
    s.categorize_label("l-epee", std::nullopt, "bo");
    CHECK_FALSE(s.corpus().label("l-epee").category.has_value());
    CHECK(code_of([&] { s.categorize_label("ghost", LabelCategory::decorative, "bo"); }) == ErrorCode::UnknownLabel);
}

TEST_CASE("hierarchy mutations through the store") {
    AnnotationStore s(david_corpus(), {}, counter());
    s.mutate_hierarchy(AddNode{"l-oiseau", false}, "ana");
    s.mutate_hierarchy(AddNode{"l-cigogne", false}, "ana");
    s.mutate_hierarchy(AddEdge{"l-oiseau", "l-cigogne"}, "ana");
    CHECK(s.hierarchy().has_edge("l-oiseau", "l-cigogne"));
    CHECK(s.hierarchy().edges().at({"l-oiseau", "l-cigogne"}).user == "ana");
    CHECK(code_of([&] { s.mutate_hierarchy(AddNode{"ghost", false}, "ana"); }) == ErrorCode::UnknownLabel);
    const auto [t, e] = s.create_label("pupitre", "ana");
    s.mutate_hierarchy(AddNode{t.id, false}, "ana");
    CHECK(s.hierarchy().nodes().at(t.id));
}

TEST_CASE("apply_batch is all or nothing") {
    AnnotationStore s(david_corpus(), {}, counter());
    const Corpus before = s.corpus();
    CHECK_THROWS_AS(s.apply_batch({{AddLabel{"img-2", "l-lit"}, "ana"}, {AddLabel{"img-2", "ghost"}, "ana"}}), Error);
    CHECK(s.corpus().same_data(before));
    CHECK(s.history().empty());
    const auto entries = s.apply_batch({{AddLabel{"img-2", "l-lit"}, "ana"}, {AddLabel{"img-2", "l-sick"}, "bo"}});
    CHECK(entries.size() == 2);
    CHECK(entries[1].seq == 2);
    CHECK(s.cooccurrence().count("l-lit", "l-sick") == 1);
}

TEST_CASE("history json round trip") {
    const std::vector<Change> changes{AddLabel{"i", "l"}, RemoveLabel{"i", "l"}, CreateLabel{"Pupitre", "n-l0001"},
                                      Categorize{"l", LabelCategory::decorative}, Categorize{"l", std::nullopt},
                                      HierarchyMutation{AddEdge{"p", "c"}}};
    std::uint64_t seq = 1;
    for (const auto& c : changes) {
        const HistoryEntry e{seq++, 42, "ana", c};
        CHECK(history_entry_from_json(to_json(e)) == e);
    }
    CHECK_THROWS_AS(change_from_json({{"type", "Teleport"}}), Error);
}

TEST_CASE("replay") {
    const Corpus base = david_corpus();
    SUBCASE("empty log is the base state") {
        const auto s = replay(base, {}, {}, counter());
        CHECK(s.corpus().same_data(base));
        CHECK(s.history().empty());
    }
    SUBCASE("recorded session") {
        AnnotationStore live(base, {}, counter());
        live.set_label("img-2", "l-lit", true, "ana");
        live.create_label("Pupitre", "bo");
        live.categorize_label("l-epee", LabelCategory::descriptive, "ana");
        live.mutate_hierarchy(AddNode{"l-oiseau", false}, "ana");
        live.mutate_hierarchy(AddNode{"l-cigogne", false}, "ana");
        live.mutate_hierarchy(AddEdge{"l-oiseau", "l-cigogne"}, "ana");
        live.set_label("img-1", "l-david", false, "bo");
        const auto again = replay(base, {}, live.history(), counter());
        CHECK(again.same_state(live));
        CHECK(again.corpus().spaces.label->data().size() == live.corpus().spaces.label->data().size());
    }
    SUBCASE("gap in seq") {
        std::vector<HistoryEntry> log{{1, 0, "ana", AddLabel{"img-2", "l-lit"}}, {3, 0, "ana", AddLabel{"img-2", "l-sick"}}};
        try {
            replay(base, {}, log, counter());
            FAIL("expected CorruptLog");
        } catch (const CorruptLogError& e) {
            CHECK(e.first_bad_seq() == 2);
        }
    }
    SUBCASE("entry that does not apply") {
        std::vector<HistoryEntry> log{{1, 0, "ana", AddLabel{"img-1", "l-david"}}};
        CHECK(code_of([&] { replay(base, {}, log, counter()); }) == ErrorCode::CorruptLog);
    }
}

TEST_CASE("history log file") {
    const auto dir = testing::temp_dir("history");
    const auto path = dir / "history.ndjson";
    const Corpus base = david_corpus();
    {
        AnnotationStore s(base, {}, counter());
        s.attach_log(path);
        s.set_label("img-2", "l-lit", true, "ana");
        s.apply_batch({{AddLabel{"img-2", "l-sick"}, "bo"}, {RemoveLabel{"img-1", "l-david"}, "bo"}});
        const auto read = read_history(path);
        CHECK(read == s.history());
        CHECK(replay(base, {}, read, counter()).same_state(s));
    }
    CHECK(read_history(dir / "missing.ndjson").empty());
    {
        std::ofstream out(path, std::ios::app);
        out << "{not json\n";
    }
    try {
        read_history(path);
        FAIL("expected CorruptLog");
    } catch (const CorruptLogError& e) {
        CHECK(e.first_bad_seq() == 4);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("export_assignments") {
    const auto dir = testing::temp_dir("export");
    AnnotationStore s(david_corpus(), {}, counter());
    s.set_label("img-2", "l-lit", true, "ana");
    export_assignments(s, dir / "images.jsonl");
    std::ifstream in(dir / "images.jsonl");
    std::string line;
    std::size_t lines = 0;
    bool found = false;
    while (std::getline(in, line)) {
        ++lines;
        const auto j = nlohmann::json::parse(line);
        if (j.at("id") == "img-2") found = j.dump().find("l-lit") != std::string::npos;
    }
    CHECK(lines == 4);
    CHECK(found);
    std::filesystem::remove_all(dir);
}
