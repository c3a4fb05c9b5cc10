#include "illumine/error.hpp"
#include "illumine/http.hpp"
#include "illumine/service.hpp"
#include "builders.hpp"
#include "support.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

using namespace illumine;
using namespace std::chrono_literals;
using nlohmann::json;
using testing::CorpusBuilder;

namespace {

Corpus service_corpus() {
    CorpusBuilder b;
    b.label("l-david", "David").label("l-lit", "lit").label("l-harpe", "harpe").label("l-roi", "roi");
    b.label("l-oiseau", "oiseau", LabelOrigin::B).label("l-cigogne", "cigogne", LabelOrigin::B);
    b.word("david", {1, 0, 0}).word("lit", {0, 1, 0}).word("harpe", {0.9, 0.1, 0}).word("roi", {1, 0.2, 0});
    b.word("oiseau", {0, 0, 1}).word("cigogne", {0, 0.1, 1});
    b.manuscript("m1", Dataset::A, YearRange{1240, 1260}).manuscript("m2", Dataset::B, YearRange{1250, 1270});
    Rng rng(3);
    for (int i = 0; i < 12; ++i) {
        std::set<std::string> labels;
        if (i % 2 == 0) labels = {"l-david", "l-harpe"};
        if (i % 3 == 0) labels.insert("l-roi");
        if (i >= 8) labels = {"l-oiseau"};
        b.image("img-" + std::to_string(i), i < 6 ? "m1" : "m2", labels,
                std::vector<double>{rng.normal(), rng.normal(), rng.normal()});
    }
    return b.build();
}

EngineOptions fast(std::optional<std::filesystem::path> dir = std::nullopt) {
    EngineOptions o;
    o.data_dir = std::move(dir);
    o.debounce = 150ms;
    return o;
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

std::size_t count_kind(const std::vector<JobDescriptor>& jobs, JobKind k) {
    return static_cast<std::size_t>(std::count_if(jobs.begin(), jobs.end(), [&](auto& j) { return j.kind == k; }));
}

}  // namespace

TEST_CASE("job scheduler") {
    JobScheduler s(2);
    const auto ok = s.submit(JobKind::graph_similarity, 1, [] { return std::uint64_t{7}; });
    const auto bad = s.submit(JobKind::projection, 1, []() -> std::uint64_t { throw Error(ErrorCode::NoVector, "x"); });
    std::atomic<int> runs{0}, last{0};
    std::uint64_t keyed = 0;
    for (int i = 1; i <= 10; ++i) {
        const auto id = s.schedule("k", JobKind::projection, i, 100ms, [&, i] {
            ++runs;
            last = i;
            return std::uint64_t{0};
        });
        if (keyed) CHECK(id == keyed);
        keyed = id;
    }
    CHECK(s.get(keyed).state == JobState::queued);
    s.wait_idle();
    CHECK(s.get(ok).state == JobState::done);
    CHECK(s.get(ok).snapshot_id == 7);
    CHECK(s.get(bad).state == JobState::failed);
    CHECK(s.get(bad).error.find("NoVector") != std::string::npos);
    CHECK(runs == 1);
    CHECK(last == 10);
    CHECK(s.get(keyed).input_version == 10);
    CHECK(s.list().size() == 3);
    CHECK(code_of([&] { s.get(999); }) == ErrorCode::UnknownJob);

    // after the keyed job ran, the key starts a fresh job
    const auto again = s.schedule("k", JobKind::projection, 11, 0ms, [] { return std::uint64_t{1}; });
    CHECK(again != keyed);
    s.shutdown();
}

TEST_CASE("http status mapping") {
    CHECK(http_status(ErrorCode::UnknownEdge) == 404);
    CHECK(http_status(ErrorCode::UnknownSnapshot) == 404);
    CHECK(http_status(ErrorCode::UnknownJob) == 404);
    CHECK(http_status(ErrorCode::DuplicateLabel) == 409);
    CHECK(http_status(ErrorCode::NoOpChange) == 409);
    CHECK(http_status(ErrorCode::DuplicateEdge) == 409);
    CHECK(http_status(ErrorCode::SelfLoop) == 400);
    CHECK(http_status(ErrorCode::EmptyTerm) == 400);
}

TEST_CASE("engine recompute scheduling") {
    Engine e(service_corpus(), {}, fast());
    e.scheduler().wait_idle();
    const auto v0 = e.cooccurrence().version();

    const auto r = e.set_label({{"image", "img-1"}, {"label", "l-lit"}, {"present", true}, {"user", "ana"}});
    CHECK(r["seq"] == 1);
    CHECK(e.cooccurrence().version() == v0 + 1);
    CHECK(count_kind(e.scheduler().list(), JobKind::projection) >= 1);

    for (int i = 0; i < 10; ++i)
        e.set_label({{"image", "img-" + std::to_string(i)}, {"label", "l-lit"}, {"present", i != 1}, {"user", "ana"}});
    e.scheduler().wait_idle();
    const auto jobs = e.scheduler().list();
    CHECK(count_kind(jobs, JobKind::projection) == 1);
    CHECK(count_kind(jobs, JobKind::graph_similarity) == 1);
    for (const auto& j : jobs) {
        CHECK(j.state == JobState::done);
        CHECK(j.input_version == 11);
        REQUIRE(j.snapshot_id);
    }

    const auto before = e.retro_space()->name();
    const auto edge = e.add_edge({{"parent", "l-oiseau"}, {"child", "l-cigogne"}, {"user", "ana"}});
    CHECK(edge["entries"].size() == 3);
    e.scheduler().wait_idle();
    const auto after = e.scheduler().list();
    REQUIRE(count_kind(after, JobKind::retrofit) == 1);
    const auto retro_job = *std::find_if(after.begin(), after.end(), [](auto& j) { return j.kind == JobKind::retrofit; });
    CHECK(retro_job.state == JobState::done);
    CHECK(e.retro_space()->name() != before);
    CHECK(e.retro_space()->name() == "label.retro.v" + std::to_string(e.label_hierarchy().version()));
    CHECK(e.snapshot_store().get(*retro_job.snapshot_id)->kind == "retro_space");
    CHECK(e.snapshots({{"kind", "retro_space"}})["snapshots"].size() >= 1);
}

TEST_CASE("engine endpoints") {
    Engine e(service_corpus(), {}, fast());
    const auto summary = e.corpus_summary();
    CHECK(summary["version"] == 0);

    const auto g = e.graph({{"metrics", "image,label"}, {"max_degree", "1"}, {"threshold", "0"}});
    CHECK(g["edges"].size() == 1);

    const auto sel = e.selection_summary({{"manuscript_ids", {"m1", "m2"}}});
    CHECK(sel.dump().find("1270") != std::string::npos);

    const auto job = e.create_projection({{"image_ids", {"img-0", "img-1", "img-2", "img-3", "img-4", "img-5"}},
                                          {"basis", {"image"}},
                                          {"seed", 3},
                                          {"user", "ana"}});
    e.scheduler().wait_idle();
    const auto jd = e.job(job["job_id"]);
    REQUIRE(jd["state"] == "done");
    const auto proj = e.projection(jd["snapshot_id"]);
    CHECK(proj["coords"].size() == 6);
    const auto sub = e.create_projection({{"image_ids", {"img-0", "img-1", "img-2"}}, {"basis", {"image"}},
                                          {"seed", 3}, {"parent", jd["snapshot_id"]}});
    e.scheduler().wait_idle();
    REQUIRE(e.job(sub["job_id"])["state"] == "done");
    CHECK(e.projection(e.job(sub["job_id"])["snapshot_id"])["coords"].size() == 3);
    const auto notsub = e.create_projection({{"image_ids", {"img-9"}}, {"basis", {"image"}}, {"parent", jd["snapshot_id"]}});
    e.scheduler().wait_idle();
    CHECK(e.job(notsub["job_id"])["state"] == "failed");

    CHECK(code_of([&] { e.create_projection({{"image_ids", {"ghost"}}, {"basis", {"image"}}}); }) == ErrorCode::UnknownImage);
    CHECK(code_of([&] { e.projection(9999); }) == ErrorCode::UnknownSnapshot);

    const auto created = e.create_label({{"surface", "Pupitre"}, {"user", "ana"}});
    CHECK(created["label"]["normalized"] == "pupitre");
    CHECK(code_of([&] { e.create_label({{"surface", "PUPITRE"}, {"user", "ana"}}); }) == ErrorCode::DuplicateLabel);
    e.categorize("l-lit", {{"category", "descriptive"}, {"user", "ana"}});
    CHECK(e.corpus().label("l-lit").category == LabelCategory::descriptive);

    const auto f = e.label_frequency("l-oiseau");
    CHECK(f["count_b"] == 4);
    CHECK(f["count_a"] == 0);

    const auto ws = e.word_space_recs({{"labels", {"l-david"}}, {"k", 2}});
    CHECK(ws["recs"].size() >= 1);
    const auto co = e.cooccurrence_recs({{"labels", {"l-david"}}, {"limit", 5}});
    CHECK(co["recs"][0]["label"] == "l-harpe");
    const auto nb = e.image_neighbor_recs({{"images", {"img-0"}}, {"k", 3}, {"limit", 5}});
    CHECK(nb["recs"].size() >= 1);

    e.add_edge({{"parent", "l-oiseau"}, {"child", "l-cigogne"}, {"user", "ana"}});
    CHECK(code_of([&] { e.remove_edge({{"parent", "l-oiseau"}, {"child", "l-lit"}, {"user", "ana"}}); }) ==
          ErrorCode::UnknownEdge);
    const auto lay = e.layout(json::object());
    CHECK(lay["nodes"].size() == 2);
    const auto vis = e.layout({{"images", "img-9"}});
    CHECK(vis["nodes"].size() == 2);
    const auto none = e.layout({{"images", "img-1"}});
    CHECK(none["nodes"].empty());

    const auto h = e.history(0);
    CHECK(h["entries"].size() == static_cast<std::size_t>(h["version"].get<int>()));
    CHECK(e.history(h["version"])["entries"].empty());

    CHECK(code_of([&] { e.save_session({{"user", "ana"}, {"name", "s1"}}); }) == ErrorCode::UnknownSnapshot);
    e.set_label({{"image", "img-1"}, {"label", "l-lit"}, {"user", "ana"}});
    e.scheduler().wait_idle();
    const auto graphs = e.snapshots({{"kind", "graph"}})["snapshots"];
    REQUIRE(graphs.size() == 1);
    const auto session = e.save_session({{"user", "ana"}, {"name", "s1"}, {"graph_snapshot", graphs[0]["id"]},
                                         {"projection_snapshot", jd["snapshot_id"]}});
    CHECK(session["snapshot"]["kind"] == "session");
}

TEST_CASE("engine persistence and restart") {
    const auto dir = testing::temp_dir("engine");
    const Corpus base = service_corpus();
    std::vector<HistoryEntry> log;
    std::uint64_t snap_id;
    std::string snap_bytes;
    Corpus final_corpus;
    {
        Engine e(base, {}, fast(dir));
        e.set_label({{"image", "img-1"}, {"label", "l-lit"}, {"user", "ana"}});
        e.create_label({{"surface", "Pupitre"}, {"user", "bo"}});
        e.add_edge({{"parent", "l-oiseau"}, {"child", "l-cigogne"}, {"user", "ana"}});
        e.scheduler().wait_idle();
        log = e.history_entries();
        final_corpus = e.corpus();
        const auto snaps = e.snapshot_store().list({});
        REQUIRE_FALSE(snaps.empty());
        snap_id = snaps.front()->id;
        snap_bytes = snaps.front()->bytes;
        CHECK(std::filesystem::exists(dir / "spaces" / (e.retro_space()->name() + ".vec")));
    }
    Engine again(base, {}, fast(dir));
    CHECK(again.history_entries() == log);
    CHECK(again.corpus().same_data(final_corpus));
    CHECK(again.label_hierarchy().has_edge("l-oiseau", "l-cigogne"));
    CHECK(again.snapshot_store().get(snap_id)->bytes == snap_bytes);
    CHECK(again.version() == log.back().seq);
    again.scheduler().wait_idle();
    std::filesystem::remove_all(dir);
}

TEST_CASE("http api") {
    Engine engine(service_corpus(), {}, fast());
    httplib::Server server;
    mount_routes(server, engine);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client c("127.0.0.1", port);

    auto post = [&](const std::string& path, const json& body) { return c.Post(path, body.dump(), "application/json"); };

    auto r = c.Get("/corpus/summary");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(json::parse(r->body)["version"] == 0);

    r = post("/annotations", {{"image", "img-1"}, {"label", "l-lit"}, {"present", true}, {"user", "ana"}});
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(json::parse(r->body)["seq"] == 1);

    // read-your-writes
    r = c.Get("/history?since_seq=0");
    CHECK(json::parse(r->body)["entries"].size() == 1);
    r = c.Get("/labels/l-lit/frequency");
    CHECK(json::parse(r->body)["count_a"] == 1);

    r = post("/annotations", {{"image", "img-1"}, {"label", "l-lit"}, {"present", true}, {"user", "ana"}});
    CHECK(r->status == 409);
    CHECK(json::parse(r->body)["error"]["code"] == "NoOpChange");

    r = post("/projections", {{"image_ids", {"img-0", "img-1", "img-2"}}, {"basis", {"image"}}, {"seed", 1}});
    REQUIRE(r->status == 202);
    const auto job_id = json::parse(r->body)["job_id"].get<std::uint64_t>();
    json job;
    for (int i = 0; i < 200; ++i) {
        job = json::parse(c.Get("/jobs/" + std::to_string(job_id))->body);
        if (job["state"] == "done" || job["state"] == "failed") break;
        std::this_thread::sleep_for(10ms);
    }
    REQUIRE(job["state"] == "done");
    const auto snap_path = "/snapshots/" + std::to_string(job["snapshot_id"].get<std::uint64_t>());
    const auto first = json::parse(c.Get(snap_path)->body);
    const auto stored = engine.snapshot_store().get(first["snapshot"]["id"])->bytes;
    r = c.Get("/projections/" + std::to_string(job["snapshot_id"].get<std::uint64_t>()));
    CHECK(json::parse(r->body)["coords"].size() == 3);

    r = post("/labels", {{"surface", "épée"}, {"user", "ana"}});
    CHECK(r->status == 200);
    const auto epee = json::parse(r->body)["label"]["id"].get<std::string>();
    r = post("/labels", {{"surface", "EPEE"}, {"user", "ana"}});
    CHECK(r->status == 409);
    CHECK(json::parse(r->body)["error"]["existing_id"] == epee);
    r = post("/labels", {{"surface", "!!!"}, {"user", "ana"}});
    CHECK(r->status == 400);

    r = post("/hierarchy/edges", {{"parent", "l-oiseau"}, {"child", "l-cigogne"}, {"user", "ana"}});
    CHECK(r->status == 200);
    r = post("/hierarchy/edges", {{"parent", "l-oiseau"}, {"child", "l-oiseau"}, {"user", "ana"}});
    CHECK(r->status == 400);
    r = c.Delete("/hierarchy/edges?parent=l-oiseau&child=l-lit&user=ana");
    CHECK(r->status == 404);
    r = c.Delete("/hierarchy/edges", json{{"parent", "l-oiseau"}, {"child", "l-cigogne"}, {"user", "ana"}}.dump(),
                 "application/json");
    CHECK(r->status == 200);
    r = c.Get("/hierarchy/layout");
    CHECK(r->status == 200);
    r = c.Get("/graph?metrics=image&max_degree=2&threshold=0");
    CHECK(r->status == 200);
    r = c.Get("/graph?metrics=bogus");
    CHECK(r->status == 400);
    r = c.Get("/projections/424242");
    CHECK(r->status == 404);
    r = c.Get("/jobs/424242");
    CHECK(r->status == 404);
    r = c.Post("/annotations", "{not json", "application/json");
    CHECK(r->status == 400);

    engine.scheduler().wait_idle();
    const auto later = json::parse(c.Get(snap_path)->body);
    CHECK(later["snapshot"] == first["snapshot"]);
    CHECK(later["payload"] == first["payload"]);
    CHECK(engine.snapshot_store().get(first["snapshot"]["id"])->bytes == stored);
    r = c.Get("/snapshots?kind=projection");
    CHECK(json::parse(r->body)["snapshots"].size() >= 1);

    server.stop();
    t.join();
}
