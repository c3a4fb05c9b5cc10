#include "illumine/error.hpp"
#include "illumine/projection.hpp"
#include "illumine/recommend.hpp"
#include "illumine/retrofit.hpp"
#include "illumine/service.hpp"
#include "illumine/simgraph.hpp"
#include "illumine/sugiyama.hpp"

#include <fstream>
#include <sstream>

namespace illumine {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Query parameters arrive as strings, bodies as JSON values; accept both.
template <class T>
T number(const json& j, const char* key, T fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (it->is_number()) return it->get<T>();
    if (it->is_string()) {
        std::istringstream in(it->get<std::string>());
        T v{};
        if (in >> v && in.eof()) return v;
    }
    throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a number");
}

std::string text(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw Error(ErrorCode::InvalidArgument, std::string("missing string '") + key + "'");
    return it->get<std::string>();
}

// Arrays, or comma-separated strings from a query.
std::vector<std::string> strings(const json& j, const char* key, bool required = true) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        if (required) throw Error(ErrorCode::InvalidArgument, std::string("missing list '") + key + "'");
        return {};
    }
    std::vector<std::string> out;
    if (it->is_string()) {
        std::istringstream in(it->get<std::string>());
        std::string part;
        while (std::getline(in, part, ','))
            if (!part.empty()) out.push_back(part);
        return out;
    }
    if (!it->is_array()) throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a list");
    for (const auto& v : *it) out.push_back(v.get<std::string>());
    return out;
}

bool flag(const json& j, const char* key, bool fallback) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (it->is_boolean()) return it->get<bool>();
    if (it->is_string()) return it->get<std::string>() == "true" || it->get<std::string>() == "1";
    throw Error(ErrorCode::InvalidArgument, std::string("'") + key + "' must be a boolean");
}

json recs_json(const std::vector<Recommendation>& recs) {
    json out = json::array();
    for (const auto& r : recs) out.push_back(to_json(r));
    return out;
}

LabelHierarchy load_hierarchy_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    try {
        return import_hierarchy(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

}  // namespace

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownImage:
        case ErrorCode::UnknownLabel:
        case ErrorCode::UnknownNode:
        case ErrorCode::UnknownEdge:
        case ErrorCode::UnknownSnapshot:
        case ErrorCode::UnknownJob:
        case ErrorCode::KeyMissing:
            return 404;
        case ErrorCode::NoOpChange:
        case ErrorCode::DuplicateEdge:
        case ErrorCode::DuplicateLabel:
            return 409;
        default:
            return 400;
    }
}

Engine::Engine(Corpus corpus, LabelHierarchy hierarchy, EngineOptions options)
    : options_(std::move(options)),
      base_(corpus),
      base_hierarchy_(hierarchy),
      store_(std::move(corpus), std::move(hierarchy), options_.clock),
      snapshots_(options_.data_dir ? std::optional<fs::path>(*options_.data_dir / "snapshots") : std::nullopt,
                 options_.clock),
      jobs_(options_.workers) {
    if (options_.data_dir) {
        const fs::path log = *options_.data_dir / "history.ndjson";
        for (const auto& e : read_history(log)) store_.replay_entry(e);
        store_.attach_log(log);
    }
    run_retrofit();
}

Engine::~Engine() { jobs_.shutdown(); }

std::unique_ptr<Engine> Engine::open(const fs::path& data_dir, EngineOptions options, const StopwordSet* stopwords) {
    const fs::path manifest_path = data_dir / "manifest.json";
    Corpus corpus = load_corpus(manifest_path.string(), nullptr, stopwords);
    LabelHierarchy h;
    std::ifstream in(manifest_path, std::ios::binary);
    const json manifest = json::parse(in);
    if (const auto it = manifest.find("hierarchy"); it != manifest.end() && it->is_string())
        h = load_hierarchy_file(data_dir / it->get<std::string>());
    options.data_dir = data_dir;
    return std::make_unique<Engine>(std::move(corpus), std::move(h), std::move(options));
}

std::uint64_t Engine::version() const {
    std::shared_lock lock(state_mutex_);
    return store_.seq();
}

json Engine::with_version(json body) const {
    body["version"] = version();
    return body;
}

Corpus Engine::corpus() const {
    std::shared_lock lock(state_mutex_);
    return store_.corpus();
}

LabelHierarchy Engine::label_hierarchy() const {
    std::shared_lock lock(state_mutex_);
    return store_.hierarchy();
}

CooccurrenceMatrix Engine::cooccurrence() const {
    std::shared_lock lock(state_mutex_);
    return store_.cooccurrence();
}

std::vector<HistoryEntry> Engine::history_entries() const {
    std::shared_lock lock(state_mutex_);
    return store_.history();
}

std::shared_ptr<const VectorSpace> Engine::retro_space() const {
    std::shared_lock lock(state_mutex_);
    return retro_;
}

json Engine::corpus_summary() const {
    std::shared_lock lock(state_mutex_);
    json out = illumine::corpus_summary(store_.corpus());
    out["version"] = store_.seq();
    return out;
}

json Engine::graph(const json& query) const {
    GraphParams p;
    for (const auto& m : strings(query, "metrics", false)) p.metrics.insert(parse_metric(m));
    if (p.metrics.empty()) p.metrics = {SimilarityMetric::image};
    p.max_degree = number<std::size_t>(query, "max_degree", p.max_degree);
    p.threshold = number<double>(query, "threshold", p.threshold);
    std::shared_lock lock(state_mutex_);
    json out = to_json(build_graph(store_.corpus(), p));
    out["version"] = store_.seq();
    return out;
}

json Engine::selection_summary(const json& body) const {
    const auto ids = strings(body, "manuscript_ids");
    std::shared_lock lock(state_mutex_);
    json out = to_json(illumine::selection_summary({ids.begin(), ids.end()}, store_.corpus()));
    out["version"] = store_.seq();
    return out;
}

json Engine::create_projection(const json& body) {
    const auto ids = strings(body, "image_ids");
    const Basis basis = parse_basis(strings(body, "basis"));
    const auto seed = number<std::uint64_t>(body, "seed", 0);
    const std::string user = body.value("user", std::string("anonymous"));
    const auto parent = body.contains("parent") && !body["parent"].is_null()
                            ? std::optional(number<std::uint64_t>(body, "parent", 0))
                            : std::nullopt;
    if (ids.empty()) throw Error(ErrorCode::EmptyInput, "no images selected");
    if (basis.empty()) throw Error(ErrorCode::EmptyInput, "empty basis");
    Corpus snapshot_corpus;
    std::uint64_t v;
    {
        std::shared_lock lock(state_mutex_);
        for (const auto& id : ids) store_.corpus().image(id);
        if (parent) snapshots_.get(*parent);
        snapshot_corpus = store_.corpus();
        v = store_.seq();
    }
    auto corpus = std::make_shared<const Corpus>(std::move(snapshot_corpus));
    const auto job = jobs_.submit(JobKind::projection, v, [this, corpus, ids, basis, seed, user, parent] {
        if (parent) return reproject_subset(snapshots_, *parent, ids, seed, *corpus, user).snapshot_id;
        Projection p = project_2d(ids, basis, seed, *corpus);
        p.user = user;
        return store_projection(snapshots_, std::move(p)).snapshot_id;
    });
    return {{"job_id", job}, {"version", v}};
}

json Engine::projection(std::uint64_t id) const {
    const auto snap = snapshots_.get(id);
    const Projection p = projection_from_snapshot(*snap);
    json coords = json::object();
    for (const auto& [img, xy] : p.coords) coords[img] = {xy[0], xy[1]};
    return with_version({{"snapshot", descriptor(*snap)}, {"coords", coords}, {"skipped", p.skipped}});
}

json Engine::snapshots(const json& query) const {
    SnapshotFilter f;
    if (const auto it = query.find("kind"); it != query.end() && it->is_string()) f.kind = it->get<std::string>();
    if (const auto it = query.find("user"); it != query.end() && it->is_string()) f.user = it->get<std::string>();
    if (query.contains("basis")) {
        auto names = basis_names(parse_basis(strings(query, "basis")));
        f.basis = std::move(names);
    }
    json items = json::array();
    for (const auto& s : snapshots_.list(f)) items.push_back(descriptor(*s));
    return with_version({{"snapshots", items}});
}

json Engine::snapshot(std::uint64_t id) const {
    const auto s = snapshots_.get(id);
    return with_version({{"snapshot", descriptor(*s)}, {"payload", s->payload}});
}

json Engine::save_session(const json& body) {
    const std::string user = text(body, "user");
    const auto graph_id = number<std::uint64_t>(body, "graph_snapshot", 0);
    const auto projection_id = number<std::uint64_t>(body, "projection_snapshot", 0);
    snapshots_.get(graph_id);
    snapshots_.get(projection_id);
    const auto s = snapshots_.add("session", user, {{"name", body.value("name", std::string())}},
                                  {{"graph_snapshot", graph_id}, {"projection_snapshot", projection_id}});
    return with_version({{"snapshot", descriptor(*s)}});
}

json Engine::set_label(const json& body) {
    const std::string image = text(body, "image"), label = text(body, "label"), user = text(body, "user");
    const bool present = flag(body, "present", true);
    HistoryEntry e;
    {
        std::unique_lock lock(state_mutex_);
        e = store_.set_label(image, label, present, user);
    }
    after_assignment_change(e.seq);
    return {{"seq", e.seq}, {"entry", to_json(e)}, {"version", e.seq}};
}

json Engine::create_label(const json& body) {
    const std::string surface = text(body, "surface"), user = text(body, "user");
    std::unique_lock lock(state_mutex_);
    auto [term, e] = store_.create_label(surface, user);
    return {{"label", to_json(term)}, {"seq", e.seq}, {"version", e.seq}};
}

json Engine::categorize(const std::string& label_id, const json& body) {
    const std::string user = text(body, "user");
    std::optional<LabelCategory> category;
    if (const auto it = body.find("category"); it != body.end() && !it->is_null())
        category = parse_category(it->get<std::string>());
    std::unique_lock lock(state_mutex_);
    const auto e = store_.categorize_label(label_id, category, user);
    return {{"label", to_json(store_.corpus().label(label_id))}, {"seq", e.seq}, {"version", e.seq}};
}

json Engine::label_frequency(const std::string& label_id) const {
    std::shared_lock lock(state_mutex_);
    const Corpus& c = store_.corpus();
    c.label(label_id);
    const auto f = label_frequencies({label_id}, c).front();
    json images = json::array();
    for (const auto& img : c.images())
        if (img.label_ids.contains(label_id)) images.push_back(img.id);
    return {{"label_id", label_id},
            {"count_a", f.count_a},
            {"count_b", f.count_b},
            {"images", images},
            {"version", store_.seq()}};
}

json Engine::word_space_recs(const json& body) const {
    const auto labels = strings(body, "labels");
    WordSpaceOptions opts;
    opts.k = number<std::size_t>(body, "k", opts.k);
    opts.full_scan = flag(body, "full_scan", false);
    std::shared_lock lock(state_mutex_);
    const Corpus& c = store_.corpus();
    if (!c.spaces.label) throw Error(ErrorCode::EmptySpace, "no label vectors loaded");
    const VectorSpace& retro = retro_ ? *retro_ : *c.spaces.label;
    const RecReport r = illumine::word_space_recs(labels, *c.spaces.label, retro, c, opts);
    return {{"recs", recs_json(r.recs)}, {"skipped", r.skipped}, {"retro_space", retro.name()}, {"version", store_.seq()}};
}

json Engine::cooccurrence_recs(const json& body) const {
    const auto labels = strings(body, "labels");
    const auto limit = number<std::size_t>(body, "limit", 20);
    std::shared_lock lock(state_mutex_);
    return {{"recs", recs_json(illumine::cooccurrence_recs(labels, limit, store_.cooccurrence(), store_.corpus()))},
            {"cooccurrence_version", store_.cooccurrence().version()},
            {"version", store_.seq()}};
}

json Engine::image_neighbor_recs(const json& body) const {
    const auto images = strings(body, "images");
    const auto k = number<std::size_t>(body, "k_images", 10);
    const auto limit = number<std::size_t>(body, "limit", 20);
    std::shared_lock lock(state_mutex_);
    const Corpus& c = store_.corpus();
    if (!c.spaces.image) throw Error(ErrorCode::EmptySpace, "no image vectors loaded");
    return {{"recs", recs_json(illumine::image_neighbor_recs(images, k, limit, *c.spaces.image, c))},
            {"version", store_.seq()}};
}

json Engine::hierarchy() const {
    std::shared_lock lock(state_mutex_);
    json out = export_hierarchy(store_.hierarchy());
    out["hierarchy_version"] = store_.hierarchy().version();
    out["version"] = store_.seq();
    return out;
}

json Engine::hierarchy_batch(std::vector<std::pair<Change, std::string>> batch) {
    std::vector<HistoryEntry> entries;
    std::uint64_t hv;
    {
        std::unique_lock lock(state_mutex_);
        entries = store_.apply_batch(batch);
        hv = store_.hierarchy().version();
    }
    after_hierarchy_change(entries.back().seq);
    json list = json::array();
    for (const auto& e : entries) list.push_back(to_json(e));
    return {{"entries", list}, {"seq", entries.back().seq}, {"hierarchy_version", hv}, {"version", entries.back().seq}};
}

json Engine::add_node(const json& body) {
    const std::string label = text(body, "label"), user = text(body, "user");
    return hierarchy_batch({{HierarchyMutation{AddNode{label, false}}, user}});
}

json Engine::add_edge(const json& body) {
    const std::string parent = text(body, "parent"), child = text(body, "child"), user = text(body, "user");
    std::vector<std::pair<Change, std::string>> batch;
    {
        std::shared_lock lock(state_mutex_);
        if (parent != child)
            for (const auto& id : {parent, child})
                if (!store_.hierarchy().has_node(id) && store_.corpus().find_label(id))
                    batch.push_back({HierarchyMutation{AddNode{id, false}}, user});
    }
    batch.push_back({HierarchyMutation{AddEdge{parent, child}}, user});
    return hierarchy_batch(std::move(batch));
}

json Engine::remove_edge(const json& body) {
    const std::string parent = text(body, "parent"), child = text(body, "child"), user = text(body, "user");
    return hierarchy_batch({{HierarchyMutation{RemoveEdge{parent, child}}, user}});
}

json Engine::layout(const json& query) const {
    const auto images = strings(query, "images", false);
    std::shared_lock lock(state_mutex_);
    const LabelHierarchy& h = store_.hierarchy();
    json out;
    if (images.empty()) {
        out = to_json(illumine::layout(h));
    } else {
        const auto visible = visible_subgraph(h, images, store_.corpus());
        LabelHierarchy sub;
        for (const auto& id : visible.nodes) sub.add_node(id, h.nodes().at(id));
        for (const auto& e : visible.edges) sub.add_edge(e.parent, e.child, e.user, e.created_at);
        out = to_json(illumine::layout(sub));
        out["visible_images"] = images;
    }
    out["hierarchy_version"] = h.version();
    out["version"] = store_.seq();
    return out;
}

json Engine::history(std::uint64_t since_seq) const {
    std::shared_lock lock(state_mutex_);
    json entries = json::array();
    for (const auto& e : store_.since(since_seq)) entries.push_back(to_json(e));
    return {{"entries", entries}, {"version", store_.seq()}};
}

json Engine::job(std::uint64_t id) const { return with_version(to_json(jobs_.get(id))); }

json Engine::jobs_list() const {
    json items = json::array();
    for (const auto& j : jobs_.list()) items.push_back(to_json(j));
    return with_version({{"jobs", items}});
}

void Engine::after_assignment_change(std::uint64_t version) {
    jobs_.schedule("projection:label", JobKind::projection, version, options_.debounce,
                   [this] { return run_label_projection(); });
    jobs_.schedule("graph:label", JobKind::graph_similarity, version, options_.debounce,
                   [this] { return run_label_graph(); });
}

void Engine::after_hierarchy_change(std::uint64_t version) {
    jobs_.schedule("retrofit", JobKind::retrofit, version, options_.debounce, [this] { return run_retrofit(); });
}

// Re-projects the image set of the latest label-basis projection, or every
// image with a label vector when there is none yet.
std::uint64_t Engine::run_label_projection() {
    const Basis basis{SimilarityMetric::label};
    Corpus corpus;
    {
        std::shared_lock lock(state_mutex_);
        corpus = store_.corpus();
    }
    std::vector<std::string> ids;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> parent;
    if (const auto last = snapshots_.latest({"projection", std::nullopt, basis_names(basis)})) {
        const Projection prev = projection_from_snapshot(*last);
        for (const auto& [id, xy] : prev.coords) ids.push_back(id);
        ids.insert(ids.end(), prev.skipped.begin(), prev.skipped.end());
        seed = prev.seed;
        parent = prev.snapshot_id;
    } else {
        for (const auto& img : corpus.images()) ids.push_back(img.id);
    }
    Projection p = project_2d(ids, basis, seed, corpus);
    p.user = "system";
    p.parent = parent;
    return store_projection(snapshots_, std::move(p)).snapshot_id;
}

std::uint64_t Engine::run_label_graph() {
    Corpus corpus;
    std::uint64_t v;
    {
        std::shared_lock lock(state_mutex_);
        corpus = store_.corpus();
        v = store_.seq();
    }
    GraphParams p;
    p.metrics = {SimilarityMetric::label};
    json payload = to_json(build_graph(corpus, p));
    return snapshots_.add("graph", "system", {{"metrics", {"label"}}, {"data_version", v}}, std::move(payload))->id;
}

std::uint64_t Engine::run_retrofit() {
    std::shared_ptr<const VectorSpace> orig;
    LabelHierarchy h;
    std::uint64_t v;
    {
        std::shared_lock lock(state_mutex_);
        orig = store_.corpus().spaces.label;
        h = store_.hierarchy();
        v = store_.seq();
    }
    if (!orig) throw Error(ErrorCode::EmptySpace, "no label vectors loaded");
    RetrofitResult r = retrofit(*orig, h);
    auto space = std::make_shared<const VectorSpace>(std::move(r.space));
    json meta{{"name", space->name()}, {"hierarchy_version", h.version()}, {"data_version", v}};
    json payload{{"name", space->name()}, {"size", space->size()}, {"skipped", r.skipped},
                 {"displacements", r.displacements}};
    if (options_.data_dir) {
        const fs::path dir = *options_.data_dir / "spaces";
        fs::create_directories(dir);
        const fs::path file = dir / (space->name() + ".vec");
        write_vector_file(*space, file.string());
        payload["file"] = fs::relative(file, *options_.data_dir).string();
    }
    {
        std::unique_lock lock(state_mutex_);
        if (!retro_ || h.version() >= retro_hierarchy_version_) {
            retro_ = space;
            retro_hierarchy_version_ = h.version();
        }
    }
    return snapshots_.add("retro_space", "system", std::move(meta), std::move(payload))->id;
}

}  // namespace illumine
