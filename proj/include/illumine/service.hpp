#pragma once

#include "illumine/annotation.hpp"
#include "illumine/corpus.hpp"
#include "illumine/error.hpp"
#include "illumine/hierarchy.hpp"
#include "illumine/snapshot.hpp"
#include "illumine/vecspace.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace illumine {

enum class JobKind { projection, graph_similarity, retrofit };
enum class JobState { queued, running, done, failed };

std::string_view to_string(JobKind k) noexcept;
std::string_view to_string(JobState s) noexcept;

struct JobDescriptor {
    std::uint64_t job_id = 0;
    JobKind kind = JobKind::projection;
    JobState state = JobState::queued;
    std::uint64_t input_version = 0;
    std::optional<std::uint64_t> snapshot_id;
    std::string error;
};

nlohmann::json to_json(const JobDescriptor& j);

/// Bounded worker pool. Debounced jobs share a key: while a keyed job is
/// still queued, scheduling the key again replaces its task and pushes its
/// start back by the delay instead of adding a job.
class JobScheduler {
public:
    /// Returns the output snapshot id.
    using Task = std::function<std::uint64_t()>;

    explicit JobScheduler(std::size_t workers = 2);
    ~JobScheduler();
    JobScheduler(const JobScheduler&) = delete;
    JobScheduler& operator=(const JobScheduler&) = delete;

    std::uint64_t submit(JobKind kind, std::uint64_t input_version, Task task);
    std::uint64_t schedule(const std::string& key, JobKind kind, std::uint64_t input_version,
                           std::chrono::milliseconds delay, Task task);

    /// Throws UnknownJob.
    JobDescriptor get(std::uint64_t id) const;
    std::vector<JobDescriptor> list() const;
    /// Blocks until nothing is queued or running.
    void wait_idle();
    void shutdown();

private:
    struct Job {
        JobDescriptor d;
        Task task;
        std::chrono::steady_clock::time_point due;
        std::string key;
    };
    std::uint64_t enqueue(const std::string& key, JobKind kind, std::uint64_t input_version,
                          std::chrono::milliseconds delay, Task task);
    void work();

    mutable std::mutex mutex_;
    std::condition_variable wake_, idle_;
    std::map<std::uint64_t, Job> jobs_;
    std::map<std::string, std::uint64_t> pending_;
    std::size_t active_ = 0;
    std::uint64_t next_id_ = 1;
    bool stop_ = false;
    std::vector<std::thread> workers_;
};

struct EngineOptions {
    std::optional<std::filesystem::path> data_dir;  // history, snapshots, retro spaces
    std::chrono::milliseconds debounce{2000};
    std::size_t workers = 2;
    Clock clock = system_clock();
};

/// Everything the HTTP API exposes, as JSON in / JSON out. Every response
/// carries "version", the history seq it reflects. Mutations serialize on
/// the state lock; reads and background jobs share it.
class Engine {
public:
    Engine(Corpus corpus, LabelHierarchy hierarchy, EngineOptions options = {});
    ~Engine();

    /// Loads <dir>/manifest.json, the optional hierarchy it names, replays
    /// <dir>/history.ndjson and reopens <dir>/snapshots.
    static std::unique_ptr<Engine> open(const std::filesystem::path& data_dir, EngineOptions options = {},
                                        const StopwordSet* stopwords = nullptr);

    nlohmann::json corpus_summary() const;
    nlohmann::json graph(const nlohmann::json& query) const;
    nlohmann::json selection_summary(const nlohmann::json& body) const;

    nlohmann::json create_projection(const nlohmann::json& body);
    nlohmann::json projection(std::uint64_t id) const;
    nlohmann::json snapshots(const nlohmann::json& query) const;
    nlohmann::json snapshot(std::uint64_t id) const;
    nlohmann::json save_session(const nlohmann::json& body);

    nlohmann::json set_label(const nlohmann::json& body);
    nlohmann::json create_label(const nlohmann::json& body);
    nlohmann::json categorize(const std::string& label_id, const nlohmann::json& body);
    nlohmann::json label_frequency(const std::string& label_id) const;

    nlohmann::json word_space_recs(const nlohmann::json& body) const;
    nlohmann::json cooccurrence_recs(const nlohmann::json& body) const;
    nlohmann::json image_neighbor_recs(const nlohmann::json& body) const;

    nlohmann::json hierarchy() const;
    nlohmann::json add_node(const nlohmann::json& body);
    nlohmann::json add_edge(const nlohmann::json& body);
    nlohmann::json remove_edge(const nlohmann::json& body);
    nlohmann::json layout(const nlohmann::json& query) const;

    nlohmann::json history(std::uint64_t since_seq) const;
    nlohmann::json job(std::uint64_t id) const;
    nlohmann::json jobs_list() const;

    JobScheduler& scheduler() noexcept { return jobs_; }
    SnapshotStore& snapshot_store() noexcept { return snapshots_; }
    std::uint64_t version() const;
    /// Copies of the live state, for tests and export.
    Corpus corpus() const;
    LabelHierarchy label_hierarchy() const;
    CooccurrenceMatrix cooccurrence() const;
    std::vector<HistoryEntry> history_entries() const;
    std::shared_ptr<const VectorSpace> retro_space() const;

private:
    void after_assignment_change(std::uint64_t version);
    void after_hierarchy_change(std::uint64_t version);
    std::uint64_t run_label_projection();
    std::uint64_t run_label_graph();
    std::uint64_t run_retrofit();
    nlohmann::json with_version(nlohmann::json body) const;
    nlohmann::json hierarchy_batch(std::vector<std::pair<Change, std::string>> batch);

    EngineOptions options_;
    Corpus base_;
    LabelHierarchy base_hierarchy_;
    mutable std::shared_mutex state_mutex_;
    AnnotationStore store_;
    std::shared_ptr<const VectorSpace> retro_;
    std::uint64_t retro_hierarchy_version_ = 0;
    SnapshotStore snapshots_;
    JobScheduler jobs_;
};

/// HTTP status for an error code: 404 unknown entity, 409 conflicting
/// change, 400 otherwise.
int http_status(ErrorCode code) noexcept;

}  // namespace illumine
