#include "illumine/error.hpp"
#include "illumine/service.hpp"

namespace illumine {

using nlohmann::json;

std::string_view to_string(JobKind k) noexcept {
    switch (k) {
        case JobKind::projection: return "projection";
        case JobKind::graph_similarity: return "graph_similarity";
        case JobKind::retrofit: return "retrofit";
    }
    return "?";
}

std::string_view to_string(JobState s) noexcept {
    switch (s) {
        case JobState::queued: return "queued";
        case JobState::running: return "running";
        case JobState::done: return "done";
        case JobState::failed: return "failed";
    }
    return "?";
}

json to_json(const JobDescriptor& j) {
    json out{{"job_id", j.job_id},
             {"kind", to_string(j.kind)},
             {"state", to_string(j.state)},
             {"input_version", j.input_version},
             {"snapshot_id", j.snapshot_id ? json(*j.snapshot_id) : json(nullptr)}};
    if (!j.error.empty()) out["error"] = j.error;
    return out;
}

JobScheduler::JobScheduler(std::size_t workers) {
    if (workers == 0) workers = 1;
    for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { work(); });
}

JobScheduler::~JobScheduler() { shutdown(); }

void JobScheduler::shutdown() {
    {
        std::lock_guard lock(mutex_);
        if (stop_) return;
        stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : workers_) t.join();
    workers_.clear();
    idle_.notify_all();
}

std::uint64_t JobScheduler::submit(JobKind kind, std::uint64_t input_version, Task task) {
    return enqueue({}, kind, input_version, std::chrono::milliseconds(0), std::move(task));
}

std::uint64_t JobScheduler::schedule(const std::string& key, JobKind kind, std::uint64_t input_version,
                                     std::chrono::milliseconds delay, Task task) {
    return enqueue(key, kind, input_version, delay, std::move(task));
}

std::uint64_t JobScheduler::enqueue(const std::string& key, JobKind kind, std::uint64_t input_version,
                                    std::chrono::milliseconds delay, Task task) {
    std::uint64_t id;
    {
        std::lock_guard lock(mutex_);
        if (stop_) throw Error(ErrorCode::InvalidArgument, "scheduler stopped");
        const auto due = std::chrono::steady_clock::now() + delay;
        if (const auto it = pending_.find(key); !key.empty() && it != pending_.end()) {
            Job& job = jobs_.at(it->second);
            job.task = std::move(task);
            job.due = due;
            job.d.input_version = input_version;
            id = job.d.job_id;
        } else {
            id = next_id_++;
            Job job{{id, kind, JobState::queued, input_version, std::nullopt, {}}, std::move(task), due, key};
            jobs_.emplace(id, std::move(job));
            if (!key.empty()) pending_[key] = id;
        }
    }
    wake_.notify_all();
    return id;
}

void JobScheduler::work() {
    std::unique_lock lock(mutex_);
    for (;;) {
        if (stop_) return;
        Job* next = nullptr;
        for (auto& [id, job] : jobs_)
            if (job.d.state == JobState::queued && (!next || job.due < next->due)) next = &job;
        if (!next) {
            wake_.wait(lock);
            continue;
        }
        if (next->due > std::chrono::steady_clock::now()) {
            wake_.wait_until(lock, next->due);
            continue;
        }
        next->d.state = JobState::running;
        if (!next->key.empty()) pending_.erase(next->key);
        ++active_;
        Task task = std::move(next->task);
        const std::uint64_t id = next->d.job_id;
        lock.unlock();

        std::optional<std::uint64_t> snapshot;
        std::string error;
        try {
            snapshot = task();
        } catch (const std::exception& e) {
            error = e.what();
            if (error.empty()) error = "job failed";
        } catch (...) {
            error = "job failed";
        }

        lock.lock();
        JobDescriptor& d = jobs_.at(id).d;
        d.snapshot_id = snapshot;
        d.error = error;
        d.state = snapshot ? JobState::done : JobState::failed;
        --active_;
        idle_.notify_all();
    }
}

JobDescriptor JobScheduler::get(std::uint64_t id) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) throw Error(ErrorCode::UnknownJob, "no job " + std::to_string(id));
    return it->second.d;
}

std::vector<JobDescriptor> JobScheduler::list() const {
    std::lock_guard lock(mutex_);
    std::vector<JobDescriptor> out;
    for (const auto& [id, job] : jobs_) out.push_back(job.d);
    return out;
}

void JobScheduler::wait_idle() {
    std::unique_lock lock(mutex_);
    idle_.wait(lock, [&] {
        if (stop_) return true;
        if (active_ > 0) return false;
        for (const auto& [id, job] : jobs_)
            if (job.d.state == JobState::queued) return false;
        return true;
    });
}

}  // namespace illumine
