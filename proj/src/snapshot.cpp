#include "illumine/snapshot.hpp"

#include "illumine/error.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace illumine {

namespace fs = std::filesystem;
using nlohmann::json;

Clock system_clock() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

namespace {

bool matches(const Snapshot& s, const SnapshotFilter& f) {
    if (f.kind && s.kind != *f.kind) return false;
    if (f.user && s.user != *f.user) return false;
    if (f.basis) {
        const auto it = s.meta.find("basis");
        if (it == s.meta.end() || !it->is_array()) return false;
        auto have = it->get<std::vector<std::string>>();
        auto want = *f.basis;
        std::sort(have.begin(), have.end());
        std::sort(want.begin(), want.end());
        if (have != want) return false;
    }
    return true;
}

}  // namespace

SnapshotStore::SnapshotStore(std::optional<fs::path> dir, Clock clock) : dir_(std::move(dir)), clock_(std::move(clock)) {
    if (!dir_) return;
    fs::create_directories(*dir_);
    for (const auto& entry : fs::directory_iterator(*dir_)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        auto s = std::make_shared<Snapshot>();
        s->bytes = buf.str();
        try {
            const json j = json::parse(s->bytes);
            s->id = j.at("id").get<std::uint64_t>();
            s->kind = j.at("kind").get<std::string>();
            s->created_at = j.at("created_at").get<std::int64_t>();
            s->user = j.at("user").get<std::string>();
            s->meta = j.at("meta");
            s->payload = j.at("payload");
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, entry.path().string() + ": " + e.what());
        }
        next_id_ = std::max(next_id_, s->id + 1);
        items_.emplace(s->id, std::move(s));
    }
}

std::shared_ptr<const Snapshot> SnapshotStore::add(std::string kind, std::string user, json meta, json payload) {
    auto s = std::make_shared<Snapshot>();
    s->kind = std::move(kind);
    s->user = std::move(user);
    s->meta = std::move(meta);
    s->payload = std::move(payload);
    s->created_at = clock_();

    std::lock_guard lock(mutex_);
    s->id = next_id_++;
    s->bytes = json{{"id", s->id},
                    {"kind", s->kind},
                    {"created_at", s->created_at},
                    {"user", s->user},
                    {"meta", s->meta},
                    {"payload", s->payload}}
                   .dump();
    if (dir_) {
        const fs::path file = *dir_ / (std::to_string(s->id) + ".json");
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write snapshot " + file.string());
        out << s->bytes;
    }
    items_.emplace(s->id, s);
    return s;
}

std::shared_ptr<const Snapshot> SnapshotStore::find(std::uint64_t id) const {
    std::lock_guard lock(mutex_);
    const auto it = items_.find(id);
    return it == items_.end() ? nullptr : it->second;
}

std::shared_ptr<const Snapshot> SnapshotStore::get(std::uint64_t id) const {
    auto s = find(id);
    if (!s) throw Error(ErrorCode::UnknownSnapshot, "no snapshot " + std::to_string(id));
    return s;
}

std::vector<std::shared_ptr<const Snapshot>> SnapshotStore::list(const SnapshotFilter& filter) const {
    std::vector<std::shared_ptr<const Snapshot>> out;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, s] : items_)
            if (matches(*s, filter)) out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a->created_at < b->created_at; });
    return out;
}

std::shared_ptr<const Snapshot> SnapshotStore::latest(const SnapshotFilter& filter) const {
    auto all = list(filter);
    return all.empty() ? nullptr : all.back();
}

std::size_t SnapshotStore::size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
}

json descriptor(const Snapshot& s) {
    return json{{"id", s.id}, {"kind", s.kind}, {"created_at", s.created_at}, {"user", s.user}, {"meta", s.meta}};
}

}  // namespace illumine
