#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace illumine {

/// Milliseconds since the epoch; injectable for reproducible tests.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

/// An immutable computation result. `bytes` is the serialized document and
/// never changes once stored.
struct Snapshot {
    std::uint64_t id = 0;
    std::string kind;  // "projection", "graph", "retro_space", ...
    std::int64_t created_at = 0;
    std::string user;
    nlohmann::json meta;
    nlohmann::json payload;
    std::string bytes;
};

struct SnapshotFilter {
    std::optional<std::string> kind;
    std::optional<std::string> user;
    /// Matched against meta["basis"] (exact set equality).
    std::optional<std::vector<std::string>> basis;
};

/// Append-only registry of snapshots keyed by monotone integer ids. With a
/// directory, every snapshot is also written as `<dir>/<id>.json` and
/// existing files are loaded on construction.
class SnapshotStore {
public:
    explicit SnapshotStore(std::optional<std::filesystem::path> dir = std::nullopt, Clock clock = system_clock());

    std::shared_ptr<const Snapshot> add(std::string kind, std::string user, nlohmann::json meta,
                                        nlohmann::json payload);

    /// Throws UnknownSnapshot.
    std::shared_ptr<const Snapshot> get(std::uint64_t id) const;
    std::shared_ptr<const Snapshot> find(std::uint64_t id) const;
    std::shared_ptr<const Snapshot> latest(const SnapshotFilter& filter) const;

    /// Sorted by (created_at, id).
    std::vector<std::shared_ptr<const Snapshot>> list(const SnapshotFilter& filter = {}) const;
    std::size_t size() const;

private:
    std::optional<std::filesystem::path> dir_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::uint64_t, std::shared_ptr<const Snapshot>> items_;
    std::uint64_t next_id_ = 1;
};

nlohmann::json descriptor(const Snapshot& s);

}  // namespace illumine
