#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "mikfs/core/glob.hpp"
#include "mikfs/core/path.hpp"
#include "mikfs/core/tree.hpp"

namespace mikfs::server {

inline constexpr std::size_t kSubscriptionQueueLimit = 1024;

// Numbering matches mikfs.v1.ChangeKind.
enum class ChangeKind : std::uint32_t {
    file_created = 1,
    file_modified = 2,
    file_deleted = 3,
    file_moved = 4,
    dir_created = 5,
    dir_deleted = 6,
    dir_moved = 7,
    permissions_changed = 8,
    attributes_changed = 9,
};

struct ChangeEvent {
    ChangeKind kind = ChangeKind::file_created;
    core::Path path;
    std::optional<core::Path> new_path;  // moves only
    core::Timestamp timestamp = 0;
    std::uint64_t sequence = 0;          // assigned per subscription
};

struct EventFilter {
    core::Path prefix;                  // root matches everything
    std::optional<core::Glob> name_glob;
    std::set<ChangeKind> kinds;         // empty = all

    // Prefix and glob must hold for the path, or for new_path on a move.
    bool matches(const ChangeEvent& event) const;
};

// One subscriber's bounded delivery queue.
class Subscription {
public:
    explicit Subscription(EventFilter filter) : filter_(std::move(filter)) {}

    const EventFilter& filter() const { return filter_; }

    // Waits up to `wait` for the next event; nullopt on timeout. Events
    // queued before an overflow are still handed out.
    std::optional<ChangeEvent> next(std::chrono::milliseconds wait);
    // True once the queue overflowed and everything before it was taken.
    bool overflowed();

private:
    friend class EventHub;
    void offer(const ChangeEvent& event);

    EventFilter filter_;
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<ChangeEvent> queue_;
    std::uint64_t next_sequence_ = 1;
    bool overflowed_ = false;
};

// Fans committed mutations out to subscriptions. publish() is called while
// the tree's write lock is held, so per-subscription order is commit order.
class EventHub {
public:
    std::shared_ptr<Subscription> subscribe(EventFilter filter);
    void unsubscribe(const std::shared_ptr<Subscription>& subscription);
    void publish(const ChangeEvent& event);
    std::size_t subscriber_count();

private:
    std::mutex mutex_;
    std::vector<std::shared_ptr<Subscription>> subscriptions_;
};

}  // namespace mikfs::server
