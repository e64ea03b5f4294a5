#include "mikfs/server/events.hpp"

#include <algorithm>

namespace mikfs::server {

namespace {

bool path_matches(const EventFilter& filter, const core::Path& path)
{
    if (!filter.prefix.is_prefix_of(path)) {
        return false;
    }
    return !filter.name_glob || filter.name_glob->matches(path.name());
}

}  // namespace

bool EventFilter::matches(const ChangeEvent& event) const
{
    if (!kinds.empty() && !kinds.contains(event.kind)) {
        return false;
    }
    return path_matches(*this, event.path) || (event.new_path && path_matches(*this, *event.new_path));
}

std::optional<ChangeEvent> Subscription::next(std::chrono::milliseconds wait)
{
    std::unique_lock lock(mutex_);
    ready_.wait_for(lock, wait, [this] { return !queue_.empty() || overflowed_; });
    if (queue_.empty()) {
        return std::nullopt;
    }
    ChangeEvent event = std::move(queue_.front());
    queue_.pop_front();
    return event;
}

bool Subscription::overflowed()
{
    std::lock_guard lock(mutex_);
    return overflowed_ && queue_.empty();
}

void Subscription::offer(const ChangeEvent& event)
{
    std::lock_guard lock(mutex_);
    if (overflowed_) {
        return;
    }
    if (queue_.size() >= kSubscriptionQueueLimit) {
        overflowed_ = true;
    } else {
        ChangeEvent copy = event;
        copy.sequence = next_sequence_++;
        queue_.push_back(std::move(copy));
    }
    ready_.notify_all();
}

std::shared_ptr<Subscription> EventHub::subscribe(EventFilter filter)
{
    auto subscription = std::make_shared<Subscription>(std::move(filter));
    std::lock_guard lock(mutex_);
    subscriptions_.push_back(subscription);
    return subscription;
}

void EventHub::unsubscribe(const std::shared_ptr<Subscription>& subscription)
{
    std::lock_guard lock(mutex_);
    std::erase(subscriptions_, subscription);
}

void EventHub::publish(const ChangeEvent& event)
{
    std::lock_guard lock(mutex_);
    for (const auto& subscription : subscriptions_) {
        if (subscription->filter().matches(event)) {
            subscription->offer(event);
        }
    }
}

std::size_t EventHub::subscriber_count()
{
    std::lock_guard lock(mutex_);
    return subscriptions_.size();
}

}  // namespace mikfs::server
