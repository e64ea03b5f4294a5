#include "mikfs/auth/session.hpp"

#include "mikfs/auth/crypto.hpp"
#include "mikfs/core/tree.hpp"

namespace mikfs::auth {

namespace {

core::Status not_authenticated()
{
    return core::make_error(core::StatusCode::not_authenticated, "no valid session");
}

}  // namespace

SessionRegistry::SessionRegistry(std::uint64_t ttl_ns, Clock clock) : ttl_ns_(ttl_ns), clock_(std::move(clock)) {}

std::uint64_t SessionRegistry::now() const
{
    return clock_ ? clock_() : core::now_ns();
}

void SessionRegistry::purge_expired(std::uint64_t now)
{
    std::erase_if(sessions_, [now](const auto& item) { return item.second.handle.expires_at <= now; });
}

SessionHandle SessionRegistry::create()
{
    const std::uint64_t t = now();
    std::lock_guard lock(mutex_);
    purge_expired(t);
    SessionHandle handle;
    do {
        handle.token = random_bytes(kTokenBytes);
    } while (sessions_.count(handle.token) != 0);
    handle.created_at = t;
    handle.expires_at = t + ttl_ns_;
    sessions_.emplace(handle.token, Entry{handle, 0});
    return handle;
}

core::Status SessionRegistry::validate(std::string_view token)
{
    if (token.size() != kTokenBytes) {
        return not_authenticated();
    }
    const std::uint64_t t = now();
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(std::string(token));
    if (it == sessions_.end()) {
        return not_authenticated();
    }
    if (it->second.handle.expires_at <= t) {
        sessions_.erase(it);
        return not_authenticated();
    }
    it->second.handle.expires_at = t + ttl_ns_;
    return {};
}

core::Status SessionRegistry::logout(std::string_view token)
{
    std::lock_guard lock(mutex_);
    return sessions_.erase(std::string(token)) > 0 ? core::Status() : not_authenticated();
}

core::Status SessionRegistry::reserve_staging(std::string_view token, std::uint64_t bytes)
{
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(std::string(token));
    if (it == sessions_.end()) {
        return not_authenticated();
    }
    if (bytes > kMaxStagedBytes - it->second.staged) {
        return core::make_error(core::StatusCode::size_limit_exceeded, "session upload staging limit reached");
    }
    it->second.staged += bytes;
    return {};
}

void SessionRegistry::release_staging(std::string_view token, std::uint64_t bytes)
{
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(std::string(token));
    if (it != sessions_.end()) {
        it->second.staged -= std::min(bytes, it->second.staged);
    }
}

std::size_t SessionRegistry::live_count()
{
    const std::uint64_t t = now();
    std::lock_guard lock(mutex_);
    purge_expired(t);
    return sessions_.size();
}

}  // namespace mikfs::auth
