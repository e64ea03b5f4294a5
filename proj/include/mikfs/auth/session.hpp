#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "mikfs/core/status.hpp"

namespace mikfs::auth {

using Clock = std::function<std::uint64_t()>;  // nanoseconds since the epoch

inline constexpr std::size_t kTokenBytes = 32;
inline constexpr std::uint64_t kDefaultSessionTtlNs = 24ull * 3600 * 1000000000ull;
inline constexpr std::uint64_t kMaxStagedBytes = 2147483647;

struct SessionHandle {
    std::string token;
    std::uint64_t created_at = 0;
    std::uint64_t expires_at = 0;
};

// Live sessions keyed by token. Every successful validate() slides the
// expiry forward by the TTL. Thread-safe.
class SessionRegistry {
public:
    explicit SessionRegistry(std::uint64_t ttl_ns = kDefaultSessionTtlNs, Clock clock = {});

    SessionHandle create();

    // NotAuthenticated for unknown, expired or logged-out tokens.
    core::Status validate(std::string_view token);

    // NotAuthenticated if the token was not live.
    core::Status logout(std::string_view token);

    // Reserves bytes of chunked-upload staging for the session;
    // SizeLimitExceeded when the per-session cap would be passed.
    core::Status reserve_staging(std::string_view token, std::uint64_t bytes);
    void release_staging(std::string_view token, std::uint64_t bytes);

    std::size_t live_count();

private:
    struct Entry {
        SessionHandle handle;
        std::uint64_t staged = 0;
    };

    std::uint64_t now() const;
    void purge_expired(std::uint64_t now);

    std::uint64_t ttl_ns_;
    Clock clock_;
    std::mutex mutex_;
    std::unordered_map<std::string, Entry> sessions_;
};

}  // namespace mikfs::auth
