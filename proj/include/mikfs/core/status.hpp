#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace mikfs::core {

// Numbering matches mikfs.v1.StatusCode on the wire.
enum class StatusCode : std::uint32_t {
    ok = 0,
    not_authenticated = 1,
    permission_denied = 2,
    not_found = 3,
    already_exists = 4,
    invalid_path = 5,
    invalid_argument = 6,
    read_only_filesystem = 7,
    append_only_violation = 8,
    size_limit_exceeded = 9,
    scheme_unsupported = 10,
    auth_failed = 11,
    not_a_directory = 12,
    not_a_file = 13,
    directory_not_empty = 14,
    cycle_rejected = 15,
    subscription_overflow = 16,
};

std::string_view status_code_name(StatusCode code);

class [[nodiscard]] Status {
public:
    Status() = default;
    Status(StatusCode code, std::string message) : code_(code), message_(std::move(message)) {}

    static Status ok_status() { return {}; }

    bool ok() const { return code_ == StatusCode::ok; }
    explicit operator bool() const { return ok(); }
    StatusCode code() const { return code_; }
    const std::string& message() const { return message_; }

    // "NotFound: /a/b missing"
    std::string to_string() const;

private:
    StatusCode code_ = StatusCode::ok;
    std::string message_;
};

inline Status make_error(StatusCode code, std::string message) { return Status(code, std::move(message)); }

// Holds either a value or a non-ok Status.
template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : state_(std::move(value)) {}
    Result(Status status) : state_(std::move(status)) {}

    bool ok() const { return std::holds_alternative<T>(state_); }
    explicit operator bool() const { return ok(); }

    T& value() & { return std::get<T>(state_); }
    const T& value() const& { return std::get<T>(state_); }
    T&& value() && { return std::get<T>(std::move(state_)); }

    T& operator*() & { return value(); }
    const T& operator*() const& { return value(); }
    T&& operator*() && { return std::move(*this).value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

    Status status() const { return ok() ? Status() : std::get<Status>(state_); }
    StatusCode code() const { return ok() ? StatusCode::ok : std::get<Status>(state_).code(); }

private:
    std::variant<T, Status> state_;
};

}  // namespace mikfs::core
