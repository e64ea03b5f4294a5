#include "mikfs/core/status.hpp"

namespace mikfs::core {

std::string_view status_code_name(StatusCode code)
{
    switch (code) {
    case StatusCode::ok:
        return "OK";
    case StatusCode::not_authenticated:
        return "NotAuthenticated";
    case StatusCode::permission_denied:
        return "PermissionDenied";
    case StatusCode::not_found:
        return "NotFound";
    case StatusCode::already_exists:
        return "AlreadyExists";
    case StatusCode::invalid_path:
        return "InvalidPath";
    case StatusCode::invalid_argument:
        return "InvalidArgument";
    case StatusCode::read_only_filesystem:
        return "ReadOnlyFilesystem";
    case StatusCode::append_only_violation:
        return "AppendOnlyViolation";
    case StatusCode::size_limit_exceeded:
        return "SizeLimitExceeded";
    case StatusCode::scheme_unsupported:
        return "SchemeUnsupported";
    case StatusCode::auth_failed:
        return "AuthFailed";
    case StatusCode::not_a_directory:
        return "NotADirectory";
    case StatusCode::not_a_file:
        return "NotAFile";
    case StatusCode::directory_not_empty:
        return "DirectoryNotEmpty";
    case StatusCode::cycle_rejected:
        return "CycleRejected";
    case StatusCode::subscription_overflow:
        return "SubscriptionOverflow";
    }
    return "Unknown";
}

std::string Status::to_string() const
{
    std::string out(status_code_name(code_));
    if (!message_.empty()) {
        out += ": ";
        out += message_;
    }
    return out;
}

}  // namespace mikfs::core
