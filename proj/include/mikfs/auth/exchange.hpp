#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mikfs/auth/session.hpp"
#include "mikfs/auth/users.hpp"
#include "mikfs/core/status.hpp"

namespace mikfs::auth {

enum class Scheme { durin, user_password };

std::string_view scheme_name(Scheme scheme);

struct AuthConfig {
    Scheme scheme = Scheme::durin;
    std::string watchword;  // Durin
    UserTable users;        // UserPassword
    // Keys the deterministic decoy salt handed out for unknown users.
    std::string server_secret;
};

struct Challenge {
    Scheme scheme = Scheme::durin;
    std::string nonce;  // 32 random bytes
    std::string salt;   // UserPassword only
};

// One challenge-response exchange:
//   fresh --begin--> pending --respond--> granted | denied
// Terminal states absorb; a further call yields InvalidArgument.
class AuthExchange {
public:
    enum class State { fresh, pending, granted, denied };

    AuthExchange(const AuthConfig& config, SessionRegistry& sessions) : config_(config), sessions_(sessions) {}

    // UserPassword needs a username in the hello (InvalidArgument otherwise)
    // so the matching salt can go out with the challenge. Unknown users get a
    // decoy salt that is stable per name.
    core::Result<Challenge> begin(std::string_view client_name, std::string_view username);

    // SchemeUnsupported when the answer does not fit the active scheme,
    // AuthFailed for a wrong answer. Both end the exchange.
    core::Result<SessionHandle> respond_durin(std::string_view watchword);
    core::Result<SessionHandle> respond_user_password(std::string_view username, std::string_view proof);

    State state() const { return state_; }

private:
    core::Result<SessionHandle> finish(bool accepted);
    core::Status deny(core::Status status);

    const AuthConfig& config_;
    SessionRegistry& sessions_;
    State state_ = State::fresh;
    std::string nonce_;
    std::string username_;
};

// What every failed answer returns, whatever the cause.
core::Status auth_failed();

}  // namespace mikfs::auth
