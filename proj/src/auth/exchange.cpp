#include "mikfs/auth/exchange.hpp"

#include "mikfs/auth/crypto.hpp"

namespace mikfs::auth {

namespace {

constexpr std::size_t kNonceBytes = 32;
constexpr std::size_t kDecoySaltBytes = 16;

core::Status closed()
{
    return core::make_error(core::StatusCode::invalid_argument, "authentication exchange is closed");
}

}  // namespace

std::string_view scheme_name(Scheme scheme)
{
    return scheme == Scheme::durin ? "Durin" : "UserPassword";
}

core::Status auth_failed()
{
    return core::make_error(core::StatusCode::auth_failed, "authentication failed");
}

core::Status AuthExchange::deny(core::Status status)
{
    state_ = State::denied;
    nonce_.clear();
    return status;
}

core::Result<Challenge> AuthExchange::begin(std::string_view /*client_name*/, std::string_view username)
{
    if (state_ != State::fresh) {
        return closed();
    }
    Challenge challenge;
    challenge.scheme = config_.scheme;
    if (config_.scheme == Scheme::user_password) {
        if (username.empty()) {
            return deny(core::make_error(core::StatusCode::invalid_argument, "hello must name a user"));
        }
        if (const UserRecord* user = config_.users.find(username)) {
            challenge.salt = user->salt;
        } else {
            challenge.salt = hmac_sha256(config_.server_secret, "salt:" + std::string(username))
                                 .substr(0, kDecoySaltBytes);
        }
        username_ = username;
    }
    nonce_ = random_bytes(kNonceBytes);
    challenge.nonce = nonce_;
    state_ = State::pending;
    return challenge;
}

core::Result<SessionHandle> AuthExchange::finish(bool accepted)
{
    nonce_.clear();
    if (!accepted) {
        state_ = State::denied;
        return auth_failed();
    }
    state_ = State::granted;
    return sessions_.create();
}

core::Result<SessionHandle> AuthExchange::respond_durin(std::string_view watchword)
{
    if (state_ != State::pending) {
        return closed();
    }
    if (config_.scheme != Scheme::durin) {
        return deny(core::make_error(core::StatusCode::scheme_unsupported, "server expects UserPassword"));
    }
    return finish(constant_time_equal(watchword, config_.watchword));
}

core::Result<SessionHandle> AuthExchange::respond_user_password(std::string_view username, std::string_view proof)
{
    if (state_ != State::pending) {
        return closed();
    }
    if (config_.scheme != Scheme::user_password) {
        return deny(core::make_error(core::StatusCode::scheme_unsupported, "server expects Durin"));
    }
    // The answer may repeat the username; it must then match the hello.
    const bool same_user = username.empty() || username == username_;
    const UserRecord* user = config_.users.find(username_);
    // Unknown users still cost one HMAC so timing does not reveal them.
    const std::string verifier =
        user != nullptr ? user->verifier : hmac_sha256(config_.server_secret, "verifier:" + username_);
    const bool proof_ok = constant_time_equal(password_proof(verifier, nonce_), proof);
    return finish(user != nullptr && same_user && proof_ok);
}

}  // namespace mikfs::auth
