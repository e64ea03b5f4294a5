#include "mikfs/auth/users.hpp"

#include <fstream>
#include <sstream>

#include "mikfs/auth/crypto.hpp"

namespace mikfs::auth {

namespace {

core::Status check_username(std::string_view username)
{
    if (username.empty() || username.find_first_of(":\r\n") != std::string_view::npos) {
        return core::make_error(core::StatusCode::invalid_argument,
                                "user names must be non-empty and contain no ':' or line breaks");
    }
    return {};
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

core::Result<UserTable> UserTable::parse(std::string_view text)
{
    UserTable table;
    std::size_t line_number = 0;
    while (!text.empty()) {
        const std::size_t end = text.find('\n');
        std::string_view line = trim(text.substr(0, end));
        text = end == std::string_view::npos ? std::string_view() : text.substr(end + 1);
        ++line_number;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::size_t first = line.find(':');
        const std::size_t second = first == std::string_view::npos ? first : line.find(':', first + 1);
        auto bad = [&](std::string why) {
            return core::make_error(core::StatusCode::invalid_argument,
                                    "users file line " + std::to_string(line_number) + ": " + why);
        };
        if (second == std::string_view::npos || line.find(':', second + 1) != std::string_view::npos) {
            return bad("expected username:salt-hex:verifier-hex");
        }
        auto salt = from_hex(line.substr(first + 1, second - first - 1));
        auto verifier = from_hex(line.substr(second + 1));
        if (!salt || !verifier || verifier->size() != 32) {
            return bad("salt and verifier must be hex; the verifier is 32 bytes");
        }
        if (auto status = table.add(std::string(line.substr(0, first)), {*salt, *verifier}); !status.ok()) {
            return bad(status.message());
        }
    }
    return table;
}

core::Result<UserTable> UserTable::load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return core::make_error(core::StatusCode::not_found, "cannot open users file " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str());
}

const UserRecord* UserTable::find(std::string_view username) const
{
    auto it = users_.find(username);
    return it == users_.end() ? nullptr : &it->second;
}

core::Status UserTable::add(std::string username, UserRecord record)
{
    if (auto status = check_username(username); !status.ok()) {
        return status;
    }
    if (!users_.emplace(std::move(username), std::move(record)).second) {
        return core::make_error(core::StatusCode::already_exists, "duplicate user");
    }
    return {};
}

core::Result<std::string> make_user_line(std::string_view username, std::string_view password)
{
    if (auto status = check_username(username); !status.ok()) {
        return status;
    }
    const std::string salt = random_bytes(16);
    return std::string(username) + ":" + to_hex(salt) + ":" + to_hex(password_verifier(salt, password));
}

}  // namespace mikfs::auth
