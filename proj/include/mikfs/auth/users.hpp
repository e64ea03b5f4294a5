#pragma once

#include <map>
#include <string>
#include <string_view>

#include "mikfs/core/status.hpp"

namespace mikfs::auth {

struct UserRecord {
    std::string salt;
    std::string verifier;  // SHA-256(salt || password)
};

// Users file: one `username:salt-hex:verifier-hex` per line; blank lines and
// lines starting with '#' are ignored.
class UserTable {
public:
    static core::Result<UserTable> parse(std::string_view text);
    static core::Result<UserTable> load(const std::string& path);

    const UserRecord* find(std::string_view username) const;
    // InvalidArgument for an empty name or one containing ':' or a newline.
    core::Status add(std::string username, UserRecord record);

    std::size_t size() const { return users_.size(); }

private:
    std::map<std::string, UserRecord, std::less<>> users_;
};

// A users-file line for username with a fresh 16-byte salt.
core::Result<std::string> make_user_line(std::string_view username, std::string_view password);

}  // namespace mikfs::auth
