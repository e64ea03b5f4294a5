#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "mikfs/core/status.hpp"

namespace mikfs::core {

inline constexpr std::size_t kMaxGroupKeyLength = 64;

// One half of an ownership handle. An empty key is the "matches all"
// wildcard.
class GroupOwner {
public:
    GroupOwner() = default;

    // Fails with InvalidArgument for keys longer than 64 bytes.
    static Result<GroupOwner> from_bytes(std::string_view key);

    const std::string& key() const { return key_; }
    bool is_wildcard() const { return key_.empty(); }

    friend bool operator==(const GroupOwner&, const GroupOwner&) = default;
    friend auto operator<=>(const GroupOwner&, const GroupOwner&) = default;

private:
    explicit GroupOwner(std::string key) : key_(std::move(key)) {}

    std::string key_;
};

// True when either key is empty, or both have the same length and bytes.
bool group_matches(const GroupOwner& a, const GroupOwner& b);

struct Ownership {
    GroupOwner host_group;
    GroupOwner user_group;

    friend bool operator==(const Ownership&, const Ownership&) = default;
};

enum class Membership { owner, user_group, host_group, other };

std::string_view membership_name(Membership membership);

Membership determine_membership(const Ownership& caller, const Ownership& node);

struct Rights {
    bool read = false;
    bool write = false;
    bool execute = false;

    friend bool operator==(const Rights&, const Rights&) = default;
};

class PermissionsMask {
public:
    static constexpr std::uint32_t kSticky = 0x1000;
    static constexpr std::uint32_t kOwnerRead = 0x800;
    static constexpr std::uint32_t kOwnerWrite = 0x400;
    static constexpr std::uint32_t kOwnerExecute = 0x200;
    static constexpr std::uint32_t kUserGroupRead = 0x100;
    static constexpr std::uint32_t kUserGroupWrite = 0x080;
    static constexpr std::uint32_t kUserGroupExecute = 0x040;
    static constexpr std::uint32_t kHostGroupRead = 0x020;
    static constexpr std::uint32_t kHostGroupWrite = 0x010;
    static constexpr std::uint32_t kHostGroupExecute = 0x008;
    static constexpr std::uint32_t kOtherRead = 0x004;
    static constexpr std::uint32_t kOtherWrite = 0x002;
    static constexpr std::uint32_t kOtherExecute = 0x001;
    static constexpr std::uint32_t kAllBits = 0x1FFF;

    constexpr PermissionsMask() = default;
    constexpr explicit PermissionsMask(std::uint32_t bits) : bits_(bits & kAllBits) {}

    // Rejects values with bits above bit 12.
    static Result<PermissionsMask> from_wire(std::uint32_t bits);

    constexpr std::uint32_t bits() const { return bits_; }
    constexpr bool sticky() const { return (bits_ & kSticky) != 0; }

    Rights rights_for(Membership membership) const;

    // "t rwx r-x r-- ---" (sticky flag, then owner usergroup hostgroup other).
    std::string to_string() const;

    friend bool operator==(const PermissionsMask&, const PermissionsMask&) = default;

private:
    std::uint32_t bits_ = 0;
};

inline Rights effective_rights(PermissionsMask mask, Membership membership)
{
    return mask.rights_for(membership);
}

}  // namespace mikfs::core
