#include "mikfs/core/ownership.hpp"

namespace mikfs::core {

Result<GroupOwner> GroupOwner::from_bytes(std::string_view key)
{
    if (key.size() > kMaxGroupKeyLength) {
        return make_error(StatusCode::invalid_argument,
                          "group key of " + std::to_string(key.size()) + " bytes exceeds 64");
    }
    return GroupOwner(std::string(key));
}

bool group_matches(const GroupOwner& a, const GroupOwner& b)
{
    if (a.is_wildcard() || b.is_wildcard()) {
        return true;
    }
    return a.key() == b.key();
}

std::string_view membership_name(Membership membership)
{
    switch (membership) {
    case Membership::owner:
        return "Owner";
    case Membership::user_group:
        return "UserGroup";
    case Membership::host_group:
        return "HostGroup";
    case Membership::other:
        return "Other";
    }
    return "?";
}

Membership determine_membership(const Ownership& caller, const Ownership& node)
{
    const bool host = group_matches(caller.host_group, node.host_group);
    const bool user = group_matches(caller.user_group, node.user_group);
    if (host && user) {
        return Membership::owner;
    }
    if (user) {
        return Membership::user_group;
    }
    if (host) {
        return Membership::host_group;
    }
    return Membership::other;
}

Result<PermissionsMask> PermissionsMask::from_wire(std::uint32_t bits)
{
    if ((bits & ~kAllBits) != 0) {
        return make_error(StatusCode::invalid_argument, "permission bits above 0x1FFF are not defined");
    }
    return PermissionsMask(bits);
}

Rights PermissionsMask::rights_for(Membership membership) const
{
    unsigned shift = 0;
    switch (membership) {
    case Membership::owner:
        shift = 9;
        break;
    case Membership::user_group:
        shift = 6;
        break;
    case Membership::host_group:
        shift = 3;
        break;
    case Membership::other:
        shift = 0;
        break;
    }
    const std::uint32_t triple = (bits_ >> shift) & 7u;
    return Rights{(triple & 4u) != 0, (triple & 2u) != 0, (triple & 1u) != 0};
}

std::string PermissionsMask::to_string() const
{
    std::string out;
    out += sticky() ? 't' : '-';
    for (unsigned shift : {9u, 6u, 3u, 0u}) {
        out += ' ';
        const std::uint32_t triple = (bits_ >> shift) & 7u;
        out += (triple & 4u) ? 'r' : '-';
        out += (triple & 2u) ? 'w' : '-';
        out += (triple & 1u) ? 'x' : '-';
    }
    return out;
}

}  // namespace mikfs::core
