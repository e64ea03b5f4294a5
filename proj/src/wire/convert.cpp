#include "mikfs/wire/convert.hpp"

namespace mikfs::wire {

v1::Status to_proto(const core::Status& status)
{
    v1::Status out;
    out.set_code(static_cast<v1::StatusCode>(status.code()));
    out.set_message(status.message());
    return out;
}

core::Status from_proto(const v1::Status& status)
{
    if (status.code() == v1::STATUS_OK) {
        return {};
    }
    return core::make_error(static_cast<core::StatusCode>(status.code()), status.message());
}

core::Result<core::Ownership> from_proto(const v1::Ownership& ownership)
{
    auto host = core::GroupOwner::from_bytes(ownership.host_group().key());
    if (!host.ok()) {
        return host.status();
    }
    auto user = core::GroupOwner::from_bytes(ownership.user_group().key());
    if (!user.ok()) {
        return user.status();
    }
    return core::Ownership{std::move(host).value(), std::move(user).value()};
}

v1::Ownership to_proto(const core::Ownership& ownership)
{
    v1::Ownership out;
    out.mutable_host_group()->set_key(ownership.host_group.key());
    out.mutable_user_group()->set_key(ownership.user_group.key());
    return out;
}

v1::NodeKind to_proto(core::NodeKind kind)
{
    return kind == core::NodeKind::file ? v1::NODE_KIND_FILE : v1::NODE_KIND_DIRECTORY;
}

void fill(v1::NodeAttributes& out, const core::PublicAttributes& attributes)
{
    out.set_size(attributes.size);
    out.set_last_modified_time(attributes.last_modified_time);
    out.set_permissions(attributes.permissions.bits());
    out.clear_custom_attributes();
    for (const auto& [name, value] : attributes.custom) {
        auto* attribute = out.add_custom_attributes();
        attribute->set_name(name);
        attribute->set_value(value);
    }
}

core::PublicAttributes from_proto(v1::NodeKind kind, const v1::NodeAttributes& attributes)
{
    core::PublicAttributes out;
    out.kind = kind == v1::NODE_KIND_DIRECTORY ? core::NodeKind::directory : core::NodeKind::file;
    out.size = attributes.size();
    out.last_modified_time = attributes.last_modified_time();
    out.permissions = core::PermissionsMask(attributes.permissions() & core::PermissionsMask::kAllBits);
    for (const auto& attribute : attributes.custom_attributes()) {
        out.custom[attribute.name()] = attribute.value();
    }
    return out;
}

}  // namespace mikfs::wire
