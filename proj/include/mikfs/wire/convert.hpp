#pragma once

#include "mikfs.pb.h"

#include "mikfs/core/ownership.hpp"
#include "mikfs/core/status.hpp"
#include "mikfs/core/tree.hpp"

namespace mikfs::wire {

namespace v1 = ::mikfs::v1;

v1::Status to_proto(const core::Status& status);
core::Status from_proto(const v1::Status& status);

// InvalidArgument when either key exceeds 64 bytes.
core::Result<core::Ownership> from_proto(const v1::Ownership& ownership);
v1::Ownership to_proto(const core::Ownership& ownership);

v1::NodeKind to_proto(core::NodeKind kind);

void fill(v1::NodeAttributes& out, const core::PublicAttributes& attributes);
core::PublicAttributes from_proto(v1::NodeKind kind, const v1::NodeAttributes& attributes);

// Sets the status field of any response message.
template <class Response>
void set_status(Response& response, const core::Status& status)
{
    *response.mutable_status() = to_proto(status);
}

}  // namespace mikfs::wire
