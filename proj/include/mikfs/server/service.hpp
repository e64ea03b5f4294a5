#pragma once

#include <cstdint>
#include <shared_mutex>
#include <string>

#include "mikfs/auth/exchange.hpp"
#include "mikfs/auth/session.hpp"
#include "mikfs/core/ownership.hpp"
#include "mikfs/core/tree.hpp"
#include "mikfs/rpc/server.hpp"
#include "mikfs/server/events.hpp"
#include "mikfs/server/mutability.hpp"

namespace mikfs::server {

inline constexpr std::uint32_t kDefaultChunkSize = 64 * 1024;
inline constexpr std::uint32_t kMaxChunkSize = 1024 * 1024;
inline constexpr std::string_view kServerName = "mikfs-server";
inline constexpr std::string_view kServerVersion = "1.0.0";
inline constexpr std::string_view kApiVersion = "1";

struct ServiceConfig {
    Mode mode = Mode::read_write;
    core::GroupOwner host_key;
    auth::AuthConfig auth;
    std::uint64_t session_ttl_ns = auth::kDefaultSessionTtlNs;
    auth::Clock clock;  // sessions only; empty = system clock
};

// The 27 mikfs methods over one in-memory tree. Each call takes the tree
// lock for its whole critical section: shared for reads, exclusive for
// mutations. Request checks run in a fixed order and the first failure is
// the answer:
//   session token, request parsing, mutability gate, owner host key on
//   creation, authorize, tree operation; events go out before the lock is
//   released.
class FileSystemService {
public:
    FileSystemService(ServiceConfig config, core::Tree tree);

    FileSystemService(const FileSystemService&) = delete;
    FileSystemService& operator=(const FileSystemService&) = delete;

    // Handlers capture this; the service must outlive the rpc server.
    rpc::Service rpc_service();

    // Consistent encoding of the current tree (shared lock).
    std::string snapshot_bytes();

    auth::SessionRegistry& sessions() { return sessions_; }
    EventHub& events() { return events_; }
    const ServiceConfig& config() const { return config_; }

private:
    void get_api_info(rpc::ServerCall& call);
    void authenticate(rpc::ServerCall& call);
    void logout(rpc::ServerCall& call);
    void get_host_write_handle(rpc::ServerCall& call);
    void get_file(rpc::ServerCall& call);
    void get_file_in_chunks(rpc::ServerCall& call);
    void put_file(rpc::ServerCall& call);
    void put_file_in_chunks(rpc::ServerCall& call);
    void create_directory(rpc::ServerCall& call);
    void read_directory_contents(rpc::ServerCall& call);
    void move(rpc::ServerCall& call, core::NodeKind kind);
    void copy(rpc::ServerCall& call, core::NodeKind kind);
    void delete_file(rpc::ServerCall& call);
    void delete_directory(rpc::ServerCall& call);
    void get_directory_zip(rpc::ServerCall& call);
    void get_directory_zip_in_chunks(rpc::ServerCall& call);
    void create_directory_unzip(rpc::ServerCall& call);
    void create_directory_unzip_in_chunks(rpc::ServerCall& call);
    void set_permissions(rpc::ServerCall& call);
    void get_permissions(rpc::ServerCall& call);
    void update_attributes(rpc::ServerCall& call);
    void get_attributes(rpc::ServerCall& call);
    void change_subscribe(rpc::ServerCall& call);
    void search(rpc::ServerCall& call);
    void search_subscribe(rpc::ServerCall& call);

    struct FileWrite;
    struct UnzipRequest;
    struct Upload;
    // Shared tails of the whole and chunked variants.
    core::Status commit_file(const FileWrite& write, bool& created, core::PublicAttributes& attributes);
    core::Status commit_unzip(const UnzipRequest& request, std::uint32_t& created_entries);
    // Reads header + chunks of a client-streamed upload into the staging
    // buffer, enforcing the session's staging budget.
    core::Status receive_upload(rpc::ServerCall& call, Upload& upload, std::uint64_t size_limit);

    core::Status check_owner_host(const core::Ownership& owner) const;
    void publish(ChangeKind kind, const core::Path& path, core::Timestamp now,
                 const core::Path* new_path = nullptr);

    ServiceConfig config_;
    auth::SessionRegistry sessions_;
    EventHub events_;
    std::shared_mutex mutex_;
    core::Tree tree_;
};

}  // namespace mikfs::server
