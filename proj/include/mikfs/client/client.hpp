#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mikfs.pb.h"
#include "mikfs/core/attributes.hpp"
#include "mikfs/core/ownership.hpp"
#include "mikfs/core/status.hpp"
#include "mikfs/core/tree.hpp"
#include "mikfs/rpc/channel.hpp"

namespace mikfs::client {

inline constexpr std::uint16_t kDefaultPort = 9959;

struct MikfsUrl {
    std::string host;
    std::uint16_t port = kDefaultPort;
    std::string path;  // raw, no percent-decoding; "/" when absent
};

// mikfs://host[:port][/path]. IPv6 hosts go in brackets.
core::Result<MikfsUrl> parse_url(std::string_view raw);

struct FileData {
    std::string content;
    core::PublicAttributes attributes;
};

struct PutResult {
    bool created = false;
    core::PublicAttributes attributes;
};

struct ZipData {
    std::string archive;
    std::uint32_t omitted = 0;
};

struct SearchHit {
    std::string path;
    core::PublicAttributes attributes;
};

struct SearchResults {
    std::vector<SearchHit> hits;
    bool truncated = false;
};

// New ownership for created nodes.
struct Creation {
    core::Ownership owner;
    core::PermissionsMask permissions;
};

// A server stream of change events.
class ChangeStream {
public:
    explicit ChangeStream(std::unique_ptr<rpc::ClientCall> call) : call_(std::move(call)) {}

    // Blocks for the next event. False when the stream ended; status() then
    // says why (OK after a clean end, SubscriptionOverflow, ...).
    bool next(v1::ChangeEvent& event);
    const core::Status& status() const { return status_; }
    // Safe from another thread; a blocked next() then throws TransportError.
    void cancel() { call_->cancel(); }

private:
    std::unique_ptr<rpc::ClientCall> call_;
    core::Status status_;
};

class SearchStream {
public:
    explicit SearchStream(std::unique_ptr<rpc::ClientCall> call) : call_(std::move(call)) {}

    // The first batch is the initial result set.
    bool next(std::vector<SearchHit>& batch, bool& initial);
    const core::Status& status() const { return status_; }
    void cancel() { call_->cancel(); }

private:
    std::unique_ptr<rpc::ClientCall> call_;
    core::Status status_;
};

// Typed access to every mikfs method over one channel. Application errors
// come back as Status; transport failures throw rpc::TransportError.
class MikfsClient {
public:
    MikfsClient(std::shared_ptr<rpc::Channel> channel) : channel_(std::move(channel)) {}

    static core::Result<std::unique_ptr<MikfsClient>> connect(const std::string& host, std::uint16_t port,
                                                              const rpc::TlsClientConfig& tls);

    rpc::Channel& channel() { return *channel_; }
    const std::string& token() const { return token_; }
    void set_token(std::string token) { token_ = std::move(token); }

    core::Result<v1::GetApiInfoResponse> get_api_info();
    core::Status authenticate_durin(const std::string& watchword, const std::string& client_name = "mikfs-client");
    core::Status authenticate_user(const std::string& username, const std::string& password,
                                   const std::string& client_name = "mikfs-client");
    core::Status logout();
    // Fetched once per session and then cached.
    core::Result<core::GroupOwner> host_write_handle();

    core::Result<FileData> get_file(const std::string& path, const core::Ownership& caller);
    // chunk_sizes, when given, receives the length of every chunk.
    core::Result<FileData> get_file_in_chunks(const std::string& path, const core::Ownership& caller,
                                              std::uint32_t chunk_size = 0,
                                              std::vector<std::size_t>* chunk_sizes = nullptr);
    core::Result<PutResult> put_file(const std::string& path, std::string content, const core::Ownership& caller,
                                     const Creation& creation);
    core::Result<PutResult> put_file_in_chunks(const std::string& path, std::string_view content,
                                               const core::Ownership& caller, const Creation& creation,
                                               std::uint32_t chunk_size = 0);
    core::Result<core::PublicAttributes> create_directory(const std::string& path, const core::Ownership& caller,
                                                          const Creation& creation);
    core::Result<std::vector<core::DirectoryEntry>> read_directory(const std::string& path,
                                                                   const core::Ownership& caller);
    core::Status move_file(const std::string& from, const std::string& to, const core::Ownership& caller);
    core::Status move_directory(const std::string& from, const std::string& to, const core::Ownership& caller);
    core::Status copy_file(const std::string& from, const std::string& to, const core::Ownership& caller,
                           const Creation& creation);
    core::Status copy_directory(const std::string& from, const std::string& to, const core::Ownership& caller,
                                const Creation& creation);
    core::Status delete_file(const std::string& path, const core::Ownership& caller);
    core::Status delete_directory(const std::string& path, const core::Ownership& caller, bool recursive);
    core::Result<ZipData> get_directory_zip(const std::string& path, const core::Ownership& caller);
    core::Result<ZipData> get_directory_zip_in_chunks(const std::string& path, const core::Ownership& caller,
                                                      std::uint32_t chunk_size = 0);
    core::Result<std::uint32_t> create_directory_unzip(const std::string& path, std::string archive,
                                                       const core::Ownership& caller, const Creation& creation);
    core::Result<std::uint32_t> create_directory_unzip_in_chunks(const std::string& path, std::string_view archive,
                                                                 const core::Ownership& caller,
                                                                 const Creation& creation,
                                                                 std::uint32_t chunk_size = 0);
    core::Status set_permissions(const std::string& path, const core::Ownership& caller,
                                 core::PermissionsMask permissions);
    core::Result<std::pair<core::PermissionsMask, core::NodeKind>> get_permissions(const std::string& path,
                                                                                   const core::Ownership& caller);
    core::Result<core::CustomAttributes> update_attributes(const std::string& path, const core::Ownership& caller,
                                                           const std::vector<core::AttributeUpdate>& updates);
    core::Result<core::PublicAttributes> get_attributes(const std::string& path, const core::Ownership& caller);

    // Returns once the server acknowledged the subscription.
    core::Result<std::unique_ptr<ChangeStream>> subscribe(const std::string& prefix, const std::string& name_glob,
                                                          const std::vector<v1::ChangeKind>& kinds = {});
    core::Result<SearchResults> search(const v1::SearchQuery& query, const core::Ownership& caller);
    core::Result<std::unique_ptr<SearchStream>> search_subscribe(const v1::SearchQuery& query,
                                                                 const core::Ownership& caller);

private:
    template <class Response>
    Response call(std::uint32_t method, const google::protobuf::MessageLite& request);

    template <class Response>
    core::Result<Response> upload(std::uint32_t method, v1::ChunkHeader header, std::string_view data);

    std::shared_ptr<rpc::Channel> channel_;
    std::string token_;
    std::optional<core::GroupOwner> host_handle_;
};

}  // namespace mikfs::client
