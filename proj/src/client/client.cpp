#include "mikfs/client/client.hpp"

#include <charconv>

#include "mikfs/auth/crypto.hpp"
#include "mikfs/wire/convert.hpp"
#include "mikfs/wire/methods.hpp"

namespace mikfs::client {

namespace m = wire::method;
using core::Status;
using core::StatusCode;

namespace {

constexpr std::uint32_t kUploadChunk = 64 * 1024;
constexpr std::uint32_t kMaxChunk = 1024 * 1024;

void set_caller(v1::Ownership* out, const core::Ownership& caller) { *out = wire::to_proto(caller); }

template <class Request>
void set_creation(Request& request, const Creation& creation)
{
    *request.mutable_owner() = wire::to_proto(creation.owner);
    request.set_permissions(creation.permissions.bits());
}

Status status_of(const v1::Status& status) { return wire::from_proto(status); }

core::PublicAttributes attributes_of(v1::NodeKind kind, const v1::NodeAttributes& attributes)
{
    return wire::from_proto(kind, attributes);
}

}  // namespace

core::Result<MikfsUrl> parse_url(std::string_view raw)
{
    constexpr std::string_view kScheme = "mikfs://";
    if (raw.substr(0, kScheme.size()) != kScheme) {
        return core::make_error(StatusCode::invalid_argument, "not a mikfs:// URL: " + std::string(raw));
    }
    std::string_view rest = raw.substr(kScheme.size());
    const std::size_t slash = rest.find('/');
    std::string_view authority = rest.substr(0, slash);
    MikfsUrl url;
    url.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));

    std::string_view port_text;
    if (!authority.empty() && authority.front() == '[') {
        const std::size_t close = authority.find(']');
        if (close == std::string_view::npos) {
            return core::make_error(StatusCode::invalid_argument, "unterminated IPv6 host in " + std::string(raw));
        }
        url.host = std::string(authority.substr(1, close - 1));
        std::string_view after = authority.substr(close + 1);
        if (!after.empty()) {
            if (after.front() != ':') {
                return core::make_error(StatusCode::invalid_argument, "junk after host in " + std::string(raw));
            }
            port_text = after.substr(1);
            if (port_text.empty()) {
                return core::make_error(StatusCode::invalid_argument, "empty port in " + std::string(raw));
            }
        }
    } else {
        const std::size_t colon = authority.rfind(':');
        url.host = std::string(authority.substr(0, colon));
        if (colon != std::string_view::npos) {
            port_text = authority.substr(colon + 1);
            if (port_text.empty()) {
                return core::make_error(StatusCode::invalid_argument, "empty port in " + std::string(raw));
            }
        }
    }
    if (url.host.empty()) {
        return core::make_error(StatusCode::invalid_argument, "missing host in " + std::string(raw));
    }
    if (!port_text.empty()) {
        unsigned port = 0;
        auto [end, error] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
        if (error != std::errc() || end != port_text.data() + port_text.size() || port == 0 || port > 65535) {
            return core::make_error(StatusCode::invalid_argument, "bad port '" + std::string(port_text) + "'");
        }
        url.port = static_cast<std::uint16_t>(port);
    }
    return url;
}

bool ChangeStream::next(v1::ChangeEvent& event)
{
    v1::FileSystemChangeSubscribeResponse response;
    while (call_->read(response)) {
        status_ = status_of(response.status());
        if (!status_.ok()) {
            return false;
        }
        if (response.has_event()) {
            event = response.event();
            return true;
        }
    }
    return false;
}

bool SearchStream::next(std::vector<SearchHit>& batch, bool& initial)
{
    v1::SearchSubscribeResponse response;
    if (!call_->read(response)) {
        return false;
    }
    status_ = status_of(response.status());
    if (!status_.ok()) {
        return false;
    }
    batch.clear();
    for (const auto& result : response.results()) {
        batch.push_back({result.path(), attributes_of(result.kind(), result.attributes())});
    }
    initial = response.initial();
    return true;
}

core::Result<std::unique_ptr<MikfsClient>> MikfsClient::connect(const std::string& host, std::uint16_t port,
                                                               const rpc::TlsClientConfig& tls)
{
    auto context = rpc::TlsContext::client(tls);
    if (!context.ok()) {
        return context.status();
    }
    return std::make_unique<MikfsClient>(rpc::Channel::create(*context, host, port));
}

template <class Response>
Response MikfsClient::call(std::uint32_t method, const google::protobuf::MessageLite& request)
{
    return rpc::unary_call<Response>(*channel_, wire::kMikfsService, method, request);
}

template <class Response>
core::Result<Response> MikfsClient::upload(std::uint32_t method, v1::ChunkHeader header, std::string_view data)
{
    const std::uint32_t chunk_size =
        header.chunk_size() == 0 ? kUploadChunk : std::min(header.chunk_size(), kMaxChunk);
    header.set_session_token(token_);
    header.set_total_size(data.size());
    header.set_chunk_size(chunk_size);
    auto stream = channel_->start(wire::kMikfsService, method);
    v1::ChunkedUploadRequest message;
    *message.mutable_header() = std::move(header);
    stream->write(message);
    std::size_t offset = 0;
    do {
        const std::size_t length = std::min<std::size_t>(chunk_size, data.size() - offset);
        message.Clear();
        v1::Chunk* chunk = message.mutable_chunk();
        chunk->set_offset(offset);
        chunk->set_data(std::string(data.substr(offset, length)));
        offset += length;
        chunk->set_last(offset == data.size());
        stream->write(message);
    } while (offset < data.size());
    stream->half_close();
    Response response;
    if (!stream->read(response)) {
        throw rpc::TransportError("server sent no response");
    }
    std::string extra;
    while (stream->read(extra)) {
    }
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return response;
}

core::Result<v1::GetApiInfoResponse> MikfsClient::get_api_info()
{
    v1::GetApiInfoRequest request;
    request.set_session_token(token_);
    auto response = call<v1::GetApiInfoResponse>(m::get_api_info, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return response;
}

core::Status MikfsClient::authenticate_durin(const std::string& watchword, const std::string& client_name)
{
    auto stream = channel_->start(wire::kMikfsService, m::authenticate);
    v1::AuthenticateRequest request;
    request.mutable_hello()->set_client_name(client_name);
    stream->write(request);
    v1::AuthenticateResponse response;
    if (!stream->read(response)) {
        throw rpc::TransportError("authentication stream ended early");
    }
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    if (response.challenge().scheme() != v1::AUTH_SCHEME_DURIN) {
        stream->cancel();
        return core::make_error(StatusCode::scheme_unsupported, "server does not use the Durin scheme");
    }
    request.Clear();
    request.mutable_durin()->set_watchword(watchword);
    stream->write(request);
    stream->half_close();
    if (!stream->read(response)) {
        throw rpc::TransportError("authentication stream ended early");
    }
    std::string extra;
    while (stream->read(extra)) {
    }
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    token_ = response.grant().session_token();
    host_handle_.reset();
    return {};
}

core::Status MikfsClient::authenticate_user(const std::string& username, const std::string& password,
                                            const std::string& client_name)
{
    auto stream = channel_->start(wire::kMikfsService, m::authenticate);
    v1::AuthenticateRequest request;
    request.mutable_hello()->set_client_name(client_name);
    request.mutable_hello()->set_username(username);
    stream->write(request);
    v1::AuthenticateResponse response;
    if (!stream->read(response)) {
        throw rpc::TransportError("authentication stream ended early");
    }
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    if (response.challenge().scheme() != v1::AUTH_SCHEME_USER_PASSWORD) {
        stream->cancel();
        return core::make_error(StatusCode::scheme_unsupported, "server does not use the UserPassword scheme");
    }
    const std::string verifier = auth::password_verifier(response.challenge().salt(), password);
    request.Clear();
    request.mutable_user_password()->set_username(username);
    request.mutable_user_password()->set_proof(auth::password_proof(verifier, response.challenge().nonce()));
    stream->write(request);
    stream->half_close();
    if (!stream->read(response)) {
        throw rpc::TransportError("authentication stream ended early");
    }
    std::string extra;
    while (stream->read(extra)) {
    }
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    token_ = response.grant().session_token();
    host_handle_.reset();
    return {};
}

core::Status MikfsClient::logout()
{
    v1::LogoutRequest request;
    request.set_session_token(token_);
    const Status status = status_of(call<v1::LogoutResponse>(m::logout, request).status());
    token_.clear();
    host_handle_.reset();
    return status;
}

core::Result<core::GroupOwner> MikfsClient::host_write_handle()
{
    if (host_handle_) {
        return *host_handle_;
    }
    v1::GetHostWriteHandleRequest request;
    request.set_session_token(token_);
    auto response = call<v1::GetHostWriteHandleResponse>(m::get_host_write_handle, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    auto handle = core::GroupOwner::from_bytes(response.host_write_handle().key());
    if (!handle.ok()) {
        return handle.status();
    }
    host_handle_ = *handle;
    return *handle;
}

core::Result<FileData> MikfsClient::get_file(const std::string& path, const core::Ownership& caller)
{
    v1::GetFileRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    auto response = call<v1::GetFileResponse>(m::get_file, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return FileData{std::move(*response.mutable_content()), attributes_of(v1::NODE_KIND_FILE, response.attributes())};
}

core::Result<FileData> MikfsClient::get_file_in_chunks(const std::string& path, const core::Ownership& caller,
                                                       std::uint32_t chunk_size,
                                                       std::vector<std::size_t>* chunk_sizes)
{
    v1::GetFileInChunksRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    request.set_chunk_size(chunk_size);
    set_caller(request.mutable_caller(), caller);
    auto stream = channel_->start(wire::kMikfsService, m::get_file_in_chunks);
    stream->write(request);
    stream->half_close();
    v1::GetFileInChunksResponse response;
    if (!stream->read(response)) {
        throw rpc::TransportError("server sent no response");
    }
    if (Status status = status_of(response.status()); !status.ok()) {
        std::string extra;
        while (stream->read(extra)) {
        }
        return status;
    }
    FileData data{{}, attributes_of(v1::NODE_KIND_FILE, response.attributes())};
    const std::uint64_t total = response.header().total_size();
    bool last = false;
    while (stream->read(response)) {
        if (last || response.chunk().offset() != data.content.size()) {
            throw rpc::TransportError("chunk stream out of order");
        }
        if (chunk_sizes != nullptr) {
            chunk_sizes->push_back(response.chunk().data().size());
        }
        data.content += response.chunk().data();
        last = response.chunk().last();
    }
    if (!last || data.content.size() != total) {
        throw rpc::TransportError("chunk stream ended early");
    }
    return data;
}

core::Result<PutResult> MikfsClient::put_file(const std::string& path, std::string content,
                                              const core::Ownership& caller, const Creation& creation)
{
    v1::PutFileRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    set_creation(request, creation);
    request.set_content(std::move(content));
    auto response = call<v1::PutFileResponse>(m::put_file, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return PutResult{response.created(), attributes_of(v1::NODE_KIND_FILE, response.attributes())};
}

core::Result<PutResult> MikfsClient::put_file_in_chunks(const std::string& path, std::string_view content,
                                                        const core::Ownership& caller, const Creation& creation,
                                                        std::uint32_t chunk_size)
{
    v1::ChunkHeader header;
    header.set_path(path);
    header.set_chunk_size(chunk_size);
    set_caller(header.mutable_caller(), caller);
    set_creation(header, creation);
    auto response = upload<v1::PutFileResponse>(m::put_file_in_chunks, std::move(header), content);
    if (!response.ok()) {
        return response.status();
    }
    return PutResult{response->created(), attributes_of(v1::NODE_KIND_FILE, response->attributes())};
}

core::Result<core::PublicAttributes> MikfsClient::create_directory(const std::string& path,
                                                                   const core::Ownership& caller,
                                                                   const Creation& creation)
{
    v1::CreateDirectoryRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    set_creation(request, creation);
    auto response = call<v1::CreateDirectoryResponse>(m::create_directory, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return attributes_of(v1::NODE_KIND_DIRECTORY, response.attributes());
}

core::Result<std::vector<core::DirectoryEntry>> MikfsClient::read_directory(const std::string& path,
                                                                            const core::Ownership& caller)
{
    v1::ReadDirectoryContentsRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    auto response = call<v1::ReadDirectoryContentsResponse>(m::read_directory_contents, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    std::vector<core::DirectoryEntry> entries;
    for (const auto& entry : response.entries()) {
        entries.push_back({entry.name(), attributes_of(entry.kind(), entry.attributes())});
    }
    return entries;
}

namespace {

v1::MoveRequest move_request(const std::string& token, const std::string& from, const std::string& to,
                             const core::Ownership& caller)
{
    v1::MoveRequest request;
    request.set_session_token(token);
    request.set_from_path(from);
    request.set_to_path(to);
    set_caller(request.mutable_caller(), caller);
    return request;
}

v1::CopyRequest copy_request(const std::string& token, const std::string& from, const std::string& to,
                             const core::Ownership& caller, const Creation& creation)
{
    v1::CopyRequest request;
    request.set_session_token(token);
    request.set_from_path(from);
    request.set_to_path(to);
    set_caller(request.mutable_caller(), caller);
    set_creation(request, creation);
    return request;
}

}  // namespace

core::Status MikfsClient::move_file(const std::string& from, const std::string& to, const core::Ownership& caller)
{
    return status_of(call<v1::MoveResponse>(m::move_file, move_request(token_, from, to, caller)).status());
}

core::Status MikfsClient::move_directory(const std::string& from, const std::string& to,
                                         const core::Ownership& caller)
{
    return status_of(call<v1::MoveResponse>(m::move_directory, move_request(token_, from, to, caller)).status());
}

core::Status MikfsClient::copy_file(const std::string& from, const std::string& to, const core::Ownership& caller,
                                    const Creation& creation)
{
    return status_of(
        call<v1::CopyResponse>(m::copy_file, copy_request(token_, from, to, caller, creation)).status());
}

core::Status MikfsClient::copy_directory(const std::string& from, const std::string& to,
                                         const core::Ownership& caller, const Creation& creation)
{
    return status_of(
        call<v1::CopyResponse>(m::copy_directory, copy_request(token_, from, to, caller, creation)).status());
}

core::Status MikfsClient::delete_file(const std::string& path, const core::Ownership& caller)
{
    v1::DeleteFileRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    return status_of(call<v1::DeleteResponse>(m::delete_file, request).status());
}

core::Status MikfsClient::delete_directory(const std::string& path, const core::Ownership& caller, bool recursive)
{
    v1::DeleteDirectoryRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    request.set_recursive(recursive);
    set_caller(request.mutable_caller(), caller);
    return status_of(call<v1::DeleteResponse>(m::delete_directory, request).status());
}

core::Result<ZipData> MikfsClient::get_directory_zip(const std::string& path, const core::Ownership& caller)
{
    v1::GetDirectoryZipRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    auto response = call<v1::GetDirectoryZipResponse>(m::get_directory_zip, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return ZipData{std::move(*response.mutable_archive()), response.omitted_entries()};
}

core::Result<ZipData> MikfsClient::get_directory_zip_in_chunks(const std::string& path,
                                                               const core::Ownership& caller,
                                                               std::uint32_t chunk_size)
{
    v1::GetDirectoryZipInChunksRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    request.set_chunk_size(chunk_size);
    set_caller(request.mutable_caller(), caller);
    auto stream = channel_->start(wire::kMikfsService, m::get_directory_zip_in_chunks);
    stream->write(request);
    stream->half_close();
    v1::GetDirectoryZipInChunksResponse response;
    if (!stream->read(response)) {
        throw rpc::TransportError("server sent no response");
    }
    if (Status status = status_of(response.status()); !status.ok()) {
        std::string extra;
        while (stream->read(extra)) {
        }
        return status;
    }
    ZipData data{{}, response.omitted_entries()};
    const std::uint64_t total = response.header().total_size();
    bool last = false;
    while (stream->read(response)) {
        if (last || response.chunk().offset() != data.archive.size()) {
            throw rpc::TransportError("chunk stream out of order");
        }
        data.archive += response.chunk().data();
        last = response.chunk().last();
    }
    if (!last || data.archive.size() != total) {
        throw rpc::TransportError("chunk stream ended early");
    }
    return data;
}

core::Result<std::uint32_t> MikfsClient::create_directory_unzip(const std::string& path, std::string archive,
                                                                const core::Ownership& caller,
                                                                const Creation& creation)
{
    v1::CreateDirectoryUnzipRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    set_creation(request, creation);
    request.set_archive(std::move(archive));
    auto response = call<v1::CreateDirectoryUnzipResponse>(m::create_directory_unzip, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return response.created_entries();
}

core::Result<std::uint32_t> MikfsClient::create_directory_unzip_in_chunks(const std::string& path,
                                                                          std::string_view archive,
                                                                          const core::Ownership& caller,
                                                                          const Creation& creation,
                                                                          std::uint32_t chunk_size)
{
    v1::ChunkHeader header;
    header.set_path(path);
    header.set_chunk_size(chunk_size);
    set_caller(header.mutable_caller(), caller);
    set_creation(header, creation);
    auto response =
        upload<v1::CreateDirectoryUnzipResponse>(m::create_directory_unzip_in_chunks, std::move(header), archive);
    if (!response.ok()) {
        return response.status();
    }
    return response->created_entries();
}

core::Status MikfsClient::set_permissions(const std::string& path, const core::Ownership& caller,
                                          core::PermissionsMask permissions)
{
    v1::SetPermissionsRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    request.set_permissions(permissions.bits());
    set_caller(request.mutable_caller(), caller);
    return status_of(call<v1::SetPermissionsResponse>(m::set_permissions, request).status());
}

core::Result<std::pair<core::PermissionsMask, core::NodeKind>> MikfsClient::get_permissions(
    const std::string& path, const core::Ownership& caller)
{
    v1::GetPermissionsRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    auto response = call<v1::GetPermissionsResponse>(m::get_permissions, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return std::pair{core::PermissionsMask(response.permissions()),
                     response.kind() == v1::NODE_KIND_DIRECTORY ? core::NodeKind::directory : core::NodeKind::file};
}

core::Result<core::CustomAttributes> MikfsClient::update_attributes(const std::string& path,
                                                                    const core::Ownership& caller,
                                                                    const std::vector<core::AttributeUpdate>& updates)
{
    v1::UpdateAttributesRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    for (const auto& update : updates) {
        v1::AttributeUpdate* out = request.add_updates();
        out->set_name(update.name);
        if (update.value) {
            out->set_value(*update.value);
        } else {
            out->set_remove(true);
        }
    }
    auto response = call<v1::UpdateAttributesResponse>(m::update_attributes, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    core::CustomAttributes attributes;
    for (const auto& attribute : response.attributes()) {
        attributes[attribute.name()] = attribute.value();
    }
    return attributes;
}

core::Result<core::PublicAttributes> MikfsClient::get_attributes(const std::string& path,
                                                                 const core::Ownership& caller)
{
    v1::GetAttributesRequest request;
    request.set_session_token(token_);
    request.set_path(path);
    set_caller(request.mutable_caller(), caller);
    auto response = call<v1::GetAttributesResponse>(m::get_attributes, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    return attributes_of(response.kind(), response.attributes());
}

core::Result<std::unique_ptr<ChangeStream>> MikfsClient::subscribe(const std::string& prefix,
                                                                   const std::string& name_glob,
                                                                   const std::vector<v1::ChangeKind>& kinds)
{
    v1::FileSystemChangeSubscribeRequest request;
    request.set_session_token(token_);
    request.set_path_prefix(prefix);
    request.set_name_glob(name_glob);
    for (auto kind : kinds) {
        request.add_kinds(kind);
    }
    auto stream = channel_->start(wire::kMikfsService, m::file_system_change_subscribe);
    stream->write(request);
    stream->half_close();
    v1::FileSystemChangeSubscribeResponse ack;
    if (!stream->read(ack)) {
        throw rpc::TransportError("subscription ended before its acknowledgement");
    }
    if (Status status = status_of(ack.status()); !status.ok()) {
        std::string extra;
        while (stream->read(extra)) {
        }
        return status;
    }
    return std::make_unique<ChangeStream>(std::move(stream));
}

core::Result<SearchResults> MikfsClient::search(const v1::SearchQuery& query, const core::Ownership& caller)
{
    v1::SearchRequest request;
    request.set_session_token(token_);
    *request.mutable_query() = query;
    set_caller(request.mutable_caller(), caller);
    auto response = call<v1::SearchResponse>(m::search, request);
    if (Status status = status_of(response.status()); !status.ok()) {
        return status;
    }
    SearchResults results;
    for (const auto& result : response.results()) {
        results.hits.push_back({result.path(), attributes_of(result.kind(), result.attributes())});
    }
    results.truncated = response.truncated();
    return results;
}

core::Result<std::unique_ptr<SearchStream>> MikfsClient::search_subscribe(const v1::SearchQuery& query,
                                                                          const core::Ownership& caller)
{
    v1::SearchRequest request;
    request.set_session_token(token_);
    *request.mutable_query() = query;
    set_caller(request.mutable_caller(), caller);
    auto stream = channel_->start(wire::kMikfsService, m::search_subscribe);
    stream->write(request);
    stream->half_close();
    return std::make_unique<SearchStream>(std::move(stream));
}

}  // namespace mikfs::client
