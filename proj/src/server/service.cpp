#include "mikfs/server/service.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>

#include "mikfs/core/archive.hpp"
#include "mikfs/core/authorize.hpp"
#include "mikfs/server/search.hpp"
#include "mikfs/server/snapshot.hpp"
#include "mikfs/wire/convert.hpp"
#include "mikfs/wire/methods.hpp"

#define MIKFS_RETURN_IF_ERROR(expr)         \
    do {                                    \
        if (auto status_ = (expr); !status_.ok()) { \
            return status_;                 \
        }                                   \
    } while (false)

namespace mikfs::server {

using core::Action;
using core::NodeKind;
using core::Ownership;
using core::Path;
using core::Status;
using core::StatusCode;
namespace v1 = wire::v1;
namespace m = wire::method;

namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(50);

template <class Request, class Response, class Body>
void unary(rpc::ServerCall& call, Body&& body)
{
    Request request;
    call.read_single(request);
    Response response;
    const Status status = body(request, response);
    wire::set_status(response, status);
    call.write(response);
}

// Path plus presented ownership, parsed from a request.
struct Target {
    Path path;
    Ownership caller;
};

Status parse_target(const std::string& raw_path, const v1::Ownership& raw_caller, Target& out)
{
    auto path = Path::parse(raw_path);
    if (!path.ok()) {
        return path.status();
    }
    auto caller = wire::from_proto(raw_caller);
    if (!caller.ok()) {
        return caller.status();
    }
    out.path = std::move(*path);
    out.caller = std::move(*caller);
    return {};
}

Status parse_creation(const v1::Ownership& raw_owner, std::uint32_t raw_permissions, Ownership& owner,
                      core::PermissionsMask& permissions)
{
    auto parsed_owner = wire::from_proto(raw_owner);
    if (!parsed_owner.ok()) {
        return parsed_owner.status();
    }
    auto parsed_permissions = core::PermissionsMask::from_wire(raw_permissions);
    if (!parsed_permissions.ok()) {
        return parsed_permissions.status();
    }
    owner = std::move(*parsed_owner);
    permissions = *parsed_permissions;
    return {};
}

std::uint32_t effective_chunk_size(std::uint32_t requested)
{
    if (requested == 0) {
        return kDefaultChunkSize;
    }
    return std::min(requested, kMaxChunkSize);
}

Status kind_error(const Path& path, NodeKind wanted)
{
    return wanted == NodeKind::file
               ? core::make_error(StatusCode::not_a_file, path.str() + " is a directory")
               : core::make_error(StatusCode::not_a_directory, path.str() + " is a file");
}

// Every file below and including node must be readable and every directory
// listable before it may be copied.
Status authorize_copy_source(const core::Tree& tree, const Ownership& caller, const Path& path,
                             const core::Node& node)
{
    if (node.is_file()) {
        return core::authorize(tree, caller, path, Action::read_file);
    }
    MIKFS_RETURN_IF_ERROR(core::authorize(tree, caller, path, Action::list));
    for (const auto& [name, child] : node.children()) {
        MIKFS_RETURN_IF_ERROR(authorize_copy_source(tree, caller, path.child(name), *child));
    }
    return {};
}

// Recursive delete removes every entry of every directory in the subtree.
Status authorize_subtree_removal(const core::Tree& tree, const Ownership& caller, const Path& path,
                                 const core::Node& node)
{
    if (!node.is_directory()) {
        return {};
    }
    for (const auto& [name, child] : node.children()) {
        MIKFS_RETURN_IF_ERROR(core::authorize(tree, caller, path, Action::delete_child, name));
        MIKFS_RETURN_IF_ERROR(authorize_subtree_removal(tree, caller, path.child(name), *child));
    }
    return {};
}

template <class Response>
void send_chunks(rpc::ServerCall& call, std::string_view data, std::uint32_t chunk_size)
{
    std::uint64_t offset = 0;
    do {
        const auto length = std::min<std::uint64_t>(chunk_size, data.size() - offset);
        Response response;
        v1::Chunk* chunk = response.mutable_chunk();
        chunk->set_offset(offset);
        chunk->set_data(std::string(data.substr(offset, length)));
        offset += length;
        chunk->set_last(offset == data.size());
        call.write(response);
        if (offset < data.size() && call.cancelled(std::chrono::milliseconds(0))) {
            return;
        }
    } while (offset < data.size());
}

void fill_result(v1::SearchResult& out, const SearchHit& hit)
{
    out.set_path(hit.path.str());
    out.set_kind(wire::to_proto(hit.attributes.kind));
    wire::fill(*out.mutable_attributes(), hit.attributes);
}

core::Result<SearchQuery> query_from_proto(const v1::SearchQuery& query)
{
    std::vector<AttributePredicate> predicates;
    for (const auto& predicate : query.attributes()) {
        predicates.push_back({predicate.name(),
                              predicate.match_value() ? std::optional<std::string>(predicate.value()) : std::nullopt});
    }
    return make_query(query.path_prefix(), query.name_glob(), query.content(), std::move(predicates),
                      query.max_results());
}

}  // namespace

struct FileSystemService::FileWrite {
    std::uint32_t method = m::put_file;
    Target target;
    Ownership owner;
    core::PermissionsMask permissions;
    std::string content;
};

struct FileSystemService::UnzipRequest {
    std::uint32_t method = m::create_directory_unzip;
    Target target;
    Ownership owner;
    core::PermissionsMask permissions;
    std::string archive;
};

struct FileSystemService::Upload {
    explicit Upload(auth::SessionRegistry& registry) : sessions(registry) {}
    ~Upload()
    {
        if (reserved > 0) {
            sessions.release_staging(header.session_token(), reserved);
        }
    }

    auth::SessionRegistry& sessions;
    v1::ChunkHeader header;
    std::uint64_t reserved = 0;
    std::string data;
};

FileSystemService::FileSystemService(ServiceConfig config, core::Tree tree)
    : config_(std::move(config)), sessions_(config_.session_ttl_ns, config_.clock), tree_(std::move(tree))
{
}

rpc::Service FileSystemService::rpc_service()
{
    rpc::Service service{std::string(wire::kMikfsService), {}};
    auto bind = [&](std::uint32_t method, void (FileSystemService::*handler)(rpc::ServerCall&)) {
        service.handlers[method] = [this, handler](rpc::ServerCall& call) { (this->*handler)(call); };
    };
    bind(m::get_api_info, &FileSystemService::get_api_info);
    bind(m::authenticate, &FileSystemService::authenticate);
    bind(m::logout, &FileSystemService::logout);
    bind(m::get_host_write_handle, &FileSystemService::get_host_write_handle);
    bind(m::get_file, &FileSystemService::get_file);
    bind(m::get_file_in_chunks, &FileSystemService::get_file_in_chunks);
    bind(m::put_file, &FileSystemService::put_file);
    bind(m::put_file_in_chunks, &FileSystemService::put_file_in_chunks);
    bind(m::create_directory, &FileSystemService::create_directory);
    bind(m::read_directory_contents, &FileSystemService::read_directory_contents);
    service.handlers[m::move_file] = [this](rpc::ServerCall& call) { move(call, NodeKind::file); };
    service.handlers[m::copy_file] = [this](rpc::ServerCall& call) { copy(call, NodeKind::file); };
    service.handlers[m::move_directory] = [this](rpc::ServerCall& call) { move(call, NodeKind::directory); };
    service.handlers[m::copy_directory] = [this](rpc::ServerCall& call) { copy(call, NodeKind::directory); };
    bind(m::delete_file, &FileSystemService::delete_file);
    bind(m::delete_directory, &FileSystemService::delete_directory);
    bind(m::get_directory_zip, &FileSystemService::get_directory_zip);
    bind(m::get_directory_zip_in_chunks, &FileSystemService::get_directory_zip_in_chunks);
    bind(m::create_directory_unzip, &FileSystemService::create_directory_unzip);
    bind(m::create_directory_unzip_in_chunks, &FileSystemService::create_directory_unzip_in_chunks);
    bind(m::set_permissions, &FileSystemService::set_permissions);
    bind(m::get_permissions, &FileSystemService::get_permissions);
    bind(m::update_attributes, &FileSystemService::update_attributes);
    bind(m::get_attributes, &FileSystemService::get_attributes);
    bind(m::file_system_change_subscribe, &FileSystemService::change_subscribe);
    bind(m::search, &FileSystemService::search);
    bind(m::search_subscribe, &FileSystemService::search_subscribe);
    return service;
}

std::string FileSystemService::snapshot_bytes()
{
    std::shared_lock lock(mutex_);
    return encode_snapshot(tree_);
}

Status FileSystemService::check_owner_host(const Ownership& owner) const
{
    if (owner.host_group != config_.host_key) {
        return core::make_error(StatusCode::permission_denied,
                                "owner host group is not this server's host write handle");
    }
    return {};
}

void FileSystemService::publish(ChangeKind kind, const Path& path, core::Timestamp now, const Path* new_path)
{
    ChangeEvent event;
    event.kind = kind;
    event.path = path;
    if (new_path != nullptr) {
        event.new_path = *new_path;
    }
    event.timestamp = now;
    events_.publish(event);
}

void FileSystemService::get_api_info(rpc::ServerCall& call)
{
    unary<v1::GetApiInfoRequest, v1::GetApiInfoResponse>(call, [&](const auto&, auto& response) -> Status {
        response.set_server_name(std::string(kServerName));
        response.set_server_version(std::string(kServerVersion));
        response.set_api_version(std::string(kApiVersion));
        for (const auto& info : wire::mikfs_methods()) {
            response.add_supported_methods(info.number);
        }
        switch (config_.mode) {
        case Mode::read_write:
            response.set_mutability_mode(v1::MUTABILITY_MODE_READ_WRITE);
            break;
        case Mode::read_only:
            response.set_mutability_mode(v1::MUTABILITY_MODE_READ_ONLY);
            break;
        case Mode::append_only:
            response.set_mutability_mode(v1::MUTABILITY_MODE_APPEND_ONLY);
            break;
        }
        response.set_auth_scheme(config_.auth.scheme == auth::Scheme::durin ? v1::AUTH_SCHEME_DURIN
                                                                            : v1::AUTH_SCHEME_USER_PASSWORD);
        return {};
    });
}

void FileSystemService::authenticate(rpc::ServerCall& call)
{
    auth::AuthExchange exchange(config_.auth, sessions_);
    v1::AuthenticateRequest request;
    v1::AuthenticateResponse response;
    auto fail = [&](const Status& status) {
        wire::set_status(response, status);
        call.write(response);
    };

    if (!call.read(request)) {
        return;
    }
    if (!request.has_hello()) {
        fail(core::make_error(StatusCode::invalid_argument, "authentication must start with a hello"));
        return;
    }
    auto challenge = exchange.begin(request.hello().client_name(), request.hello().username());
    if (!challenge.ok()) {
        fail(challenge.status());
        return;
    }
    wire::set_status(response, {});
    v1::AuthChallenge* out = response.mutable_challenge();
    out->set_scheme(challenge->scheme == auth::Scheme::durin ? v1::AUTH_SCHEME_DURIN : v1::AUTH_SCHEME_USER_PASSWORD);
    out->set_nonce(challenge->nonce);
    out->set_salt(challenge->salt);
    call.write(response);

    if (!call.read(request)) {
        return;
    }
    response.Clear();
    core::Result<auth::SessionHandle> grant = core::make_error(StatusCode::invalid_argument, "");
    if (request.has_durin()) {
        grant = exchange.respond_durin(request.durin().watchword());
    } else if (request.has_user_password()) {
        grant = exchange.respond_user_password(request.user_password().username(), request.user_password().proof());
    } else {
        fail(core::make_error(StatusCode::invalid_argument, "expected an answer to the challenge"));
        return;
    }
    if (!grant.ok()) {
        fail(grant.status());
        return;
    }
    wire::set_status(response, {});
    response.mutable_grant()->set_session_token(grant->token);
    response.mutable_grant()->set_expires_at(grant->expires_at);
    call.write(response);
}

void FileSystemService::logout(rpc::ServerCall& call)
{
    unary<v1::LogoutRequest, v1::LogoutResponse>(
        call, [&](const auto& request, auto&) { return sessions_.logout(request.session_token()); });
}

void FileSystemService::get_host_write_handle(rpc::ServerCall& call)
{
    unary<v1::GetHostWriteHandleRequest, v1::GetHostWriteHandleResponse>(
        call, [&](const auto& request, auto& response) -> Status {
            MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
            MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, m::get_host_write_handle, false));
            response.mutable_host_write_handle()->set_key(config_.host_key.key());
            return {};
        });
}

void FileSystemService::get_file(rpc::ServerCall& call)
{
    unary<v1::GetFileRequest, v1::GetFileResponse>(call, [&](const auto& request, auto& response) -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        Target target;
        MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
        std::shared_lock lock(mutex_);
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path, Action::read_file));
        const core::Node* node = tree_.lookup(target.path);
        if (!node->is_file()) {
            return kind_error(target.path, NodeKind::file);
        }
        response.set_content(node->content());
        wire::fill(*response.mutable_attributes(), core::public_view(*node));
        return {};
    });
}

void FileSystemService::get_file_in_chunks(rpc::ServerCall& call)
{
    v1::GetFileInChunksRequest request;
    call.read_single(request);
    v1::GetFileInChunksResponse first;
    std::string content;
    Target target;
    const Status status = [&]() -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
        std::shared_lock lock(mutex_);
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path, Action::read_file));
        const core::Node* node = tree_.lookup(target.path);
        if (!node->is_file()) {
            return kind_error(target.path, NodeKind::file);
        }
        content = node->content();
        wire::fill(*first.mutable_attributes(), core::public_view(*node));
        return {};
    }();
    wire::set_status(first, status);
    if (!status.ok()) {
        call.write(first);
        return;
    }
    const std::uint32_t chunk_size = effective_chunk_size(request.chunk_size());
    first.mutable_header()->set_path(target.path.str());
    first.mutable_header()->set_total_size(content.size());
    first.mutable_header()->set_chunk_size(chunk_size);
    call.write(first);
    send_chunks<v1::GetFileInChunksResponse>(call, content, chunk_size);
}

Status FileSystemService::commit_file(const FileWrite& write, bool& created, core::PublicAttributes& attributes)
{
    const Path& path = write.target.path;
    std::unique_lock lock(mutex_);
    const core::Node* existing = tree_.lookup(path);
    MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, write.method, existing != nullptr));
    const core::Timestamp now = core::now_ns();
    if (existing != nullptr) {
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, write.target.caller, path, Action::write_file));
        MIKFS_RETURN_IF_ERROR(tree_.overwrite_file(path, write.content, now));
        created = false;
        publish(ChangeKind::file_modified, path, now);
    } else {
        MIKFS_RETURN_IF_ERROR(check_owner_host(write.owner));
        MIKFS_RETURN_IF_ERROR(
            core::authorize(tree_, write.target.caller, path.parent(), Action::create_child, path.name()));
        MIKFS_RETURN_IF_ERROR(tree_.create_file(path, write.content, write.owner, write.permissions, now));
        created = true;
        publish(ChangeKind::file_created, path, now);
    }
    attributes = core::public_view(*tree_.lookup(path));
    return {};
}

void FileSystemService::put_file(rpc::ServerCall& call)
{
    unary<v1::PutFileRequest, v1::PutFileResponse>(call, [&](auto& request, auto& response) -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        FileWrite write;
        write.method = m::put_file;
        MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), write.target));
        MIKFS_RETURN_IF_ERROR(parse_creation(request.owner(), request.permissions(), write.owner, write.permissions));
        if (request.content().size() > core::kMaxFileSize) {
            return core::make_error(StatusCode::size_limit_exceeded, "file larger than 2^31-1 bytes");
        }
        write.content = std::move(*request.mutable_content());
        bool created = false;
        core::PublicAttributes attributes;
        MIKFS_RETURN_IF_ERROR(commit_file(write, created, attributes));
        response.set_created(created);
        wire::fill(*response.mutable_attributes(), attributes);
        return {};
    });
}

Status FileSystemService::receive_upload(rpc::ServerCall& call, Upload& upload, std::uint64_t size_limit)
{
    v1::ChunkedUploadRequest message;
    if (!call.read(message) || !message.has_header()) {
        return core::make_error(StatusCode::invalid_argument, "upload must start with a header");
    }
    upload.header = message.header();
    const v1::ChunkHeader& header = upload.header;
    MIKFS_RETURN_IF_ERROR(sessions_.validate(header.session_token()));
    if (header.total_size() > size_limit) {
        return core::make_error(StatusCode::size_limit_exceeded,
                                "declared size " + std::to_string(header.total_size()) + " is over the limit");
    }
    MIKFS_RETURN_IF_ERROR(sessions_.reserve_staging(header.session_token(), header.total_size()));
    upload.reserved = header.total_size();
    upload.data.reserve(std::min<std::uint64_t>(header.total_size(), 64u << 20));

    const std::uint32_t limit = effective_chunk_size(header.chunk_size() == 0 ? kMaxChunkSize : header.chunk_size());
    bool last = false;
    while (call.read(message)) {
        if (last) {
            return core::make_error(StatusCode::invalid_argument, "message after the last chunk");
        }
        if (!message.has_chunk()) {
            return core::make_error(StatusCode::invalid_argument, "second header in one upload");
        }
        const v1::Chunk& chunk = message.chunk();
        if (chunk.offset() != upload.data.size()) {
            return core::make_error(StatusCode::invalid_argument,
                                    "chunk at offset " + std::to_string(chunk.offset()) + ", expected " +
                                        std::to_string(upload.data.size()));
        }
        if (chunk.data().size() > limit) {
            return core::make_error(StatusCode::invalid_argument,
                                    "chunk of " + std::to_string(chunk.data().size()) + " bytes exceeds " +
                                        std::to_string(limit));
        }
        if (upload.data.size() + chunk.data().size() > header.total_size()) {
            return core::make_error(StatusCode::invalid_argument, "chunks exceed the declared size");
        }
        upload.data += chunk.data();
        last = chunk.last();
    }
    if (!last) {
        return core::make_error(StatusCode::invalid_argument, "upload ended before the last chunk");
    }
    if (upload.data.size() != header.total_size()) {
        return core::make_error(StatusCode::invalid_argument,
                                "received " + std::to_string(upload.data.size()) + " bytes, declared " +
                                    std::to_string(header.total_size()));
    }
    return {};
}

void FileSystemService::put_file_in_chunks(rpc::ServerCall& call)
{
    v1::PutFileResponse response;
    const Status status = [&]() -> Status {
        Upload upload(sessions_);
        MIKFS_RETURN_IF_ERROR(receive_upload(call, upload, core::kMaxFileSize));
        FileWrite write;
        write.method = m::put_file_in_chunks;
        MIKFS_RETURN_IF_ERROR(parse_target(upload.header.path(), upload.header.caller(), write.target));
        MIKFS_RETURN_IF_ERROR(
            parse_creation(upload.header.owner(), upload.header.permissions(), write.owner, write.permissions));
        write.content = std::move(upload.data);
        bool created = false;
        core::PublicAttributes attributes;
        MIKFS_RETURN_IF_ERROR(commit_file(write, created, attributes));
        response.set_created(created);
        wire::fill(*response.mutable_attributes(), attributes);
        return {};
    }();
    wire::set_status(response, status);
    call.write(response);
}

void FileSystemService::create_directory(rpc::ServerCall& call)
{
    unary<v1::CreateDirectoryRequest, v1::CreateDirectoryResponse>(
        call, [&](const auto& request, auto& response) -> Status {
            MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
            Target target;
            MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
            Ownership owner;
            core::PermissionsMask permissions;
            MIKFS_RETURN_IF_ERROR(parse_creation(request.owner(), request.permissions(), owner, permissions));
            const Path& path = target.path;
            std::unique_lock lock(mutex_);
            const bool exists = tree_.lookup(path) != nullptr;
            MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, m::create_directory, exists));
            if (exists) {
                return core::make_error(StatusCode::already_exists, path.str() + " already exists");
            }
            MIKFS_RETURN_IF_ERROR(check_owner_host(owner));
            MIKFS_RETURN_IF_ERROR(
                core::authorize(tree_, target.caller, path.parent(), Action::create_child, path.name()));
            const core::Timestamp now = core::now_ns();
            MIKFS_RETURN_IF_ERROR(tree_.create_directory(path, owner, permissions, now));
            publish(ChangeKind::dir_created, path, now);
            wire::fill(*response.mutable_attributes(), core::public_view(*tree_.lookup(path)));
            return {};
        });
}

void FileSystemService::read_directory_contents(rpc::ServerCall& call)
{
    unary<v1::ReadDirectoryContentsRequest, v1::ReadDirectoryContentsResponse>(
        call, [&](const auto& request, auto& response) -> Status {
            MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
            Target target;
            MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
            std::shared_lock lock(mutex_);
            MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path, Action::list));
            auto entries = tree_.list(target.path);
            if (!entries.ok()) {
                return entries.status();
            }
            for (const auto& entry : *entries) {
                v1::DirectoryEntry* out = response.add_entries();
                out->set_name(entry.name);
                out->set_kind(wire::to_proto(entry.attributes.kind));
                wire::fill(*out->mutable_attributes(), entry.attributes);
            }
            return {};
        });
}

void FileSystemService::move(rpc::ServerCall& call, NodeKind kind)
{
    const std::uint32_t method = kind == NodeKind::file ? m::move_file : m::move_directory;
    unary<v1::MoveRequest, v1::MoveResponse>(call, [&](const auto& request, auto&) -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        Target from;
        MIKFS_RETURN_IF_ERROR(parse_target(request.from_path(), request.caller(), from));
        auto to = Path::parse(request.to_path());
        if (!to.ok()) {
            return to.status();
        }
        std::unique_lock lock(mutex_);
        MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, method, true));
        if (from.path.is_root()) {
            return core::make_error(StatusCode::permission_denied, "the root directory cannot be moved");
        }
        MIKFS_RETURN_IF_ERROR(
            core::authorize(tree_, from.caller, from.path.parent(), Action::delete_child, from.path.name()));
        if (to->is_root()) {
            return core::make_error(StatusCode::already_exists, "/ already exists");
        }
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, from.caller, to->parent(), Action::create_child, to->name()));
        MIKFS_RETURN_IF_ERROR(tree_.move(from.path, *to, kind));
        publish(kind == NodeKind::file ? ChangeKind::file_moved : ChangeKind::dir_moved, from.path, core::now_ns(),
                &*to);
        return {};
    });
}

void FileSystemService::copy(rpc::ServerCall& call, NodeKind kind)
{
    const std::uint32_t method = kind == NodeKind::file ? m::copy_file : m::copy_directory;
    unary<v1::CopyRequest, v1::CopyResponse>(call, [&](const auto& request, auto&) -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        Target from;
        MIKFS_RETURN_IF_ERROR(parse_target(request.from_path(), request.caller(), from));
        auto to = Path::parse(request.to_path());
        if (!to.ok()) {
            return to.status();
        }
        Ownership owner;
        core::PermissionsMask permissions;
        MIKFS_RETURN_IF_ERROR(parse_creation(request.owner(), request.permissions(), owner, permissions));
        std::unique_lock lock(mutex_);
        MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, method, tree_.lookup(*to) != nullptr));
        MIKFS_RETURN_IF_ERROR(check_owner_host(owner));
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, from.caller, from.path, Action::traverse));
        const core::Node* source = tree_.lookup(from.path);
        if (source->kind() != kind) {
            return kind_error(from.path, kind);
        }
        MIKFS_RETURN_IF_ERROR(authorize_copy_source(tree_, from.caller, from.path, *source));
        if (to->is_root()) {
            return core::make_error(StatusCode::already_exists, "/ already exists");
        }
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, from.caller, to->parent(), Action::create_child, to->name()));
        const core::Timestamp now = core::now_ns();
        MIKFS_RETURN_IF_ERROR(tree_.copy(from.path, *to, kind, owner, permissions, now));
        publish(kind == NodeKind::file ? ChangeKind::file_created : ChangeKind::dir_created, *to, now);
        return {};
    });
}

void FileSystemService::delete_file(rpc::ServerCall& call)
{
    unary<v1::DeleteFileRequest, v1::DeleteResponse>(call, [&](const auto& request, auto&) -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        Target target;
        MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
        std::unique_lock lock(mutex_);
        MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, m::delete_file, true));
        if (target.path.is_root()) {
            return kind_error(target.path, NodeKind::file);
        }
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path.parent(), Action::delete_child,
                                              target.path.name()));
        MIKFS_RETURN_IF_ERROR(tree_.remove(target.path, NodeKind::file, false));
        publish(ChangeKind::file_deleted, target.path, core::now_ns());
        return {};
    });
}

void FileSystemService::delete_directory(rpc::ServerCall& call)
{
    unary<v1::DeleteDirectoryRequest, v1::DeleteResponse>(call, [&](const auto& request, auto&) -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        Target target;
        MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
        std::unique_lock lock(mutex_);
        MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, m::delete_directory, true));
        if (target.path.is_root()) {
            return core::make_error(StatusCode::permission_denied, "the root directory cannot be deleted");
        }
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path.parent(), Action::delete_child,
                                              target.path.name()));
        const core::Node* node = tree_.lookup(target.path);
        if (request.recursive() && node != nullptr) {
            MIKFS_RETURN_IF_ERROR(authorize_subtree_removal(tree_, target.caller, target.path, *node));
        }
        MIKFS_RETURN_IF_ERROR(tree_.remove(target.path, NodeKind::directory, request.recursive()));
        publish(ChangeKind::dir_deleted, target.path, core::now_ns());
        return {};
    });
}

void FileSystemService::get_directory_zip(rpc::ServerCall& call)
{
    unary<v1::GetDirectoryZipRequest, v1::GetDirectoryZipResponse>(
        call, [&](const auto& request, auto& response) -> Status {
            MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
            Target target;
            MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
            std::shared_lock lock(mutex_);
            auto archive = core::zip_directory(tree_, target.path, target.caller);
            if (!archive.ok()) {
                return archive.status();
            }
            if (archive->bytes.size() > core::kMaxFileSize) {
                return core::make_error(StatusCode::size_limit_exceeded, "archive larger than 2^31-1 bytes");
            }
            response.set_archive(std::move(archive->bytes));
            response.set_omitted_entries(archive->omitted);
            return {};
        });
}

void FileSystemService::get_directory_zip_in_chunks(rpc::ServerCall& call)
{
    v1::GetDirectoryZipInChunksRequest request;
    call.read_single(request);
    v1::GetDirectoryZipInChunksResponse first;
    std::string archive;
    Target target;
    const Status status = [&]() -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
        std::shared_lock lock(mutex_);
        auto built = core::zip_directory(tree_, target.path, target.caller);
        if (!built.ok()) {
            return built.status();
        }
        archive = std::move(built->bytes);
        first.set_omitted_entries(built->omitted);
        return {};
    }();
    wire::set_status(first, status);
    if (!status.ok()) {
        call.write(first);
        return;
    }
    const std::uint32_t chunk_size = effective_chunk_size(request.chunk_size());
    first.mutable_header()->set_path(target.path.str());
    first.mutable_header()->set_total_size(archive.size());
    first.mutable_header()->set_chunk_size(chunk_size);
    call.write(first);
    send_chunks<v1::GetDirectoryZipInChunksResponse>(call, archive, chunk_size);
}

Status FileSystemService::commit_unzip(const UnzipRequest& request, std::uint32_t& created_entries)
{
    const Path& path = request.target.path;
    const core::Timestamp now = core::now_ns();
    // Unpacking touches no shared state; its verdict is reported only once
    // the earlier checks have passed.
    auto unpacked = core::unpack_archive(request.archive, request.owner, request.permissions, now);
    std::unique_lock lock(mutex_);
    const bool exists = tree_.lookup(path) != nullptr;
    MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, request.method, exists));
    if (exists) {
        return core::make_error(StatusCode::already_exists, path.str() + " already exists");
    }
    MIKFS_RETURN_IF_ERROR(check_owner_host(request.owner));
    MIKFS_RETURN_IF_ERROR(
        core::authorize(tree_, request.target.caller, path.parent(), Action::create_child, path.name()));
    if (!unpacked.ok()) {
        return unpacked.status();
    }
    MIKFS_RETURN_IF_ERROR(tree_.attach(path, std::move(unpacked->root)));
    created_entries = unpacked->created;
    publish(ChangeKind::dir_created, path, now);
    return {};
}

void FileSystemService::create_directory_unzip(rpc::ServerCall& call)
{
    unary<v1::CreateDirectoryUnzipRequest, v1::CreateDirectoryUnzipResponse>(
        call, [&](auto& request, auto& response) -> Status {
            MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
            UnzipRequest unzip;
            unzip.method = m::create_directory_unzip;
            MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), unzip.target));
            MIKFS_RETURN_IF_ERROR(
                parse_creation(request.owner(), request.permissions(), unzip.owner, unzip.permissions));
            unzip.archive = std::move(*request.mutable_archive());
            std::uint32_t created = 0;
            MIKFS_RETURN_IF_ERROR(commit_unzip(unzip, created));
            response.set_created_entries(created);
            return {};
        });
}

void FileSystemService::create_directory_unzip_in_chunks(rpc::ServerCall& call)
{
    v1::CreateDirectoryUnzipResponse response;
    const Status status = [&]() -> Status {
        Upload upload(sessions_);
        MIKFS_RETURN_IF_ERROR(receive_upload(call, upload, core::kMaxFileSize));
        UnzipRequest unzip;
        unzip.method = m::create_directory_unzip_in_chunks;
        MIKFS_RETURN_IF_ERROR(parse_target(upload.header.path(), upload.header.caller(), unzip.target));
        MIKFS_RETURN_IF_ERROR(
            parse_creation(upload.header.owner(), upload.header.permissions(), unzip.owner, unzip.permissions));
        unzip.archive = std::move(upload.data);
        std::uint32_t created = 0;
        MIKFS_RETURN_IF_ERROR(commit_unzip(unzip, created));
        response.set_created_entries(created);
        return {};
    }();
    wire::set_status(response, status);
    call.write(response);
}

void FileSystemService::set_permissions(rpc::ServerCall& call)
{
    unary<v1::SetPermissionsRequest, v1::SetPermissionsResponse>(call, [&](const auto& request, auto&) -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        Target target;
        MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
        auto permissions = core::PermissionsMask::from_wire(request.permissions());
        if (!permissions.ok()) {
            return permissions.status();
        }
        std::unique_lock lock(mutex_);
        MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, m::set_permissions, true));
        MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path, Action::set_permissions));
        MIKFS_RETURN_IF_ERROR(tree_.set_permissions(target.path, *permissions));
        publish(ChangeKind::permissions_changed, target.path, core::now_ns());
        return {};
    });
}

void FileSystemService::get_permissions(rpc::ServerCall& call)
{
    unary<v1::GetPermissionsRequest, v1::GetPermissionsResponse>(
        call, [&](const auto& request, auto& response) -> Status {
            MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
            Target target;
            MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
            std::shared_lock lock(mutex_);
            MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, m::get_permissions, true));
            MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path, Action::traverse));
            const core::Node* node = tree_.lookup(target.path);
            response.set_permissions(node->attrs.permissions.bits());
            response.set_kind(wire::to_proto(node->kind()));
            return {};
        });
}

void FileSystemService::update_attributes(rpc::ServerCall& call)
{
    unary<v1::UpdateAttributesRequest, v1::UpdateAttributesResponse>(
        call, [&](const auto& request, auto& response) -> Status {
            MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
            Target target;
            MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
            std::vector<core::AttributeUpdate> updates;
            for (const auto& update : request.updates()) {
                updates.push_back(
                    {update.name(), update.remove() ? std::nullopt : std::optional<std::string>(update.value())});
            }
            std::unique_lock lock(mutex_);
            MIKFS_RETURN_IF_ERROR(mutability_gate(config_.mode, m::update_attributes, true));
            MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path, Action::set_attributes));
            auto updated = tree_.update_attributes(target.path, updates);
            if (!updated.ok()) {
                return updated.status();
            }
            for (const auto& [name, value] : *updated) {
                v1::CustomAttribute* out = response.add_attributes();
                out->set_name(name);
                out->set_value(value);
            }
            publish(ChangeKind::attributes_changed, target.path, core::now_ns());
            return {};
        });
}

void FileSystemService::get_attributes(rpc::ServerCall& call)
{
    unary<v1::GetAttributesRequest, v1::GetAttributesResponse>(
        call, [&](const auto& request, auto& response) -> Status {
            MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
            Target target;
            MIKFS_RETURN_IF_ERROR(parse_target(request.path(), request.caller(), target));
            std::shared_lock lock(mutex_);
            MIKFS_RETURN_IF_ERROR(core::authorize(tree_, target.caller, target.path, Action::traverse));
            const core::Node* node = tree_.lookup(target.path);
            response.set_kind(wire::to_proto(node->kind()));
            wire::fill(*response.mutable_attributes(), core::public_view(*node));
            return {};
        });
}

void FileSystemService::change_subscribe(rpc::ServerCall& call)
{
    v1::FileSystemChangeSubscribeRequest request;
    call.read_single(request);
    v1::FileSystemChangeSubscribeResponse response;
    EventFilter filter;
    const Status status = [&]() -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        auto prefix = Path::parse(request.path_prefix());
        if (!prefix.ok()) {
            return prefix.status();
        }
        filter.prefix = std::move(*prefix);
        if (!request.name_glob().empty()) {
            auto glob = core::Glob::compile(request.name_glob());
            if (!glob.ok()) {
                return glob.status();
            }
            filter.name_glob = std::move(*glob);
        }
        for (int kind : request.kinds()) {
            if (kind < 1 || kind > 9) {
                return core::make_error(StatusCode::invalid_argument, "unknown change kind " + std::to_string(kind));
            }
            filter.kinds.insert(static_cast<ChangeKind>(kind));
        }
        return {};
    }();
    wire::set_status(response, status);
    call.write(response);
    if (!status.ok()) {
        return;
    }

    auto subscription = events_.subscribe(std::move(filter));
    struct Unsubscribe {
        EventHub& hub;
        std::shared_ptr<Subscription>& subscription;
        ~Unsubscribe() { hub.unsubscribe(subscription); }
    } unsubscribe{events_, subscription};

    while (!call.cancelled(std::chrono::milliseconds(0))) {
        auto event = subscription->next(kPollInterval);
        if (!event) {
            if (subscription->overflowed()) {
                response.Clear();
                wire::set_status(response, core::make_error(StatusCode::subscription_overflow,
                                                            "subscriber fell more than 1024 events behind"));
                call.write(response);
                return;
            }
            continue;
        }
        response.Clear();
        v1::ChangeEvent* out = response.mutable_event();
        out->set_kind(static_cast<v1::ChangeKind>(event->kind));
        out->set_path(event->path.str());
        if (event->new_path) {
            out->set_new_path(event->new_path->str());
        }
        out->set_timestamp(event->timestamp);
        out->set_sequence(event->sequence);
        call.write(response);
    }
}

void FileSystemService::search(rpc::ServerCall& call)
{
    unary<v1::SearchRequest, v1::SearchResponse>(call, [&](const auto& request, auto& response) -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        auto caller = wire::from_proto(request.caller());
        if (!caller.ok()) {
            return caller.status();
        }
        auto query = query_from_proto(request.query());
        if (!query.ok()) {
            return query.status();
        }
        std::shared_lock lock(mutex_);
        const SearchOutcome outcome = server::search(tree_, *caller, *query);
        for (const auto& hit : outcome.hits) {
            fill_result(*response.add_results(), hit);
        }
        response.set_truncated(outcome.truncated);
        return {};
    });
}

void FileSystemService::search_subscribe(rpc::ServerCall& call)
{
    v1::SearchRequest request;
    call.read_single(request);
    v1::SearchSubscribeResponse response;
    Ownership caller;
    std::optional<SearchQuery> query;
    std::shared_ptr<Subscription> subscription;
    const Status status = [&]() -> Status {
        MIKFS_RETURN_IF_ERROR(sessions_.validate(request.session_token()));
        auto parsed_caller = wire::from_proto(request.caller());
        if (!parsed_caller.ok()) {
            return parsed_caller.status();
        }
        caller = std::move(*parsed_caller);
        auto parsed_query = query_from_proto(request.query());
        if (!parsed_query.ok()) {
            return parsed_query.status();
        }
        query = std::move(*parsed_query);
        // Subscribing under the lock means no commit falls between the
        // initial result set and the first incremental event.
        std::shared_lock lock(mutex_);
        for (const auto& hit : server::search(tree_, caller, *query).hits) {
            fill_result(*response.add_results(), hit);
        }
        subscription = events_.subscribe(EventFilter{});
        return {};
    }();
    wire::set_status(response, status);
    response.set_initial(true);
    call.write(response);
    if (!status.ok()) {
        return;
    }
    struct Unsubscribe {
        EventHub& hub;
        std::shared_ptr<Subscription>& subscription;
        ~Unsubscribe() { hub.unsubscribe(subscription); }
    } unsubscribe{events_, subscription};

    while (!call.cancelled(std::chrono::milliseconds(0))) {
        auto event = subscription->next(kPollInterval);
        if (!event) {
            if (subscription->overflowed()) {
                response.Clear();
                wire::set_status(response, core::make_error(StatusCode::subscription_overflow,
                                                            "subscriber fell more than 1024 events behind"));
                call.write(response);
                return;
            }
            continue;
        }
        if (event->kind == ChangeKind::file_deleted || event->kind == ChangeKind::dir_deleted) {
            continue;
        }
        const Path& touched = event->new_path ? *event->new_path : event->path;
        std::vector<SearchHit> hits;
        {
            std::shared_lock lock(mutex_);
            const core::Node* node = tree_.lookup(touched);
            if (node == nullptr) {
                continue;
            }
            const bool whole_subtree = event->kind == ChangeKind::dir_created || event->kind == ChangeKind::dir_moved;
            auto visit = [&](auto& self, const Path& path, const core::Node& at) -> void {
                if (search_matches(tree_, caller, *query, path, at)) {
                    hits.push_back({path, core::public_view(at)});
                }
                if (whole_subtree && at.is_directory()) {
                    for (const auto& [name, child] : at.children()) {
                        self(self, path.child(name), *child);
                    }
                }
            };
            visit(visit, touched, *node);
        }
        if (hits.empty()) {
            continue;
        }
        std::sort(hits.begin(), hits.end(),
                  [](const SearchHit& a, const SearchHit& b) { return a.path.str() < b.path.str(); });
        if (hits.size() > query->max_results) {
            hits.resize(query->max_results);
        }
        response.Clear();
        wire::set_status(response, {});
        response.set_initial(false);
        for (const auto& hit : hits) {
            fill_result(*response.add_results(), hit);
        }
        call.write(response);
    }
}

}  // namespace mikfs::server
