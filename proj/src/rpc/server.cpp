#include "mikfs/rpc/server.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

namespace mikfs::rpc {

namespace {

// Discards request messages until the client half-closes.
void drain(TlsStream& stream)
{
    while (true) {
        Frame frame = read_frame(stream);
        if (frame.type == FrameType::half_close) {
            return;
        }
        if (frame.type != FrameType::message) {
            throw TransportError("unexpected frame while draining a call");
        }
    }
}

}  // namespace

bool ServerCall::read(std::string& payload)
{
    if (half_closed_) {
        return false;
    }
    Frame frame = read_frame(stream_);
    switch (frame.type) {
    case FrameType::message:
        payload = std::move(frame.payload);
        return true;
    case FrameType::half_close:
        half_closed_ = true;
        return false;
    default:
        throw ProtocolError("unexpected frame inside a call");
    }
}

bool ServerCall::read(google::protobuf::MessageLite& message)
{
    std::string payload;
    if (!read(payload)) {
        return false;
    }
    if (!message.ParseFromString(payload)) {
        throw ProtocolError("malformed request message");
    }
    return true;
}

void ServerCall::read_single(google::protobuf::MessageLite& message)
{
    if (!read(message)) {
        throw ProtocolError("missing request message");
    }
    std::string extra;
    if (read(extra)) {
        throw ProtocolError("unexpected second request message");
    }
}

void ServerCall::write(std::string_view payload)
{
    write_frame(stream_, FrameType::message, payload);
}

void ServerCall::write(const google::protobuf::MessageLite& message)
{
    write(message.SerializeAsString());
}

bool ServerCall::cancelled(std::chrono::milliseconds wait)
{
    if (stopping_.load()) {
        return true;
    }
    if (!half_closed_) {
        return false;
    }
    // Nothing may arrive after half-close except the connection going away.
    return stream_.readable(wait) || stopping_.load();
}

Server::Server(std::shared_ptr<TlsContext> tls, ServerOptions options)
    : tls_(std::move(tls)), options_(std::move(options))
{
}

Server::~Server()
{
    stop();
}

void Server::add_service(Service service)
{
    std::string name = service.name;
    services_[name] = std::move(service);
}

core::Status Server::start()
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE | AI_NUMERICHOST;
    addrinfo* found = nullptr;
    const std::string service = std::to_string(options_.port);
    if (int rc = ::getaddrinfo(options_.bind_address.c_str(), service.c_str(), &hints, &found); rc != 0) {
        return core::make_error(core::StatusCode::invalid_argument,
                                "bad bind address " + options_.bind_address + ": " + ::gai_strerror(rc));
    }
    const int fd = ::socket(found->ai_family, found->ai_socktype | SOCK_CLOEXEC, found->ai_protocol);
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (fd < 0 || ::bind(fd, found->ai_addr, found->ai_addrlen) != 0 || ::listen(fd, 128) != 0) {
        const std::string reason = std::strerror(errno);
        ::freeaddrinfo(found);
        if (fd >= 0) {
            ::close(fd);
        }
        return core::make_error(core::StatusCode::invalid_argument,
                                "cannot listen on " + options_.bind_address + ":" + service + ": " + reason);
    }
    ::freeaddrinfo(found);

    sockaddr_storage bound{};
    socklen_t length = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &length);
    if (bound.ss_family == AF_INET) {
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
    } else {
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
    }
    listen_fd_ = fd;
    stopping_ = false;
    acceptor_ = std::thread([this] { accept_loop(); });
    return {};
}

void Server::stop()
{
    if (listen_fd_ < 0) {
        return;
    }
    stopping_ = true;
    if (acceptor_.joinable()) {
        acceptor_.join();
    }
    ::close(listen_fd_);
    listen_fd_ = -1;
    {
        std::lock_guard lock(mutex_);
        for (auto& connection : connections_) {
            if (connection.fd >= 0) {
                ::shutdown(connection.fd, SHUT_RDWR);
            }
        }
    }
    for (auto& connection : connections_) {
        if (connection.thread.joinable()) {
            connection.thread.join();
        }
    }
    connections_.clear();
}

void Server::accept_loop()
{
    while (!stopping_.load()) {
        pollfd pfd{};
        pfd.fd = listen_fd_;
        pfd.events = POLLIN;
        if (::poll(&pfd, 1, 50) <= 0) {
            reap_finished();
            continue;
        }
        const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            continue;
        }
        reap_finished();
        std::lock_guard lock(mutex_);
        Connection& connection = connections_.emplace_back();
        connection.fd = fd;
        connection.thread = std::thread([this, &connection] { serve(connection); });
    }
}

void Server::reap_finished()
{
    std::lock_guard lock(mutex_);
    for (auto it = connections_.begin(); it != connections_.end();) {
        if (it->done.load()) {
            it->thread.join();
            it = connections_.erase(it);
        } else {
            ++it;
        }
    }
}

void Server::serve(Connection& connection)
{
    try {
        auto stream = TlsStream::accept(tls_, connection.fd);
        while (!stopping_.load()) {
            Frame frame = read_frame(*stream);
            std::string service;
            std::uint32_t method = 0;
            if (frame.type != FrameType::call || !decode_call(frame.payload, service, method)) {
                break;
            }
            run_call(*stream, service, method);
        }
    } catch (const TransportError&) {
        // Peer went away or spoke nonsense; either way the connection ends.
    }
    {
        std::lock_guard lock(mutex_);
        ::close(connection.fd);
        connection.fd = -1;
    }
    connection.done = true;
}

void Server::run_call(TlsStream& stream, const std::string& service, std::uint32_t method)
{
    const Handler* handler = nullptr;
    if (auto it = services_.find(service); it != services_.end()) {
        if (auto h = it->second.handlers.find(method); h != it->second.handlers.end()) {
            handler = &h->second;
        }
    }
    if (handler == nullptr) {
        drain(stream);
        write_frame(stream, FrameType::trailer,
                    encode_trailer(TransportStatus::unimplemented,
                                   "no method " + std::to_string(method) + " on service '" + service + "'"));
        return;
    }

    ServerCall call(stream, stopping_);
    try {
        (*handler)(call);
        if (!call.half_closed()) {
            drain(stream);
        }
    } catch (const ProtocolError& error) {
        write_frame(stream, FrameType::trailer, encode_trailer(TransportStatus::protocol_error, error.what()));
        throw TransportError(error.what());
    } catch (const TransportError&) {
        throw;
    } catch (const std::exception& error) {
        write_frame(stream, FrameType::trailer, encode_trailer(TransportStatus::internal, error.what()));
        throw TransportError(error.what());
    }
    write_frame(stream, FrameType::trailer, encode_trailer(TransportStatus::ok, {}));
}

}  // namespace mikfs::rpc
