#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <google/protobuf/message_lite.h>

#include "mikfs/rpc/frame.hpp"
#include "mikfs/rpc/tls.hpp"

namespace mikfs::rpc {

// A malformed request; the call ends with a protocol-error trailer.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Server side of one call, valid for the duration of the handler.
class ServerCall {
public:
    ServerCall(TlsStream& stream, const std::atomic<bool>& stopping) : stream_(stream), stopping_(stopping) {}

    // Next request message; false once the client half-closes.
    bool read(std::string& payload);
    bool read(google::protobuf::MessageLite& message);

    // Exactly one request followed by half-close. Used by unary and
    // server-streaming handlers.
    void read_single(google::protobuf::MessageLite& message);

    void write(std::string_view payload);
    void write(const google::protobuf::MessageLite& message);

    // True once the client has gone away or the server is stopping. Only
    // meaningful after the client half-closed.
    bool cancelled(std::chrono::milliseconds wait = std::chrono::milliseconds(0));

    bool half_closed() const { return half_closed_; }

private:
    TlsStream& stream_;
    const std::atomic<bool>& stopping_;
    bool half_closed_ = false;
};

using Handler = std::function<void(ServerCall&)>;

struct Service {
    std::string name;
    std::map<std::uint32_t, Handler> handlers;
};

struct ServerOptions {
    std::string bind_address = "0.0.0.0";
    std::uint16_t port = 0;  // 0 picks an ephemeral port
};

// Accepts TLS connections and runs one thread per connection.
class Server {
public:
    Server(std::shared_ptr<TlsContext> tls, ServerOptions options);
    ~Server();

    void add_service(Service service);

    // Binds and starts accepting; InvalidArgument when the address is unusable.
    core::Status start();
    // Closes the listener and every connection, then joins all threads.
    void stop();

    std::uint16_t port() const { return port_; }

private:
    struct Connection {
        int fd = -1;
        std::thread thread;
        std::atomic<bool> done{false};
        TlsStream* stream = nullptr;
    };

    void accept_loop();
    void serve(Connection& connection);
    void run_call(TlsStream& stream, const std::string& service, std::uint32_t method);
    void reap_finished();

    std::shared_ptr<TlsContext> tls_;
    ServerOptions options_;
    std::map<std::string, Service> services_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::mutex mutex_;
    std::list<Connection> connections_;
};

}  // namespace mikfs::rpc
