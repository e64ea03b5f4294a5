#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <google/protobuf/message_lite.h>

#include "mikfs/rpc/frame.hpp"
#include "mikfs/rpc/tls.hpp"

namespace mikfs::rpc {

// Observes every response message payload received on a channel.
using Tap = std::function<void(std::string_view service, std::uint32_t method, std::string_view payload)>;

class Channel;

// Client side of one call. Not thread-safe except for cancel().
class ClientCall {
public:
    ~ClientCall();
    ClientCall(const ClientCall&) = delete;
    ClientCall& operator=(const ClientCall&) = delete;

    void write(std::string_view payload);
    void write(const google::protobuf::MessageLite& message);
    void half_close();

    // Next response message; false once the call completed normally. Throws
    // TransportError for a broken connection or a non-OK trailer.
    bool read(std::string& payload);
    bool read(google::protobuf::MessageLite& message);

    // Abandons the call by closing its connection; any blocked read throws.
    void cancel();

private:
    friend class Channel;
    ClientCall(std::shared_ptr<Channel> channel, std::unique_ptr<TlsStream> stream, std::string service,
               std::uint32_t method);

    std::shared_ptr<Channel> channel_;
    std::unique_ptr<TlsStream> stream_;
    std::string service_;
    std::uint32_t method_;
    bool half_closed_ = false;
    bool finished_ = false;
    std::atomic<bool> cancelled_{false};
};

// Pooled TLS connections to one server.
class Channel : public std::enable_shared_from_this<Channel> {
public:
    static std::shared_ptr<Channel> create(std::shared_ptr<TlsContext> tls, std::string host, std::uint16_t port);

    // Connects (or reuses an idle connection) and sends the CALL frame.
    std::unique_ptr<ClientCall> start(std::string_view service, std::uint32_t method);

    void set_tap(Tap tap);

    const std::string& host() const { return host_; }
    std::uint16_t port() const { return port_; }

private:
    friend class ClientCall;
    Channel(std::shared_ptr<TlsContext> tls, std::string host, std::uint16_t port)
        : tls_(std::move(tls)), host_(std::move(host)), port_(port)
    {
    }

    std::unique_ptr<TlsStream> acquire();
    void release(std::unique_ptr<TlsStream> stream);
    void observe(std::string_view service, std::uint32_t method, std::string_view payload);

    std::shared_ptr<TlsContext> tls_;
    std::string host_;
    std::uint16_t port_;
    std::mutex mutex_;
    std::vector<std::unique_ptr<TlsStream>> idle_;
    Tap tap_;
};

// One request, one response.
template <class Response>
Response unary_call(Channel& channel, std::string_view service, std::uint32_t method,
                    const google::protobuf::MessageLite& request)
{
    auto call = channel.start(service, method);
    call->write(request);
    call->half_close();
    Response response;
    if (!call->read(response)) {
        throw TransportError("server sent no response");
    }
    std::string extra;
    if (call->read(extra)) {
        throw TransportError("server sent more than one response");
    }
    return response;
}

}  // namespace mikfs::rpc
