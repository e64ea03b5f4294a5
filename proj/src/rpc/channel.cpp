#include "mikfs/rpc/channel.hpp"

#include <chrono>

namespace mikfs::rpc {

namespace {

constexpr std::size_t kMaxIdleConnections = 4;

std::string_view transport_status_name(TransportStatus status)
{
    switch (status) {
    case TransportStatus::ok:
        return "ok";
    case TransportStatus::unimplemented:
        return "unimplemented";
    case TransportStatus::protocol_error:
        return "protocol error";
    case TransportStatus::internal:
        return "internal error";
    }
    return "unknown";
}

}  // namespace

ClientCall::ClientCall(std::shared_ptr<Channel> channel, std::unique_ptr<TlsStream> stream, std::string service,
                       std::uint32_t method)
    : channel_(std::move(channel)), stream_(std::move(stream)), service_(std::move(service)), method_(method)
{
}

ClientCall::~ClientCall()
{
    if (finished_ && !cancelled_.load()) {
        channel_->release(std::move(stream_));
    }
}

void ClientCall::write(std::string_view payload)
{
    write_frame(*stream_, FrameType::message, payload);
}

void ClientCall::write(const google::protobuf::MessageLite& message)
{
    write(message.SerializeAsString());
}

void ClientCall::half_close()
{
    if (!half_closed_) {
        write_frame(*stream_, FrameType::half_close, {});
        half_closed_ = true;
    }
}

bool ClientCall::read(std::string& payload)
{
    if (finished_) {
        return false;
    }
    Frame frame = read_frame(*stream_);
    if (frame.type == FrameType::message) {
        channel_->observe(service_, method_, frame.payload);
        payload = std::move(frame.payload);
        return true;
    }
    if (frame.type != FrameType::trailer) {
        throw TransportError("unexpected frame from server");
    }
    TransportStatus status = TransportStatus::internal;
    std::string detail;
    if (!decode_trailer(frame.payload, status, detail)) {
        throw TransportError("malformed trailer");
    }
    if (status != TransportStatus::ok) {
        throw TransportError("server reported " + std::string(transport_status_name(status)) +
                             (detail.empty() ? "" : ": " + detail));
    }
    finished_ = true;
    return false;
}

bool ClientCall::read(google::protobuf::MessageLite& message)
{
    std::string payload;
    if (!read(payload)) {
        return false;
    }
    if (!message.ParseFromString(payload)) {
        throw TransportError("malformed response message");
    }
    return true;
}

void ClientCall::cancel()
{
    cancelled_ = true;
    stream_->shutdown();
}

std::shared_ptr<Channel> Channel::create(std::shared_ptr<TlsContext> tls, std::string host, std::uint16_t port)
{
    return std::shared_ptr<Channel>(new Channel(std::move(tls), std::move(host), port));
}

std::unique_ptr<ClientCall> Channel::start(std::string_view service, std::uint32_t method)
{
    auto stream = acquire();
    write_frame(*stream, FrameType::call, encode_call(service, method));
    return std::unique_ptr<ClientCall>(
        new ClientCall(shared_from_this(), std::move(stream), std::string(service), method));
}

void Channel::set_tap(Tap tap)
{
    std::lock_guard lock(mutex_);
    tap_ = std::move(tap);
}

std::unique_ptr<TlsStream> Channel::acquire()
{
    {
        std::lock_guard lock(mutex_);
        while (!idle_.empty()) {
            auto stream = std::move(idle_.back());
            idle_.pop_back();
            // An idle connection has nothing to say; anything readable means
            // the server closed it.
            if (!stream->readable(std::chrono::milliseconds(0))) {
                return stream;
            }
        }
    }
    return TlsStream::connect(tls_, host_, port_);
}

void Channel::release(std::unique_ptr<TlsStream> stream)
{
    std::lock_guard lock(mutex_);
    if (idle_.size() < kMaxIdleConnections) {
        idle_.push_back(std::move(stream));
    }
}

void Channel::observe(std::string_view service, std::uint32_t method, std::string_view payload)
{
    Tap tap;
    {
        std::lock_guard lock(mutex_);
        tap = tap_;
    }
    if (tap) {
        tap(service, method, payload);
    }
}

}  // namespace mikfs::rpc
