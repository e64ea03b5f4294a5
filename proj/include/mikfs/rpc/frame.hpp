#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mikfs/rpc/tls.hpp"

namespace mikfs::rpc {

// Every frame is: type (1 byte), payload length (4 bytes, big-endian), payload.
//
//   CALL        client -> server  u8 service-name length, service name, u32 method number
//   MESSAGE     both directions   one serialized protobuf message
//   HALF_CLOSE  client -> server  no more request messages
//   TRAILER     server -> client  u32 transport status, UTF-8 detail; ends the call
//
// Calls run one at a time per connection. A client cancels by closing the
// connection.
enum class FrameType : std::uint8_t {
    call = 0x01,
    message = 0x02,
    half_close = 0x03,
    trailer = 0x04,
};

enum class TransportStatus : std::uint32_t {
    ok = 0,
    unimplemented = 1,
    protocol_error = 2,
    internal = 3,
};

// Whole-file messages carry up to 2^31 - 1 content bytes plus envelope.
inline constexpr std::uint32_t kMaxFramePayload = 0x80100000u;

struct Frame {
    FrameType type = FrameType::message;
    std::string payload;
};

void write_frame(TlsStream& stream, FrameType type, std::string_view payload);
// Throws TransportError on an unknown type or an oversized payload.
Frame read_frame(TlsStream& stream);

std::string encode_call(std::string_view service, std::uint32_t method);
bool decode_call(std::string_view payload, std::string& service, std::uint32_t& method);

std::string encode_trailer(TransportStatus status, std::string_view detail);
bool decode_trailer(std::string_view payload, TransportStatus& status, std::string& detail);

}  // namespace mikfs::rpc
