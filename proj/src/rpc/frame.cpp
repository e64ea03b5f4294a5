#include "mikfs/rpc/frame.hpp"

namespace mikfs::rpc {

namespace {

void put_u32(std::string& out, std::uint32_t value)
{
    out.push_back(static_cast<char>(value >> 24));
    out.push_back(static_cast<char>(value >> 16));
    out.push_back(static_cast<char>(value >> 8));
    out.push_back(static_cast<char>(value));
}

std::uint32_t get_u32(const char* p)
{
    const auto* u = reinterpret_cast<const unsigned char*>(p);
    return (std::uint32_t{u[0]} << 24) | (std::uint32_t{u[1]} << 16) | (std::uint32_t{u[2]} << 8) | u[3];
}

}  // namespace

void write_frame(TlsStream& stream, FrameType type, std::string_view payload)
{
    if (payload.size() > kMaxFramePayload) {
        throw TransportError("frame payload too large");
    }
    std::string header;
    header.push_back(static_cast<char>(type));
    put_u32(header, static_cast<std::uint32_t>(payload.size()));
    // Small frames go out as a single TLS record.
    if (payload.size() <= 16384) {
        header.append(payload);
        stream.write_all(header);
        return;
    }
    stream.write_all(header);
    stream.write_all(payload);
}

Frame read_frame(TlsStream& stream)
{
    char header[5];
    stream.read_exact(header, sizeof header);
    const auto type = static_cast<std::uint8_t>(header[0]);
    if (type < 0x01 || type > 0x04) {
        throw TransportError("unknown frame type");
    }
    const std::uint32_t length = get_u32(header + 1);
    if (length > kMaxFramePayload) {
        throw TransportError("frame payload too large");
    }
    Frame frame;
    frame.type = static_cast<FrameType>(type);
    frame.payload.resize(length);
    if (length > 0) {
        stream.read_exact(frame.payload.data(), length);
    }
    return frame;
}

std::string encode_call(std::string_view service, std::uint32_t method)
{
    std::string out;
    out.push_back(static_cast<char>(service.size()));
    out.append(service.substr(0, 255));
    put_u32(out, method);
    return out;
}

bool decode_call(std::string_view payload, std::string& service, std::uint32_t& method)
{
    if (payload.empty()) {
        return false;
    }
    const std::size_t length = static_cast<unsigned char>(payload[0]);
    if (payload.size() != 1 + length + 4) {
        return false;
    }
    service.assign(payload.substr(1, length));
    method = get_u32(payload.data() + 1 + length);
    return true;
}

std::string encode_trailer(TransportStatus status, std::string_view detail)
{
    std::string out;
    put_u32(out, static_cast<std::uint32_t>(status));
    out.append(detail);
    return out;
}

bool decode_trailer(std::string_view payload, TransportStatus& status, std::string& detail)
{
    if (payload.size() < 4) {
        return false;
    }
    status = static_cast<TransportStatus>(get_u32(payload.data()));
    detail.assign(payload.substr(4));
    return true;
}

}  // namespace mikfs::rpc
