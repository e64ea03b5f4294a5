#include "mikfs/core/zip.hpp"

#include <zlib.h>

#include <algorithm>
#include <ctime>
#include <limits>

namespace mikfs::core {

namespace {

constexpr std::uint32_t kLocalHeaderSignature = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSignature = 0x02014b50;
constexpr std::uint32_t kEndRecordSignature = 0x06054b50;
constexpr std::uint16_t kFlagUtf8 = 0x0800;
constexpr std::uint16_t kFlagEncrypted = 0x0001;
constexpr std::uint16_t kMethodStored = 0;
constexpr std::uint16_t kMethodDeflate = 8;
constexpr std::uint16_t kVersionNeeded = 20;
constexpr std::uint16_t kVersionMadeBy = (3 << 8) | 30;  // Unix, APPNOTE 3.0
constexpr std::size_t kLocalHeaderSize = 30;
constexpr std::size_t kCentralHeaderSize = 46;
constexpr std::size_t kEndRecordSize = 22;
constexpr std::uint64_t kMaxEntrySize = 2147483647;
constexpr std::uint64_t kMaxTotalInflated = std::uint64_t{1} << 32;

void put16(std::string& out, std::uint16_t v)
{
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

std::uint16_t get16(std::string_view in, std::size_t at)
{
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(in[at]) |
                                      (static_cast<std::uint8_t>(in[at + 1]) << 8));
}

std::uint32_t get32(std::string_view in, std::size_t at)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | static_cast<std::uint8_t>(in[at + static_cast<std::size_t>(i)]);
    }
    return v;
}

std::uint32_t crc_of(std::string_view data)
{
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t offset = 0;
    while (offset < data.size()) {
        const auto piece = static_cast<uInt>(std::min<std::size_t>(data.size() - offset, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + offset), piece);
        offset += piece;
    }
    return static_cast<std::uint32_t>(crc);
}

// Raw deflate (no zlib header), as ZIP method 8 expects.
bool deflate_raw(std::string_view data, std::string& out)
{
    z_stream stream{};
    if (deflateInit2(&stream, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        return false;
    }
    out.resize(deflateBound(&stream, static_cast<uLong>(data.size())));
    stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    stream.avail_in = static_cast<uInt>(data.size());
    stream.next_out = reinterpret_cast<Bytef*>(out.data());
    stream.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&stream, Z_FINISH);
    out.resize(stream.total_out);
    deflateEnd(&stream);
    return rc == Z_STREAM_END;
}

bool inflate_raw(std::string_view data, std::size_t expected, std::string& out)
{
    z_stream stream{};
    if (inflateInit2(&stream, -MAX_WBITS) != Z_OK) {
        return false;
    }
    // One spare byte so an over-long stream is detected rather than truncated.
    out.resize(expected + 1);
    stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    stream.avail_in = static_cast<uInt>(data.size());
    stream.next_out = reinterpret_cast<Bytef*>(out.data());
    stream.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&stream, Z_FINISH);
    const bool complete = rc == Z_STREAM_END && stream.total_out == expected;
    inflateEnd(&stream);
    out.resize(expected);
    return complete;
}

Status malformed(const std::string& why)
{
    return make_error(StatusCode::invalid_argument, "malformed archive: " + why);
}

}  // namespace

DosDateTime to_dos_time(std::uint64_t unix_ns)
{
    constexpr std::time_t kDosEpoch = 315532800;   // 1980-01-01T00:00:00Z
    constexpr std::time_t kDosLast = 4354819198;   // 2107-12-31T23:59:58Z
    auto seconds = static_cast<std::time_t>(unix_ns / 1000000000ULL);
    seconds = std::clamp(seconds, kDosEpoch, kDosLast);
    std::tm tm{};
    gmtime_r(&seconds, &tm);
    DosDateTime dos;
    dos.time = static_cast<std::uint16_t>((tm.tm_hour << 11) | (tm.tm_min << 5) | (tm.tm_sec / 2));
    dos.date = static_cast<std::uint16_t>(((tm.tm_year - 80) << 9) | ((tm.tm_mon + 1) << 5) | tm.tm_mday);
    return dos;
}

std::uint64_t from_dos_time(DosDateTime dos)
{
    std::tm tm{};
    tm.tm_year = ((dos.date >> 9) & 0x7F) + 80;
    tm.tm_mon = ((dos.date >> 5) & 0x0F) - 1;
    tm.tm_mday = dos.date & 0x1F;
    tm.tm_hour = (dos.time >> 11) & 0x1F;
    tm.tm_min = (dos.time >> 5) & 0x3F;
    tm.tm_sec = (dos.time & 0x1F) * 2;
    const std::time_t seconds = timegm(&tm);
    return seconds < 0 ? 0 : static_cast<std::uint64_t>(seconds) * 1000000000ULL;
}

void ZipWriter::add_directory(std::string_view name, std::uint64_t modified_ns)
{
    std::string dir_name(name);
    if (dir_name.empty() || dir_name.back() != '/') {
        dir_name += '/';
    }
    add(dir_name, {}, modified_ns, true);
}

void ZipWriter::add_file(std::string_view name, std::string_view data, std::uint64_t modified_ns)
{
    add(name, data, modified_ns, false);
}

void ZipWriter::add(std::string_view name, std::string_view data, std::uint64_t modified_ns, bool directory)
{
    const DosDateTime dos = to_dos_time(modified_ns);
    const std::uint32_t crc = crc_of(data);

    std::uint16_t method = kMethodStored;
    std::string deflated;
    std::string_view payload = data;
    if (!directory && !data.empty() && deflate_raw(data, deflated) && deflated.size() < data.size()) {
        method = kMethodDeflate;
        payload = deflated;
    }

    if (body_.size() > std::numeric_limits<std::uint32_t>::max() || name.size() > 0xFFFF) {
        overflow_ = true;
        return;
    }
    const auto offset = static_cast<std::uint32_t>(body_.size());

    body_.reserve(body_.size() + kLocalHeaderSize + name.size() + payload.size());
    put32(body_, kLocalHeaderSignature);
    put16(body_, kVersionNeeded);
    put16(body_, kFlagUtf8);
    put16(body_, method);
    put16(body_, dos.time);
    put16(body_, dos.date);
    put32(body_, crc);
    put32(body_, static_cast<std::uint32_t>(payload.size()));
    put32(body_, static_cast<std::uint32_t>(data.size()));
    put16(body_, static_cast<std::uint16_t>(name.size()));
    put16(body_, 0);
    body_.append(name);
    body_.append(payload);

    std::string central;
    put32(central, kCentralHeaderSignature);
    put16(central, kVersionMadeBy);
    put16(central, kVersionNeeded);
    put16(central, kFlagUtf8);
    put16(central, method);
    put16(central, dos.time);
    put16(central, dos.date);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(payload.size()));
    put32(central, static_cast<std::uint32_t>(data.size()));
    put16(central, static_cast<std::uint16_t>(name.size()));
    put16(central, 0);  // extra
    put16(central, 0);  // comment
    put16(central, 0);  // disk
    put16(central, 0);  // internal attributes
    const std::uint32_t unix_mode = directory ? 040755 : 0100644;
    put32(central, (unix_mode << 16) | (directory ? 0x10 : 0));
    put32(central, offset);
    central.append(name);
    central_.push_back(std::move(central));
}

Result<std::string> ZipWriter::finish()
{
    std::size_t central_size = 0;
    for (const auto& header : central_) {
        central_size += header.size();
    }
    if (overflow_ || central_.size() > 0xFFFF || body_.size() > std::numeric_limits<std::uint32_t>::max() ||
        central_size > std::numeric_limits<std::uint32_t>::max()) {
        return make_error(StatusCode::size_limit_exceeded, "archive too large for the 32-bit ZIP format");
    }
    std::string out = std::move(body_);
    const auto central_offset = static_cast<std::uint32_t>(out.size());
    for (const auto& header : central_) {
        out.append(header);
    }
    put32(out, kEndRecordSignature);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(central_.size()));
    put16(out, static_cast<std::uint16_t>(central_.size()));
    put32(out, static_cast<std::uint32_t>(central_size));
    put32(out, central_offset);
    put16(out, 0);
    body_.clear();
    central_.clear();
    return out;
}

Result<std::vector<ZipEntry>> read_zip(std::string_view archive)
{
    if (archive.size() < kEndRecordSize) {
        return malformed("too short");
    }
    std::size_t end = std::string_view::npos;
    const std::size_t lowest = archive.size() >= kEndRecordSize + 0xFFFF ? archive.size() - kEndRecordSize - 0xFFFF : 0;
    for (std::size_t at = archive.size() - kEndRecordSize + 1; at-- > lowest;) {
        if (get32(archive, at) == kEndRecordSignature &&
            at + kEndRecordSize + get16(archive, at + 20) == archive.size()) {
            end = at;
            break;
        }
    }
    if (end == std::string_view::npos) {
        return malformed("end of central directory not found");
    }

    const std::uint16_t disk = get16(archive, end + 4);
    const std::uint16_t central_disk = get16(archive, end + 6);
    const std::uint16_t disk_entries = get16(archive, end + 8);
    const std::uint16_t total_entries = get16(archive, end + 10);
    const std::uint32_t central_size = get32(archive, end + 12);
    const std::uint32_t central_offset = get32(archive, end + 16);
    if (disk != 0 || central_disk != 0 || disk_entries != total_entries) {
        return malformed("multi-disk archives are not supported");
    }
    if (total_entries == 0xFFFF || central_size == 0xFFFFFFFF || central_offset == 0xFFFFFFFF) {
        return malformed("ZIP64 archives are not supported");
    }
    if (std::uint64_t{central_offset} + central_size > end) {
        return malformed("central directory out of bounds");
    }

    std::vector<ZipEntry> entries;
    entries.reserve(total_entries);
    std::uint64_t inflated_total = 0;
    std::size_t at = central_offset;
    for (std::uint16_t i = 0; i < total_entries; ++i) {
        if (at + kCentralHeaderSize > end || get32(archive, at) != kCentralHeaderSignature) {
            return malformed("bad central directory header");
        }
        const std::uint16_t flags = get16(archive, at + 8);
        const std::uint16_t method = get16(archive, at + 10);
        const DosDateTime modified{get16(archive, at + 12), get16(archive, at + 14)};
        const std::uint32_t crc = get32(archive, at + 16);
        const std::uint32_t compressed = get32(archive, at + 20);
        const std::uint32_t uncompressed = get32(archive, at + 24);
        const std::uint16_t name_length = get16(archive, at + 28);
        const std::uint16_t extra_length = get16(archive, at + 30);
        const std::uint16_t comment_length = get16(archive, at + 32);
        const std::uint32_t local_offset = get32(archive, at + 42);
        const std::size_t next = at + kCentralHeaderSize + name_length + extra_length + comment_length;
        if (next > end) {
            return malformed("central directory entry out of bounds");
        }
        if (flags & kFlagEncrypted) {
            return malformed("encrypted entries are not supported");
        }
        if (compressed == 0xFFFFFFFF || uncompressed == 0xFFFFFFFF || local_offset == 0xFFFFFFFF) {
            return malformed("ZIP64 entries are not supported");
        }
        if (uncompressed > kMaxEntrySize) {
            return malformed("entry larger than 2^31-1 bytes");
        }
        inflated_total += uncompressed;
        if (inflated_total > kMaxTotalInflated) {
            return malformed("archive inflates beyond 4 GiB");
        }

        ZipEntry entry;
        entry.name.assign(archive.substr(at + kCentralHeaderSize, name_length));
        entry.modified = modified;

        if (std::uint64_t{local_offset} + kLocalHeaderSize > central_offset ||
            get32(archive, local_offset) != kLocalHeaderSignature) {
            return malformed("bad local header for '" + entry.name + "'");
        }
        const std::size_t data_start =
            local_offset + kLocalHeaderSize + get16(archive, local_offset + 26) + get16(archive, local_offset + 28);
        if (std::uint64_t{data_start} + compressed > central_offset) {
            return malformed("entry data out of bounds for '" + entry.name + "'");
        }
        const std::string_view payload = archive.substr(data_start, compressed);
        if (method == kMethodStored) {
            if (compressed != uncompressed) {
                return malformed("stored entry size mismatch for '" + entry.name + "'");
            }
            entry.data.assign(payload);
        } else if (method == kMethodDeflate) {
            if (!inflate_raw(payload, uncompressed, entry.data)) {
                return malformed("corrupt deflate data for '" + entry.name + "'");
            }
        } else {
            return malformed("unsupported compression method " + std::to_string(method));
        }
        if (crc_of(entry.data) != crc) {
            return malformed("CRC mismatch for '" + entry.name + "'");
        }
        entries.push_back(std::move(entry));
        at = next;
    }
    return entries;
}

}  // namespace mikfs::core
