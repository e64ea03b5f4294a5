#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mikfs/core/status.hpp"

namespace mikfs::core {

// MS-DOS date/time pair as stored in ZIP headers (UTC, 2-second resolution).
struct DosDateTime {
    std::uint16_t time = 0;
    std::uint16_t date = 0;

    friend bool operator==(const DosDateTime&, const DosDateTime&) = default;
};

// Clamps to the DOS range 1980-01-01 .. 2107-12-31.
DosDateTime to_dos_time(std::uint64_t unix_ns);
std::uint64_t from_dos_time(DosDateTime dos);

struct ZipEntry {
    // Relative '/'-separated name; directories end in '/'.
    std::string name;
    std::string data;
    DosDateTime modified;

    bool is_directory() const { return !name.empty() && name.back() == '/'; }
};

// Writes a PKZIP archive: deflate for files (stored when deflate does not
// shrink them), stored directory entries, UTF-8 names, no ZIP64.
class ZipWriter {
public:
    void add_directory(std::string_view name, std::uint64_t modified_ns);
    void add_file(std::string_view name, std::string_view data, std::uint64_t modified_ns);

    std::size_t entry_count() const { return central_.size(); }

    // Appends the central directory and end record. SizeLimitExceeded when
    // the archive does not fit the 32-bit format.
    Result<std::string> finish();

private:
    void add(std::string_view name, std::string_view data, std::uint64_t modified_ns, bool directory);

    std::string body_;
    std::vector<std::string> central_;
    bool overflow_ = false;
};

// Parses and inflates every entry, checking CRC-32. InvalidArgument for
// anything malformed, encrypted, multi-disk or ZIP64.
Result<std::vector<ZipEntry>> read_zip(std::string_view archive);

}  // namespace mikfs::core
