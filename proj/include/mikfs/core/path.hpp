#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mikfs/core/status.hpp"

namespace mikfs::core {

inline constexpr std::size_t kMaxNameLength = 255;
inline constexpr std::size_t kMaxPathLength = 4095;

// Number of Unicode scalar values in a UTF-8 string, or nullopt when the
// bytes are not well-formed UTF-8 (overlongs and surrogates included).
std::optional<std::size_t> utf8_scalar_count(std::string_view text);

// Decodes to scalar values; nullopt on malformed input.
std::optional<std::u32string> utf8_decode(std::string_view text);

enum class NameViolation {
    empty,
    too_long,
    nul_character,
    slash_character,
    invalid_encoding,
};

std::string_view describe(NameViolation violation);

// nullopt means the name is valid: 1-255 scalars, no U+0000, no '/'.
std::optional<NameViolation> validate_name(std::string_view name);

// A canonical absolute path inside a mikfs tree. The empty segment list is
// the root directory.
class Path {
public:
    Path() = default;

    // Leading '/' optional; "" and "/" are the root. Rejects empty segments,
    // "." and "..", invalid names and paths over 4095 scalars.
    static Result<Path> parse(std::string_view raw);

    // Segments must already be valid names.
    static Path from_segments(std::vector<std::string> segments);

    const std::vector<std::string>& segments() const { return segments_; }
    bool is_root() const { return segments_.empty(); }
    std::size_t depth() const { return segments_.size(); }

    // Final component; empty for the root.
    std::string_view name() const;
    Path parent() const;
    Path child(std::string name) const;

    // Component-wise prefix test; a path is a prefix of itself.
    bool is_prefix_of(const Path& other) const;

    // "/" for the root, otherwise "/a/b".
    std::string str() const;

    // Length of str() in scalar values.
    std::size_t rendered_length() const;

    friend bool operator==(const Path&, const Path&) = default;
    friend auto operator<=>(const Path&, const Path&) = default;

private:
    explicit Path(std::vector<std::string> segments) : segments_(std::move(segments)) {}

    std::vector<std::string> segments_;
};

}  // namespace mikfs::core
