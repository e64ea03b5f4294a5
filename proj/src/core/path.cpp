#include "mikfs/core/path.hpp"

#include <cstdint>

namespace mikfs::core {

namespace {

// Returns the scalar and advances pos, or nullopt on malformed input.
std::optional<char32_t> next_scalar(std::string_view text, std::size_t& pos)
{
    auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(text[i]); };
    const std::uint8_t lead = byte(pos);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }

    std::size_t extra = 0;
    char32_t value = 0;
    char32_t minimum = 0;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        value = lead & 0x1F;
        minimum = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        value = lead & 0x0F;
        minimum = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        value = lead & 0x07;
        minimum = 0x10000;
    } else {
        return std::nullopt;
    }
    if (pos + extra >= text.size()) {
        return std::nullopt;
    }
    for (std::size_t i = 1; i <= extra; ++i) {
        const std::uint8_t cont = byte(pos + i);
        if ((cont & 0xC0) != 0x80) {
            return std::nullopt;
        }
        value = (value << 6) | (cont & 0x3F);
    }
    if (value < minimum || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
        return std::nullopt;
    }
    pos += extra + 1;
    return value;
}

}  // namespace

std::optional<std::size_t> utf8_scalar_count(std::string_view text)
{
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (!next_scalar(text, pos)) {
            return std::nullopt;
        }
        ++count;
    }
    return count;
}

std::optional<std::u32string> utf8_decode(std::string_view text)
{
    std::u32string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto scalar = next_scalar(text, pos);
        if (!scalar) {
            return std::nullopt;
        }
        out.push_back(*scalar);
    }
    return out;
}

std::string_view describe(NameViolation violation)
{
    switch (violation) {
    case NameViolation::empty:
        return "name is empty";
    case NameViolation::too_long:
        return "name exceeds 255 characters";
    case NameViolation::nul_character:
        return "name contains U+0000";
    case NameViolation::slash_character:
        return "name contains '/'";
    case NameViolation::invalid_encoding:
        return "name is not valid UTF-8";
    }
    return "invalid name";
}

std::optional<NameViolation> validate_name(std::string_view name)
{
    if (name.empty()) {
        return NameViolation::empty;
    }
    if (name.find('\0') != std::string_view::npos) {
        return NameViolation::nul_character;
    }
    if (name.find('/') != std::string_view::npos) {
        return NameViolation::slash_character;
    }
    auto count = utf8_scalar_count(name);
    if (!count) {
        return NameViolation::invalid_encoding;
    }
    if (*count > kMaxNameLength) {
        return NameViolation::too_long;
    }
    return std::nullopt;
}

Result<Path> Path::parse(std::string_view raw)
{
    if (raw.starts_with('/')) {
        raw.remove_prefix(1);
    }
    std::vector<std::string> segments;
    if (raw.empty()) {
        return Path();
    }

    std::size_t rendered = 0;
    std::size_t start = 0;
    while (true) {
        const std::size_t slash = raw.find('/', start);
        const std::string_view segment = raw.substr(start, slash == std::string_view::npos ? raw.npos : slash - start);
        if (segment.empty()) {
            return make_error(StatusCode::invalid_path, "empty path segment");
        }
        if (segment == "." || segment == "..") {
            return make_error(StatusCode::invalid_path, "relative segment '" + std::string(segment) + "' not allowed");
        }
        if (auto violation = validate_name(segment)) {
            return make_error(StatusCode::invalid_path, std::string(describe(*violation)));
        }
        rendered += 1 + *utf8_scalar_count(segment);
        if (rendered > kMaxPathLength) {
            return make_error(StatusCode::invalid_path, "path exceeds 4095 characters");
        }
        segments.emplace_back(segment);
        if (slash == std::string_view::npos) {
            break;
        }
        start = slash + 1;
    }
    return Path(std::move(segments));
}

Path Path::from_segments(std::vector<std::string> segments)
{
    return Path(std::move(segments));
}

std::string_view Path::name() const
{
    return segments_.empty() ? std::string_view() : std::string_view(segments_.back());
}

Path Path::parent() const
{
    if (segments_.empty()) {
        return {};
    }
    return Path(std::vector<std::string>(segments_.begin(), segments_.end() - 1));
}

Path Path::child(std::string name) const
{
    auto segments = segments_;
    segments.push_back(std::move(name));
    return Path(std::move(segments));
}

bool Path::is_prefix_of(const Path& other) const
{
    if (segments_.size() > other.segments_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i] != other.segments_[i]) {
            return false;
        }
    }
    return true;
}

std::string Path::str() const
{
    if (segments_.empty()) {
        return "/";
    }
    std::string out;
    for (const auto& segment : segments_) {
        out += '/';
        out += segment;
    }
    return out;
}

std::size_t Path::rendered_length() const
{
    if (segments_.empty()) {
        return 1;
    }
    std::size_t total = 0;
    for (const auto& segment : segments_) {
        total += 1 + utf8_scalar_count(segment).value_or(segment.size());
    }
    return total;
}

}  // namespace mikfs::core
