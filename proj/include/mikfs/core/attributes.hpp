#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "mikfs/core/status.hpp"

namespace mikfs::core {

inline constexpr std::size_t kMaxAttributeNameLength = 255;
inline constexpr std::size_t kMaxAttributeValueLength = 65535;

// Keyed by canonical (lower-case) name.
using CustomAttributes = std::map<std::string, std::string, std::less<>>;

// ASCII letters are folded; other scalars are kept as-is.
std::string canonical_attribute_name(std::string_view name);

// 1-255 scalars of valid UTF-8.
Status validate_attribute_name(std::string_view name);
// 0-65535 scalars of valid UTF-8.
Status validate_attribute_value(std::string_view value);

struct AttributeUpdate {
    std::string name;
    // nullopt removes the attribute.
    std::optional<std::string> value;
};

// Applies updates in order. All-or-nothing: an invalid update leaves the
// input untouched and returns InvalidArgument.
Result<CustomAttributes> apply_attribute_updates(const CustomAttributes& current,
                                                 std::span<const AttributeUpdate> updates);

}  // namespace mikfs::core
