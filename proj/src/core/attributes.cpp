#include "mikfs/core/attributes.hpp"

#include "mikfs/core/path.hpp"

namespace mikfs::core {

std::string canonical_attribute_name(std::string_view name)
{
    std::string out(name);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

Status validate_attribute_name(std::string_view name)
{
    auto count = utf8_scalar_count(name);
    if (!count) {
        return make_error(StatusCode::invalid_argument, "attribute name is not valid UTF-8");
    }
    if (*count == 0) {
        return make_error(StatusCode::invalid_argument, "attribute name is empty");
    }
    if (*count > kMaxAttributeNameLength) {
        return make_error(StatusCode::invalid_argument, "attribute name exceeds 255 characters");
    }
    return {};
}

Status validate_attribute_value(std::string_view value)
{
    auto count = utf8_scalar_count(value);
    if (!count) {
        return make_error(StatusCode::invalid_argument, "attribute value is not valid UTF-8");
    }
    if (*count > kMaxAttributeValueLength) {
        return make_error(StatusCode::invalid_argument, "attribute value exceeds 65535 characters");
    }
    return {};
}

Result<CustomAttributes> apply_attribute_updates(const CustomAttributes& current,
                                                 std::span<const AttributeUpdate> updates)
{
    CustomAttributes next = current;
    for (const auto& update : updates) {
        if (auto status = validate_attribute_name(update.name); !status.ok()) {
            return status;
        }
        auto name = canonical_attribute_name(update.name);
        if (!update.value) {
            next.erase(name);
            continue;
        }
        if (auto status = validate_attribute_value(*update.value); !status.ok()) {
            return status;
        }
        next.insert_or_assign(std::move(name), *update.value);
    }
    return next;
}

}  // namespace mikfs::core
