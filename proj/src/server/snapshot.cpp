#include "mikfs/server/snapshot.hpp"

#include "mikfs/core/file_io.hpp"

#include <zlib.h>


namespace mikfs::server {

namespace {

constexpr std::string_view kMagic = "MIKFS001";

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

template <typename T>
void put_be(std::string& out, T v)
{
    for (int shift = (sizeof(T) - 1) * 8; shift >= 0; shift -= 8) {
        out.push_back(static_cast<char>((v >> shift) & 0xFF));
    }
}

void encode_node(std::string& out, const core::Node& node)
{
    put_u8(out, node.is_file() ? 0 : 1);
    put_be<std::uint64_t>(out, node.attrs.last_modified_time);
    put_be<std::uint32_t>(out, node.attrs.permissions.bits());
    for (const auto* group : {&node.attrs.owner.host_group, &node.attrs.owner.user_group}) {
        put_u8(out, static_cast<std::uint8_t>(group->key().size()));
        out += group->key();
    }
    put_be<std::uint32_t>(out, static_cast<std::uint32_t>(node.attrs.custom.size()));
    for (const auto& [name, value] : node.attrs.custom) {
        put_be<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        put_be<std::uint32_t>(out, static_cast<std::uint32_t>(value.size()));
        out += value;
    }
    if (node.is_file()) {
        put_be<std::uint64_t>(out, node.content().size());
        out += node.content();
        return;
    }
    put_be<std::uint32_t>(out, static_cast<std::uint32_t>(node.children().size()));
    for (const auto& [name, child] : node.children()) {
        put_be<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out += name;
        encode_node(out, *child);
    }
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    bool failed() const { return failed_; }
    bool at_end() const { return pos_ == bytes_.size(); }

    template <typename T>
    T be()
    {
        T v = 0;
        if (!need(sizeof(T))) {
            return 0;
        }
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v = static_cast<T>((v << 8) | static_cast<unsigned char>(bytes_[pos_++]));
        }
        return v;
    }

    std::string take(std::uint64_t n)
    {
        if (!need(n)) {
            return {};
        }
        std::string out(bytes_.substr(pos_, n));
        pos_ += n;
        return out;
    }

private:
    bool need(std::uint64_t n)
    {
        if (failed_ || bytes_.size() - pos_ < n) {
            failed_ = true;
            return false;
        }
        return true;
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
    bool failed_ = false;
};

std::unique_ptr<core::Node> decode_node(Reader& in, int depth)
{
    if (depth > static_cast<int>(core::kMaxPathLength)) {
        return nullptr;
    }
    const std::uint8_t kind = in.be<std::uint8_t>();
    const std::uint64_t mtime = in.be<std::uint64_t>();
    const std::uint32_t bits = in.be<std::uint32_t>();
    core::Ownership owner;
    for (auto* group : {&owner.host_group, &owner.user_group}) {
        auto key = core::GroupOwner::from_bytes(in.take(in.be<std::uint8_t>()));
        if (!key.ok()) {
            return nullptr;
        }
        *group = *key;
    }
    auto permissions = core::PermissionsMask::from_wire(bits);
    if (in.failed() || kind > 1 || !permissions.ok()) {
        return nullptr;
    }
    core::CustomAttributes custom;
    const std::uint32_t attribute_count = in.be<std::uint32_t>();
    for (std::uint32_t i = 0; i < attribute_count && !in.failed(); ++i) {
        std::string name = in.take(in.be<std::uint32_t>());
        std::string value = in.take(in.be<std::uint32_t>());
        custom.emplace(std::move(name), std::move(value));
    }
    std::unique_ptr<core::Node> node;
    if (kind == 0) {
        node = core::Node::make_file(in.take(in.be<std::uint64_t>()), owner, *permissions, mtime);
    } else {
        node = core::Node::make_directory(owner, *permissions, mtime);
        const std::uint32_t child_count = in.be<std::uint32_t>();
        for (std::uint32_t i = 0; i < child_count && !in.failed(); ++i) {
            std::string name = in.take(in.be<std::uint16_t>());
            auto child = decode_node(in, depth + 1);
            if (child == nullptr || !node->children().emplace(std::move(name), std::move(child)).second) {
                return nullptr;
            }
        }
    }
    if (in.failed()) {
        return nullptr;
    }
    node->attrs.custom = std::move(custom);
    return node;
}

core::Status corrupt(const std::string& why)
{
    return core::make_error(core::StatusCode::invalid_argument, "corrupt snapshot: " + why);
}

}  // namespace

std::string encode_snapshot(const core::Tree& tree)
{
    std::string payload;
    encode_node(payload, tree.root());
    std::string out(kMagic);
    put_be<std::uint64_t>(out, payload.size());
    out += payload;
    put_be<std::uint32_t>(out, static_cast<std::uint32_t>(
                                   ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), payload.size())));
    return out;
}

core::Result<core::Tree> decode_snapshot(std::string_view bytes)
{
    if (bytes.size() < kMagic.size() + 12 || bytes.substr(0, kMagic.size()) != kMagic) {
        return corrupt("bad magic");
    }
    Reader header(bytes.substr(kMagic.size()));
    const std::uint64_t length = header.be<std::uint64_t>();
    if (length != bytes.size() - kMagic.size() - 12) {
        return corrupt("length mismatch");
    }
    const std::string_view payload = bytes.substr(kMagic.size() + 8, length);
    Reader trailer(bytes.substr(kMagic.size() + 8 + length));
    const std::uint32_t crc = trailer.be<std::uint32_t>();
    if (crc != static_cast<std::uint32_t>(::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), payload.size()))) {
        return corrupt("checksum mismatch");
    }
    Reader in(payload);
    auto root = decode_node(in, 0);
    if (root == nullptr || !in.at_end()) {
        return corrupt("malformed node data");
    }
    if (!root->is_directory()) {
        return corrupt("root is not a directory");
    }
    auto tree = core::Tree::from_root(std::move(root));
    if (!tree.ok()) {
        return corrupt(tree.status().message());
    }
    return tree;
}

core::Status write_snapshot_file(const std::filesystem::path& path, const std::string& bytes)
{
    return core::write_file_atomic(path, bytes);
}

core::Result<core::Tree> load_snapshot_file(const std::filesystem::path& path)
{
    auto bytes = core::read_file(path);
    if (!bytes.ok()) {
        return bytes.status();
    }
    return decode_snapshot(*bytes);
}

}  // namespace mikfs::server
