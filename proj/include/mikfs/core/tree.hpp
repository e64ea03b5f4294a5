#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mikfs/core/attributes.hpp"
#include "mikfs/core/ownership.hpp"
#include "mikfs/core/path.hpp"
#include "mikfs/core/status.hpp"

namespace mikfs::core {

inline constexpr std::uint64_t kMaxFileSize = 2147483647;  // 2^31 - 1
inline constexpr std::uint32_t kDefaultRootPermissions = 0x0FFD;

// Nanoseconds since 1970-01-01T00:00:00Z.
using Timestamp = std::uint64_t;

Timestamp now_ns();

enum class NodeKind { file, directory };

struct NodeAttributes {
    std::uint64_t size = 0;
    Timestamp last_modified_time = 0;
    PermissionsMask permissions;
    Ownership owner;
    CustomAttributes custom;
};

struct Node;
using Children = std::map<std::string, std::unique_ptr<Node>, std::less<>>;

struct Node {
    NodeAttributes attrs;
    std::variant<std::string, Children> body;

    static std::unique_ptr<Node> make_file(std::string content, Ownership owner, PermissionsMask permissions,
                                           Timestamp modified);
    static std::unique_ptr<Node> make_directory(Ownership owner, PermissionsMask permissions, Timestamp modified);

    NodeKind kind() const { return body.index() == 0 ? NodeKind::file : NodeKind::directory; }
    bool is_file() const { return body.index() == 0; }
    bool is_directory() const { return body.index() == 1; }

    const std::string& content() const { return std::get<std::string>(body); }
    const Children& children() const { return std::get<Children>(body); }
    Children& children() { return std::get<Children>(body); }

    const Node* child(std::string_view name) const;

    std::unique_ptr<Node> clone() const;
};

// Everything a client may learn about a node. The owner handle has no place
// here.
struct PublicAttributes {
    NodeKind kind = NodeKind::file;
    std::uint64_t size = 0;
    Timestamp last_modified_time = 0;
    PermissionsMask permissions;
    CustomAttributes custom;

    friend bool operator==(const PublicAttributes&, const PublicAttributes&) = default;
};

PublicAttributes public_view(const Node& node);

struct DirectoryEntry {
    std::string name;
    PublicAttributes attributes;

    friend bool operator==(const DirectoryEntry&, const DirectoryEntry&) = default;
};

// Longest '/'-prefixed relative path below node, in scalars; 0 for a file or
// an empty directory.
std::size_t deepest_relative_length(const Node& node);

// Child names valid, file size == content length, directory size 0, every
// path within 4095 scalars.
Status check_invariants(const Node& root);

// The virtual filesystem tree. Not internally synchronized; every mutating
// call either fully applies or leaves the tree untouched.
class Tree {
public:
    Tree(Ownership root_owner, PermissionsMask root_permissions, Timestamp created);

    // Adopts a root node after check_invariants.
    static Result<Tree> from_root(std::unique_ptr<Node> root);

    Tree(Tree&&) noexcept = default;
    Tree& operator=(Tree&&) noexcept = default;

    const Node& root() const { return *root_; }

    // nullptr when any component is missing or crosses a file.
    const Node* lookup(const Path& path) const;

    // NotFound or NotADirectory naming the failing component.
    Result<const Node*> resolve(const Path& path) const;

    Status create_file(const Path& path, std::string content, const Ownership& owner, PermissionsMask permissions,
                       Timestamp now);
    Status create_directory(const Path& path, const Ownership& owner, PermissionsMask permissions, Timestamp now);

    // Replaces content and bumps the modification time; owner, permissions
    // and custom attributes stay.
    Status overwrite_file(const Path& path, std::string content, Timestamp now);

    // Non-empty directories need recursive.
    Status remove(const Path& path, NodeKind expected, bool recursive);

    // Keeps every attribute of the moved subtree.
    Status move(const Path& from, const Path& to, NodeKind expected);

    // Every copied node gets owner, permissions and now; content and custom
    // attributes are copied.
    Status copy(const Path& from, const Path& to, NodeKind expected, const Ownership& owner,
                PermissionsMask permissions, Timestamp now);

    // Inserts a detached subtree at an absent path.
    Status attach(const Path& path, std::unique_ptr<Node> node);

    Result<std::vector<DirectoryEntry>> list(const Path& path) const;

    Status set_permissions(const Path& path, PermissionsMask permissions);

    Result<CustomAttributes> update_attributes(const Path& path, std::span<const AttributeUpdate> updates);

    std::size_t node_count() const;

private:
    explicit Tree(std::unique_ptr<Node> root) : root_(std::move(root)) {}

    Node* mutable_lookup(const Path& path);
    // Parent directory of path, or the error for it.
    Result<Node*> parent_directory(const Path& path);

    std::unique_ptr<Node> root_;
};

}  // namespace mikfs::core
