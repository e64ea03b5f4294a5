#include "mikfs/core/tree.hpp"

#include <algorithm>
#include <chrono>

namespace mikfs::core {

Timestamp now_ns()
{
    const auto since_epoch = std::chrono::system_clock::now().time_since_epoch();
    return static_cast<Timestamp>(std::chrono::duration_cast<std::chrono::nanoseconds>(since_epoch).count());
}

std::unique_ptr<Node> Node::make_file(std::string content, Ownership owner, PermissionsMask permissions,
                                      Timestamp modified)
{
    auto node = std::make_unique<Node>();
    node->attrs.size = content.size();
    node->attrs.last_modified_time = modified;
    node->attrs.permissions = permissions;
    node->attrs.owner = std::move(owner);
    node->body = std::move(content);
    return node;
}

std::unique_ptr<Node> Node::make_directory(Ownership owner, PermissionsMask permissions, Timestamp modified)
{
    auto node = std::make_unique<Node>();
    node->attrs.size = 0;
    node->attrs.last_modified_time = modified;
    node->attrs.permissions = permissions;
    node->attrs.owner = std::move(owner);
    node->body = Children{};
    return node;
}

const Node* Node::child(std::string_view name) const
{
    if (!is_directory()) {
        return nullptr;
    }
    const auto& kids = children();
    auto it = kids.find(name);
    return it == kids.end() ? nullptr : it->second.get();
}

std::unique_ptr<Node> Node::clone() const
{
    auto copy = std::make_unique<Node>();
    copy->attrs = attrs;
    if (is_file()) {
        copy->body = content();
    } else {
        Children kids;
        for (const auto& [name, kid] : children()) {
            kids.emplace(name, kid->clone());
        }
        copy->body = std::move(kids);
    }
    return copy;
}

PublicAttributes public_view(const Node& node)
{
    return PublicAttributes{node.kind(), node.attrs.size, node.attrs.last_modified_time, node.attrs.permissions,
                            node.attrs.custom};
}

std::size_t deepest_relative_length(const Node& node)
{
    if (!node.is_directory()) {
        return 0;
    }
    std::size_t deepest = 0;
    for (const auto& [name, kid] : node.children()) {
        const std::size_t here = 1 + utf8_scalar_count(name).value_or(name.size()) + deepest_relative_length(*kid);
        deepest = std::max(deepest, here);
    }
    return deepest;
}

namespace {

Status check_node(const Node& node, std::size_t prefix_length, const std::string& where)
{
    if (node.is_file()) {
        if (node.attrs.size != node.content().size()) {
            return make_error(StatusCode::invalid_argument, where + ": size does not match content length");
        }
        if (node.attrs.size > kMaxFileSize) {
            return make_error(StatusCode::size_limit_exceeded, where + ": file too large");
        }
        return {};
    }
    if (node.attrs.size != 0) {
        return make_error(StatusCode::invalid_argument, where + ": directory size must be 0");
    }
    for (const auto& [name, kid] : node.children()) {
        if (auto violation = validate_name(name)) {
            return make_error(StatusCode::invalid_path, where + ": " + std::string(describe(*violation)));
        }
        if (!kid) {
            return make_error(StatusCode::invalid_argument, where + ": null child");
        }
        const std::size_t length = prefix_length + 1 + *utf8_scalar_count(name);
        if (length > kMaxPathLength) {
            return make_error(StatusCode::invalid_path, where + ": path exceeds 4095 characters");
        }
        const std::string child_where = (where == "/" ? "" : where) + "/" + name;
        if (auto status = check_node(*kid, length, child_where); !status.ok()) {
            return status;
        }
    }
    return {};
}

Status kind_mismatch(const Path& path, NodeKind expected)
{
    if (expected == NodeKind::file) {
        return make_error(StatusCode::not_a_file, path.str() + " is a directory");
    }
    return make_error(StatusCode::not_a_directory, path.str() + " is a file");
}

Status check_fits(const Path& path, const Node& node)
{
    const std::size_t base = path.is_root() ? 0 : path.rendered_length();
    if (base + deepest_relative_length(node) > kMaxPathLength) {
        return make_error(StatusCode::invalid_path, "resulting paths below " + path.str() + " exceed 4095 characters");
    }
    return {};
}

void restamp(Node& node, const Ownership& owner, PermissionsMask permissions, Timestamp now)
{
    node.attrs.owner = owner;
    node.attrs.permissions = permissions;
    node.attrs.last_modified_time = now;
    if (node.is_directory()) {
        for (auto& [name, kid] : node.children()) {
            restamp(*kid, owner, permissions, now);
        }
    }
}

std::size_t count_nodes(const Node& node)
{
    std::size_t total = 1;
    if (node.is_directory()) {
        for (const auto& [name, kid] : node.children()) {
            total += count_nodes(*kid);
        }
    }
    return total;
}

}  // namespace

Status check_invariants(const Node& root)
{
    if (!root.is_directory()) {
        return make_error(StatusCode::not_a_directory, "root must be a directory");
    }
    return check_node(root, 0, "/");
}

Tree::Tree(Ownership root_owner, PermissionsMask root_permissions, Timestamp created)
    : root_(Node::make_directory(std::move(root_owner), root_permissions, created))
{
}

Result<Tree> Tree::from_root(std::unique_ptr<Node> root)
{
    if (!root) {
        return make_error(StatusCode::invalid_argument, "missing root node");
    }
    if (auto status = check_invariants(*root); !status.ok()) {
        return status;
    }
    return Tree(std::move(root));
}

const Node* Tree::lookup(const Path& path) const
{
    const Node* node = root_.get();
    for (const auto& segment : path.segments()) {
        node = node->child(segment);
        if (!node) {
            return nullptr;
        }
    }
    return node;
}

Node* Tree::mutable_lookup(const Path& path)
{
    return const_cast<Node*>(lookup(path));
}

Result<const Node*> Tree::resolve(const Path& path) const
{
    const Node* node = root_.get();
    std::string walked;
    for (const auto& segment : path.segments()) {
        if (!node->is_directory()) {
            return make_error(StatusCode::not_a_directory, (walked.empty() ? "/" : walked) + " is not a directory");
        }
        walked += "/" + segment;
        node = node->child(segment);
        if (!node) {
            return make_error(StatusCode::not_found, walked + " does not exist");
        }
    }
    return node;
}

Result<Node*> Tree::parent_directory(const Path& path)
{
    auto parent = resolve(path.parent());
    if (!parent.ok()) {
        return parent.status();
    }
    if (!(*parent)->is_directory()) {
        return make_error(StatusCode::not_a_directory, path.parent().str() + " is not a directory");
    }
    return const_cast<Node*>(*parent);
}

Status Tree::create_file(const Path& path, std::string content, const Ownership& owner,
                         PermissionsMask permissions, Timestamp now)
{
    if (path.is_root()) {
        return make_error(StatusCode::already_exists, "/ already exists");
    }
    if (content.size() > kMaxFileSize) {
        return make_error(StatusCode::size_limit_exceeded, "file exceeds 2^31-1 bytes");
    }
    auto parent = parent_directory(path);
    if (!parent.ok()) {
        return parent.status();
    }
    auto& kids = (*parent)->children();
    if (kids.contains(path.name())) {
        return make_error(StatusCode::already_exists, path.str() + " already exists");
    }
    kids.emplace(std::string(path.name()), Node::make_file(std::move(content), owner, permissions, now));
    return {};
}

Status Tree::create_directory(const Path& path, const Ownership& owner, PermissionsMask permissions,
                              Timestamp now)
{
    if (path.is_root()) {
        return make_error(StatusCode::already_exists, "/ already exists");
    }
    auto parent = parent_directory(path);
    if (!parent.ok()) {
        return parent.status();
    }
    auto& kids = (*parent)->children();
    if (kids.contains(path.name())) {
        return make_error(StatusCode::already_exists, path.str() + " already exists");
    }
    kids.emplace(std::string(path.name()), Node::make_directory(owner, permissions, now));
    return {};
}

Status Tree::overwrite_file(const Path& path, std::string content, Timestamp now)
{
    auto found = resolve(path);
    if (!found.ok()) {
        return found.status();
    }
    if (!(*found)->is_file()) {
        return kind_mismatch(path, NodeKind::file);
    }
    if (content.size() > kMaxFileSize) {
        return make_error(StatusCode::size_limit_exceeded, "file exceeds 2^31-1 bytes");
    }
    Node* node = const_cast<Node*>(*found);
    node->attrs.size = content.size();
    node->attrs.last_modified_time = now;
    node->body = std::move(content);
    return {};
}

Status Tree::remove(const Path& path, NodeKind expected, bool recursive)
{
    if (path.is_root()) {
        return make_error(StatusCode::permission_denied, "the root directory cannot be deleted");
    }
    auto found = resolve(path);
    if (!found.ok()) {
        return found.status();
    }
    const Node* node = *found;
    if (node->kind() != expected) {
        return kind_mismatch(path, expected);
    }
    if (node->is_directory() && !node->children().empty() && !recursive) {
        return make_error(StatusCode::directory_not_empty, path.str() + " is not empty");
    }
    Node* parent = mutable_lookup(path.parent());
    auto& kids = parent->children();
    kids.erase(kids.find(path.name()));
    return {};
}

Status Tree::move(const Path& from, const Path& to, NodeKind expected)
{
    if (from.is_root()) {
        return make_error(StatusCode::permission_denied, "the root directory cannot be moved");
    }
    if (from != to && from.is_prefix_of(to)) {
        return make_error(StatusCode::cycle_rejected, "cannot move " + from.str() + " into its own subtree");
    }
    auto source = resolve(from);
    if (!source.ok()) {
        return source.status();
    }
    if ((*source)->kind() != expected) {
        return kind_mismatch(from, expected);
    }
    if (to.is_root()) {
        return make_error(StatusCode::already_exists, "/ already exists");
    }
    auto target_parent = parent_directory(to);
    if (!target_parent.ok()) {
        return target_parent.status();
    }
    if ((*target_parent)->children().contains(to.name())) {
        return make_error(StatusCode::already_exists, to.str() + " already exists");
    }
    if (auto status = check_fits(to, **source); !status.ok()) {
        return status;
    }

    auto& source_kids = mutable_lookup(from.parent())->children();
    auto it = source_kids.find(from.name());
    std::unique_ptr<Node> moving = std::move(it->second);
    source_kids.erase(it);
    (*target_parent)->children().emplace(std::string(to.name()), std::move(moving));
    return {};
}

Status Tree::copy(const Path& from, const Path& to, NodeKind expected, const Ownership& owner,
                  PermissionsMask permissions, Timestamp now)
{
    auto source = resolve(from);
    if (!source.ok()) {
        return source.status();
    }
    if ((*source)->kind() != expected) {
        return kind_mismatch(from, expected);
    }
    auto duplicate = (*source)->clone();
    restamp(*duplicate, owner, permissions, now);
    return attach(to, std::move(duplicate));
}

Status Tree::attach(const Path& path, std::unique_ptr<Node> node)
{
    if (path.is_root()) {
        return make_error(StatusCode::already_exists, "/ already exists");
    }
    auto parent = parent_directory(path);
    if (!parent.ok()) {
        return parent.status();
    }
    auto& kids = (*parent)->children();
    if (kids.contains(path.name())) {
        return make_error(StatusCode::already_exists, path.str() + " already exists");
    }
    if (auto status = check_fits(path, *node); !status.ok()) {
        return status;
    }
    kids.emplace(std::string(path.name()), std::move(node));
    return {};
}

Result<std::vector<DirectoryEntry>> Tree::list(const Path& path) const
{
    auto found = resolve(path);
    if (!found.ok()) {
        return found.status();
    }
    if (!(*found)->is_directory()) {
        return make_error(StatusCode::not_a_directory, path.str() + " is a file");
    }
    std::vector<DirectoryEntry> entries;
    for (const auto& [name, kid] : (*found)->children()) {
        entries.push_back(DirectoryEntry{name, public_view(*kid)});
    }
    return entries;
}

Status Tree::set_permissions(const Path& path, PermissionsMask permissions)
{
    auto found = resolve(path);
    if (!found.ok()) {
        return found.status();
    }
    const_cast<Node*>(*found)->attrs.permissions = permissions;
    return {};
}

Result<CustomAttributes> Tree::update_attributes(const Path& path, std::span<const AttributeUpdate> updates)
{
    auto found = resolve(path);
    if (!found.ok()) {
        return found.status();
    }
    Node* node = const_cast<Node*>(*found);
    auto next = apply_attribute_updates(node->attrs.custom, updates);
    if (!next.ok()) {
        return next.status();
    }
    node->attrs.custom = *next;
    return std::move(next).value();
}

std::size_t Tree::node_count() const
{
    return count_nodes(*root_);
}

}  // namespace mikfs::core
