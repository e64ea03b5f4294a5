#include "mikfs/core/authorize.hpp"

#include <string>

namespace mikfs::core {

std::string_view action_name(Action action)
{
    switch (action) {
    case Action::read_file:
        return "read";
    case Action::write_file:
        return "write";
    case Action::create_child:
        return "create";
    case Action::delete_child:
        return "delete";
    case Action::list:
        return "list";
    case Action::traverse:
        return "traverse";
    case Action::set_permissions:
        return "set-permissions";
    case Action::set_attributes:
        return "set-attributes";
    }
    return "?";
}

namespace {

Status deny(std::string_view check, std::size_t depth)
{
    return make_error(StatusCode::permission_denied,
                      std::string(check) + " permission denied at depth " + std::to_string(depth));
}

}  // namespace

Status authorize(const Tree& tree, const Ownership& caller, const Path& path, Action action, std::string_view child)
{
    const Node* node = &tree.root();
    std::string walked;
    std::size_t depth = 0;
    for (const auto& segment : path.segments()) {
        if (!node->is_directory()) {
            return make_error(StatusCode::not_a_directory, (walked.empty() ? "/" : walked) + " is not a directory");
        }
        const auto membership = determine_membership(caller, node->attrs.owner);
        if (!node->attrs.permissions.rights_for(membership).execute) {
            return deny("traverse", depth);
        }
        walked += "/" + segment;
        node = node->child(segment);
        if (!node) {
            return make_error(StatusCode::not_found, walked + " does not exist");
        }
        ++depth;
    }

    const auto membership = determine_membership(caller, node->attrs.owner);
    const Rights rights = node->attrs.permissions.rights_for(membership);

    switch (action) {
    case Action::traverse:
        return {};
    case Action::read_file:
        return rights.read ? Status() : deny("read", depth);
    case Action::write_file:
        return rights.write ? Status() : deny("write", depth);
    case Action::list:
        return rights.read ? Status() : deny("list", depth);
    case Action::set_permissions:
    case Action::set_attributes:
        return membership == Membership::owner ? Status() : deny("owner", depth);
    case Action::create_child:
    case Action::delete_child:
        break;
    }

    if (!node->is_directory()) {
        return make_error(StatusCode::not_a_directory, path.str() + " is not a directory");
    }
    if (!rights.write || !rights.execute) {
        return deny(action == Action::create_child ? "create" : "delete", depth);
    }
    if (action == Action::create_child) {
        return {};
    }
    const Node* target = node->child(child);
    if (!target) {
        return make_error(StatusCode::not_found, path.child(std::string(child)).str() + " does not exist");
    }
    if (node->attrs.permissions.sticky() && membership != Membership::owner &&
        determine_membership(caller, target->attrs.owner) != Membership::owner) {
        return deny("sticky", depth);
    }
    return {};
}

}  // namespace mikfs::core
