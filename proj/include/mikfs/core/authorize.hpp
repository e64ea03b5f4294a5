#pragma once

#include <string_view>

#include "mikfs/core/ownership.hpp"
#include "mikfs/core/path.hpp"
#include "mikfs/core/status.hpp"
#include "mikfs/core/tree.hpp"

namespace mikfs::core {

enum class Action {
    read_file,        // r on the file
    write_file,       // w on the file (overwrite)
    create_child,     // w+x on the directory
    delete_child,     // w+x on the directory, plus the sticky rule
    list,             // r on the directory
    traverse,         // x on every ancestor (common to all actions)
    set_permissions,  // Owner membership on the node
    set_attributes,   // Owner membership on the node
};

std::string_view action_name(Action action);

// Checks the rights matrix for caller acting on path. For create_child and
// delete_child, path names the directory and child the entry inside it.
//
// Every action first needs x on each ancestor directory of path. Under a
// sticky directory, delete_child also needs the caller to be Owner of either
// the child or the directory.
//
// Returns OK, PermissionDenied (naming the check and the node depth, root =
// 0), or NotFound / NotADirectory when the walk cannot reach path.
Status authorize(const Tree& tree, const Ownership& caller, const Path& path, Action action,
                 std::string_view child = {});

}  // namespace mikfs::core
