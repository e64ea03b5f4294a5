#include "mikfs/core/archive.hpp"

#include <set>

#include "mikfs/core/authorize.hpp"
#include "mikfs/core/zip.hpp"

namespace mikfs::core {

namespace {

void add_children(const Tree& tree, const Ownership& caller, const Node& directory, const Path& path,
                  const std::string& prefix, ZipWriter& writer, DirectoryArchive& out)
{
    for (const auto& [name, kid] : directory.children()) {
        const Path child_path = path.child(name);
        const std::string relative = prefix + name;
        if (kid->is_file()) {
            if (authorize(tree, caller, child_path, Action::read_file).ok()) {
                writer.add_file(relative, kid->content(), kid->attrs.last_modified_time);
                ++out.entries;
            } else {
                ++out.omitted;
            }
            continue;
        }
        if (!authorize(tree, caller, child_path, Action::list).ok()) {
            ++out.omitted;
            continue;
        }
        writer.add_directory(relative + "/", kid->attrs.last_modified_time);
        ++out.entries;
        add_children(tree, caller, *kid, child_path, relative + "/", writer, out);
    }
}

Status bad_entry(const std::string& name, std::string_view why)
{
    return make_error(StatusCode::invalid_argument, "archive entry '" + name + "': " + std::string(why));
}

}  // namespace

Result<DirectoryArchive> zip_directory(const Tree& tree, const Path& path, const Ownership& caller)
{
    if (auto status = authorize(tree, caller, path, Action::list); !status.ok()) {
        return status;
    }
    const Node* directory = tree.lookup(path);
    if (!directory->is_directory()) {
        return make_error(StatusCode::not_a_directory, path.str() + " is a file");
    }

    DirectoryArchive out;
    ZipWriter writer;
    add_children(tree, caller, *directory, path, "", writer, out);
    auto bytes = writer.finish();
    if (!bytes.ok()) {
        return bytes.status();
    }
    out.bytes = std::move(bytes).value();
    return out;
}

Result<UnpackedDirectory> unpack_archive(std::string_view archive, const Ownership& owner,
                                         PermissionsMask permissions, Timestamp now)
{
    auto entries = read_zip(archive);
    if (!entries.ok()) {
        return entries.status();
    }

    UnpackedDirectory out;
    out.root = Node::make_directory(owner, permissions, now);
    std::set<std::string, std::less<>> explicit_names;

    for (auto& entry : *entries) {
        const bool is_directory = entry.is_directory();
        std::string_view name = entry.name;
        if (is_directory) {
            name.remove_suffix(1);
        }
        if (name.empty()) {
            return bad_entry(entry.name, "empty name");
        }
        if (name.front() == '/') {
            return bad_entry(entry.name, "absolute names are not allowed");
        }
        if (!explicit_names.emplace(name).second) {
            return bad_entry(entry.name, "duplicate entry");
        }

        std::vector<std::string> segments;
        std::size_t start = 0;
        while (true) {
            const std::size_t slash = name.find('/', start);
            std::string_view segment = name.substr(start, slash == name.npos ? name.npos : slash - start);
            if (segment == "." || segment == "..") {
                return bad_entry(entry.name, "relative segments are not allowed");
            }
            if (auto violation = validate_name(segment)) {
                return bad_entry(entry.name, describe(*violation));
            }
            segments.emplace_back(segment);
            if (slash == name.npos) {
                break;
            }
            start = slash + 1;
        }

        Node* directory = out.root.get();
        for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
            auto& kids = directory->children();
            auto it = kids.find(segments[i]);
            if (it == kids.end()) {
                it = kids.emplace(segments[i], Node::make_directory(owner, permissions, now)).first;
                ++out.created;
            } else if (!it->second->is_directory()) {
                return bad_entry(entry.name, "parent is a file entry");
            }
            directory = it->second.get();
        }

        auto& kids = directory->children();
        auto existing = kids.find(segments.back());
        if (existing != kids.end()) {
            // Only an implied directory may be named explicitly later.
            if (!is_directory || !existing->second->is_directory()) {
                return bad_entry(entry.name, "conflicts with another entry");
            }
            continue;
        }
        if (is_directory) {
            kids.emplace(segments.back(), Node::make_directory(owner, permissions, now));
        } else {
            kids.emplace(segments.back(), Node::make_file(std::move(entry.data), owner, permissions, now));
        }
        ++out.created;
    }
    return out;
}

}  // namespace mikfs::core
