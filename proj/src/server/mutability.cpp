#include "mikfs/server/mutability.hpp"

#include <string>

#include "mikfs/wire/methods.hpp"

namespace mikfs::server {

namespace m = wire::method;

std::string_view mode_name(Mode mode)
{
    switch (mode) {
    case Mode::read_write:
        return "ReadWrite";
    case Mode::read_only:
        return "ReadOnly";
    case Mode::append_only:
        return "AppendOnly";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view text)
{
    if (text == "rw" || text == "read-write" || text == "ReadWrite") {
        return Mode::read_write;
    }
    if (text == "ro" || text == "read-only" || text == "ReadOnly") {
        return Mode::read_only;
    }
    if (text == "ao" || text == "append-only" || text == "AppendOnly") {
        return Mode::append_only;
    }
    return std::nullopt;
}

bool is_mutating(std::uint32_t method)
{
    switch (method) {
    case m::get_host_write_handle:
    case m::put_file:
    case m::put_file_in_chunks:
    case m::create_directory:
    case m::move_file:
    case m::copy_file:
    case m::move_directory:
    case m::copy_directory:
    case m::delete_file:
    case m::delete_directory:
    case m::create_directory_unzip:
    case m::create_directory_unzip_in_chunks:
    case m::set_permissions:
    case m::update_attributes:
        return true;
    default:
        return false;
    }
}

core::Status mutability_gate(Mode mode, std::uint32_t method, bool target_exists)
{
    if (mode == Mode::read_write || !is_mutating(method)) {
        return {};
    }
    const std::string name(wire::mikfs_methods()[method].name);
    if (mode == Mode::read_only) {
        return core::make_error(core::StatusCode::read_only_filesystem, name + " on a read-only filesystem");
    }
    switch (method) {
    case m::get_host_write_handle:
        return {};
    case m::put_file:
    case m::put_file_in_chunks:
    case m::create_directory:
    case m::copy_file:
    case m::copy_directory:
    case m::create_directory_unzip:
    case m::create_directory_unzip_in_chunks:
        if (!target_exists) {
            return {};
        }
        return core::make_error(core::StatusCode::append_only_violation,
                                name + " would replace an existing node on an append-only filesystem");
    default:
        return core::make_error(core::StatusCode::append_only_violation,
                                name + " changes existing nodes on an append-only filesystem");
    }
}

}  // namespace mikfs::server
