#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace mikfs::wire {

inline constexpr std::string_view kMikfsService = "mikfs.v1.Mikfs";
inline constexpr std::string_view kImportExportService = "mikfs.importexport.v1.ImportExport";

enum class Pattern { unary, client_streaming, server_streaming, bidi_streaming };

std::string_view pattern_name(Pattern pattern);

struct MethodInfo {
    std::uint32_t number;
    std::string_view name;
    Pattern pattern;
};

namespace method {
inline constexpr std::uint32_t get_api_info = 0;
inline constexpr std::uint32_t authenticate = 1;
inline constexpr std::uint32_t logout = 2;
inline constexpr std::uint32_t get_host_write_handle = 3;
inline constexpr std::uint32_t get_file = 4;
inline constexpr std::uint32_t get_file_in_chunks = 5;
inline constexpr std::uint32_t put_file = 6;
inline constexpr std::uint32_t put_file_in_chunks = 7;
inline constexpr std::uint32_t create_directory = 8;
inline constexpr std::uint32_t read_directory_contents = 9;
inline constexpr std::uint32_t move_file = 10;
inline constexpr std::uint32_t copy_file = 11;
inline constexpr std::uint32_t move_directory = 12;
inline constexpr std::uint32_t copy_directory = 13;
inline constexpr std::uint32_t delete_file = 14;
inline constexpr std::uint32_t delete_directory = 15;
inline constexpr std::uint32_t get_directory_zip = 16;
inline constexpr std::uint32_t get_directory_zip_in_chunks = 17;
inline constexpr std::uint32_t create_directory_unzip = 18;
inline constexpr std::uint32_t create_directory_unzip_in_chunks = 19;
inline constexpr std::uint32_t set_permissions = 20;
inline constexpr std::uint32_t get_permissions = 21;
inline constexpr std::uint32_t update_attributes = 22;
inline constexpr std::uint32_t get_attributes = 23;
inline constexpr std::uint32_t file_system_change_subscribe = 24;
inline constexpr std::uint32_t search = 25;
inline constexpr std::uint32_t search_subscribe = 26;
}  // namespace method

namespace ie_method {
inline constexpr std::uint32_t add_site = 0;
inline constexpr std::uint32_t add_sites = 1;
inline constexpr std::uint32_t add_path = 2;
inline constexpr std::uint32_t add_paths = 3;
inline constexpr std::uint32_t get_sites = 4;
inline constexpr std::uint32_t get_path = 5;
inline constexpr std::uint32_t get_paths_for_site = 6;
inline constexpr std::uint32_t get_paths_for_all_sites = 7;
inline constexpr std::uint32_t remove_site = 8;
inline constexpr std::uint32_t remove_sites = 9;
inline constexpr std::uint32_t remove_all_sites = 10;
inline constexpr std::uint32_t remove_path = 11;
inline constexpr std::uint32_t remove_paths = 12;
inline constexpr std::uint32_t sites_subscribe = 13;
inline constexpr std::uint32_t export_handles = 14;
inline constexpr std::uint32_t import_handles = 15;
}  // namespace ie_method

// Indexed by method number.
std::span<const MethodInfo> mikfs_methods();
std::span<const MethodInfo> importexport_methods();

}  // namespace mikfs::wire
