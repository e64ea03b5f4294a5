#include "mikfs/wire/methods.hpp"

#include <array>

namespace mikfs::wire {

namespace {

using P = Pattern;

constexpr std::array<MethodInfo, 27> kMikfs = {{
    {0, "GetApiInfo", P::unary},
    {1, "Authenticate", P::bidi_streaming},
    {2, "Logout", P::unary},
    {3, "GetHostWriteHandle", P::unary},
    {4, "GetFile", P::unary},
    {5, "GetFileInChunks", P::server_streaming},
    {6, "PutFile", P::unary},
    {7, "PutFileInChunks", P::client_streaming},
    {8, "CreateDirectory", P::unary},
    {9, "ReadDirectoryContents", P::unary},
    {10, "MoveFile", P::unary},
    {11, "CopyFile", P::unary},
    {12, "MoveDirectory", P::unary},
    {13, "CopyDirectory", P::unary},
    {14, "DeleteFile", P::unary},
    {15, "DeleteDirectory", P::unary},
    {16, "GetDirectoryZip", P::unary},
    {17, "GetDirectoryZipInChunks", P::server_streaming},
    {18, "CreateDirectoryUnzip", P::unary},
    {19, "CreateDirectoryUnzipInChunks", P::client_streaming},
    {20, "SetPermissions", P::unary},
    {21, "GetPermissions", P::unary},
    {22, "UpdateAttributes", P::unary},
    {23, "GetAttributes", P::unary},
    {24, "FileSystemChangeSubscribe", P::server_streaming},
    {25, "Search", P::unary},
    {26, "SearchSubscribe", P::server_streaming},
}};

constexpr std::array<MethodInfo, 16> kImportExport = {{
    {0, "AddSite", P::unary},
    {1, "AddSites", P::unary},
    {2, "AddPath", P::unary},
    {3, "AddPaths", P::unary},
    {4, "GetSites", P::unary},
    {5, "GetPath", P::unary},
    {6, "GetPathsForSite", P::unary},
    {7, "GetPathsForAllSites", P::unary},
    {8, "RemoveSite", P::unary},
    {9, "RemoveSites", P::unary},
    {10, "RemoveAllSites", P::unary},
    {11, "RemovePath", P::unary},
    {12, "RemovePaths", P::unary},
    {13, "SitesSubscribe", P::server_streaming},
    {14, "ExportHandles", P::unary},
    {15, "ImportHandles", P::unary},
}};

}  // namespace

std::string_view pattern_name(Pattern pattern)
{
    switch (pattern) {
    case Pattern::unary:
        return "unary";
    case Pattern::client_streaming:
        return "client-streaming";
    case Pattern::server_streaming:
        return "server-streaming";
    case Pattern::bidi_streaming:
        return "bidirectional";
    }
    return "unknown";
}

std::span<const MethodInfo> mikfs_methods()
{
    return kMikfs;
}

std::span<const MethodInfo> importexport_methods()
{
    return kImportExport;
}

}  // namespace mikfs::wire
