#include "mikfs/core/file_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

namespace mikfs::core {

Status write_file_atomic(const std::filesystem::path& path, const std::string& bytes)
{
    const std::filesystem::path temp = path.string() + ".tmp";
    const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) {
        return make_error(StatusCode::invalid_argument,
                                "cannot write " + temp.string() + ": " + std::strerror(errno));
    }
    std::size_t done = 0;
    while (done < bytes.size()) {
        const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            const std::string reason = std::strerror(errno);
            ::close(fd);
            ::unlink(temp.c_str());
            return make_error(StatusCode::invalid_argument, "write failed: " + reason);
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0) {
        ::unlink(temp.c_str());
        return make_error(StatusCode::invalid_argument, "sync failed for " + temp.string());
    }
    std::error_code error;
    std::filesystem::rename(temp, path, error);
    if (error) {
        ::unlink(temp.c_str());
        return make_error(StatusCode::invalid_argument, "rename failed: " + error.message());
    }
    return {};
}

Result<std::string> read_file(const std::filesystem::path& path)
{
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        return make_error(StatusCode::not_found, "cannot open " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    if (file.bad()) {
        return make_error(StatusCode::invalid_argument, "cannot read " + path.string());
    }
    return bytes;
}

}  // namespace mikfs::core
