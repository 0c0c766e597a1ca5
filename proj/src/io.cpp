#include "colex/io.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace colex {

LocalFile::LocalFile(const std::string& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_RDONLY);
    if (fd_ < 0)
        fail(ErrorCode::IoError, "cannot open '" + path + "': " + std::strerror(errno));
    struct stat st{};
    if (::fstat(fd_, &st) != 0) {
        int err = errno;
        ::close(fd_);
        fd_ = -1;
        fail(ErrorCode::IoError, "cannot stat '" + path + "': " + std::strerror(err));
    }
    size_ = static_cast<std::int64_t>(st.st_size);
}

LocalFile::~LocalFile() {
    if (fd_ >= 0) ::close(fd_);
}

void LocalFile::read_at(std::int64_t offset, void* dst, std::size_t n) const {
    if (offset < 0 || offset + static_cast<std::int64_t>(n) > size_)
        fail(ErrorCode::IoError, "read past end of '" + path_ + "'");
    auto* out = static_cast<char*>(dst);
    std::size_t done = 0;
    while (done < n) {
        ssize_t got = ::pread(fd_, out + done, n - done, offset + static_cast<off_t>(done));
        if (got < 0) {
            if (errno == EINTR) continue;
            fail(ErrorCode::IoError, "read failed on '" + path_ + "': " + std::strerror(errno));
        }
        if (got == 0)
            fail(ErrorCode::IoError, "short read on '" + path_ + "'");
        done += static_cast<std::size_t>(got);
    }
}

}  // namespace colex
