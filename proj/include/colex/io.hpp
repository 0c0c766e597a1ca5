#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "colex/error.hpp"

namespace colex {

/// Positioned-read file handle. Implementations must allow concurrent
/// read_at calls (reads carry their own offset, no shared cursor).
class RandomAccessFile {
public:
    virtual ~RandomAccessFile() = default;
    virtual std::int64_t size() const = 0;
    /// Reads exactly n bytes at offset; anything short is an IoError.
    virtual void read_at(std::int64_t offset, void* dst, std::size_t n) const = 0;
};

using FilePtr = std::shared_ptr<const RandomAccessFile>;

/// O_RDONLY + pread.
class LocalFile : public RandomAccessFile {
public:
    explicit LocalFile(const std::string& path);
    ~LocalFile() override;
    LocalFile(const LocalFile&) = delete;
    LocalFile& operator=(const LocalFile&) = delete;

    std::int64_t size() const override { return size_; }
    void read_at(std::int64_t offset, void* dst, std::size_t n) const override;

private:
    std::string path_;
    int fd_ = -1;
    std::int64_t size_ = 0;
};

/// Wraps another file and records every read; lets tests pin down exactly
/// which byte ranges an operation touched, and lets the engine report I/O.
class CountingFile : public RandomAccessFile {
public:
    explicit CountingFile(FilePtr inner) : inner_(std::move(inner)) {}

    std::int64_t size() const override { return inner_->size(); }
    void read_at(std::int64_t offset, void* dst, std::size_t n) const override {
        inner_->read_at(offset, dst, n);
        std::lock_guard<std::mutex> lock(mu_);
        bytes_ += static_cast<std::int64_t>(n);
        reads_.emplace_back(offset, static_cast<std::int64_t>(n));
    }

    std::int64_t bytes_read() const {
        std::lock_guard<std::mutex> lock(mu_);
        return bytes_;
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> reads() const {
        std::lock_guard<std::mutex> lock(mu_);
        return reads_;
    }

private:
    FilePtr inner_;
    mutable std::mutex mu_;
    mutable std::int64_t bytes_ = 0;
    mutable std::vector<std::pair<std::int64_t, std::int64_t>> reads_;
};

/// Opens paths into file handles. The engine takes one of these so tests can
/// substitute counting or fault-injecting files.
class FileOpener {
public:
    virtual ~FileOpener() = default;
    virtual FilePtr open(const std::string& path) const {
        return std::make_shared<LocalFile>(path);
    }
};

}  // namespace colex
