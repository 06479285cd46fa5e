#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <vector>

#include "nemo/block.hpp"
#include "nemo/leader_schedule.hpp"

namespace nemo {

class CorruptRecord : public Error {
public:
    using Error::Error;
};

enum class WalRecordKind : std::uint8_t { own_block = 1, received_block = 2, commit_mark = 3 };

struct WalRecord {
    WalRecordKind kind = WalRecordKind::received_block;
    BlockPtr block;    // own_block / received_block
    SlotId slot;       // commit_mark
    BlockRef leader;   // commit_mark
};

// Framing: [len: u32 BE][type: u8][payload][crc32(type + payload): u32 BE],
// len = 1 + payload size + 4.
std::vector<std::uint8_t> encode_wal_record(const WalRecord& rec);

struct WalReadResult {
    std::vector<WalRecord> records;
    std::size_t valid_bytes = 0;  // length of the intact prefix
    bool torn_tail = false;       // an incomplete or damaged final record was dropped
};

// Parses a record stream. A damaged final record is treated as a torn write
// and dropped; damage followed by more bytes throws CorruptRecord.
WalReadResult read_wal(std::span<const std::uint8_t> bytes);

class WalSink {
public:
    virtual ~WalSink() = default;
    virtual void append(std::span<const std::uint8_t> bytes) = 0;
};

class MemoryWal final : public WalSink {
public:
    MemoryWal() = default;
    explicit MemoryWal(std::vector<std::uint8_t> initial) : bytes_(std::move(initial)) {}

    void append(std::span<const std::uint8_t> bytes) override { bytes_.insert(bytes_.end(), bytes.begin(), bytes.end()); }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

// Appends to a file and flushes after every record.
class FileWal final : public WalSink {
public:
    explicit FileWal(const std::filesystem::path& path);
    ~FileWal() override;
    FileWal(const FileWal&) = delete;
    FileWal& operator=(const FileWal&) = delete;

    void append(std::span<const std::uint8_t> bytes) override;

    static std::vector<std::uint8_t> read_all(const std::filesystem::path& path);

private:
    std::FILE* file_ = nullptr;
};

}  // namespace nemo
