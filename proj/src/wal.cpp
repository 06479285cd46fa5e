#include "nemo/wal.hpp"

#include <zlib.h>

#include <fstream>
#include <iterator>

namespace nemo {

namespace {

std::uint32_t checksum(std::span<const std::uint8_t> data) {
    return static_cast<std::uint32_t>(::crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

WalRecord decode_record(WalRecordKind kind, ByteReader& in) {
    WalRecord rec;
    rec.kind = kind;
    switch (kind) {
        case WalRecordKind::own_block:
        case WalRecordKind::received_block:
            rec.block = std::make_shared<const Block>(decode_block(in));
            break;
        case WalRecordKind::commit_mark:
            rec.slot.round = in.u32();
            rec.slot.rank = in.u16();
            rec.leader.author = in.u16();
            rec.leader.round = in.u32();
            break;
        default:
            throw DecodeError("unknown WAL record type");
    }
    return rec;
}

}  // namespace

std::vector<std::uint8_t> encode_wal_record(const WalRecord& rec) {
    ByteWriter out;
    out.u32(0);
    out.u8(static_cast<std::uint8_t>(rec.kind));
    switch (rec.kind) {
        case WalRecordKind::own_block:
        case WalRecordKind::received_block:
            encode_block(*rec.block, out);
            break;
        case WalRecordKind::commit_mark:
            out.u32(rec.slot.round);
            out.u16(static_cast<std::uint16_t>(rec.slot.rank));
            out.u16(rec.leader.author);
            out.u32(rec.leader.round);
            break;
    }
    const auto& buf = out.data();
    const std::uint32_t crc = checksum(std::span<const std::uint8_t>(buf).subspan(4));
    out.u32(crc);
    out.patch_u32(0, static_cast<std::uint32_t>(out.size() - 4));
    return out.take();
}

WalReadResult read_wal(std::span<const std::uint8_t> bytes) {
    WalReadResult result;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        const auto rest = bytes.subspan(pos);
        auto damaged = [&](const std::string& why) {
            // Anything after the damaged record means it was not a torn tail.
            throw CorruptRecord("WAL record at offset " + std::to_string(pos) + ": " + why);
        };
        if (rest.size() < 4) {
            result.torn_tail = true;
            break;
        }
        ByteReader head(rest);
        const std::uint32_t len = head.u32();
        if (rest.size() - 4 < len) {
            result.torn_tail = true;
            break;
        }
        const bool last = rest.size() - 4 == len;
        if (len < 5) {
            if (last) {
                result.torn_tail = true;
                break;
            }
            damaged("bad length");
        }
        const auto body = rest.subspan(4, len - 4);
        ByteReader crc_in(rest.subspan(4 + len - 4, 4));
        if (checksum(body) != crc_in.u32()) {
            if (last) {
                result.torn_tail = true;
                break;
            }
            damaged("checksum mismatch");
        }
        try {
            ByteReader in(body);
            auto kind = static_cast<WalRecordKind>(in.u8());
            auto rec = decode_record(kind, in);
            if (!in.empty()) throw DecodeError("trailing bytes");
            result.records.push_back(std::move(rec));
        } catch (const DecodeError& e) {
            damaged(e.what());
        }
        pos += 4 + len;
        result.valid_bytes = pos;
    }
    return result;
}

FileWal::FileWal(const std::filesystem::path& path) {
    file_ = std::fopen(path.c_str(), "ab");
    if (file_ == nullptr) throw Error("cannot open WAL file " + path.string());
}

FileWal::~FileWal() {
    if (file_ != nullptr) std::fclose(file_);
}

void FileWal::append(std::span<const std::uint8_t> bytes) {
    if (std::fwrite(bytes.data(), 1, bytes.size(), file_) != bytes.size() || std::fflush(file_) != 0) {
        throw Error("WAL write failed");
    }
}

std::vector<std::uint8_t> FileWal::read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace nemo
