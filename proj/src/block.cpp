#include "nemo/block.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace nemo {

std::ostream& operator<<(std::ostream& os, const BlockRef& ref) {
    return os << "B(" << ref.author << "," << ref.round << ")";
}

std::string to_string(const BlockRef& ref) {
    std::ostringstream os;
    os << ref;
    return os.str();
}

Block make_genesis(ReplicaId author) { return Block{BlockRef{author, 0}, {}, {}}; }

void validate_block(const Block& block, std::size_t f) {
    const auto& ref = block.ref;
    if (ref.round == 0) {
        if (!block.parents.empty() || !block.payload.empty()) {
            throw InvalidBlock("genesis block " + to_string(ref) + " must have no parents and no payload");
        }
        return;
    }

    std::size_t previous_round = 0;
    for (std::size_t i = 0; i < block.parents.size(); ++i) {
        const auto& p = block.parents[i];
        if (p.round >= ref.round) {
            throw InvalidBlock(to_string(ref) + " references non-older parent " + to_string(p));
        }
        if (p.round + 1 == ref.round) {
            ++previous_round;
            if (p.author == ref.author && i != 0) {
                throw InvalidBlock(to_string(ref) + " must list its own previous block first");
            }
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (block.parents[j] == p) {
                throw InvalidBlock(to_string(ref) + " repeats parent " + to_string(p));
            }
        }
    }
    if (previous_round < f + 1) {
        throw InvalidBlock(to_string(ref) + " has " + std::to_string(previous_round) +
                           " previous-round parents, needs " + std::to_string(f + 1));
    }
}

void encode_transaction(const Transaction& tx, ByteWriter& out) {
    if (tx.body.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw InvalidBlock("transaction body exceeds 65535 bytes");
    }
    out.u16(tx.client);
    out.u32(tx.sequence);
    out.u16(static_cast<std::uint16_t>(tx.body.size()));
    out.bytes(tx.body);
}

Transaction decode_transaction(ByteReader& in) {
    Transaction tx;
    tx.client = in.u16();
    tx.sequence = in.u32();
    auto len = in.u16();
    auto body = in.bytes(len);
    tx.body.assign(body.begin(), body.end());
    return tx;
}

void encode_block(const Block& block, ByteWriter& out) {
    if (block.parents.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw InvalidBlock("too many parents to encode");
    }
    out.u16(block.ref.author);
    out.u32(block.ref.round);
    out.u16(static_cast<std::uint16_t>(block.parents.size()));
    for (const auto& p : block.parents) {
        out.u16(p.author);
        out.u32(p.round);
    }
    out.u32(static_cast<std::uint32_t>(block.payload.size()));
    for (const auto& tx : block.payload) {
        encode_transaction(tx, out);
    }
}

std::vector<std::uint8_t> encode_block(const Block& block) {
    ByteWriter out;
    encode_block(block, out);
    return out.take();
}

Block decode_block(ByteReader& in) {
    Block block;
    block.ref.author = in.u16();
    block.ref.round = in.u32();
    auto parent_count = in.u16();
    block.parents.reserve(parent_count);
    for (std::uint16_t i = 0; i < parent_count; ++i) {
        BlockRef p;
        p.author = in.u16();
        p.round = in.u32();
        block.parents.push_back(p);
    }
    auto tx_count = in.u32();
    // Each transaction needs at least 8 bytes; reject absurd counts before reserving.
    if (tx_count > in.remaining() / 8) {
        throw DecodeError("transaction count exceeds remaining input");
    }
    block.payload.reserve(tx_count);
    for (std::uint32_t i = 0; i < tx_count; ++i) {
        block.payload.push_back(decode_transaction(in));
    }
    return block;
}

Block decode_block(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes);
    auto block = decode_block(in);
    if (!in.empty()) {
        throw DecodeError("trailing bytes after block");
    }
    return block;
}

}  // namespace nemo
