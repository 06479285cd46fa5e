#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "nemo/bytes.hpp"

namespace nemo {

using ReplicaId = std::uint16_t;
using Round = std::uint32_t;

// Simulated or wall time in integer microseconds.
using SimTime = std::int64_t;

constexpr SimTime kMillis = 1000;
constexpr SimTime kSeconds = 1000 * kMillis;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidBlock : public Error {
public:
    using Error::Error;
};

// Identity of a block. The crash-only model has no equivocation, so
// (author, round) is a key. Ordering is (round, author): this is also the
// linearization order of committed sub-DAGs.
struct BlockRef {
    ReplicaId author = 0;
    Round round = 0;

    friend constexpr bool operator==(const BlockRef&, const BlockRef&) = default;
    friend constexpr std::strong_ordering operator<=>(const BlockRef& a, const BlockRef& b) {
        if (auto c = a.round <=> b.round; c != 0) return c;
        return a.author <=> b.author;
    }
};

std::ostream& operator<<(std::ostream& os, const BlockRef& ref);
std::string to_string(const BlockRef& ref);

struct BlockRefHash {
    std::size_t operator()(const BlockRef& r) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(r.round) << 16) | r.author);
    }
};

using BlockRefSet = std::unordered_set<BlockRef, BlockRefHash>;

struct Transaction {
    std::uint16_t client = 0;
    std::uint32_t sequence = 0;
    std::vector<std::uint8_t> body;

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

// Packs (client, sequence) into a single run-unique key.
constexpr std::uint64_t tx_key(std::uint16_t client, std::uint32_t sequence) {
    return (static_cast<std::uint64_t>(client) << 32) | sequence;
}
inline std::uint64_t tx_key(const Transaction& tx) { return tx_key(tx.client, tx.sequence); }

struct Block {
    BlockRef ref;
    std::vector<BlockRef> parents;
    std::vector<Transaction> payload;

    friend bool operator==(const Block&, const Block&) = default;
};

using BlockPtr = std::shared_ptr<const Block>;

Block make_genesis(ReplicaId author);

// Throws InvalidBlock unless `block` satisfies the structural rules for a
// system tolerating `f` crashes: genesis is bare; any later block carries at
// least f+1 distinct previous-round parents, all parents are strictly older,
// no parent repeats, and the author's own previous-round block (if named)
// comes first.
void validate_block(const Block& block, std::size_t f);

void encode_transaction(const Transaction& tx, ByteWriter& out);
Transaction decode_transaction(ByteReader& in);

void encode_block(const Block& block, ByteWriter& out);
std::vector<std::uint8_t> encode_block(const Block& block);
Block decode_block(ByteReader& in);
Block decode_block(std::span<const std::uint8_t> bytes);

}  // namespace nemo
