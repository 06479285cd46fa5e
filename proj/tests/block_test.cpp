#include <gtest/gtest.h>

#include "nemo/block.hpp"
#include "support.hpp"

namespace nemo {
namespace {

using testing::make_block;
using testing::ref;

Transaction tx(std::uint16_t client, std::uint32_t seq, std::vector<std::uint8_t> body) {
    return Transaction{client, seq, std::move(body)};
}

TEST(BlockEncoding, ExactByteLayout) {
    const Block b = make_block(0x0102, 0x03040506, {ref(0x0102, 0x03040505), ref(7, 1)}, {tx(9, 0x0A0B0C0D, {0xEE, 0xFF})});
    const std::vector<std::uint8_t> expected = {
        0x01, 0x02, 0x03, 0x04, 0x05, 0x06,  // author, round
        0x00, 0x02,                          // parent count
        0x01, 0x02, 0x03, 0x04, 0x05, 0x05,  // parent 0
        0x00, 0x07, 0x00, 0x00, 0x00, 0x01,  // parent 1
        0x00, 0x00, 0x00, 0x01,              // tx count
        0x00, 0x09, 0x0A, 0x0B, 0x0C, 0x0D,  // client, sequence
        0x00, 0x02, 0xEE, 0xFF,              // body
    };
    EXPECT_EQ(encode_block(b), expected);
}

TEST(BlockEncoding, RoundTripsBitExactly) {
    std::vector<Transaction> payload;
    for (std::uint32_t i = 0; i < 50; ++i) payload.push_back(tx(static_cast<std::uint16_t>(i % 3), i, std::vector<std::uint8_t>(i, static_cast<std::uint8_t>(i))));
    const Block b = make_block(2, 17, {ref(2, 16), ref(0, 16), ref(1, 3)}, payload);
    const auto bytes = encode_block(b);
    const Block back = decode_block(bytes);
    EXPECT_EQ(back, b);
    EXPECT_EQ(encode_block(back), bytes);
}

TEST(BlockEncoding, GenesisRoundTrips) {
    const Block g = make_genesis(4);
    EXPECT_EQ(g.ref, ref(4, 0));
    EXPECT_EQ(decode_block(encode_block(g)), g);
}

TEST(BlockEncoding, RejectsTrailingBytes) {
    auto bytes = encode_block(make_block(0, 1, {ref(0, 0), ref(1, 0)}));
    bytes.push_back(0);
    EXPECT_THROW(decode_block(bytes), DecodeError);
}

TEST(BlockEncoding, RejectsEveryTruncation) {
    const auto bytes = encode_block(make_block(0, 1, {ref(0, 0), ref(1, 0)}, {tx(1, 2, {3, 4, 5})}));
    for (std::size_t len = 0; len < bytes.size(); ++len) {
        EXPECT_THROW(decode_block(std::span(bytes).first(len)), DecodeError) << "length " << len;
    }
}

TEST(BlockEncoding, RejectsHugeTxCount) {
    auto bytes = encode_block(make_block(0, 1, {ref(0, 0), ref(1, 0)}));
    // Overwrite the tx count with 2^32 - 1.
    for (std::size_t i = bytes.size() - 4; i < bytes.size(); ++i) bytes[i] = 0xFF;
    EXPECT_THROW(decode_block(bytes), DecodeError);
}

TEST(BlockValidation, AcceptsWellFormedBlocks) {
    EXPECT_NO_THROW(validate_block(make_genesis(0), 1));
    EXPECT_NO_THROW(validate_block(make_block(0, 1, {ref(0, 0), ref(1, 0)}), 1));
    EXPECT_NO_THROW(validate_block(make_block(1, 5, {ref(1, 4), ref(0, 4), ref(2, 2)}), 1));
    // A replica that missed the previous round still needs f+1 parents there.
    EXPECT_NO_THROW(validate_block(make_block(1, 5, {ref(0, 4), ref(2, 4), ref(1, 3)}), 1));
}

TEST(BlockValidation, RejectsTooFewPreviousRoundParents) {
    EXPECT_THROW(validate_block(make_block(0, 1, {ref(0, 0)}), 1), InvalidBlock);
    EXPECT_THROW(validate_block(make_block(0, 3, {ref(0, 2), ref(1, 1)}), 1), InvalidBlock);
    EXPECT_THROW(validate_block(make_block(0, 3, {ref(0, 2), ref(1, 2)}), 2), InvalidBlock);
}

TEST(BlockValidation, RejectsNonOlderAndRepeatedParents) {
    EXPECT_THROW(validate_block(make_block(0, 2, {ref(0, 1), ref(1, 2)}), 1), InvalidBlock);
    EXPECT_THROW(validate_block(make_block(0, 2, {ref(0, 1), ref(1, 1), ref(1, 1)}), 1), InvalidBlock);
}

TEST(BlockValidation, OwnPreviousBlockMustComeFirst) {
    EXPECT_THROW(validate_block(make_block(0, 2, {ref(1, 1), ref(0, 1)}), 1), InvalidBlock);
}

TEST(BlockValidation, GenesisMustBeBare) {
    EXPECT_THROW(validate_block(make_block(0, 0, {ref(1, 0)}), 1), InvalidBlock);
    EXPECT_THROW(validate_block(make_block(0, 0, {}, {tx(0, 0, {})}), 1), InvalidBlock);
}

TEST(BlockRef, OrdersByRoundThenAuthor) {
    EXPECT_LT(ref(2, 1), ref(0, 2));
    EXPECT_LT(ref(0, 2), ref(1, 2));
    EXPECT_EQ(to_string(ref(1, 4)), "B(1,4)");
}

TEST(Transaction, KeyPacksClientAndSequence) {
    EXPECT_EQ(tx_key(1, 2), (1ULL << 32) | 2);
    EXPECT_NE(tx_key(1, 0), tx_key(0, 1));
}

}  // namespace
}  // namespace nemo
