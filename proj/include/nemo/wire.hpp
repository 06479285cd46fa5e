#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "nemo/block.hpp"

namespace nemo {

struct BlockMsg {
    BlockPtr block;
};
struct FetchRequest {
    std::vector<BlockRef> refs;
};
struct FetchResponse {
    std::vector<BlockPtr> blocks;
};
struct TxSubmit {
    Transaction tx;
};

using PeerMessage = std::variant<BlockMsg, FetchRequest, FetchResponse, TxSubmit>;

enum class MessageType : std::uint8_t { block = 1, fetch_request = 2, fetch_response = 3, tx_submit = 4 };

MessageType message_type(const PeerMessage& msg);

// Frame layout: [len: u32 BE][type: u8][payload], len = 1 + payload size.
std::vector<std::uint8_t> encode_frame(const PeerMessage& msg);

// Decodes one frame from the front of `buffer`. Returns nullopt when the
// buffer holds only part of a frame; on success advances `buffer` past it.
// Throws DecodeError on a malformed frame.
std::optional<PeerMessage> decode_frame(std::span<const std::uint8_t>& buffer);

bool messages_equal(const PeerMessage& a, const PeerMessage& b);

}  // namespace nemo
