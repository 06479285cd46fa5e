#include "nemo/wire.hpp"

namespace nemo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void encode_payload(const PeerMessage& msg, ByteWriter& out) {
    std::visit(overloaded{
                   [&](const BlockMsg& m) { encode_block(*m.block, out); },
                   [&](const FetchRequest& m) {
                       out.u16(static_cast<std::uint16_t>(m.refs.size()));
                       for (const auto& r : m.refs) {
                           out.u16(r.author);
                           out.u32(r.round);
                       }
                   },
                   [&](const FetchResponse& m) {
                       out.u16(static_cast<std::uint16_t>(m.blocks.size()));
                       for (const auto& b : m.blocks) encode_block(*b, out);
                   },
                   [&](const TxSubmit& m) { encode_transaction(m.tx, out); },
               },
               msg);
}

PeerMessage decode_payload(MessageType type, ByteReader& in) {
    switch (type) {
        case MessageType::block:
            return BlockMsg{std::make_shared<const Block>(decode_block(in))};
        case MessageType::fetch_request: {
            FetchRequest m;
            auto count = in.u16();
            for (std::uint16_t i = 0; i < count; ++i) {
                BlockRef r;
                r.author = in.u16();
                r.round = in.u32();
                m.refs.push_back(r);
            }
            return m;
        }
        case MessageType::fetch_response: {
            FetchResponse m;
            auto count = in.u16();
            for (std::uint16_t i = 0; i < count; ++i) {
                m.blocks.push_back(std::make_shared<const Block>(decode_block(in)));
            }
            return m;
        }
        case MessageType::tx_submit:
            return TxSubmit{decode_transaction(in)};
    }
    throw DecodeError("unknown message type " + std::to_string(static_cast<int>(type)));
}

}  // namespace

MessageType message_type(const PeerMessage& msg) {
    return static_cast<MessageType>(msg.index() + 1);
}

std::vector<std::uint8_t> encode_frame(const PeerMessage& msg) {
    ByteWriter out;
    out.u32(0);
    out.u8(static_cast<std::uint8_t>(message_type(msg)));
    encode_payload(msg, out);
    out.patch_u32(0, static_cast<std::uint32_t>(out.size() - 4));
    return out.take();
}

std::optional<PeerMessage> decode_frame(std::span<const std::uint8_t>& buffer) {
    if (buffer.size() < 4) return std::nullopt;
    ByteReader head(buffer);
    const std::uint32_t len = head.u32();
    if (len == 0) throw DecodeError("empty frame");
    if (buffer.size() - 4 < len) return std::nullopt;

    ByteReader body(buffer.subspan(4, len));
    const auto type = body.u8();
    if (type < 1 || type > 4) throw DecodeError("unknown message type " + std::to_string(type));
    auto msg = decode_payload(static_cast<MessageType>(type), body);
    if (!body.empty()) throw DecodeError("trailing bytes in frame");
    buffer = buffer.subspan(4 + len);
    return msg;
}

bool messages_equal(const PeerMessage& a, const PeerMessage& b) {
    if (a.index() != b.index()) return false;
    return std::visit(overloaded{
                          [&](const BlockMsg& x) { return *x.block == *std::get<BlockMsg>(b).block; },
                          [&](const FetchRequest& x) { return x.refs == std::get<FetchRequest>(b).refs; },
                          [&](const FetchResponse& x) {
                              const auto& y = std::get<FetchResponse>(b).blocks;
                              if (x.blocks.size() != y.size()) return false;
                              for (std::size_t i = 0; i < y.size(); ++i) {
                                  if (*x.blocks[i] != *y[i]) return false;
                              }
                              return true;
                          },
                          [&](const TxSubmit& x) { return x.tx == std::get<TxSubmit>(b).tx; },
                      },
                      a);
}

}  // namespace nemo
