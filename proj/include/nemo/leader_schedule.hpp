#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "nemo/block.hpp"

namespace nemo {

// A skeleton slot. Slots are totally ordered by (round, rank).
struct SlotId {
    Round round = 0;
    std::uint32_t rank = 0;

    friend constexpr auto operator<=>(const SlotId&, const SlotId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const SlotId& s) {
    return os << "S(" << s.round << "," << s.rank << ")";
}

struct ScheduleConfig {
    static constexpr Round wave_length = 2;

    std::size_t n = 3;
    std::size_t leaders_per_round = 1;

    std::size_t f() const { return (n - 1) / 2; }
    std::size_t quorum() const { return f() + 1; }

    void validate() const {
        if (n == 0 || n % 2 == 0) throw Error("replica count must be odd (n = 2f+1)");
        if (n > 0xFFFF) throw Error("replica count exceeds 16-bit ids");
        if (leaders_per_round < 1 || leaders_per_round > n) {
            throw Error("leaders per round must be in [1, n]");
        }
    }
};

// Round-robin: (round + rank) mod n.
constexpr ReplicaId leader_of(const ScheduleConfig& cfg, SlotId slot) {
    return static_cast<ReplicaId>((static_cast<std::uint64_t>(slot.round) + slot.rank) % cfg.n);
}

constexpr SlotId next_slot(const ScheduleConfig& cfg, SlotId slot) {
    if (slot.rank + 1 < cfg.leaders_per_round) return {slot.round, slot.rank + 1};
    return {slot.round + 1, 0};
}

constexpr SlotId last_slot_of(const ScheduleConfig& cfg, Round r) {
    return {r, static_cast<std::uint32_t>(cfg.leaders_per_round - 1)};
}

// Every slot strictly after `after` with round <= up_to_round, ascending.
inline std::vector<SlotId> slots_between(const ScheduleConfig& cfg, SlotId after, Round up_to_round) {
    std::vector<SlotId> out;
    for (SlotId s = next_slot(cfg, after); s.round <= up_to_round; s = next_slot(cfg, s)) {
        out.push_back(s);
    }
    return out;
}

inline bool is_skeleton_author(const ScheduleConfig& cfg, ReplicaId author, Round r) {
    if (r == 0) return false;
    for (std::uint32_t rank = 0; rank < cfg.leaders_per_round; ++rank) {
        if (leader_of(cfg, {r, rank}) == author) return true;
    }
    return false;
}

struct WaveCoords {
    Round wave_offset = 0;
    Round wave_number = 0;
    Round propose_round = 0;
    Round decision_round = 0;

    friend constexpr bool operator==(const WaveCoords&, const WaveCoords&) = default;
};

constexpr Round wave_number(Round wave_offset, Round r) { return (r - wave_offset) / ScheduleConfig::wave_length; }
constexpr Round propose_round(Round wave_offset, Round wave) {
    return wave * ScheduleConfig::wave_length + wave_offset;
}
constexpr Round decision_round(Round wave_offset, Round wave) {
    return propose_round(wave_offset, wave) + (ScheduleConfig::wave_length - 1);
}

constexpr WaveCoords wave_coords(SlotId slot) {
    const Round offset = slot.round % ScheduleConfig::wave_length;
    const Round wave = wave_number(offset, slot.round);
    return {offset, wave, propose_round(offset, wave), decision_round(offset, wave)};
}

}  // namespace nemo
