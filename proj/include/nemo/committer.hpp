#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nemo/block.hpp"
#include "nemo/dag_store.hpp"
#include "nemo/leader_schedule.hpp"

namespace nemo {

class MissingStatuses : public Error {
public:
    using Error::Error;
};

enum class SlotState : std::uint8_t { undecided, commit, skip };
enum class DecisionRule : std::uint8_t { none, direct, indirect };

const char* to_string(SlotState s);

struct SlotStatus {
    SlotId slot;
    SlotState state = SlotState::undecided;
    BlockRef block{};  // meaningful only for commit
    DecisionRule rule = DecisionRule::none;

    static SlotStatus undecided(SlotId s) { return {s, SlotState::undecided, {}, DecisionRule::none}; }
    static SlotStatus commit(SlotId s, BlockRef b, DecisionRule how) { return {s, SlotState::commit, b, how}; }
    static SlotStatus skip(SlotId s) { return {s, SlotState::skip, {}, DecisionRule::indirect}; }

    bool is_commit() const { return state == SlotState::commit; }
    bool is_skip() const { return state == SlotState::skip; }
    bool decided() const { return state != SlotState::undecided; }

    // Equal outcome, ignoring which rule produced it.
    bool same_decision(const SlotStatus& o) const {
        return slot == o.slot && state == o.state && (state != SlotState::commit || block == o.block);
    }
};

// Deliberately broken decision rules, used to show the safety oracles catch
// violations. Never enable outside negative tests.
enum class InjectedFault : std::uint8_t {
    none,
    weak_quorum,   // direct rule accepts f supporters instead of f+1
    early_anchor,  // anchors may sit in round R+1 instead of beyond it
};

const char* to_string(InjectedFault f);
InjectedFault parse_injected_fault(const std::string& s);

struct CommitterConfig {
    ScheduleConfig schedule;
    InjectedFault fault = InjectedFault::none;

    std::size_t support_threshold() const {
        return fault == InjectedFault::weak_quorum ? schedule.f() : schedule.f() + 1;
    }
    // Lowest round a slot's anchor may occupy.
    Round anchor_min_round(Round slot_round) const {
        return fault == InjectedFault::early_anchor ? slot_round + 1 : slot_round + ScheduleConfig::wave_length;
    }
};

// Leader block for `slot`, or nullptr if the view lacks it.
const Block* leader_block(const DagView& view, const ScheduleConfig& cfg, SlotId slot);

// Commit iff the leader block has enough supporters in the decision round;
// never returns skip.
SlotStatus try_direct_decide(const DagView& view, const CommitterConfig& cfg, SlotId slot);

// `later` lists statuses in ascending slot order and must cover every slot
// from the anchor bound up to a full final round; entries below the bound are
// ignored. Throws MissingStatuses on a gap.
SlotStatus try_indirect_decide(const DagView& view, const CommitterConfig& cfg, SlotId slot,
                               std::span<const SlotStatus> later);

// Stateless classification of every slot in rounds
// (last_committed_round, highest_round], returned in ascending order.
std::vector<SlotStatus> try_decide(const DagView& view, const CommitterConfig& cfg, Round last_committed_round,
                                   Round highest_round);

// Causal history of `leader` minus `output` and genesis, ascending by
// (round, author). The leader comes last.
std::vector<BlockRef> linearize_sub_dag(const DagView& view, const BlockRef& leader, const BlockRefSet& output);

struct CommitEntry {
    BlockRef block;
    SlotId anchor_slot;  // slot whose leader's history committed this block
    std::uint64_t position = 0;

    friend bool operator==(const CommitEntry&, const CommitEntry&) = default;
};

struct DecisionRecord {
    SlotStatus status;
    std::size_t view_size = 0;  // stored blocks when the decision was taken
};

struct CommitState {
    std::optional<SlotId> last_decided_slot;
    BlockRefSet output_set;
    std::vector<CommitEntry> committed_sequence;
    // Memoized final decisions; undecided slots are never cached.
    std::map<SlotId, DecisionRecord> decisions;

    std::uint64_t direct_commits = 0;
    std::uint64_t indirect_commits = 0;
    std::uint64_t skips = 0;
};

// Classifies undecided slots, then walks the slot order from the last decided
// slot, committing each commit slot's uncommitted history and passing over
// skips, until the first undecided slot. Returns only new entries.
std::vector<CommitEntry> extend_commit_sequence(const DagView& view, CommitState& state, const CommitterConfig& cfg);

}  // namespace nemo
