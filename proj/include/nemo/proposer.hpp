#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "nemo/block.hpp"
#include "nemo/dag_store.hpp"
#include "nemo/leader_schedule.hpp"

namespace nemo {

enum class QuorumMode : std::uint8_t {
    first_quorum,   // any f+1 previous-round blocks
    random_quorum,  // a designated random f+1 subset (always including self)
};

struct ReadinessRule {
    QuorumMode mode = QuorumMode::first_quorum;
    bool require_skeletons = true;
    SimTime timeout = 500 * kMillis;
    // Seeds the designated random quorums; identical seeds give identical draws.
    std::uint64_t quorum_seed = 0;
};

enum class SubmitResult : std::uint8_t { accepted, queue_full };

struct ProposerState {
    ReplicaId me = 0;
    Round current_round = 1;  // next round this replica will propose
    std::deque<Transaction> pending_txs;
    std::optional<SimTime> round_deadline;
    std::size_t batch_cap = 1000;
    std::size_t queue_cap = 1'000'000;

    std::optional<BlockRef> last_own;
    std::uint64_t blocks_emitted = 0;
    std::uint64_t timeout_fires = 0;
};

// The designated f+1 subset for `me` in `round`: `me` plus f peers drawn by a
// hash of (seed, me, round). Sorted ascending.
std::vector<ReplicaId> designated_quorum(std::uint64_t seed, std::size_t n, ReplicaId me, Round round);

// Drives one replica's round progression. Readiness for round r needs
// (a) f+1 round-(r-1) blocks under the quorum mode and
// (b) every round-(r-1) skeleton block, or the round deadline having passed.
class Proposer {
public:
    Proposer(ReplicaId me, ScheduleConfig schedule, ReadinessRule rule, std::size_t batch_cap,
             std::size_t queue_cap = 1'000'000);

    SubmitResult submit_transaction(Transaction tx);

    // Must be told about every block that enters the view (own blocks too).
    void observe(const Block& block);

    // Emits at most one block; call repeatedly until it returns nullopt.
    std::optional<Block> on_block_or_tick(const DagView& view, SimTime now);

    // Restarts after recovery: resume at `next_round`, treating everything in
    // the causal history of `last_own` as already referenced.
    void resume(const DagView& view, Round next_round, std::optional<BlockRef> last_own);

    const ProposerState& state() const { return state_; }
    std::optional<SimTime> deadline() const { return state_.round_deadline; }
    // Drains the pending queue (used when a replica crashes).
    std::deque<Transaction> take_pending();

private:
    bool quorum_ready(const DagView& view, Round prev, bool deadline_passed) const;
    bool skeletons_ready(const DagView& view, Round prev) const;
    void mark_linked(const DagView& view, const std::vector<BlockRef>& roots);

    ScheduleConfig schedule_;
    ReadinessRule rule_;
    ProposerState state_;
    // Causal history of this replica's latest block.
    BlockRefSet linked_;
    // Stored blocks outside that history, kept ordered for deterministic parents.
    std::set<BlockRef> unlinked_;
};

}  // namespace nemo
