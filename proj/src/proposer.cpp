#include "nemo/proposer.hpp"

#include <algorithm>
#include <numeric>

namespace nemo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<ReplicaId> designated_quorum(std::uint64_t seed, std::size_t n, ReplicaId me, Round round) {
    const std::size_t f = (n - 1) / 2;
    std::vector<ReplicaId> peers;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != me) peers.push_back(static_cast<ReplicaId>(i));
    }
    std::uint64_t state = splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(me) << 32) | round));
    // Partial Fisher-Yates: the first f entries become the sample.
    for (std::size_t i = 0; i < f; ++i) {
        state = splitmix64(state);
        std::size_t j = i + static_cast<std::size_t>(state % (peers.size() - i));
        std::swap(peers[i], peers[j]);
    }
    std::vector<ReplicaId> out(peers.begin(), peers.begin() + static_cast<std::ptrdiff_t>(f));
    out.push_back(me);
    std::sort(out.begin(), out.end());
    return out;
}

Proposer::Proposer(ReplicaId me, ScheduleConfig schedule, ReadinessRule rule, std::size_t batch_cap,
                   std::size_t queue_cap)
    : schedule_(schedule), rule_(rule) {
    schedule_.validate();
    if (rule_.timeout <= 0) throw Error("round timeout must be positive");
    if (batch_cap == 0) throw Error("batch cap must be positive");
    state_.me = me;
    state_.batch_cap = batch_cap;
    state_.queue_cap = queue_cap;
}

SubmitResult Proposer::submit_transaction(Transaction tx) {
    if (state_.pending_txs.size() >= state_.queue_cap) return SubmitResult::queue_full;
    state_.pending_txs.push_back(std::move(tx));
    return SubmitResult::accepted;
}

void Proposer::observe(const Block& block) {
    if (block.ref.round == 0 || linked_.count(block.ref)) return;
    unlinked_.insert(block.ref);
}

bool Proposer::quorum_ready(const DagView& view, Round prev, bool deadline_passed) const {
    const std::size_t have = view.count_at(prev);
    if (have < schedule_.quorum()) return false;
    if (rule_.mode == QuorumMode::first_quorum || prev == 0) return true;

    const bool own_missing = !view.contains(BlockRef{state_.me, prev});
    for (auto member : designated_quorum(rule_.quorum_seed, schedule_.n, state_.me, prev + 1)) {
        if (view.contains(BlockRef{member, prev})) continue;
        if (member == state_.me && own_missing) continue;  // skipped ahead; nothing to wait for
        // Fall back to any quorum once the deadline passes so crashes cannot stall us.
        return deadline_passed;
    }
    return true;
}

bool Proposer::skeletons_ready(const DagView& view, Round prev) const {
    if (!rule_.require_skeletons || prev == 0) return true;
    for (std::uint32_t rank = 0; rank < schedule_.leaders_per_round; ++rank) {
        if (!view.contains(BlockRef{leader_of(schedule_, {prev, rank}), prev})) return false;
    }
    return true;
}

void Proposer::mark_linked(const DagView& view, const std::vector<BlockRef>& roots) {
    std::vector<BlockRef> stack;
    for (const auto& r : roots) {
        if (r.round != 0 && linked_.insert(r).second) stack.push_back(r);
    }
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        unlinked_.erase(cur);
        const Block* b = view.find(cur);
        if (b == nullptr) continue;
        for (const auto& p : b->parents) {
            if (p.round != 0 && linked_.insert(p).second) stack.push_back(p);
        }
    }
}

std::optional<Block> Proposer::on_block_or_tick(const DagView& view, SimTime now) {
    const std::size_t quorum = schedule_.quorum();
    if (!state_.round_deadline) state_.round_deadline = now + rule_.timeout;

    // Far behind (a quorum already exists beyond our next round): jump to the
    // frontier instead of proposing stale rounds one by one.
    if (view.count_at(state_.current_round) >= quorum && view.count_at(state_.current_round + 1) >= quorum) {
        Round q = view.highest_round();
        while (view.count_at(q) < quorum) --q;
        state_.current_round = q + 1;
        state_.round_deadline = now + rule_.timeout;
    }

    const Round r = state_.current_round;
    const Round prev = r - 1;
    const bool deadline_passed = now >= *state_.round_deadline;

    if (!quorum_ready(view, prev, deadline_passed)) return std::nullopt;
    const bool skeletons = skeletons_ready(view, prev);
    if (!skeletons && !deadline_passed) return std::nullopt;
    const bool quorum_on_time = quorum_ready(view, prev, false);
    if (!skeletons || !quorum_on_time) ++state_.timeout_fires;

    Block block;
    block.ref = BlockRef{state_.me, r};
    const BlockRef own_prev{state_.me, prev};
    if (view.contains(own_prev)) block.parents.push_back(own_prev);
    for (const auto& b : view.round_slots(prev)) {
        if (b && b->ref != own_prev) block.parents.push_back(b->ref);
    }

    // Every earlier block not yet in our history and not reachable through the
    // previous-round parents gets an explicit reference, so late blocks are
    // never orphaned.
    mark_linked(view, block.parents);
    std::vector<BlockRef> extras;
    for (auto it = unlinked_.rbegin(); it != unlinked_.rend();) {
        const BlockRef ref = *it;
        ++it;
        if (ref.round >= prev || linked_.count(ref)) continue;
        extras.push_back(ref);
        mark_linked(view, {ref});
        it = std::set<BlockRef>::reverse_iterator(unlinked_.upper_bound(ref));
    }
    std::sort(extras.begin(), extras.end());
    block.parents.insert(block.parents.end(), extras.begin(), extras.end());
    linked_.insert(block.ref);

    const std::size_t take = std::min(state_.batch_cap, state_.pending_txs.size());
    block.payload.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        block.payload.push_back(std::move(state_.pending_txs.front()));
        state_.pending_txs.pop_front();
    }

    state_.last_own = block.ref;
    state_.current_round = r + 1;
    state_.round_deadline = now + rule_.timeout;
    ++state_.blocks_emitted;
    return block;
}

void Proposer::resume(const DagView& view, Round next_round, std::optional<BlockRef> last_own) {
    linked_.clear();
    unlinked_.clear();
    state_.last_own = last_own;
    state_.current_round = std::max<Round>(next_round, 1);
    state_.round_deadline.reset();
    if (last_own && view.contains(*last_own)) {
        for (const auto& ref : view.causal_history(*last_own)) {
            if (ref.round != 0) linked_.insert(ref);
        }
    }
    for (Round r = 1; r <= view.highest_round(); ++r) {
        for (const auto& b : view.round_slots(r)) {
            if (b && !linked_.count(b->ref)) unlinked_.insert(b->ref);
        }
    }
}

std::deque<Transaction> Proposer::take_pending() { return std::exchange(state_.pending_txs, {}); }

}  // namespace nemo
