#include "nemo/committer.hpp"

#include <algorithm>

namespace nemo {

const char* to_string(SlotState s) {
    switch (s) {
        case SlotState::undecided: return "undecided";
        case SlotState::commit: return "commit";
        case SlotState::skip: return "skip";
    }
    return "?";
}

const char* to_string(InjectedFault f) {
    switch (f) {
        case InjectedFault::none: return "none";
        case InjectedFault::weak_quorum: return "weak-quorum";
        case InjectedFault::early_anchor: return "early-anchor";
    }
    return "?";
}

InjectedFault parse_injected_fault(const std::string& s) {
    if (s == "none") return InjectedFault::none;
    if (s == "weak-quorum") return InjectedFault::weak_quorum;
    if (s == "early-anchor") return InjectedFault::early_anchor;
    throw Error("unknown injected fault '" + s + "'");
}

const Block* leader_block(const DagView& view, const ScheduleConfig& cfg, SlotId slot) {
    return view.find(BlockRef{leader_of(cfg, slot), slot.round});
}

SlotStatus try_direct_decide(const DagView& view, const CommitterConfig& cfg, SlotId slot) {
    const Block* leader = leader_block(view, cfg.schedule, slot);
    if (leader == nullptr) return SlotStatus::undecided(slot);
    if (view.count_supporters(leader->ref) >= cfg.support_threshold()) {
        return SlotStatus::commit(slot, leader->ref, DecisionRule::direct);
    }
    return SlotStatus::undecided(slot);
}

namespace {

SlotStatus decide_with_anchor(const DagView& view, const CommitterConfig& cfg, SlotId slot,
                              const SlotStatus* anchor) {
    if (anchor == nullptr || !anchor->is_commit()) return SlotStatus::undecided(slot);
    // A leader block absent from the view cannot be in the anchor's causal
    // history, so skipping it is safe.
    const Block* leader = leader_block(view, cfg.schedule, slot);
    if (leader != nullptr && view.is_link(anchor->block, leader->ref)) {
        return SlotStatus::commit(slot, leader->ref, DecisionRule::indirect);
    }
    return SlotStatus::skip(slot);
}

}  // namespace

SlotStatus try_indirect_decide(const DagView& view, const CommitterConfig& cfg, SlotId slot,
                               std::span<const SlotStatus> later) {
    const Round bound = cfg.anchor_min_round(slot.round);
    const auto& sched = cfg.schedule;

    const SlotStatus* anchor = nullptr;
    std::optional<SlotId> expected;
    for (const auto& s : later) {
        if (s.slot.round < bound) continue;
        const SlotId want = expected ? *expected : SlotId{bound, 0};
        if (s.slot != want) {
            throw MissingStatuses("status list gap: expected slot (" + std::to_string(want.round) + "," +
                                  std::to_string(want.rank) + ")");
        }
        expected = next_slot(sched, s.slot);
        if (anchor == nullptr && !s.is_skip()) anchor = &s;
    }
    if (expected && expected->rank != 0) {
        throw MissingStatuses("status list ends mid-round " + std::to_string(expected->round));
    }
    return decide_with_anchor(view, cfg, slot, anchor);
}

std::vector<SlotStatus> try_decide(const DagView& view, const CommitterConfig& cfg, Round last_committed_round,
                                   Round highest_round) {
    const auto& sched = cfg.schedule;
    std::vector<SlotStatus> descending;
    for (Round r = highest_round; r > last_committed_round && r >= 1; --r) {
        for (std::uint32_t rank = static_cast<std::uint32_t>(sched.leaders_per_round); rank-- > 0;) {
            const SlotId slot{r, rank};
            auto status = try_direct_decide(view, cfg, slot);
            if (!status.decided()) {
                // `descending` holds the later slots; view them ascending.
                std::vector<SlotStatus> later(descending.rbegin(), descending.rend());
                status = try_indirect_decide(view, cfg, slot, later);
            }
            descending.push_back(status);
        }
    }
    return {descending.rbegin(), descending.rend()};
}

std::vector<BlockRef> linearize_sub_dag(const DagView& view, const BlockRef& leader, const BlockRefSet& output) {
    view.get(leader);
    std::vector<BlockRef> out;
    if (leader.round == 0 || output.count(leader)) return out;

    // The output set is closed under ancestry, so the search can stop at it.
    BlockRefSet seen{leader};
    std::vector<BlockRef> stack{leader};
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        out.push_back(cur);
        for (const auto& p : view.find(cur)->parents) {
            if (p.round == 0 || output.count(p) || !seen.insert(p).second) continue;
            stack.push_back(p);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CommitEntry> extend_commit_sequence(const DagView& view, CommitState& state, const CommitterConfig& cfg) {
    const auto& sched = cfg.schedule;
    const SlotId start = state.last_decided_slot ? next_slot(sched, *state.last_decided_slot) : SlotId{1, 0};
    const Round highest = view.highest_round();
    if (start.round > highest) return {};

    // Classify from the top slot down to `start`, reusing cached decisions.
    std::vector<SlotStatus> descending;
    for (SlotId slot = last_slot_of(sched, highest);; ) {
        SlotStatus status;
        if (auto it = state.decisions.find(slot); it != state.decisions.end()) {
            status = it->second.status;
        } else {
            status = try_direct_decide(view, cfg, slot);
            if (!status.decided()) {
                const Round bound = cfg.anchor_min_round(slot.round);
                const SlotStatus* anchor = nullptr;
                for (auto it2 = descending.rbegin(); it2 != descending.rend(); ++it2) {
                    if (it2->slot.round < bound || it2->is_skip()) continue;
                    anchor = &*it2;
                    break;
                }
                status = decide_with_anchor(view, cfg, slot, anchor);
            }
            if (status.decided()) {
                state.decisions.emplace(slot, DecisionRecord{status, view.size()});
                if (status.is_skip()) {
                    ++state.skips;
                } else if (status.rule == DecisionRule::direct) {
                    ++state.direct_commits;
                } else {
                    ++state.indirect_commits;
                }
            }
        }
        descending.push_back(status);
        if (slot == start) break;
        slot = slot.rank > 0 ? SlotId{slot.round, slot.rank - 1} : last_slot_of(sched, slot.round - 1);
    }

    std::vector<CommitEntry> fresh;
    for (auto it = descending.rbegin(); it != descending.rend(); ++it) {
        const auto& status = *it;
        if (!status.decided()) break;
        if (status.is_commit()) {
            for (const auto& ref : linearize_sub_dag(view, status.block, state.output_set)) {
                state.output_set.insert(ref);
                CommitEntry entry{ref, status.slot, state.committed_sequence.size()};
                state.committed_sequence.push_back(entry);
                fresh.push_back(entry);
            }
        }
        state.last_decided_slot = status.slot;
    }
    return fresh;
}

}  // namespace nemo
