#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nemo/committer.hpp"
#include "nemo/dag_store.hpp"
#include "nemo/netsim.hpp"

namespace nemo {

struct Violation {
    std::string property;
    ReplicaId replica = 0;
    ReplicaId other = 0;        // second replica of a pairwise check, else == replica
    std::uint64_t position = 0;  // sequence position, or slot round for slot checks
    std::string detail;
};

struct OracleVerdict {
    // Property name -> passed. Every checked property appears.
    std::map<std::string, bool> properties;
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    void check(const std::string& property) { properties.emplace(property, true); }
    void fail(Violation v);
    void merge(const OracleVerdict& other);
};

struct ReplicaOutput {
    ReplicaId id = 0;
    std::vector<BlockRef> sequence;
    std::map<SlotId, SlotStatus> decisions;
};

// Cross-replica atomic-broadcast checks: pairwise prefix, no duplication, no
// creation (every committed ref was emitted), commit/skip agreement per slot
// and same-slot-same-block. Sequences are compared pairwise at the first
// differing position.
OracleVerdict check_safety(std::span<const ReplicaOutput> outputs, const std::map<BlockRef, BlockPtr>& emitted);

// Outputs per replica, merging decisions of all its incarnations. A slot
// decided differently by two incarnations is reported under `recovery`.
std::vector<ReplicaOutput> collect_outputs(const SimTrace& trace, OracleVerdict& verdict);

// Recommits from scratch with no caching: the direct rule, then the indirect
// rule against the already classified later slots, from the top slot down
// to round `from_round`. Supporters and links are recomputed per query.
std::map<SlotId, SlotStatus> brute_force_decide(const DagView& view, const CommitterConfig& cfg,
                                                Round from_round = 1);

// Replays each recorded decision on the view prefix that existed when it was
// taken and compares with brute_force_decide under the correct rules.
// Indirect decisions are all checked; direct ones every `direct_stride`-th.
OracleVerdict audit_decisions(const SimTrace& trace, const ScheduleConfig& schedule, std::size_t direct_stride = 1);

// Every block inside the replicas' final views satisfies the structural rules.
OracleVerdict check_validity_rules(const SimTrace& trace);

}  // namespace nemo
