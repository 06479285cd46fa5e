#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "nemo/block.hpp"
#include "nemo/dag_store.hpp"

namespace nemo::testing {

inline BlockRef ref(ReplicaId author, Round round) { return BlockRef{author, round}; }

Block make_block(ReplicaId author, Round round, std::initializer_list<BlockRef> parents,
                 std::vector<Transaction> payload = {});

// The worked example with three replicas and two slots per round, R = 1.
// Replica ids relabel the example's nodes: N0 -> 1, N1 -> 0, N2 -> 2, so the
// stock schedule (round + rank) mod 3 puts its leaders in place.
std::vector<Block> golden_blocks();
DagView golden_view();

struct RandomDagParams {
    std::size_t n = 3;
    Round rounds = 6;
    double presence = 0.85;     // chance a replica has a block in a round
    double extra_parent = 0.5;  // chance each further previous-round block is referenced
    double old_parent = 0.1;    // chance of one reference further back
};

// Valid random DAG; stops early if a round cannot reach a quorum.
std::vector<Block> random_dag(std::uint64_t seed, const RandomDagParams& p);
DagView view_of(std::size_t n, const std::vector<Block>& blocks);

}  // namespace nemo::testing
