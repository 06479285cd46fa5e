#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <random>

#include "nemo/dag_store.hpp"
#include "nemo/netsim.hpp"
#include "support.hpp"

namespace nemo {
namespace {

using testing::golden_blocks;
using testing::golden_view;
using testing::make_block;
using testing::ref;

TEST(DagView, StartsWithGenesis) {
    DagView v(3);
    EXPECT_EQ(v.size(), 3u);
    EXPECT_EQ(v.highest_round(), 0u);
    EXPECT_EQ(v.insert(make_genesis(1)).status, InsertStatus::already_present);
    EXPECT_EQ(v.causal_history(ref(1, 0)), (std::set<BlockRef>{ref(1, 0)}));
}

TEST(DagView, BuffersUntilAncestorsArrive) {
    DagView v(3);
    ASSERT_EQ(v.insert(make_block(0, 1, {ref(0, 0), ref(1, 0)})).status, InsertStatus::inserted);
    // The example's missing round-R peer block.
    auto r = v.insert(make_block(0, 2, {ref(0, 1), ref(1, 1)}));
    EXPECT_EQ(r.status, InsertStatus::buffered);
    EXPECT_EQ(r.missing, (std::vector<BlockRef>{ref(1, 1)}));
    EXPECT_TRUE(v.is_pending(ref(0, 2)));
    EXPECT_FALSE(v.contains(ref(0, 2)));

    auto done = v.insert(make_block(1, 1, {ref(1, 0), ref(2, 0)}));
    EXPECT_EQ(done.status, InsertStatus::inserted);
    ASSERT_EQ(done.added.size(), 2u);
    EXPECT_EQ(done.added[0]->ref, ref(1, 1));
    EXPECT_EQ(done.added[1]->ref, ref(0, 2));
    EXPECT_EQ(v.pending_count(), 0u);
    EXPECT_EQ(v.highest_round(), 2u);
}

TEST(DagView, MissingLooksThroughBufferedAncestors) {
    DagView v(3);
    v.insert(make_block(0, 2, {ref(0, 1), ref(1, 1)}));  // needs 0_1 and 1_1
    auto r = v.insert(make_block(0, 3, {ref(0, 2), ref(2, 2)}));
    EXPECT_EQ(r.status, InsertStatus::buffered);
    // 0_2 is buffered, so it is not itself missing, but its gaps are.
    EXPECT_EQ(r.missing, (std::vector<BlockRef>{ref(0, 1), ref(1, 1), ref(2, 2)}));
}

TEST(DagView, CascadeThroughSeveralLevels) {
    const auto blocks = golden_blocks();
    DagView v(3);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) v.insert(*it);
    EXPECT_TRUE(v.same_contents(golden_view()));
    EXPECT_EQ(v.pending_count(), 0u);
}

TEST(DagView, AnyTopologicalOrderGivesTheSameView) {
    const auto reference = golden_view();
    auto blocks = golden_blocks();
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::shuffle(blocks.begin(), blocks.end(), gen);
        DagView v(3);
        for (const auto& b : blocks) v.insert(b);
        EXPECT_TRUE(v.same_contents(reference));
        EXPECT_EQ(v.highest_round(), 5u);  // R+4 with R = 1
        // Insertion order must respect parents.
        std::set<BlockRef> seen;
        for (const auto& r : v.insertion_order()) {
            for (const auto& p : v.get(r)->parents) EXPECT_TRUE(seen.count(p));
            seen.insert(r);
        }
    }
}

TEST(DagView, RejectsConflictingDuplicate) {
    DagView v(3);
    v.insert(make_block(0, 1, {ref(0, 0), ref(1, 0)}));
    EXPECT_EQ(v.insert(make_block(0, 1, {ref(0, 0), ref(1, 0)})).status, InsertStatus::already_present);
    EXPECT_THROW(v.insert(make_block(0, 1, {ref(0, 0), ref(2, 0)})), DuplicateConflict);
}

TEST(DagView, RejectsInvalidBlocks) {
    DagView v(3);
    EXPECT_THROW(v.insert(make_block(0, 1, {ref(0, 0)})), InvalidBlock);
    EXPECT_THROW(v.insert(make_block(5, 1, {ref(0, 0), ref(1, 0)})), InvalidBlock);
}

TEST(DagView, PendingCapDropsExcess) {
    DagView v(3, 1);
    EXPECT_EQ(v.insert(make_block(0, 2, {ref(0, 1), ref(1, 1)})).status, InsertStatus::buffered);
    EXPECT_EQ(v.insert(make_block(1, 2, {ref(1, 1), ref(0, 1)})).status, InsertStatus::dropped);
    EXPECT_EQ(v.pending_count(), 1u);
}

TEST(DagView, GoldenLinks) {
    const auto v = golden_view();
    EXPECT_TRUE(v.is_link(ref(1, 4), ref(2, 2)));   // S_3a reaches S_1a
    EXPECT_FALSE(v.is_link(ref(0, 3), ref(2, 1)));  // S_2a misses S_0b
    EXPECT_TRUE(v.is_link(ref(0, 3), ref(0, 3)));
    EXPECT_FALSE(v.is_link(ref(2, 1), ref(0, 3)));
    EXPECT_THROW(v.is_link(ref(2, 5), ref(0, 1)), UnknownBlock);
}

TEST(DagView, GoldenSupporters) {
    const auto v = golden_view();
    EXPECT_EQ(v.count_supporters(ref(1, 4)), 2u);  // 0_5 and 1_5
    EXPECT_EQ(v.count_supporters(ref(2, 4)), 0u);
    EXPECT_EQ(v.count_supporters(ref(0, 5)), 0u);  // nothing stored above
    EXPECT_EQ(v.count_supporters(ref(2, 1)), 1u);
}

TEST(DagView, GoldenCausalHistory) {
    const auto v = golden_view();
    const std::set<BlockRef> expected{ref(2, 2), ref(0, 1), ref(2, 1), ref(0, 0), ref(1, 0), ref(2, 0)};
    EXPECT_EQ(v.causal_history(ref(2, 2)), expected);
    EXPECT_THROW(v.causal_history(ref(2, 5)), UnknownBlock);
}

std::size_t scan_supporters(const DagView& v, const BlockRef& target) {
    std::size_t count = 0;
    for (const auto& b : v.blocks_at(target.round + 1)) {
        count += static_cast<std::size_t>(std::count(b->parents.begin(), b->parents.end(), target));
    }
    return count;
}

std::set<BlockRef> bfs_history(const DagView& v, const BlockRef& root) {
    std::set<BlockRef> seen{root};
    std::deque<BlockRef> todo{root};
    while (!todo.empty()) {
        const auto r = todo.front();
        todo.pop_front();
        for (const auto& p : v.get(r)->parents) {
            if (seen.insert(p).second) todo.push_back(p);
        }
    }
    return seen;
}

TEST(DagView, RandomDagsMatchNaiveQueries) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        testing::RandomDagParams p;
        p.n = seed % 2 ? 5 : 3;
        p.rounds = 7;
        const auto v = testing::view_of(p.n, testing::random_dag(seed, p));
        for (const auto& r : v.insertion_order()) {
            EXPECT_EQ(v.count_supporters(r), scan_supporters(v, r)) << r;
            const auto history = v.causal_history(r);
            EXPECT_EQ(history, bfs_history(v, r)) << r;
            for (const auto& other : v.insertion_order()) {
                EXPECT_EQ(v.is_link(r, other), history.count(other) != 0);
            }
        }
    }
}

TEST(DagView, PrefixIsCausallyClosed) {
    const auto v = golden_view();
    for (std::size_t k = 3; k <= v.size(); ++k) {
        const auto p = v.prefix(k);
        EXPECT_EQ(p.size(), k);
        for (const auto& r : p.insertion_order()) {
            for (const auto& parent : p.get(r)->parents) EXPECT_TRUE(p.contains(parent));
        }
    }
    EXPECT_TRUE(v.prefix(v.size()).same_contents(v));
}

TEST(DagView, RoundSlotsAndCounts) {
    const auto v = golden_view();
    EXPECT_EQ(v.count_at(5), 2u);
    const auto slots = v.round_slots(5);
    ASSERT_EQ(slots.size(), 3u);
    EXPECT_NE(slots[0], nullptr);
    EXPECT_EQ(slots[2], nullptr);
    EXPECT_EQ(v.count_at(9), 0u);
    EXPECT_TRUE(v.round_slots(9).empty());
}

}  // namespace
}  // namespace nemo
