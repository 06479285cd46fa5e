#include <gtest/gtest.h>

#include "nemo/leader_schedule.hpp"

namespace nemo {
namespace {

TEST(LeaderSchedule, RoundRobinExamples) {
    EXPECT_EQ(leader_of({3, 1}, {1, 0}), 1);
    EXPECT_EQ(leader_of({3, 1}, {3, 0}), 0);
    EXPECT_EQ(leader_of({5, 4}, {7, 3}), 0);
}

TEST(LeaderSchedule, RanksWithinARoundAreDistinctAuthors) {
    for (std::size_t n : {3, 5, 7}) {
        const ScheduleConfig cfg{n, n};
        for (Round r = 0; r < 20; ++r) {
            std::vector<bool> seen(n, false);
            for (std::uint32_t k = 0; k < n; ++k) {
                const auto who = leader_of(cfg, {r, k});
                EXPECT_FALSE(seen[who]);
                seen[who] = true;
            }
        }
    }
}

TEST(LeaderSchedule, SlotsBetweenExamples) {
    using V = std::vector<SlotId>;
    EXPECT_EQ(slots_between({3, 2}, {1, 1}, 2), (V{{2, 0}, {2, 1}}));
    EXPECT_EQ(slots_between({3, 1}, {0, 0}, 1), (V{{1, 0}}));
    EXPECT_EQ(slots_between({3, 2}, {6, 1}, 8).size(), 4u);
    EXPECT_TRUE(slots_between({3, 1}, {4, 0}, 4).empty());
    EXPECT_EQ(slots_between({5, 3}, {2, 0}, 2), (V{{2, 1}, {2, 2}}));
}

TEST(LeaderSchedule, SlotOrderIsRoundThenRank) {
    EXPECT_LT((SlotId{1, 1}), (SlotId{2, 0}));
    EXPECT_LT((SlotId{2, 0}), (SlotId{2, 1}));
    EXPECT_EQ(next_slot({3, 2}, {1, 1}), (SlotId{2, 0}));
    EXPECT_EQ(next_slot({3, 2}, {1, 0}), (SlotId{1, 1}));
    EXPECT_EQ(last_slot_of({5, 3}, 4), (SlotId{4, 2}));
}

TEST(LeaderSchedule, WaveCoordinateExamples) {
    EXPECT_EQ(wave_coords({4, 0}), (WaveCoords{0, 2, 4, 5}));
    EXPECT_EQ(wave_coords({1, 0}), (WaveCoords{1, 0, 1, 2}));
    EXPECT_EQ(wave_coords({2, 1}), (WaveCoords{0, 1, 2, 3}));
}

TEST(LeaderSchedule, WaveCoordinatesRoundTrip) {
    for (Round r = 0; r < 100; ++r) {
        const auto w = wave_coords({r, 0});
        EXPECT_EQ(w.propose_round, r);
        EXPECT_EQ(w.decision_round, r + 1);
        EXPECT_EQ(propose_round(w.wave_offset, wave_number(w.wave_offset, r)), r);
    }
}

TEST(LeaderSchedule, SkeletonAuthors) {
    const ScheduleConfig cfg{5, 2};
    EXPECT_TRUE(is_skeleton_author(cfg, 3, 3));
    EXPECT_TRUE(is_skeleton_author(cfg, 4, 3));
    EXPECT_FALSE(is_skeleton_author(cfg, 0, 3));
    EXPECT_FALSE(is_skeleton_author(cfg, 0, 0));
}

TEST(LeaderSchedule, ValidatesConfig) {
    EXPECT_THROW((ScheduleConfig{4, 1}).validate(), Error);
    EXPECT_THROW((ScheduleConfig{3, 0}).validate(), Error);
    EXPECT_THROW((ScheduleConfig{3, 4}).validate(), Error);
    EXPECT_NO_THROW((ScheduleConfig{7, 7}).validate());
    EXPECT_EQ((ScheduleConfig{7, 1}).f(), 3u);
    EXPECT_EQ((ScheduleConfig{7, 1}).quorum(), 4u);
}

}  // namespace
}  // namespace nemo
