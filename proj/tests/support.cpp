#include "support.hpp"

#include <algorithm>
#include <random>

#include "nemo/netsim.hpp"

namespace nemo::testing {

Block make_block(ReplicaId author, Round round, std::initializer_list<BlockRef> parents,
                 std::vector<Transaction> payload) {
    Block b;
    b.ref = BlockRef{author, round};
    b.parents = parents;
    b.payload = std::move(payload);
    return b;
}

std::vector<Block> golden_blocks() {
    const BlockRef g0{0, 0}, g1{1, 0}, g2{2, 0};
    return {
        make_block(0, 1, {g0, g1, g2}),
        make_block(1, 1, {g1, g0, g2}),
        make_block(2, 1, {g2, g0, g1}),

        make_block(2, 2, {ref(2, 1), ref(0, 1)}),
        make_block(0, 2, {ref(0, 1), ref(1, 1)}),
        make_block(1, 2, {ref(1, 1), ref(0, 1)}),

        make_block(0, 3, {ref(0, 2), ref(1, 2)}),
        make_block(1, 3, {ref(1, 2), ref(0, 2)}),
        make_block(2, 3, {ref(2, 2), ref(0, 2)}),

        make_block(1, 4, {ref(1, 3), ref(2, 3)}),
        make_block(0, 4, {ref(0, 3), ref(2, 3)}),
        make_block(2, 4, {ref(2, 3), ref(0, 3)}),

        make_block(0, 5, {ref(0, 4), ref(1, 4)}),
        make_block(1, 5, {ref(1, 4), ref(0, 4)}),
    };
}

DagView golden_view() { return view_of(3, golden_blocks()); }

DagView view_of(std::size_t n, const std::vector<Block>& blocks) {
    DagView v(n);
    for (const auto& b : blocks) v.insert(b);
    return v;
}

std::vector<Block> random_dag(std::uint64_t seed, const RandomDagParams& p) {
    Rng rng(seed);
    const std::size_t f = (p.n - 1) / 2;
    std::vector<Block> out;
    std::vector<std::vector<bool>> present(p.rounds + 1, std::vector<bool>(p.n, false));
    std::fill(present[0].begin(), present[0].end(), true);

    for (Round r = 1; r <= p.rounds; ++r) {
        std::vector<ReplicaId> prev;
        for (std::size_t a = 0; a < p.n; ++a) {
            if (present[r - 1][a]) prev.push_back(static_cast<ReplicaId>(a));
        }
        if (prev.size() < f + 1) break;
        for (std::size_t a = 0; a < p.n; ++a) {
            if (rng.uniform() >= p.presence) continue;
            const auto me = static_cast<ReplicaId>(a);
            Block b;
            b.ref = BlockRef{me, r};
            std::vector<ReplicaId> others;
            if (present[r - 1][a]) {
                b.parents.push_back(BlockRef{me, r - 1});
            }
            for (auto x : prev) {
                if (x != me) others.push_back(x);
            }
            // Shuffle, then take enough for a quorum plus random extras.
            for (std::size_t i = others.size(); i > 1; --i) {
                std::swap(others[i - 1], others[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
            }
            for (auto x : others) {
                if (b.parents.size() < f + 1 || rng.uniform() < p.extra_parent) b.parents.push_back(BlockRef{x, r - 1});
            }
            if (r >= 3 && rng.uniform() < p.old_parent) {
                const Round back = static_cast<Round>(rng.uniform_int(1, r - 2));
                const auto who = static_cast<ReplicaId>(rng.uniform_int(0, static_cast<std::int64_t>(p.n) - 1));
                const BlockRef old{who, back};
                if (present[back][who] && std::find(b.parents.begin(), b.parents.end(), old) == b.parents.end()) {
                    b.parents.push_back(old);
                }
            }
            present[r][a] = true;
            out.push_back(std::move(b));
        }
    }
    return out;
}

}  // namespace nemo::testing
