#include "nemo/dag_store.hpp"

#include <algorithm>
#include <deque>

namespace nemo {

DagView::DagView(std::size_t replicas, std::size_t pending_cap) : n_(replicas), pending_cap_(pending_cap) {
    if (n_ == 0 || n_ % 2 == 0) {
        throw Error("replica count must be odd (n = 2f+1), got " + std::to_string(n_));
    }
    rounds_.emplace_back(n_);
    round_counts_.push_back(0);
    std::vector<BlockPtr> ignored;
    for (std::size_t i = 0; i < n_; ++i) {
        store(std::make_shared<const Block>(make_genesis(static_cast<ReplicaId>(i))), ignored);
    }
}

const Block* DagView::find(const BlockRef& ref) const {
    if (ref.round >= rounds_.size() || ref.author >= n_) return nullptr;
    return rounds_[ref.round][ref.author].get();
}

const BlockPtr& DagView::get(const BlockRef& ref) const {
    if (ref.round >= rounds_.size() || ref.author >= n_ || !rounds_[ref.round][ref.author]) {
        throw UnknownBlock("block " + to_string(ref) + " not in view");
    }
    return rounds_[ref.round][ref.author];
}

std::span<const BlockPtr> DagView::round_slots(Round r) const {
    if (r >= rounds_.size()) return {};
    return rounds_[r];
}

std::vector<BlockPtr> DagView::blocks_at(Round r) const {
    std::vector<BlockPtr> out;
    for (const auto& b : round_slots(r)) {
        if (b) out.push_back(b);
    }
    return out;
}

std::size_t DagView::count_at(Round r) const { return r < round_counts_.size() ? round_counts_[r] : 0; }

void DagView::store(BlockPtr block, std::vector<BlockPtr>& added) {
    std::deque<BlockPtr> work{std::move(block)};
    while (!work.empty()) {
        auto b = std::move(work.front());
        work.pop_front();
        const auto ref = b->ref;
        if (ref.round >= rounds_.size()) {
            rounds_.resize(ref.round + 1, std::vector<BlockPtr>(n_));
            round_counts_.resize(ref.round + 1, 0);
        }
        rounds_[ref.round][ref.author] = b;
        ++round_counts_[ref.round];
        insertion_order_.push_back(ref);
        added.push_back(b);

        auto waiting = waiters_.find(ref);
        if (waiting == waiters_.end()) continue;
        for (const auto& child : waiting->second) {
            auto& left = pending_missing_.at(child);
            if (--left == 0) {
                auto node = pending_.extract(child);
                pending_missing_.erase(child);
                work.push_back(std::move(node.mapped()));
            }
        }
        waiters_.erase(waiting);
    }
}

std::vector<BlockRef> DagView::frontier(const Block& block) const {
    std::set<BlockRef> missing;
    std::set<BlockRef> seen;
    std::vector<const Block*> stack{&block};
    while (!stack.empty()) {
        const Block* b = stack.back();
        stack.pop_back();
        for (const auto& p : b->parents) {
            if (contains(p) || !seen.insert(p).second) continue;
            if (auto it = pending_.find(p); it != pending_.end()) {
                stack.push_back(it->second.get());
            } else {
                missing.insert(p);
            }
        }
    }
    return {missing.begin(), missing.end()};
}

InsertResult DagView::insert(BlockPtr block) {
    if (!block) throw InvalidBlock("null block");
    const auto& b = *block;
    if (b.ref.author >= n_) {
        throw InvalidBlock("author out of range in " + to_string(b.ref));
    }
    for (const auto& p : b.parents) {
        if (p.author >= n_) throw InvalidBlock(to_string(b.ref) + " names unknown author in " + to_string(p));
    }
    validate_block(b, fault_tolerance());

    if (const Block* existing = find(b.ref)) {
        if (*existing != b) throw DuplicateConflict("conflicting content for " + to_string(b.ref));
        return {InsertStatus::already_present, {}, {}};
    }
    if (auto it = pending_.find(b.ref); it != pending_.end()) {
        if (*it->second != b) throw DuplicateConflict("conflicting content for pending " + to_string(b.ref));
        return {InsertStatus::buffered, frontier(b), {}};
    }

    std::vector<BlockRef> absent;
    for (const auto& p : b.parents) {
        if (!contains(p)) absent.push_back(p);
    }

    InsertResult result;
    if (absent.empty()) {
        result.status = InsertStatus::inserted;
        store(std::move(block), result.added);
        return result;
    }

    result.missing = frontier(b);
    if (pending_cap_ != 0 && pending_.size() >= pending_cap_) {
        result.status = InsertStatus::dropped;
        return result;
    }
    result.status = InsertStatus::buffered;
    pending_missing_[b.ref] = absent.size();
    for (const auto& p : absent) waiters_[p].push_back(b.ref);
    pending_.emplace(b.ref, std::move(block));
    return result;
}

bool DagView::is_link(const BlockRef& newer, const BlockRef& older) const {
    get(newer);
    get(older);
    if (newer == older) return true;
    if (newer.round <= older.round) return false;

    const std::size_t span_rounds = newer.round - older.round + 1;
    std::vector<std::uint8_t> visited(span_rounds * n_, 0);
    auto slot = [&](const BlockRef& r) { return (r.round - older.round) * n_ + r.author; };

    std::vector<BlockRef> stack{newer};
    visited[slot(newer)] = 1;
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        for (const auto& p : find(cur)->parents) {
            if (p == older) return true;
            if (p.round <= older.round) continue;
            auto& mark = visited[slot(p)];
            if (mark) continue;
            mark = 1;
            stack.push_back(p);
        }
    }
    return false;
}

std::size_t DagView::count_supporters(const BlockRef& target) const {
    std::size_t count = 0;
    for (const auto& b : round_slots(target.round + 1)) {
        if (b && std::find(b->parents.begin(), b->parents.end(), target) != b->parents.end()) {
            ++count;
        }
    }
    return count;
}

std::set<BlockRef> DagView::causal_history(const BlockRef& root) const {
    get(root);
    std::set<BlockRef> out{root};
    std::vector<BlockRef> stack{root};
    while (!stack.empty()) {
        auto cur = stack.back();
        stack.pop_back();
        for (const auto& p : find(cur)->parents) {
            if (out.insert(p).second) stack.push_back(p);
        }
    }
    return out;
}

DagView DagView::prefix(std::size_t count) const {
    DagView out(n_);
    count = std::min(count, insertion_order_.size());
    for (std::size_t i = n_; i < count; ++i) {
        out.insert(get(insertion_order_[i]));
    }
    return out;
}

bool DagView::same_contents(const DagView& other) const {
    if (n_ != other.n_ || rounds_.size() != other.rounds_.size()) return false;
    for (std::size_t r = 0; r < rounds_.size(); ++r) {
        for (std::size_t a = 0; a < n_; ++a) {
            const auto& x = rounds_[r][a];
            const auto& y = other.rounds_[r][a];
            if (static_cast<bool>(x) != static_cast<bool>(y)) return false;
            if (x && *x != *y) return false;
        }
    }
    return true;
}

}  // namespace nemo
