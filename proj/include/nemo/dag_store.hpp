#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "nemo/block.hpp"

namespace nemo {

class DuplicateConflict : public Error {
public:
    using Error::Error;
};

class UnknownBlock : public Error {
public:
    using Error::Error;
};

enum class InsertStatus {
    inserted,         // stored, possibly together with buffered descendants
    buffered,         // held until `missing` ancestors arrive
    already_present,  // identical block already stored
    dropped,          // pending buffer full; caller should re-request later
};

struct InsertResult {
    InsertStatus status = InsertStatus::inserted;
    // Ancestors that are neither stored nor buffered (the sync frontier).
    std::vector<BlockRef> missing;
    // Blocks that entered the view, in insertion order (cascade included).
    std::vector<BlockPtr> added;
};

// A replica's local DAG. Blocks enter the view only once their whole causal
// history is present, so the stored set is always closed under parents.
// Genesis blocks for every replica are present from construction.
class DagView {
public:
    // `pending_cap` bounds the buffer of incomplete blocks; 0 means unbounded.
    explicit DagView(std::size_t replicas, std::size_t pending_cap = 0);

    std::size_t replica_count() const { return n_; }
    std::size_t fault_tolerance() const { return (n_ - 1) / 2; }

    InsertResult insert(BlockPtr block);
    InsertResult insert(Block block) { return insert(std::make_shared<const Block>(std::move(block))); }

    bool contains(const BlockRef& ref) const { return find(ref) != nullptr; }
    const Block* find(const BlockRef& ref) const;
    // Throws UnknownBlock.
    const BlockPtr& get(const BlockRef& ref) const;

    Round highest_round() const { return static_cast<Round>(rounds_.size() - 1); }
    // One entry per author; null where the view holds no block.
    std::span<const BlockPtr> round_slots(Round r) const;
    std::vector<BlockPtr> blocks_at(Round r) const;
    std::size_t count_at(Round r) const;

    // True iff a parent chain leads from `newer` down to `older`; reflexive.
    // Throws UnknownBlock if either ref is absent.
    bool is_link(const BlockRef& newer, const BlockRef& older) const;

    // Blocks at target.round + 1 naming `target` as a parent.
    std::size_t count_supporters(const BlockRef& target) const;

    // Transitive closure of parents including `root`; throws UnknownBlock.
    std::set<BlockRef> causal_history(const BlockRef& root) const;

    std::size_t size() const { return insertion_order_.size(); }
    std::size_t pending_count() const { return pending_.size(); }
    bool is_pending(const BlockRef& ref) const { return pending_.count(ref) != 0; }

    // Stored refs in the order they entered the view (genesis first).
    const std::vector<BlockRef>& insertion_order() const { return insertion_order_; }

    // A fresh view holding only the first `count` stored blocks. The result is
    // causally closed because insertion order respects parents.
    DagView prefix(std::size_t count) const;

    // Same stored blocks, regardless of insertion order or buffer state.
    bool same_contents(const DagView& other) const;

private:
    void store(BlockPtr block, std::vector<BlockPtr>& added);
    std::vector<BlockRef> frontier(const Block& block) const;

    std::size_t n_;
    std::size_t pending_cap_;
    std::vector<std::vector<BlockPtr>> rounds_;
    std::vector<std::size_t> round_counts_;
    std::vector<BlockRef> insertion_order_;

    std::map<BlockRef, BlockPtr> pending_;
    std::map<BlockRef, std::size_t> pending_missing_;
    std::map<BlockRef, std::vector<BlockRef>> waiters_;
};

}  // namespace nemo
