#include "nemo/replica.hpp"

#include <algorithm>

namespace nemo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool well_formed(const Block& b, std::size_t n) {
    if (b.ref.author >= n) return false;
    for (const auto& p : b.parents) {
        if (p.author >= n) return false;
    }
    try {
        validate_block(b, (n - 1) / 2);
    } catch (const InvalidBlock&) {
        return false;
    }
    return true;
}

}  // namespace

Replica::Replica(ReplicaConfig cfg, WalSink& wal)
    : cfg_(cfg),
      committer_cfg_{cfg.schedule, cfg.fault},
      wal_(wal),
      view_(cfg.schedule.n),
      proposer_(cfg.id, cfg.schedule, cfg.readiness, cfg.batch_cap, cfg.queue_cap) {
    if (cfg_.id >= cfg_.schedule.n) throw Error("replica id out of range");
}

std::unique_ptr<Replica> Replica::recover(ReplicaConfig cfg, std::span<const std::uint8_t> wal_bytes, WalSink& wal) {
    auto parsed = read_wal(wal_bytes);
    auto r = std::make_unique<Replica>(cfg, wal);

    std::optional<BlockRef> last_own;
    std::vector<WalRecord> marks;
    std::vector<BlockRef> wanted;
    for (auto& rec : parsed.records) {
        if (rec.kind == WalRecordKind::commit_mark) {
            marks.push_back(rec);
            continue;
        }
        const auto& b = rec.block;
        if (b->ref.author == cfg.id && (!last_own || last_own->round < b->ref.round)) last_own = b->ref;
        if (r->view_.contains(b->ref) || r->view_.is_pending(b->ref)) continue;
        auto res = r->view_.insert(b);
        wanted.insert(wanted.end(), res.missing.begin(), res.missing.end());
    }

    r->proposer_.resume(r->view_, last_own ? last_own->round + 1 : 1, last_own);
    r->run_commit_pipeline();
    r->new_marks_.clear();  // already in the log

    for (const auto& m : marks) {
        auto it = r->commit_.decisions.find(m.slot);
        if (it == r->commit_.decisions.end() || !it->second.status.is_commit() ||
            it->second.status.block != m.leader) {
            throw RecoveryMismatch("commit mark for slot (" + std::to_string(m.slot.round) + "," +
                                   std::to_string(m.slot.rank) + ") not reproduced");
        }
    }

    // Ancestors of restored buffered blocks: ask everyone on the first tick.
    for (const auto& ref : wanted) {
        if (!r->view_.contains(ref) && !r->view_.is_pending(ref)) r->fetches_[ref] = FetchState{0, 1};
    }
    return r;
}

void Replica::log(const WalRecord& rec) {
    auto bytes = encode_wal_record(rec);
    wal_.append(bytes);
}

void Replica::broadcast(const PeerMessage& msg, std::vector<Outbound>& out) const {
    for (std::size_t i = 0; i < cfg_.schedule.n; ++i) {
        if (i != cfg_.id) out.push_back({static_cast<ReplicaId>(i), msg});
    }
}

void Replica::request(ReplicaId to, std::vector<BlockRef> refs, SimTime now, std::vector<Outbound>& out) {
    std::vector<BlockRef> fresh;
    for (const auto& ref : refs) {
        if (view_.contains(ref) || view_.is_pending(ref)) continue;
        if (fetches_.emplace(ref, FetchState{now + cfg_.fetch_retry_interval(), 0}).second) fresh.push_back(ref);
    }
    if (fresh.empty()) return;
    ++counters_.fetch_requests_sent;
    if (to == cfg_.id) {
        broadcast(FetchRequest{std::move(fresh)}, out);
    } else {
        out.push_back({to, FetchRequest{std::move(fresh)}});
    }
}

void Replica::accept_block(const BlockPtr& block, std::vector<BlockRef>& wanted) {
    ++counters_.blocks_received;
    if (!block || !well_formed(*block, cfg_.schedule.n)) {
        ++counters_.malformed;
        return;
    }
    if (const Block* have = view_.find(block->ref)) {
        if (*have != *block) ++counters_.malformed;
        return;
    }
    if (view_.is_pending(block->ref)) return;

    log(WalRecord{WalRecordKind::received_block, block, {}, {}});
    InsertResult res;
    try {
        res = view_.insert(block);
    } catch (const DuplicateConflict&) {
        ++counters_.malformed;
        return;
    }
    fetches_.erase(block->ref);
    for (const auto& b : res.added) {
        fetches_.erase(b->ref);
        proposer_.observe(*b);
    }
    wanted.insert(wanted.end(), res.missing.begin(), res.missing.end());
}

void Replica::run_commit_pipeline() {
    auto fresh = extend_commit_sequence(view_, commit_, committer_cfg_);
    new_commits_.insert(new_commits_.end(), fresh.begin(), fresh.end());
    new_marks_.insert(new_marks_.end(), fresh.begin(), fresh.end());
}

void Replica::write_commit_marks() {
    // Lazily logged after the triggering step's outputs are produced.
    for (const auto& e : new_marks_) {
        auto it = commit_.decisions.find(e.anchor_slot);
        if (it == commit_.decisions.end() || it->second.status.block != e.block) continue;
        log(WalRecord{WalRecordKind::commit_mark, nullptr, e.anchor_slot, e.block});
    }
    new_marks_.clear();
}

void Replica::propose(SimTime now, std::vector<Outbound>& out) {
    while (auto block = proposer_.on_block_or_tick(view_, now)) {
        auto ptr = std::make_shared<const Block>(std::move(*block));
        log(WalRecord{WalRecordKind::own_block, ptr, {}, {}});
        auto res = view_.insert(ptr);
        for (const auto& b : res.added) proposer_.observe(*b);
        broadcast(BlockMsg{ptr}, out);
        run_commit_pipeline();
    }
}

std::vector<Outbound> Replica::start(SimTime now) {
    std::vector<Outbound> out;
    last_now_ = now;
    run_commit_pipeline();
    propose(now, out);
    write_commit_marks();
    return out;
}

std::vector<Outbound> Replica::handle_message(ReplicaId from, const PeerMessage& msg, SimTime now) {
    std::vector<Outbound> out;
    last_now_ = std::max(last_now_, now);
    std::vector<BlockRef> wanted;
    const std::size_t size_before = view_.size();

    std::visit(overloaded{
                   [&](const BlockMsg& m) { accept_block(m.block, wanted); },
                   [&](const FetchRequest& m) {
                       FetchResponse resp;
                       for (const auto& ref : m.refs) {
                           if (ref.author >= cfg_.schedule.n || ref.round == 0) continue;
                           if (view_.contains(ref)) resp.blocks.push_back(view_.get(ref));
                       }
                       out.push_back({from, std::move(resp)});
                   },
                   [&](const FetchResponse& m) {
                       for (const auto& b : m.blocks) accept_block(b, wanted);
                   },
                   [&](const TxSubmit& m) {
                       if (proposer_.submit_transaction(m.tx) == SubmitResult::queue_full) ++counters_.rejected_txs;
                   },
               },
               msg);

    if (!wanted.empty()) request(from, std::move(wanted), now, out);
    if (view_.size() != size_before) run_commit_pipeline();
    propose(now, out);
    write_commit_marks();
    return out;
}

std::vector<Outbound> Replica::on_tick(SimTime now) {
    std::vector<Outbound> out;
    last_now_ = std::max(last_now_, now);

    std::vector<BlockRef> due;
    for (auto it = fetches_.begin(); it != fetches_.end();) {
        if (view_.contains(it->first) || view_.is_pending(it->first)) {
            it = fetches_.erase(it);
            continue;
        }
        if (it->second.next_retry <= now) {
            due.push_back(it->first);
            ++it->second.attempts;
            it->second.next_retry = now + cfg_.fetch_retry_interval();
        }
        ++it;
    }
    if (!due.empty()) {
        // The original source may have crashed; ask everyone.
        ++counters_.fetch_retries;
        broadcast(FetchRequest{std::move(due)}, out);
    }

    propose(now, out);
    write_commit_marks();
    return out;
}

std::optional<SimTime> Replica::next_wakeup() const {
    std::optional<SimTime> wake;
    if (auto d = proposer_.deadline(); d && *d > last_now_) wake = *d;
    for (const auto& [ref, st] : fetches_) {
        const SimTime t = std::max(st.next_retry, last_now_ + 1);
        if (!wake || t < *wake) wake = t;
    }
    return wake;
}

}  // namespace nemo
