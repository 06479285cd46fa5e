#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nemo/committer.hpp"
#include "nemo/dag_store.hpp"
#include "nemo/proposer.hpp"
#include "nemo/wal.hpp"
#include "nemo/wire.hpp"

namespace nemo {

class RecoveryMismatch : public Error {
public:
    using Error::Error;
};

struct ReplicaConfig {
    ReplicaId id = 0;
    ScheduleConfig schedule;
    ReadinessRule readiness;
    std::size_t batch_cap = 1000;
    std::size_t queue_cap = 1'000'000;
    InjectedFault fault = InjectedFault::none;
    // Zero means twice the round timeout.
    SimTime fetch_retry = 0;

    SimTime fetch_retry_interval() const { return fetch_retry > 0 ? fetch_retry : 2 * readiness.timeout; }
};

struct Outbound {
    ReplicaId to = 0;
    PeerMessage msg;
};

struct ReplicaCounters {
    std::uint64_t malformed = 0;
    std::uint64_t fetch_requests_sent = 0;
    std::uint64_t fetch_retries = 0;
    std::uint64_t blocks_received = 0;
    std::uint64_t rejected_txs = 0;
};

class Replica {
public:
    Replica(ReplicaConfig cfg, WalSink& wal);

    // Rebuilds state from a WAL image. The DAG comes from the block records,
    // the commit state is recomputed, and CommitMark records are checked
    // against it. Throws CorruptRecord or RecoveryMismatch.
    static std::unique_ptr<Replica> recover(ReplicaConfig cfg, std::span<const std::uint8_t> wal_bytes, WalSink& wal);

    // First readiness check; proposes round 1 right away.
    std::vector<Outbound> start(SimTime now);
    std::vector<Outbound> handle_message(ReplicaId from, const PeerMessage& msg, SimTime now);
    std::vector<Outbound> on_tick(SimTime now);
    // Earliest time on_tick has work to do.
    std::optional<SimTime> next_wakeup() const;

    SubmitResult submit(Transaction tx) { return proposer_.submit_transaction(std::move(tx)); }

    // Commits produced since the last call, in sequence order.
    std::vector<CommitEntry> take_new_commits() { return std::exchange(new_commits_, {}); }

    ReplicaId id() const { return cfg_.id; }
    const ReplicaConfig& config() const { return cfg_; }
    const DagView& view() const { return view_; }
    const CommitState& commits() const { return commit_; }
    const Proposer& proposer() const { return proposer_; }
    const ReplicaCounters& counters() const { return counters_; }
    std::size_t outstanding_fetches() const { return fetches_.size(); }
    std::deque<Transaction> drop_pending() { return proposer_.take_pending(); }

private:
    struct FetchState {
        SimTime next_retry = 0;
        unsigned attempts = 0;
    };

    void accept_block(const BlockPtr& block, std::vector<BlockRef>& wanted);
    void run_commit_pipeline();
    void write_commit_marks();
    void propose(SimTime now, std::vector<Outbound>& out);
    void request(ReplicaId to, std::vector<BlockRef> refs, SimTime now, std::vector<Outbound>& out);
    void broadcast(const PeerMessage& msg, std::vector<Outbound>& out) const;
    void log(const WalRecord& rec);

    ReplicaConfig cfg_;
    CommitterConfig committer_cfg_;
    WalSink& wal_;
    DagView view_;
    CommitState commit_;
    Proposer proposer_;
    std::map<BlockRef, FetchState> fetches_;
    std::vector<CommitEntry> new_commits_;
    std::vector<CommitEntry> new_marks_;
    SimTime last_now_ = -1;
    ReplicaCounters counters_;
};

}  // namespace nemo
