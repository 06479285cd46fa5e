#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "nemo/committer.hpp"
#include "nemo/dag_store.hpp"
#include "nemo/proposer.hpp"
#include "nemo/replica.hpp"

namespace nemo {

// Seeded randomness with portable draws (the standard distributions are
// implementation-defined, which would break cross-platform replay).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    // Uniform in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

private:
    std::mt19937_64 engine_;
};

struct SynchronousNet {
    std::vector<std::vector<SimTime>> delay;  // [src][dst]
};

struct PartialSynchronyNet {
    SimTime gst = 0;
    SimTime delta = 50 * kMillis;
    SimTime pre_gst_mean = 500 * kMillis;  // exponential before GST
};

struct RandomAsyncNet {
    std::vector<std::vector<SimTime>> mean;  // exponential mean per [src][dst]
};

using NetModel = std::variant<SynchronousNet, PartialSynchronyNet, RandomAsyncNet>;

const char* net_name(const NetModel& net);

NetModel uniform_sync(std::size_t n, SimTime delay);
NetModel uniform_random(std::size_t n, SimTime mean);
// Every link touching `slow` gets `slow_delay` (sync) or that mean (random).
void slow_down(NetModel& net, ReplicaId slow, SimTime slow_delay);

// Delay for one message sent at `now`. Loopback is free.
SimTime sample_delay(const NetModel& net, ReplicaId src, ReplicaId dst, SimTime now, Rng& rng);

struct FaultEvent {
    ReplicaId replica = 0;
    SimTime at = 0;
};

struct FaultPlan {
    std::vector<FaultEvent> crashes;
    std::vector<FaultEvent> recoveries;  // each must follow a crash of the same replica

    // Throws Error if more than f replicas crash, a replica crashes twice, or a
    // recovery has no earlier crash.
    void validate(std::size_t n) const;
};

struct Workload {
    double tx_rate = 1000.0;     // transactions per simulated second, all clients together
    std::size_t tx_size = 18;    // body bytes
    SimTime start = 0;
    std::optional<SimTime> stop;  // defaults to the horizon
    SimTime retry_after = 10 * kMillis;
};

struct SimConfig {
    ScheduleConfig schedule{3, 1};
    ReadinessRule readiness;
    std::size_t batch_cap = 1000;
    std::size_t queue_cap = 1'000'000;
    InjectedFault fault = InjectedFault::none;
    NetModel net = uniform_sync(3, 50 * kMillis);
    FaultPlan faults;
    Workload workload;
    SimTime horizon = 5 * kSeconds;
    std::uint64_t seed = 1;
    // Retain per-incarnation views and decisions for the oracles.
    bool keep_views = true;
    // On each crash, leave half of a record at the WAL tail (a torn write).
    bool tear_wal_on_crash = false;
};

struct CommitRecord {
    ReplicaId replica = 0;
    std::uint32_t incarnation = 0;
    std::uint64_t position = 0;
    BlockRef block;
    SlotId slot;
    SimTime time = 0;
    std::uint32_t hops = 0;
    std::uint32_t txs = 0;
};

struct TxRecord {
    std::uint64_t key = 0;
    ReplicaId target = 0;
    SimTime submitted = 0;
    bool accepted = false;
    std::optional<SimTime> committed_local;  // at the replica it was submitted to
    std::optional<SimTime> committed_first;  // earliest at any replica
};

struct IncarnationTrace {
    std::uint32_t number = 0;
    SimTime started = 0;
    std::optional<SimTime> ended;  // crash time
    std::shared_ptr<const DagView> view;
    std::map<SlotId, DecisionRecord> decisions;
    std::uint64_t timeout_fires = 0;
    std::uint64_t blocks_emitted = 0;
    ReplicaCounters counters;
    Round next_round = 1;
};

struct ReplicaTrace {
    // Delivered sequence with re-deliveries after recovery folded in.
    std::vector<BlockRef> sequence;
    std::vector<SlotId> sequence_slots;
    std::vector<IncarnationTrace> incarnations;
    // Re-delivered positions that differ from what was delivered before.
    std::uint64_t redelivery_conflicts = 0;
    std::uint64_t duplicate_txs = 0;
    std::unordered_set<std::uint64_t> committed_txs;
    // Rounds proposed after a recovery that were already in the log.
    std::uint64_t reproposed_rounds = 0;
    bool crashed_at_end = false;
    bool ever_crashed = false;
};

struct SimTrace {
    std::size_t n = 0;
    std::vector<ReplicaTrace> replicas;
    std::vector<CommitRecord> commits;
    std::vector<TxRecord> txs;
    // Every broadcast own block, by ref; a ref emitted twice with different
    // content counts as an equivocation.
    std::map<BlockRef, BlockPtr> emitted;
    std::uint64_t equivocations = 0;
    std::uint64_t tx_accepted = 0;
    std::uint64_t tx_rejected = 0;
    std::uint64_t tx_lost_in_crash = 0;
    std::map<std::string, std::uint64_t> messages_by_type;
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_dropped_crashed = 0;
    std::uint64_t in_flight_at_horizon = 0;
    std::uint64_t events_processed = 0;
    SimTime horizon = 0;
};

SimTrace run_simulation(const SimConfig& cfg);

}  // namespace nemo
