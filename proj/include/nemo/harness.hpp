#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nemo/netsim.hpp"
#include "nemo/oracle.hpp"

namespace nemo {

class ConfigError : public Error {
public:
    using Error::Error;
};

// Flat key/value scenario description. Durations are in milliseconds.
struct Scenario {
    std::size_t replicas = 3;
    std::uint32_t leaders_per_round = 1;
    std::string net = "sync";
    double delay_ms = 50;
    // Optional per-link override, row-major n*n values.
    std::vector<double> delay_matrix_ms;
    double gst_ms = 0;
    double delta_ms = 50;
    double pre_gst_mean_ms = 500;
    std::optional<ReplicaId> slow_replica;
    double slow_delay_ms = 1000;
    std::vector<FaultEvent> crashes;
    std::vector<FaultEvent> recoveries;
    double tx_rate = 1000;
    std::size_t tx_size = 18;
    double tx_start_ms = 0;
    std::optional<double> tx_stop_ms;
    std::size_t batch_cap = 1000;
    std::size_t queue_cap = 1'000'000;
    double timeout_ms = 500;
    double horizon_ms = 5000;
    bool random_quorum = false;
    bool require_skeletons = true;
    std::uint64_t seed = 1;
    InjectedFault inject_fault = InjectedFault::none;
    double sample_ms = 100;
    std::optional<double> measure_from_ms;  // defaults to 10% of the horizon
    bool tear_wal = false;
    bool audit = true;
    std::size_t audit_stride = 1;

    // Throws ConfigError on an unknown key or a malformed value.
    void set(const std::string& key, const std::string& value);
    // Canonical key/value listing, one per line, sorted by key.
    std::map<std::string, std::string> entries() const;

    SimConfig to_sim_config() const;
};

// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

// Parses "id@ms" (e.g. "2@25000").
FaultEvent parse_fault_event(const std::string& text);

struct Histogram {
    std::map<std::uint32_t, std::uint64_t> bins;
    std::uint64_t total() const;
    double fraction(std::uint32_t bin) const;
};

struct Metrics {
    double window_start_ms = 0;
    double window_end_ms = 0;
    std::uint64_t committed_txs = 0;       // distinct, inside the window
    double throughput = 0;                 // committed transactions per simulated second
    std::optional<double> latency_p50_ms;  // unset when nothing committed
    std::optional<double> latency_p99_ms;
    std::optional<double> latency_mean_ms;
    Histogram hops;           // all commits, all replicas
    Histogram skeleton_hops;  // leader blocks committed by their own slot or later
    std::uint64_t skeleton_blocks = 0;           // eligible skeleton slots (final two rounds excluded)
    std::uint64_t skeleton_two_hop = 0;          // of those, committed with hop count 2
    std::uint64_t timeout_fires = 0;
    std::uint64_t messages_sent = 0;
    std::map<std::string, std::uint64_t> messages_by_type;
    std::uint64_t decided_slots = 0;  // summed over replicas that never crashed
    std::uint64_t direct_commits = 0;
    std::uint64_t indirect_commits = 0;
    std::uint64_t skips = 0;
    // Gaps between consecutive commits on replicas that never crashed,
    // measured from the first crash (or the window start) to the end.
    double max_commit_gap_ms = 0;
    double gap_limit_ms = 0;  // 2x round timeout
    std::uint64_t gaps_over_limit = 0;
    std::optional<double> crash_at_ms;
    std::optional<double> throughput_pre_crash;
    std::optional<double> throughput_post_crash;
    std::uint64_t tx_accepted = 0;
    std::uint64_t tx_committed_everywhere = 0;  // accepted and committed on every surviving replica
    std::uint64_t duplicate_commits = 0;
    std::uint64_t in_flight_at_horizon = 0;

    double direct_fraction() const {
        return decided_slots == 0 ? 0.0 : static_cast<double>(direct_commits) / static_cast<double>(decided_slots);
    }
};

Metrics compute_metrics(const SimTrace& trace, const Scenario& scenario);

struct OracleOptions {
    bool audit = true;
    std::size_t audit_stride = 1;
};

// check_safety, recovery consistency, block rules and (optionally) the
// snapshot decision audit.
OracleVerdict run_oracles(const SimTrace& trace, const ScheduleConfig& schedule, OracleOptions opts);

struct ScenarioResult {
    SimTrace trace;
    Metrics metrics;
    OracleVerdict verdict;
};

ScenarioResult run_scenario(const Scenario& scenario);

// trace.jsonl: one record per commit and per metric sample.
void write_trace(std::ostream& out, const ScenarioResult& result, const Scenario& scenario);
// metrics.jsonl: one record per metric.
void write_metrics(std::ostream& out, const ScenarioResult& result, const Scenario& scenario);
// summary.json: seed, config, metrics and oracle verdict.
void write_summary(std::ostream& out, const ScenarioResult& result, const Scenario& scenario);
void write_reports(const std::filesystem::path& dir, const ScenarioResult& result, const Scenario& scenario);

}  // namespace nemo
