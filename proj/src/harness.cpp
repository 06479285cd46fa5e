#include "nemo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace nemo {

namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t' || c == ';') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad number for '" + key + "': '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError("bad integer for '" + key + "': '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad boolean for '" + key + "': '" + v + "'");
}

double non_negative(const std::string& key, double d) {
    if (d < 0) throw ConfigError("'" + key + "' must be non-negative");
    return d;
}

SimTime micros(double ms) { return static_cast<SimTime>(std::llround(ms * 1000.0)); }

std::string number_text(double d) {
    if (d == std::floor(d) && std::fabs(d) < 1e15) return std::to_string(static_cast<long long>(d));
    std::ostringstream os;
    os.precision(9);
    os << d;
    return os.str();
}

std::string events_text(const std::vector<FaultEvent>& evs) {
    std::string out;
    for (const auto& e : evs) {
        if (!out.empty()) out += ",";
        out += std::to_string(e.replica) + "@" + number_text(static_cast<double>(e.at) / 1000.0);
    }
    return out;
}

}  // namespace

FaultEvent parse_fault_event(const std::string& text) {
    const auto at = text.find('@');
    if (at == std::string::npos) throw ConfigError("fault event must look like id@ms, got '" + text + "'");
    FaultEvent ev;
    const auto id = to_u64("replica id", text.substr(0, at));
    if (id > 0xffff) throw ConfigError("replica id too large in '" + text + "'");
    ev.replica = static_cast<ReplicaId>(id);
    ev.at = micros(non_negative("fault time", to_double("fault time", text.substr(at + 1))));
    return ev;
}

void Scenario::set(const std::string& key_in, const std::string& value_in) {
    const std::string key = trim(key_in);
    const std::string v = trim(value_in);
    auto num = [&] { return non_negative(key, to_double(key, v)); };
    auto count = [&] { return static_cast<std::size_t>(to_u64(key, v)); };

    if (key == "replicas") {
        replicas = count();
    } else if (key == "leaders_per_round") {
        leaders_per_round = static_cast<std::uint32_t>(to_u64(key, v));
    } else if (key == "net") {
        if (v != "sync" && v != "psync" && v != "random") throw ConfigError("net must be sync, psync or random");
        net = v;
    } else if (key == "delay_ms") {
        delay_ms = num();
    } else if (key == "delay_matrix_ms") {
        delay_matrix_ms.clear();
        for (const auto& item : split_list(v)) delay_matrix_ms.push_back(non_negative(key, to_double(key, item)));
    } else if (key == "gst_ms") {
        gst_ms = num();
    } else if (key == "delta_ms") {
        delta_ms = num();
    } else if (key == "pre_gst_mean_ms") {
        pre_gst_mean_ms = num();
    } else if (key == "slow_replica") {
        if (v == "none" || v.empty()) {
            slow_replica.reset();
        } else {
            slow_replica = static_cast<ReplicaId>(to_u64(key, v));
        }
    } else if (key == "slow_delay_ms") {
        slow_delay_ms = num();
    } else if (key == "crash") {
        crashes.clear();
        for (const auto& item : split_list(v)) crashes.push_back(parse_fault_event(item));
    } else if (key == "recover") {
        recoveries.clear();
        for (const auto& item : split_list(v)) recoveries.push_back(parse_fault_event(item));
    } else if (key == "tx_rate") {
        tx_rate = num();
    } else if (key == "tx_size") {
        tx_size = count();
    } else if (key == "tx_start_ms") {
        tx_start_ms = num();
    } else if (key == "tx_stop_ms") {
        if (v == "none" || v.empty()) {
            tx_stop_ms.reset();
        } else {
            tx_stop_ms = num();
        }
    } else if (key == "batch_cap") {
        batch_cap = count();
    } else if (key == "queue_cap") {
        queue_cap = count();
    } else if (key == "timeout_ms") {
        timeout_ms = num();
    } else if (key == "horizon_ms") {
        horizon_ms = num();
    } else if (key == "random_quorum") {
        random_quorum = to_bool(key, v);
    } else if (key == "require_skeletons") {
        require_skeletons = to_bool(key, v);
    } else if (key == "seed") {
        seed = to_u64(key, v);
    } else if (key == "inject_fault") {
        try {
            inject_fault = parse_injected_fault(v);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "sample_ms") {
        sample_ms = num();
    } else if (key == "measure_from_ms") {
        if (v == "auto" || v.empty()) {
            measure_from_ms.reset();
        } else {
            measure_from_ms = num();
        }
    } else if (key == "tear_wal") {
        tear_wal = to_bool(key, v);
    } else if (key == "audit") {
        audit = to_bool(key, v);
    } else if (key == "audit_stride") {
        audit_stride = count();
    } else {
        throw ConfigError("unknown scenario key '" + key + "'");
    }
}

std::map<std::string, std::string> Scenario::entries() const {
    std::map<std::string, std::string> e;
    e["replicas"] = std::to_string(replicas);
    e["leaders_per_round"] = std::to_string(leaders_per_round);
    e["net"] = net;
    e["delay_ms"] = number_text(delay_ms);
    if (!delay_matrix_ms.empty()) {
        std::string m;
        for (auto d : delay_matrix_ms) m += (m.empty() ? "" : ",") + number_text(d);
        e["delay_matrix_ms"] = m;
    }
    e["gst_ms"] = number_text(gst_ms);
    e["delta_ms"] = number_text(delta_ms);
    e["pre_gst_mean_ms"] = number_text(pre_gst_mean_ms);
    e["slow_replica"] = slow_replica ? std::to_string(*slow_replica) : "none";
    e["slow_delay_ms"] = number_text(slow_delay_ms);
    e["crash"] = events_text(crashes);
    e["recover"] = events_text(recoveries);
    e["tx_rate"] = number_text(tx_rate);
    e["tx_size"] = std::to_string(tx_size);
    e["tx_start_ms"] = number_text(tx_start_ms);
    e["tx_stop_ms"] = tx_stop_ms ? number_text(*tx_stop_ms) : "none";
    e["batch_cap"] = std::to_string(batch_cap);
    e["queue_cap"] = std::to_string(queue_cap);
    e["timeout_ms"] = number_text(timeout_ms);
    e["horizon_ms"] = number_text(horizon_ms);
    e["random_quorum"] = random_quorum ? "true" : "false";
    e["require_skeletons"] = require_skeletons ? "true" : "false";
    e["seed"] = std::to_string(seed);
    e["inject_fault"] = to_string(inject_fault);
    e["sample_ms"] = number_text(sample_ms);
    e["measure_from_ms"] = measure_from_ms ? number_text(*measure_from_ms) : "auto";
    e["tear_wal"] = tear_wal ? "true" : "false";
    e["audit"] = audit ? "true" : "false";
    e["audit_stride"] = std::to_string(audit_stride);
    return e;
}

SimConfig Scenario::to_sim_config() const {
    SimConfig c;
    c.schedule = ScheduleConfig{replicas, leaders_per_round};
    try {
        c.schedule.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (timeout_ms <= 0) throw ConfigError("timeout_ms must be positive");
    if (horizon_ms <= 0) throw ConfigError("horizon_ms must be positive");
    if (batch_cap == 0) throw ConfigError("batch_cap must be positive");
    if (sample_ms <= 0) throw ConfigError("sample_ms must be positive");

    c.readiness.mode = random_quorum ? QuorumMode::random_quorum : QuorumMode::first_quorum;
    c.readiness.require_skeletons = require_skeletons;
    c.readiness.timeout = micros(timeout_ms);
    c.readiness.quorum_seed = seed * 0x9e3779b97f4a7c15ULL + 1;
    c.batch_cap = batch_cap;
    c.queue_cap = queue_cap;
    c.fault = inject_fault;

    const std::size_t n = replicas;
    std::vector<std::vector<SimTime>> matrix(n, std::vector<SimTime>(n, micros(delay_ms)));
    if (!delay_matrix_ms.empty()) {
        if (delay_matrix_ms.size() != n * n) {
            throw ConfigError("delay_matrix_ms needs " + std::to_string(n * n) + " values");
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) matrix[i][j] = micros(delay_matrix_ms[i * n + j]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) matrix[i][i] = 0;

    if (net == "sync") {
        c.net = SynchronousNet{matrix};
    } else if (net == "random") {
        c.net = RandomAsyncNet{matrix};
    } else {
        if (delta_ms <= 0) throw ConfigError("delta_ms must be positive");
        if (pre_gst_mean_ms <= 0) throw ConfigError("pre_gst_mean_ms must be positive");
        c.net = PartialSynchronyNet{micros(gst_ms), micros(delta_ms), micros(pre_gst_mean_ms)};
    }
    try {
        if (slow_replica) slow_down(c.net, *slow_replica, micros(slow_delay_ms));
        c.faults.crashes = crashes;
        c.faults.recoveries = recoveries;
        c.faults.validate(n);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    c.workload.tx_rate = tx_rate;
    c.workload.tx_size = tx_size;
    c.workload.start = micros(tx_start_ms);
    if (tx_stop_ms) c.workload.stop = micros(*tx_stop_ms);
    c.horizon = micros(horizon_ms);
    c.seed = seed;
    c.keep_views = true;
    c.tear_wal_on_crash = tear_wal;
    return c;
}

Scenario parse_scenario(std::istream& in) {
    Scenario s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        try {
            s.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    return parse_scenario(in);
}

std::uint64_t Histogram::total() const {
    std::uint64_t t = 0;
    for (const auto& [bin, c] : bins) t += c;
    return t;
}

double Histogram::fraction(std::uint32_t bin) const {
    const auto t = total();
    if (t == 0) return 0.0;
    auto it = bins.find(bin);
    return it == bins.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(t);
}

namespace {

double percentile(std::vector<double> sorted, double q) {
    // Nearest-rank on an ascending vector.
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::min(sorted.size() - 1, rank == 0 ? 0 : rank - 1)];
}

std::optional<SimTime> tx_commit_time(const TxRecord& t) {
    return t.committed_local ? t.committed_local : t.committed_first;
}

double rate(std::uint64_t count, SimTime from, SimTime to) {
    if (to <= from) return 0.0;
    return static_cast<double>(count) * 1e6 / static_cast<double>(to - from);
}

}  // namespace

Metrics compute_metrics(const SimTrace& trace, const Scenario& scenario) {
    Metrics m;
    const SimTime horizon = trace.horizon;
    const SimTime start = micros(scenario.measure_from_ms.value_or(scenario.horizon_ms * 0.1));
    const SimTime end = std::min(horizon, scenario.tx_stop_ms ? micros(*scenario.tx_stop_ms) : horizon);
    m.window_start_ms = static_cast<double>(start) / 1000.0;
    m.window_end_ms = static_cast<double>(end) / 1000.0;

    auto committed_between = [&](SimTime a, SimTime b) {
        std::uint64_t c = 0;
        for (const auto& t : trace.txs) {
            auto at = tx_commit_time(t);
            if (at && *at >= a && *at < b) ++c;
        }
        return c;
    };
    m.committed_txs = committed_between(start, end);
    m.throughput = rate(m.committed_txs, start, end);

    std::vector<double> lat;
    for (const auto& t : trace.txs) {
        if (t.submitted < start || t.submitted >= end) continue;
        if (auto at = tx_commit_time(t)) lat.push_back(static_cast<double>(*at - t.submitted) / 1000.0);
    }
    if (!lat.empty()) {
        std::sort(lat.begin(), lat.end());
        m.latency_p50_ms = percentile(lat, 0.50);
        m.latency_p99_ms = percentile(lat, 0.99);
        m.latency_mean_ms = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
    }

    for (const auto& c : trace.commits) ++m.hops.bins[c.hops];

    const ScheduleConfig sched{trace.n, scenario.leaders_per_round};
    for (std::size_t i = 0; i < trace.replicas.size(); ++i) {
        const auto& rt = trace.replicas[i];
        for (const auto& inc : rt.incarnations) m.timeout_fires += inc.timeout_fires;
        m.duplicate_commits += rt.duplicate_txs;
        if (rt.ever_crashed || rt.incarnations.empty()) continue;

        const auto& inc = rt.incarnations.back();
        for (const auto& [slot, rec] : inc.decisions) {
            ++m.decided_slots;
            if (rec.status.is_skip()) {
                ++m.skips;
            } else if (rec.status.rule == DecisionRule::direct) {
                ++m.direct_commits;
            } else {
                ++m.indirect_commits;
            }
        }

        if (!inc.view) continue;
        std::map<BlockRef, std::uint32_t> hops_of;
        for (const auto& c : trace.commits) {
            if (c.replica == i) hops_of.emplace(c.block, c.hops);
        }
        const Round top = inc.view->highest_round();
        for (Round r = 1; r + 2 <= top; ++r) {
            for (std::uint32_t k = 0; k < sched.leaders_per_round; ++k) {
                const BlockRef leader{leader_of(sched, {r, k}), r};
                ++m.skeleton_blocks;
                auto it = hops_of.find(leader);
                const std::uint32_t h = it == hops_of.end() ? 0 : it->second;
                ++m.skeleton_hops.bins[h];
                if (h == 2) ++m.skeleton_two_hop;
            }
        }
    }

    m.messages_sent = trace.messages_sent;
    m.messages_by_type = trace.messages_by_type;
    m.in_flight_at_horizon = trace.in_flight_at_horizon;

    // Commit gaps on replicas that never crashed.
    const SimTime limit = 2 * micros(scenario.timeout_ms);
    m.gap_limit_ms = static_cast<double>(limit) / 1000.0;
    std::optional<SimTime> first_crash;
    for (const auto& c : scenario.crashes) {
        if (!first_crash || c.at < *first_crash) first_crash = c.at;
    }
    const SimTime gap_from = first_crash.value_or(start);
    std::vector<SimTime> times;
    for (const auto& c : trace.commits) {
        if (trace.replicas[c.replica].ever_crashed) continue;
        if (c.time >= gap_from && c.time <= end) times.push_back(c.time);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (gap_from < end) {
        SimTime prev = gap_from;
        SimTime worst = 0;
        for (auto t : times) {
            const SimTime g = t - prev;
            worst = std::max(worst, g);
            if (g > limit) ++m.gaps_over_limit;
            prev = t;
        }
        const SimTime tail = end - prev;
        worst = std::max(worst, tail);
        if (tail > limit) ++m.gaps_over_limit;
        m.max_commit_gap_ms = static_cast<double>(worst) / 1000.0;
    }

    if (first_crash) {
        m.crash_at_ms = static_cast<double>(*first_crash) / 1000.0;
        const SimTime settle = *first_crash + 4 * micros(scenario.timeout_ms);
        if (*first_crash > start) m.throughput_pre_crash = rate(committed_between(start, *first_crash), start, *first_crash);
        if (settle < end) m.throughput_post_crash = rate(committed_between(settle, end), settle, end);
    }

    for (const auto& t : trace.txs) {
        if (!t.accepted) continue;
        ++m.tx_accepted;
        bool everywhere = true;
        for (const auto& rt : trace.replicas) {
            if (rt.ever_crashed) continue;
            if (!rt.committed_txs.count(t.key)) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) ++m.tx_committed_everywhere;
    }
    return m;
}

OracleVerdict run_oracles(const SimTrace& trace, const ScheduleConfig& schedule, OracleOptions opts) {
    OracleVerdict v;
    auto outputs = collect_outputs(trace, v);
    v.merge(check_safety(outputs, trace.emitted));
    v.merge(check_validity_rules(trace));
    if (opts.audit) v.merge(audit_decisions(trace, schedule, opts.audit_stride));
    return v;
}

ScenarioResult run_scenario(const Scenario& scenario) {
    const SimConfig cfg = scenario.to_sim_config();
    ScenarioResult r;
    r.trace = run_simulation(cfg);
    r.metrics = compute_metrics(r.trace, scenario);
    r.verdict = run_oracles(r.trace, cfg.schedule, {scenario.audit, scenario.audit_stride});
    return r;
}

namespace {

ordered_json config_json(const Scenario& s) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : s.entries()) j[k] = v;
    return j;
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json histogram_json(const Histogram& h) {
    ordered_json j = ordered_json::object();
    for (const auto& [bin, c] : h.bins) j[std::to_string(bin)] = c;
    return j;
}

ordered_json metrics_json(const Metrics& m) {
    ordered_json j;
    j["window_start_ms"] = m.window_start_ms;
    j["window_end_ms"] = m.window_end_ms;
    j["committed_txs"] = m.committed_txs;
    j["throughput_tx_per_s"] = m.throughput;
    j["latency_p50_ms"] = optional_json(m.latency_p50_ms);
    j["latency_p99_ms"] = optional_json(m.latency_p99_ms);
    j["latency_mean_ms"] = optional_json(m.latency_mean_ms);
    j["hop_histogram"] = histogram_json(m.hops);
    j["skeleton_hop_histogram"] = histogram_json(m.skeleton_hops);
    j["skeleton_blocks"] = m.skeleton_blocks;
    j["skeleton_two_hop"] = m.skeleton_two_hop;
    j["timeout_fires"] = m.timeout_fires;
    j["messages_sent"] = m.messages_sent;
    ordered_json by_type = ordered_json::object();
    for (const auto& [k, v] : m.messages_by_type) by_type[k] = v;
    j["messages_by_type"] = by_type;
    j["decided_slots"] = m.decided_slots;
    j["direct_commits"] = m.direct_commits;
    j["indirect_commits"] = m.indirect_commits;
    j["skips"] = m.skips;
    j["direct_fraction"] = m.direct_fraction();
    j["max_commit_gap_ms"] = m.max_commit_gap_ms;
    j["gap_limit_ms"] = m.gap_limit_ms;
    j["gaps_over_limit"] = m.gaps_over_limit;
    j["crash_at_ms"] = optional_json(m.crash_at_ms);
    j["throughput_pre_crash"] = optional_json(m.throughput_pre_crash);
    j["throughput_post_crash"] = optional_json(m.throughput_post_crash);
    j["tx_accepted"] = m.tx_accepted;
    j["tx_committed_everywhere"] = m.tx_committed_everywhere;
    j["duplicate_commits"] = m.duplicate_commits;
    j["in_flight_at_horizon"] = m.in_flight_at_horizon;
    return j;
}

ordered_json verdict_json(const OracleVerdict& v) {
    ordered_json j;
    j["ok"] = v.ok();
    ordered_json props = ordered_json::object();
    for (const auto& [k, ok] : v.properties) props[k] = ok;
    j["properties"] = props;
    ordered_json list = ordered_json::array();
    for (std::size_t i = 0; i < v.violations.size() && i < 50; ++i) {
        const auto& x = v.violations[i];
        list.push_back({{"property", x.property},
                        {"replica", x.replica},
                        {"other", x.other},
                        {"position", x.position},
                        {"detail", x.detail}});
    }
    j["violations"] = list;
    j["violation_count"] = v.violations.size();
    return j;
}

ordered_json header(const char* type, const Scenario& s) {
    ordered_json j;
    j["type"] = type;
    j["seed"] = s.seed;
    j["config"] = config_json(s);
    return j;
}

}  // namespace

void write_trace(std::ostream& out, const ScenarioResult& result, const Scenario& scenario) {
    out << header("run", scenario).dump() << '\n';
    for (const auto& c : result.trace.commits) {
        ordered_json j;
        j["type"] = "commit";
        j["t_us"] = c.time;
        j["replica"] = c.replica;
        j["incarnation"] = c.incarnation;
        j["position"] = c.position;
        j["author"] = c.block.author;
        j["round"] = c.block.round;
        j["slot_round"] = c.slot.round;
        j["slot_rank"] = c.slot.rank;
        j["hops"] = c.hops;
        j["txs"] = c.txs;
        out << j.dump() << '\n';
    }

    std::vector<SimTime> commit_times;
    for (const auto& t : result.trace.txs) {
        if (auto at = tx_commit_time(t)) commit_times.push_back(*at);
    }
    std::sort(commit_times.begin(), commit_times.end());
    const SimTime step = std::max<SimTime>(1, micros(scenario.sample_ms));
    std::size_t idx = 0;
    std::uint64_t total = 0;
    for (SimTime t = step; t <= result.trace.horizon; t += step) {
        std::uint64_t in_step = 0;
        while (idx < commit_times.size() && commit_times[idx] < t) {
            ++idx;
            ++in_step;
        }
        total += in_step;
        ordered_json j;
        j["type"] = "sample";
        j["t_us"] = t;
        j["committed_txs"] = total;
        j["throughput_tx_per_s"] = rate(in_step, t - step, t);
        out << j.dump() << '\n';
    }
}

void write_metrics(std::ostream& out, const ScenarioResult& result, const Scenario& scenario) {
    out << header("run", scenario).dump() << '\n';
    const auto all = metrics_json(result.metrics);
    for (const auto& [name, value] : all.items()) {
        ordered_json j;
        j["type"] = "metric";
        j["name"] = name;
        j["value"] = value;
        out << j.dump() << '\n';
    }
}

void write_summary(std::ostream& out, const ScenarioResult& result, const Scenario& scenario) {
    ordered_json j;
    j["seed"] = scenario.seed;
    j["config"] = config_json(scenario);
    j["net"] = net_name(scenario.to_sim_config().net);
    j["metrics"] = metrics_json(result.metrics);
    j["oracle"] = verdict_json(result.verdict);
    out << j.dump(2) << '\n';
}

void write_reports(const std::filesystem::path& dir, const ScenarioResult& result, const Scenario& scenario) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("trace.jsonl");
        write_trace(f, result, scenario);
    }
    {
        auto f = open("metrics.jsonl");
        write_metrics(f, result, scenario);
    }
    {
        auto f = open("summary.json");
        write_summary(f, result, scenario);
    }
}

}  // namespace nemo
