#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nemo/harness.hpp"

namespace nemo {
namespace {

namespace fs = std::filesystem;

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("nemo_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NEMO_CLI) + " run " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string scenario_path(const std::string& name) { return std::string(NEMO_SCENARIOS) + "/" + name; }

TEST(Scenario, ParsesKeysCommentsAndBlanks) {
    const auto s = parse(
        "# comment\n"
        "replicas = 5\n"
        "\n"
        "leaders_per_round=2   # trailing comment\n"
        "net = random\n"
        "crash = 2@25000\n"
        "recover = 2@30000\n"
        "tx_rate = 1500.5\n"
        "random_quorum = true\n"
        "inject_fault = early-anchor\n");
    EXPECT_EQ(s.replicas, 5u);
    EXPECT_EQ(s.leaders_per_round, 2u);
    EXPECT_EQ(s.net, "random");
    ASSERT_EQ(s.crashes.size(), 1u);
    EXPECT_EQ(s.crashes[0].replica, 2);
    EXPECT_EQ(s.crashes[0].at, 25 * kSeconds);
    ASSERT_EQ(s.recoveries.size(), 1u);
    EXPECT_DOUBLE_EQ(s.tx_rate, 1500.5);
    EXPECT_TRUE(s.random_quorum);
    EXPECT_EQ(s.inject_fault, InjectedFault::early_anchor);
}

TEST(Scenario, Defaults) {
    const auto s = parse("");
    EXPECT_EQ(s.replicas, 3u);
    EXPECT_EQ(s.tx_size, 18u);
    EXPECT_EQ(s.inject_fault, InjectedFault::none);
    EXPECT_NO_THROW(s.to_sim_config());
}

TEST(Scenario, RejectsBadInput) {
    EXPECT_THROW(parse("replicas 5\n"), ConfigError);
    EXPECT_THROW(parse("colour = blue\n"), ConfigError);
    EXPECT_THROW(parse("replicas = five\n"), ConfigError);
    EXPECT_THROW(parse("tx_rate = -1\n"), ConfigError);
    EXPECT_THROW(parse("net = lan\n"), ConfigError);
    EXPECT_THROW(parse("random_quorum = maybe\n"), ConfigError);
    EXPECT_THROW(parse("replicas = 4\n").to_sim_config(), ConfigError);
    EXPECT_THROW(parse("replicas = 3\nleaders_per_round = 4\n").to_sim_config(), ConfigError);
    EXPECT_THROW(parse("replicas = 3\ncrash = 0@1,1@2\n").to_sim_config(), ConfigError);
    EXPECT_THROW(parse("delay_matrix_ms = 1,2,3\n").to_sim_config(), ConfigError);
    EXPECT_THROW(load_scenario("/nonexistent/file.cfg"), ConfigError);
}

TEST(Scenario, FaultEventSyntax) {
    const auto e = parse_fault_event("3@1.5");
    EXPECT_EQ(e.replica, 3);
    EXPECT_EQ(e.at, 1500);
    EXPECT_THROW(parse_fault_event("3"), ConfigError);
    EXPECT_THROW(parse_fault_event("x@1"), ConfigError);
    EXPECT_THROW(parse_fault_event("1@-5"), ConfigError);
}

TEST(Scenario, EntriesRoundTrip) {
    auto s = parse("replicas = 7\nnet = psync\ngst_ms = 2500\ncrash = 1@100,2@200\nslow_replica = 3\ntx_stop_ms = 900\n");
    std::ostringstream text;
    for (const auto& [k, v] : s.entries()) text << k << " = " << v << "\n";
    const auto again = parse(text.str());
    EXPECT_EQ(again.entries(), s.entries());
    EXPECT_EQ(again.crashes.size(), 2u);
}

TEST(Scenario, DelayMatrixAndSlowReplica) {
    auto s = parse("replicas = 3\ndelay_matrix_ms = 0,10,20,10,0,30,20,30,0\nslow_replica = 2\nslow_delay_ms = 400\n");
    const auto cfg = s.to_sim_config();
    const auto& m = std::get<SynchronousNet>(cfg.net).delay;
    EXPECT_EQ(m[0][1], 10 * kMillis);
    EXPECT_EQ(m[0][2], 400 * kMillis);
    EXPECT_EQ(m[2][1], 400 * kMillis);
    EXPECT_EQ(m[1][1], 0);
}

Scenario small_sync() {
    auto s = parse("replicas = 3\nnet = sync\ndelay_ms = 50\ntx_rate = 1000\nhorizon_ms = 3000\nseed = 4\n");
    return s;
}

TEST(Metrics, FaultFreeSyncRun) {
    const auto s = small_sync();
    const auto r = run_scenario(s);
    EXPECT_TRUE(r.verdict.ok());
    const auto& m = r.metrics;
    EXPECT_NEAR(m.throughput, 1000, 50);
    ASSERT_TRUE(m.latency_p50_ms);
    EXPECT_LE(*m.latency_p50_ms, *m.latency_p99_ms);
    EXPECT_GT(*m.latency_mean_ms, 0);
    EXPECT_EQ(m.timeout_fires, 0u);
    EXPECT_GT(m.skeleton_blocks, 0u);
    EXPECT_EQ(m.skeleton_two_hop, m.skeleton_blocks);
    EXPECT_DOUBLE_EQ(m.skeleton_hops.fraction(2), 1.0);
    EXPECT_EQ(m.duplicate_commits, 0u);
    EXPECT_EQ(m.messages_sent, r.trace.messages_sent);
    EXPECT_EQ(m.gaps_over_limit, 0u);
    EXPECT_DOUBLE_EQ(m.gap_limit_ms, 1000);
}

TEST(Metrics, EmptyWorkloadHasNoLatency) {
    auto s = small_sync();
    s.tx_rate = 0;
    const auto r = run_scenario(s);
    EXPECT_FALSE(r.metrics.latency_p50_ms);
    EXPECT_EQ(r.metrics.throughput, 0);
    std::ostringstream out;
    write_metrics(out, r, s);
    EXPECT_NE(out.str().find("\"latency_p50_ms\""), std::string::npos);
}

TEST(Metrics, HistogramFractions) {
    Histogram h;
    h.bins = {{2, 3}, {3, 1}};
    EXPECT_EQ(h.total(), 4u);
    EXPECT_DOUBLE_EQ(h.fraction(2), 0.75);
    EXPECT_DOUBLE_EQ(h.fraction(9), 0.0);
    EXPECT_DOUBLE_EQ(Histogram{}.fraction(2), 0.0);
}

TEST(Reports, TraceLinesAreStructured) {
    const auto s = small_sync();
    const auto r = run_scenario(s);
    std::ostringstream out;
    write_trace(out, r, s);
    std::istringstream in(out.str());
    std::string line;
    std::size_t commits = 0, samples = 0, lines = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const auto type = j.at("type").get<std::string>();
        if (lines++ == 0) {
            EXPECT_EQ(type, "run");
            EXPECT_EQ(j.at("seed"), 4);
            EXPECT_EQ(j.at("config").at("replicas"), "3");
        }
        commits += type == "commit";
        samples += type == "sample";
    }
    EXPECT_EQ(commits, r.trace.commits.size());
    EXPECT_GT(samples, 10u);
}

TEST(Reports, SummaryCarriesSeedConfigAndVerdict) {
    const auto s = small_sync();
    const auto r = run_scenario(s);
    std::ostringstream out;
    write_summary(out, r, s);
    const auto j = nlohmann::json::parse(out.str());
    EXPECT_EQ(j.at("seed"), 4);
    EXPECT_TRUE(j.at("oracle").at("ok").get<bool>());
    EXPECT_TRUE(j.at("oracle").at("properties").at("prefix").get<bool>());
    EXPECT_TRUE(j.contains("metrics"));
}

TEST(Reports, ByteIdenticalAcrossRuns) {
    auto s = parse("replicas = 5\nleaders_per_round = 5\nnet = random\ncrash = 1@1000\nrecover = 1@2000\nhorizon_ms = 4000\nseed = 9\n");
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    write_reports(a, run_scenario(s), s);
    write_reports(b, run_scenario(s), s);
    for (const char* f : {"trace.jsonl", "metrics.jsonl", "summary.json"}) {
        const auto x = slurp(a / f);
        EXPECT_FALSE(x.empty()) << f;
        EXPECT_EQ(x, slurp(b / f)) << f;
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, SyncScenarioExitsZeroAndWritesReports) {
    const auto out = scratch("cli_ok");
    EXPECT_EQ(run_cli("--scenario " + scenario_path("sync_3.cfg") + " --seed 7 --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "trace.jsonl"));
    EXPECT_TRUE(fs::exists(out / "metrics.jsonl"));
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_EQ(j.at("seed"), 7);
    fs::remove_all(out);
}

TEST(Cli, FlagsOverrideFile) {
    const auto out = scratch("cli_flags");
    ASSERT_EQ(run_cli("--scenario " + scenario_path("sync_3.cfg") +
                      " --replicas 5 --leaders-per-round 2 --net random --delay 20 --tx-rate 300 --tx-size 8"
                      " --batch-cap 50 --timeout 300 --horizon 1500 --crash 4@700 --random-quorum --out " +
                      out.string()),
              0);
    const auto cfg = nlohmann::json::parse(slurp(out / "summary.json")).at("config");
    EXPECT_EQ(cfg.at("replicas"), "5");
    EXPECT_EQ(cfg.at("leaders_per_round"), "2");
    EXPECT_EQ(cfg.at("net"), "random");
    EXPECT_EQ(cfg.at("delay_ms"), "20");
    EXPECT_EQ(cfg.at("tx_size"), "8");
    EXPECT_EQ(cfg.at("batch_cap"), "50");
    EXPECT_EQ(cfg.at("timeout_ms"), "300");
    EXPECT_EQ(cfg.at("horizon_ms"), "1500");
    EXPECT_EQ(cfg.at("crash"), "4@700");
    EXPECT_EQ(cfg.at("random_quorum"), "true");
    EXPECT_EQ(cfg.at("seed"), "7");
    fs::remove_all(out);
}

TEST(Cli, ConfigErrorsExitOne) {
    const auto out = scratch("cli_bad");
    EXPECT_EQ(run_cli("--scenario /nonexistent.cfg --out " + out.string()), 1);
    EXPECT_EQ(run_cli("--scenario " + scenario_path("sync_3.cfg") + " --replicas 4 --out " + out.string()), 1);
    EXPECT_EQ(run_cli("--scenario " + scenario_path("sync_3.cfg") + " --set colour=blue --out " + out.string()), 1);
    EXPECT_EQ(run_cli("--scenario " + scenario_path("sync_3.cfg") + " --crash nope --out " + out.string()), 1);
    EXPECT_EQ(run_cli("--bogus"), 1);
    fs::remove_all(out);
}

TEST(Cli, InjectedFaultExitsTwo) {
    const auto out = scratch("cli_fault");
    EXPECT_EQ(run_cli("--scenario " + scenario_path("weak_quorum_5.cfg") + " --out " + out.string()), 2);
    const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    EXPECT_FALSE(j.at("oracle").at("ok").get<bool>());
    EXPECT_GT(j.at("oracle").at("violation_count").get<int>(), 0);
    fs::remove_all(out);
}

TEST(Cli, CrashScenarioHasNoLongGaps) {
    const auto out = scratch("cli_crash");
    ASSERT_EQ(run_cli("--scenario " + scenario_path("crash_5.cfg") + " --out " + out.string()), 0);
    const auto m = nlohmann::json::parse(slurp(out / "summary.json")).at("metrics");
    EXPECT_EQ(m.at("gaps_over_limit"), 0);
    EXPECT_LE(m.at("max_commit_gap_ms").get<double>(), m.at("gap_limit_ms").get<double>());
    fs::remove_all(out);
}

}  // namespace
}  // namespace nemo
