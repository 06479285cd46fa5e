#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nemo/harness.hpp"

namespace {

struct RunArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::vector<std::string> crashes;
    std::vector<std::string> recoveries;
    std::vector<std::string> sets;
    bool random_quorum = false;
    bool quiet = false;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_override(CLI::App* app, RunArgs& args, const std::string& flag, const std::string& key,
                  const std::string& help) {
    app->add_option_function<std::string>(
        flag, [&args, key](const std::string& v) { args.overrides.emplace_back(key, v); }, help);
}

int run(RunArgs& args) {
    nemo::Scenario scenario;
    try {
        scenario = nemo::load_scenario(args.scenario);
        for (const auto& [k, v] : args.overrides) scenario.set(k, v);
        if (args.seed) scenario.seed = *args.seed;
        if (!args.crashes.empty()) {
            scenario.crashes.clear();
            for (const auto& c : args.crashes) scenario.crashes.push_back(nemo::parse_fault_event(c));
        }
        if (!args.recoveries.empty()) {
            scenario.recoveries.clear();
            for (const auto& r : args.recoveries) scenario.recoveries.push_back(nemo::parse_fault_event(r));
        }
        if (args.random_quorum) scenario.random_quorum = true;
        for (const auto& kv : args.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw nemo::ConfigError("--set expects key=value, got '" + kv + "'");
            scenario.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        scenario.to_sim_config();
    } catch (const nemo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    nemo::ScenarioResult result;
    try {
        result = nemo::run_scenario(scenario);
        nemo::write_reports(args.out, result, scenario);
    } catch (const nemo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    const auto& m = result.metrics;
    if (!args.quiet) {
        std::cout << "seed " << scenario.seed << ", n=" << scenario.replicas << ", " << scenario.net << ", "
                  << result.trace.commits.size() << " commit records\n";
        std::cout << "throughput " << m.throughput << " tx/s";
        if (m.latency_p50_ms) std::cout << ", latency p50 " << *m.latency_p50_ms << " ms, p99 " << *m.latency_p99_ms << " ms";
        std::cout << "\ntimeout fires " << m.timeout_fires << ", messages " << m.messages_sent << ", max commit gap "
                  << m.max_commit_gap_ms << " ms\n";
        std::cout << "reports in " << args.out << '\n';
    }
    if (!result.verdict.ok()) {
        std::cerr << "oracle failure: " << result.verdict.violations.size() << " violation(s)\n";
        for (std::size_t i = 0; i < result.verdict.violations.size() && i < 10; ++i) {
            const auto& v = result.verdict.violations[i];
            std::cerr << "  " << v.property << " replica " << v.replica << "/" << v.other << " at " << v.position << ": "
                      << v.detail << '\n';
        }
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DAG atomic broadcast simulator"};
    app.require_subcommand(1);

    RunArgs args;
    auto* cmd = app.add_subcommand("run", "Run one scenario and write trace, metrics and summary");
    cmd->add_option("--scenario", args.scenario, "Scenario file (key = value lines)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "Random seed");
    cmd->add_option("--out", args.out, "Output directory");
    add_override(cmd, args, "--replicas", "replicas", "Number of replicas (odd)");
    add_override(cmd, args, "--leaders-per-round", "leaders_per_round", "Skeleton slots per round");
    add_override(cmd, args, "--net", "net", "sync, psync or random");
    add_override(cmd, args, "--delay", "delay_ms", "Per-link delay or mean delay, ms");
    add_override(cmd, args, "--gst", "gst_ms", "Global stabilization time, ms");
    add_override(cmd, args, "--delta", "delta_ms", "Post-GST delay bound, ms");
    add_override(cmd, args, "--tx-rate", "tx_rate", "Offered load, transactions per second");
    add_override(cmd, args, "--tx-size", "tx_size", "Transaction body bytes");
    add_override(cmd, args, "--batch-cap", "batch_cap", "Transactions per block at most");
    add_override(cmd, args, "--timeout", "timeout_ms", "Round timeout, ms");
    add_override(cmd, args, "--horizon", "horizon_ms", "Simulated duration, ms");
    add_override(cmd, args, "--inject-fault", "inject_fault", "none, weak-quorum or early-anchor (negative tests)");
    cmd->add_option("--crash", args.crashes, "Crash replica id at time ms, as id@ms");
    cmd->add_option("--recover", args.recoveries, "Recover replica id at time ms, as id@ms");
    cmd->add_flag("--random-quorum", args.random_quorum, "Wait for a designated random quorum each round");
    cmd->add_option("--set", args.sets, "Any scenario key, as key=value");
    cmd->add_flag("--quiet", args.quiet, "No summary on stdout");

    int code = 0;
    cmd->callback([&] { code = run(args); });
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    return code;
}
