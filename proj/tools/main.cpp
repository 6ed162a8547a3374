// semdrift command line: simulate condition grids, analyze transcripts,
// run intervention statistics, fit contraction curves, evaluate channel
// models, and emit reports.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error, 3 partial
// results.

#include <iostream>
#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "semdrift/pipeline.hpp"

namespace {

semdrift::PipelineConfig load_config_or_exit(const std::string& path) {
    try {
        return semdrift::load_pipeline_config(path);
    } catch (const semdrift::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::exit(1);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semdrift: closed-loop multi-agent simulation and semantic "
                 "diversity analytics"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config, sim_out = "out";
    std::string sim_condition;
    bool sim_force = false;
    int sim_workers = 0;
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    auto* simulate = app.add_subcommand(
        "simulate", "Run conditions x replicates and write transcripts");
    simulate->add_option("--config", sim_config, "pipeline config JSON")
        ->required();
    simulate->add_option("--out", sim_out, "output directory");
    simulate->add_option("--condition", sim_condition,
                         "run only this condition");
    simulate->add_option("--seed", sim_seed, "override the config master seed")
        ->each([&](const std::string&) { sim_seed_set = true; });
    simulate->add_flag("--force", sim_force,
                       "overwrite an existing manifest");
    simulate->add_option("--workers", sim_workers,
                         "worker threads (0 = config value)");

    // analyze
    std::string an_config, an_runs = "out", an_out = "out/analysis";
    int an_workers = 0;
    auto* analyze = app.add_subcommand(
        "analyze", "Compute metrics, summaries and plots from transcripts");
    analyze->add_option("--config", an_config, "pipeline config JSON")
        ->required();
    analyze->add_option("--runs", an_runs, "simulate output directory");
    analyze->add_option("--out", an_out, "analysis output directory");
    analyze->add_option("--workers", an_workers,
                        "worker threads (0 = config value)");

    // stats
    std::string st_config, st_analysis = "out/analysis", st_out = "out/stats";
    auto* stats = app.add_subcommand(
        "stats", "Intervention regressions with clustered errors");
    stats->add_option("--config", st_config, "pipeline config JSON")->required();
    stats->add_option("--analysis", st_analysis, "analyze output directory");
    stats->add_option("--out", st_out, "stats output directory");

    // fit
    std::string fit_config, fit_analysis = "out/analysis", fit_out = "out/fit";
    auto* fit = app.add_subcommand(
        "fit", "Saturating-exponential fits and early-window prediction");
    fit->add_option("--config", fit_config, "pipeline config JSON")->required();
    fit->add_option("--analysis", fit_analysis, "analyze output directory");
    fit->add_option("--out", fit_out, "fit output directory");

    // channel
    std::string ch_spec, ch_out = "out/channel";
    int ch_steps = 100;
    auto* channel = app.add_subcommand(
        "channel", "Iterate a discrete channel model and verify its laws");
    channel->add_option("--spec", ch_spec, "channel spec JSON")->required();
    channel->add_option("--steps", ch_steps, "iteration steps");
    channel->add_option("--report", ch_out, "output directory");

    // report
    std::string rp_analysis = "out/analysis", rp_out = "out";
    auto* report = app.add_subcommand("report", "Render a markdown report");
    report->add_option("--analysis", rp_analysis, "analyze output directory");
    report->add_option("--out", rp_out, "report output directory");

    // memory dump
    std::string mem_store;
    std::size_t mem_limit = 20;
    auto* memory = app.add_subcommand("memory", "Inspect a memory store");
    auto* memory_dump = memory->add_subcommand("dump", "Print store items");
    memory_dump->add_option("--store", mem_store, "memory store JSONL path")
        ->required();
    memory_dump->add_option("--limit", mem_limit, "max items to print");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            auto config = load_config_or_exit(sim_config);
            if (sim_seed_set) config.seed = sim_seed;
            std::optional<std::string> only;
            if (!sim_condition.empty()) only = sim_condition;
            return semdrift::cmd_simulate(config, sim_out, only, sim_force,
                                          sim_workers);
        }
        if (*analyze) {
            const auto config = load_config_or_exit(an_config);
            return semdrift::cmd_analyze(config, an_runs, an_out, an_workers);
        }
        if (*stats) {
            const auto config = load_config_or_exit(st_config);
            return semdrift::cmd_stats(config, st_analysis, st_out);
        }
        if (*fit) {
            const auto config = load_config_or_exit(fit_config);
            return semdrift::cmd_fit(config, fit_analysis, fit_out);
        }
        if (*channel) {
            return semdrift::cmd_channel(ch_spec, ch_steps, ch_out);
        }
        if (*report) {
            return semdrift::cmd_report(rp_analysis, rp_out);
        }
        if (*memory_dump) {
            return semdrift::cmd_memory_dump(mem_store, mem_limit);
        }
    } catch (const semdrift::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
