#include "pmdata/commands.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "pmdata/errors.hpp"
#include "pmdata/live.hpp"

namespace pmdata::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw StorageUnavailable("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

// Simulator heads advance with the persisted cycle count so a restarted
// daemon sees exactly what an uninterrupted one would.
void position_head(SourceHandle& h, const EngineConfig& config, const Store& store) {
    if (!h.simulator || config.head_step_blocks == 0) return;
    const auto cycles = store.load_sync_state().cycle_count;
    h.simulator->set_head(h.first_block + (cycles + 1) * config.head_step_blocks);
}

}  // namespace

void install_signal_handlers() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}
void request_stop() { g_stop.store(true); }
void clear_stop() { g_stop.store(false); }
bool stop_requested() { return g_stop.load(); }

SourceHandle open_source(const EngineConfig& config) {
    SourceHandle h;
    switch (config.source) {
        case SourceKind::simulator: {
            auto universe = std::make_shared<const Universe>(generate_lifecycle(config.simulator));
            auto sim = std::make_unique<SimulatorSource>(universe);
            h.first_block = config.simulator.genesis_block;
            h.simulator = sim.get();
            h.source = std::move(sim);
            break;
        }
        case SourceKind::fixtures:
            h.source = std::make_unique<FixtureSource>(config.fixtures_dir);
            break;
        case SourceKind::live:
            h.source = std::make_unique<LiveSource>(config.live);
            break;
    }
    return h;
}

UniverseStats cmd_simulate(const EngineConfig& config, const std::filesystem::path& dir) {
    const auto universe = generate_lifecycle(config.simulator);
    write_fixtures(universe, dir);
    return universe_stats(universe);
}

std::vector<CycleReport> cmd_backfill(const EngineConfig& config, std::optional<std::uint64_t> from_block,
                                      std::optional<std::uint64_t> to_block) {
    auto h = open_source(config);
    Store store(config.storage);
    SyncEngine engine(store, *h.source, config.engine);
    const std::uint64_t to = to_block.value_or(h.source->head_block());
    const std::uint64_t from = from_block.value_or(h.first_block);
    if (from > to) throw InvalidConfig("--from-block exceeds --to-block");
    return engine.backfill(from, to, config.backfill_window, config.backfill_step);
}

std::vector<CycleReport> cmd_sync(const EngineConfig& config, std::optional<std::size_t> cycles,
                                  const std::function<void(const CycleReport&)>& on_cycle) {
    auto h = open_source(config);
    Store store(config.storage);
    SyncEngine engine(store, *h.source, config.engine);
    std::vector<CycleReport> reports;
    const auto interval = std::chrono::duration<double>(config.cycle_interval_seconds);
    while (!stop_requested() && (!cycles || reports.size() < *cycles)) {
        position_head(h, config, store);
        reports.push_back(engine.run_cycle());
        if (on_cycle) on_cycle(reports.back());
        if (cycles) continue;
        // Daemon mode: sleep in short slices so a signal is noticed promptly.
        const auto wake = std::chrono::steady_clock::now() + interval;
        while (!stop_requested() && std::chrono::steady_clock::now() < wake) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
    return reports;
}

QualityReport cmd_quality(const EngineConfig& config) {
    Store store(config.storage);
    auto report = store.compute_quality();
    std::filesystem::create_directories(config.output_dir);
    {
        std::ofstream out(config.output_dir / "quality.csv", std::ios::binary);
        if (!out) throw StorageUnavailable("cannot write quality.csv");
        out << report.to_csv();
    }
    write_json(config.output_dir / "quality.json", report.to_json());
    return report;
}

std::optional<Analysis> parse_analysis(std::string_view name) {
    if (name == "activity") return Analysis::activity;
    if (name == "fees") return Analysis::fees;
    if (name == "oracle") return Analysis::oracle;
    if (name == "nba") return Analysis::nba;
    if (name == "cpi") return Analysis::cpi;
    return std::nullopt;
}

std::vector<std::filesystem::path> cmd_analyze(const EngineConfig& config, Analysis analysis) {
    Store store(config.storage);
    return analyze_store(store, analysis, config.output_dir);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prediction-market lifecycle data system"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::vector<std::string> toggles;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed, "Override the simulator seed");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--toggle", toggles, "Feature switch, name=on|off (repeatable)");

    auto* simulate = app.add_subcommand("simulate", "Write simulator fixture streams");
    auto* backfill = app.add_subcommand("backfill", "Ingest a bounded block range");
    std::optional<std::uint64_t> from_block, to_block;
    backfill->add_option("--from-block", from_block, "First block (default: first chain block)");
    backfill->add_option("--to-block", to_block, "Last block (default: source head)");
    auto* sync = app.add_subcommand("sync", "Run synchronization cycles");
    std::optional<std::size_t> cycles;
    sync->add_option("--cycles", cycles, "Number of cycles; runs until interrupted when omitted");
    auto* quality = app.add_subcommand("quality", "Write the data-quality report");
    auto* analyze = app.add_subcommand("analyze", "Run an analysis over the store");
    std::string analysis_name;
    analyze->add_option("analysis", analysis_name, "activity | fees | oracle | nba | cpi")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        EngineConfig config;
        if (!config_path.empty()) config = load_config(config_path);
        if (seed) config.simulator.seed = *seed;
        if (out_dir) config.output_dir = *out_dir;
        for (const auto& t : toggles) apply_toggle(config, t);
        config.validate();

        if (simulate->parsed()) {
            const auto stats = cmd_simulate(config, config.output_dir);
            nlohmann::json j{{"markets", stats.markets},
                             {"withheld_markets", stats.withheld_markets},
                             {"disputed_markets", stats.disputed_markets},
                             {"traded_markets", stats.traded_markets},
                             {"fills", stats.fills},
                             {"oracle_events", stats.oracle_events},
                             {"registrations", stats.registrations},
                             {"events_by_type", stats.events_by_type}};
            out << j.dump() << '\n';
        } else if (backfill->parsed()) {
            std::size_t inserted = 0;
            for (const auto& r : cmd_backfill(config, from_block, to_block)) {
                out << r.to_json().dump() << '\n';
                inserted += r.fills.inserted + r.oracle.inserted + r.markets.inserted;
            }
            err << "backfill complete, " << inserted << " records inserted\n";
        } else if (sync->parsed()) {
            install_signal_handlers();
            cmd_sync(config, cycles, [&](const CycleReport& r) { out << r.to_json().dump() << std::endl; });
            if (stop_requested()) {
                err << "interrupted; state persisted through the last completed cycle\n";
                return kExitInterrupted;
            }
        } else if (quality->parsed()) {
            out << cmd_quality(config).to_csv();
        } else if (analyze->parsed()) {
            const auto analysis = parse_analysis(analysis_name);
            if (!analysis) throw InvalidConfig("unknown analysis '" + analysis_name + "'");
            for (const auto& f : cmd_analyze(config, *analysis)) out << f.string() << '\n';
        }
        return kExitOk;
    } catch (const InvalidConfig& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SourceUnavailable& e) {
        err << "source failure: " << e.what() << '\n';
        return kExitSource;
    } catch (const UnknownBlock& e) {
        err << "source failure: " << e.what() << '\n';
        return kExitSource;
    } catch (const StorageUnavailable& e) {
        err << "storage failure: " << e.what() << '\n';
        return kExitStorage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace pmdata::cli
