#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "pmdata/config.hpp"
#include "pmdata/fixtures.hpp"
#include "pmdata/ingestion.hpp"

namespace pmdata::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitSource = 3,
    kExitStorage = 4,
    kExitData = 5,
    kExitInterrupted = 130,
};

/// Parses arguments, dispatches, and maps exceptions onto exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// SIGINT/SIGTERM set a flag checked between cycles.
void install_signal_handlers();
void request_stop();
void clear_stop();
bool stop_requested();

/// A configured source plus, for the simulator, a handle to move its head.
struct SourceHandle {
    std::unique_ptr<DataSource> source;
    SimulatorSource* simulator = nullptr;
    std::uint64_t first_block = 0;
};

SourceHandle open_source(const EngineConfig& config);

/// Writes fixture streams for the configured simulator into `dir`.
UniverseStats cmd_simulate(const EngineConfig& config, const std::filesystem::path& dir);

/// Bounded historical range; defaults to the whole visible chain.
std::vector<CycleReport> cmd_backfill(const EngineConfig& config, std::optional<std::uint64_t> from_block,
                                      std::optional<std::uint64_t> to_block);

/// Runs `cycles` cycles, or until stop is requested when absent. `on_cycle`
/// sees every report after its cycle has been committed.
std::vector<CycleReport> cmd_sync(const EngineConfig& config, std::optional<std::size_t> cycles,
                                  const std::function<void(const CycleReport&)>& on_cycle = {});

/// Writes quality.csv and quality.json under the output directory.
QualityReport cmd_quality(const EngineConfig& config);

enum class Analysis { activity, fees, oracle, nba, cpi };

std::optional<Analysis> parse_analysis(std::string_view name);

/// Returns the files written, in a fixed order.
std::vector<std::filesystem::path> cmd_analyze(const EngineConfig& config, Analysis analysis);
std::vector<std::filesystem::path> analyze_store(const Store& store, Analysis analysis,
                                                 const std::filesystem::path& out_dir);

}  // namespace pmdata::cli
