#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pmdata/ingestion.hpp"
#include "pmdata/live.hpp"
#include "pmdata/simulator.hpp"

namespace pmdata::cli {

enum class SourceKind { simulator, fixtures, live };

std::string_view to_string(SourceKind v);

struct EngineConfig {
    std::string storage = "pmdata.db";
    SourceKind source = SourceKind::simulator;
    SimConfig simulator;
    std::filesystem::path fixtures_dir;
    LiveEndpoints live;
    /// Simulator only: head advances this many blocks per completed cycle; 0 exposes everything.
    std::uint64_t head_step_blocks = 0;
    double cycle_interval_seconds = 30.0;
    std::uint64_t backfill_window = 0;
    std::uint64_t backfill_step = 0;
    EngineOptions engine;
    std::filesystem::path output_dir = "out";

    /// Throws InvalidConfig.
    void validate() const;
};

/// Unknown keys are rejected. Relative paths resolve against the file's directory.
/// Throws InvalidConfig.
EngineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
EngineConfig load_config(const std::filesystem::path& file);
nlohmann::json to_json(const EngineConfig& config);

/// "name=on|off". Names: onchain_recovery, retry, timestamp_cache,
/// parallel_polls, bridge_direct, bridge_adapter, bridge_negrisk.
void apply_toggle(EngineConfig& config, std::string_view assignment);

}  // namespace pmdata::cli
