#include "pmdata/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "pmdata/errors.hpp"

namespace pmdata::cli {

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* section, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw InvalidConfig(std::string(section) + " must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) throw InvalidConfig("unknown key '" + key + "' in " + section);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("bad value for '") + key + "': " + e.what());
    }
}

SimConfig sim_from_json(const json& j) {
    check_keys(j, "simulator",
               {"seed", "n_markets", "dispute_rate", "fee_regime", "trades_mean", "trades_dispersion",
                "horizon_days", "genesis_time", "genesis_block", "block_time_seconds", "withheld_fraction",
                "late_metadata_fraction", "negrisk_fraction", "indirect_oracle_fraction", "tie_rate", "topics"});
    SimConfig s;
    read(j, "seed", s.seed);
    read(j, "n_markets", s.n_markets);
    read(j, "dispute_rate", s.dispute_rate);
    read(j, "trades_mean", s.trades_mean);
    read(j, "trades_dispersion", s.trades_dispersion);
    read(j, "horizon_days", s.horizon_days);
    read(j, "genesis_block", s.genesis_block);
    read(j, "block_time_seconds", s.block_time_seconds);
    read(j, "withheld_fraction", s.withheld_fraction);
    read(j, "late_metadata_fraction", s.late_metadata_fraction);
    read(j, "negrisk_fraction", s.negrisk_fraction);
    read(j, "indirect_oracle_fraction", s.indirect_oracle_fraction);
    read(j, "tie_rate", s.tie_rate);
    read(j, "topics", s.topics);
    if (j.contains("genesis_time")) {
        try {
            s.genesis_time = parse_iso8601(j.at("genesis_time").get<std::string>());
        } catch (const std::exception& e) {
            throw InvalidConfig(std::string("bad genesis_time: ") + e.what());
        }
    }
    if (j.contains("fee_regime")) {
        if (!j["fee_regime"].is_array()) throw InvalidConfig("fee_regime must be an array");
        for (const auto& step : j["fee_regime"]) {
            check_keys(step, "fee_regime step", {"start_day", "category", "rate"});
            FeeStep f;
            read(step, "start_day", f.start_day);
            read(step, "category", f.category);
            read(step, "rate", f.rate);
            s.fee_regime.push_back(f);
        }
    }
    return s;
}

json sim_to_json(const SimConfig& s) {
    json fee = json::array();
    for (const auto& f : s.fee_regime) fee.push_back({{"start_day", f.start_day}, {"category", f.category}, {"rate", f.rate}});
    return {{"seed", s.seed},
            {"n_markets", s.n_markets},
            {"dispute_rate", s.dispute_rate},
            {"fee_regime", fee},
            {"trades_mean", s.trades_mean},
            {"trades_dispersion", s.trades_dispersion},
            {"horizon_days", s.horizon_days},
            {"genesis_time", format_iso8601(s.genesis_time)},
            {"genesis_block", s.genesis_block},
            {"block_time_seconds", s.block_time_seconds},
            {"withheld_fraction", s.withheld_fraction},
            {"late_metadata_fraction", s.late_metadata_fraction},
            {"negrisk_fraction", s.negrisk_fraction},
            {"indirect_oracle_fraction", s.indirect_oracle_fraction},
            {"tie_rate", s.tie_rate},
            {"topics", s.topics}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || base.empty() || p == ":memory:") return path;
    return base / path;
}

bool parse_switch(std::string_view v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw InvalidConfig("toggle value must be on or off, got '" + std::string(v) + "'");
}

}  // namespace

std::string_view to_string(SourceKind v) {
    switch (v) {
        case SourceKind::simulator: return "simulator";
        case SourceKind::fixtures: return "fixtures";
        case SourceKind::live: return "live";
    }
    return "?";
}

void EngineConfig::validate() const {
    if (storage.empty()) throw InvalidConfig("storage path must not be empty");
    if (!(cycle_interval_seconds >= 0.0)) throw InvalidConfig("cycle_interval_seconds must be non-negative");
    if (backfill_step > 0 && backfill_window > 0 && backfill_step > backfill_window) {
        throw InvalidConfig("backfill.step must not exceed backfill.window");
    }
    if (engine.retry_max_attempts == 0) throw InvalidConfig("retry_max_attempts must be positive");
    switch (source) {
        case SourceKind::simulator: simulator.validate(); break;
        case SourceKind::fixtures:
            if (fixtures_dir.empty()) throw InvalidConfig("source 'fixtures' needs fixtures_dir");
            break;
        case SourceKind::live:
            if (live.metadata_api_url.empty() || live.chain_rpc_url.empty()) {
                throw InvalidConfig("source 'live' needs live.metadata_api_url and live.chain_rpc_url");
            }
            break;
    }
}

EngineConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    check_keys(j, "config",
               {"storage", "source", "simulator", "fixtures_dir", "live", "head_step_blocks", "cycle_interval_seconds",
                "confirmation_depth", "max_blocks_per_cycle", "backfill", "toggles", "retry_max_attempts",
                "output_dir"});
    EngineConfig c;
    if (j.contains("storage")) c.storage = resolve(base_dir, j["storage"].get<std::string>()).string();
    if (j.contains("source")) {
        const auto s = j["source"].get<std::string>();
        if (s == "simulator") c.source = SourceKind::simulator;
        else if (s == "fixtures") c.source = SourceKind::fixtures;
        else if (s == "live") c.source = SourceKind::live;
        else throw InvalidConfig("unknown source kind '" + s + "'");
    }
    if (j.contains("simulator")) c.simulator = sim_from_json(j["simulator"]);
    if (j.contains("fixtures_dir")) c.fixtures_dir = resolve(base_dir, j["fixtures_dir"].get<std::string>());
    if (j.contains("live")) {
        const auto& l = j["live"];
        check_keys(l, "live", {"metadata_api_url", "chain_rpc_url", "fill_exchanges", "oracle_contracts"});
        read(l, "metadata_api_url", c.live.metadata_api_url);
        read(l, "chain_rpc_url", c.live.chain_rpc_url);
        read(l, "fill_exchanges", c.live.fill_exchanges);
        read(l, "oracle_contracts", c.live.oracle_contracts);
    }
    // RPC URLs usually embed an API key, so they may come from the environment instead.
    if (const char* rpc = std::getenv("PMDATA_CHAIN_RPC_URL"); rpc && *rpc) c.live.chain_rpc_url = rpc;
    read(j, "head_step_blocks", c.head_step_blocks);
    read(j, "cycle_interval_seconds", c.cycle_interval_seconds);
    read(j, "confirmation_depth", c.engine.confirmation_depth);
    read(j, "max_blocks_per_cycle", c.engine.max_blocks_per_cycle);
    read(j, "retry_max_attempts", c.engine.retry_max_attempts);
    if (j.contains("backfill")) {
        check_keys(j["backfill"], "backfill", {"window", "step"});
        read(j["backfill"], "window", c.backfill_window);
        read(j["backfill"], "step", c.backfill_step);
    }
    if (j.contains("toggles")) {
        const auto& t = j["toggles"];
        check_keys(t, "toggles", {"onchain_recovery", "retry", "timestamp_cache", "parallel_polls", "bridge_paths"});
        read(t, "onchain_recovery", c.engine.onchain_recovery);
        read(t, "retry", c.engine.retry);
        read(t, "timestamp_cache", c.engine.timestamp_cache);
        read(t, "parallel_polls", c.engine.parallel_polls);
        if (t.contains("bridge_paths")) {
            c.engine.bridge_paths = {false, false, false};
            for (const auto& p : t["bridge_paths"].get<std::vector<std::string>>()) {
                if (p == "direct") c.engine.bridge_paths.direct = true;
                else if (p == "adapter") c.engine.bridge_paths.adapter = true;
                else if (p == "negrisk") c.engine.bridge_paths.negrisk = true;
                else throw InvalidConfig("unknown bridge path '" + p + "'");
            }
        }
    }
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    c.validate();
    return c;
}

EngineConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw InvalidConfig("cannot read config file " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidConfig("config is not valid JSON: " + std::string(e.what()));
    }
    try {
        return config_from_json(j, file.parent_path());
    } catch (const json::exception& e) {
        throw InvalidConfig(e.what());
    }
}

json to_json(const EngineConfig& c) {
    json paths = json::array();
    if (c.engine.bridge_paths.direct) paths.push_back("direct");
    if (c.engine.bridge_paths.adapter) paths.push_back("adapter");
    if (c.engine.bridge_paths.negrisk) paths.push_back("negrisk");
    return {{"storage", c.storage},
            {"source", to_string(c.source)},
            {"simulator", sim_to_json(c.simulator)},
            {"fixtures_dir", c.fixtures_dir.string()},
            {"live",
             {{"metadata_api_url", c.live.metadata_api_url},
              {"fill_exchanges", c.live.fill_exchanges},
              {"oracle_contracts", c.live.oracle_contracts}}},
            {"head_step_blocks", c.head_step_blocks},
            {"cycle_interval_seconds", c.cycle_interval_seconds},
            {"confirmation_depth", c.engine.confirmation_depth},
            {"max_blocks_per_cycle", c.engine.max_blocks_per_cycle},
            {"backfill", {{"window", c.backfill_window}, {"step", c.backfill_step}}},
            {"toggles",
             {{"onchain_recovery", c.engine.onchain_recovery},
              {"retry", c.engine.retry},
              {"timestamp_cache", c.engine.timestamp_cache},
              {"parallel_polls", c.engine.parallel_polls},
              {"bridge_paths", paths}}},
            {"retry_max_attempts", c.engine.retry_max_attempts},
            {"output_dir", c.output_dir.string()}};
}

void apply_toggle(EngineConfig& c, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw InvalidConfig("toggle must look like name=on|off");
    const auto name = assignment.substr(0, eq);
    const bool on = parse_switch(assignment.substr(eq + 1));
    if (name == "onchain_recovery") c.engine.onchain_recovery = on;
    else if (name == "retry") c.engine.retry = on;
    else if (name == "timestamp_cache") c.engine.timestamp_cache = on;
    else if (name == "parallel_polls") c.engine.parallel_polls = on;
    else if (name == "bridge_direct") c.engine.bridge_paths.direct = on;
    else if (name == "bridge_adapter") c.engine.bridge_paths.adapter = on;
    else if (name == "bridge_negrisk") c.engine.bridge_paths.negrisk = on;
    else throw InvalidConfig("unknown toggle '" + std::string(name) + "'");
}

}  // namespace pmdata::cli
