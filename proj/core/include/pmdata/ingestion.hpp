#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmdata/resolution.hpp"
#include "pmdata/sources.hpp"
#include "pmdata/storage.hpp"

namespace pmdata {

/// Feature switches mirror the ablation study; everything is on by default.
struct EngineOptions {
    bool onchain_recovery = true;
    BridgePaths bridge_paths;
    bool retry = true;
    bool timestamp_cache = true;
    std::uint32_t retry_max_attempts = 10;
    /// Blocks kept between the scanned range and the source head.
    std::uint64_t confirmation_depth = 0;
    /// Upper bound on blocks scanned per layer per cycle; 0 means up to head.
    std::uint64_t max_blocks_per_cycle = 0;
    /// Poll the three layers on separate threads before committing in order.
    bool parallel_polls = false;
    /// Oracle adapter recorded on markets recovered from each exchange.
    std::map<ExchangeContract, Address> recovery_oracles;

    bool operator==(const EngineOptions&) const = default;
};

/// Block timestamp lookups backed by the store's cache relation C.
class TimestampCache {
public:
    TimestampCache(Store& store, DataSource& source, bool enabled)
        : store_(store), source_(source), enabled_(enabled) {}

    /// Hits are served from C; each distinct miss is fetched once and
    /// written to C. Throws UnknownBlock.
    std::map<std::uint64_t, Timestamp> timestamps_for(const std::set<std::uint64_t>& blocks);
    /// With the cache disabled every call goes to the source.
    Timestamp get(std::uint64_t block);

    bool enabled() const { return enabled_; }
    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return misses_; }

private:
    Store& store_;
    DataSource& source_;
    bool enabled_;
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
};

struct MarketIngest {
    std::size_t inserted = 0;
    std::size_t replaced = 0;
    std::size_t unchanged = 0;
    std::size_t kept_existing = 0;
    std::size_t quarantined = 0;
    std::size_t new_token_entries = 0;
    std::size_t conflicts = 0;

    bool operator==(const MarketIngest&) const = default;
};

struct FillIngest {
    std::size_t inserted = 0;
    std::size_t duplicate = 0;
    std::size_t unresolved = 0;
    std::size_t quarantined = 0;

    bool operator==(const FillIngest&) const = default;
};

struct OracleIngest {
    std::size_t inserted = 0;
    std::size_t duplicate = 0;
    std::size_t linked = 0;
    std::size_t unlinked = 0;
    std::size_t quarantined = 0;

    bool operator==(const OracleIngest&) const = default;
};

struct RetryOutcome {
    std::size_t resolved = 0;
    std::size_t exhausted = 0;
    std::size_t recovered = 0;

    bool operator==(const RetryOutcome&) const = default;
};

struct LayerRange {
    std::uint64_t from = 0;
    std::uint64_t to = 0;
    bool empty() const { return from > to; }
};

struct CycleReport {
    std::uint64_t cycle = 0;
    std::uint64_t head_block = 0;
    SourceCursor market_cursor;
    SourceCursor fill_cursor;
    SourceCursor oracle_cursor;
    std::size_t markets_polled = 0;
    MarketIngest markets;
    std::size_t fills_polled = 0;
    FillIngest fills;
    std::size_t registrations_scanned = 0;
    std::size_t registrations_inserted = 0;
    RetryOutcome retry;
    std::size_t summary_rows = 0;
    std::size_t oracle_polled = 0;
    OracleIngest oracle;
    std::size_t relinked = 0;
    std::size_t source_quarantined = 0;
    std::uint64_t timestamp_hits = 0;
    std::uint64_t timestamp_misses = 0;

    nlohmann::json to_json() const;
};

enum class CrashPoint { after_market_commit, after_fill_commit, after_oracle_commit, after_cycle_commit };

/// Runs the market -> fill -> oracle synchronization cycle against one
/// store. Every layer commits in one transaction together with its cursor,
/// so a failure leaves each layer either fully applied or untouched.
class SyncEngine {
public:
    SyncEngine(Store& store, DataSource& source, EngineOptions options = {});

    /// One cycle over everything between each layer's cursor and the head.
    /// Throws StorageUnavailable / SourceUnavailable with no cursor advanced
    /// for the failing layer.
    CycleReport run_cycle();

    /// Processes [from, to] for both chain layers in windows of `window`
    /// blocks advancing by `step` (overlap when step < window). Chain cursors
    /// move only while windows stay contiguous with them.
    std::vector<CycleReport> backfill(std::uint64_t from, std::uint64_t to, std::uint64_t window = 0,
                                      std::uint64_t step = 0);

    MarketIngest ingest_markets(const std::vector<MarketRecord>& batch, std::uint64_t position);
    /// Batch must be ordered by (block, log_index).
    FillIngest ingest_fills(const std::vector<FillRecord>& batch);
    OracleIngest ingest_oracle(const std::vector<OracleEvent>& batch);
    /// Absent means the token was never registered on chain (NotFound).
    std::optional<MarketRecord> recover_market(const TokenId& asset_id);
    RetryOutcome process_retry_queue(std::uint32_t max_attempts);
    /// Re-resolves stored unlinked oracle events; returns how many linked.
    std::size_t relink_oracle();
    /// Recomputes summaries for days touched since the last call.
    std::size_t flush_summaries();

    std::map<std::uint64_t, Timestamp> timestamps_for(const std::set<std::uint64_t>& blocks) {
        return timestamps_.timestamps_for(blocks);
    }

    const TokenBridge& token_bridge() const { return tokens_; }
    const OracleBridge& oracle_bridge() const { return oracle_; }
    const EngineOptions& options() const { return options_; }
    const TimestampCache& timestamp_cache() const { return timestamps_; }
    SyncState state() const { return store_.load_sync_state(); }

    void set_crash_hook(std::function<void(CrashPoint)> hook) { crash_hook_ = std::move(hook); }

    /// Reloads bridges from the store, dropping uncommitted in-memory state.
    void reload();

private:
    struct Polled;

    CycleReport process(const LayerRange& fills, const LayerRange& oracle, bool contiguous);
    Polled poll(const LayerRange& fills, const LayerRange& oracle);
    void persist_registration(const MarketRecord& market, TokenBridge::RegisterResult&& result);
    void crash(CrashPoint point);
    void fill_timestamps(std::vector<FillRecord>& fills);
    void fill_timestamps(std::vector<OracleEvent>& events);

    Store& store_;
    DataSource& source_;
    EngineOptions options_;
    TimestampCache timestamps_;
    TokenBridge tokens_;
    OracleBridge oracle_;
    std::set<ConditionId> markets_;
    std::set<Day> dirty_days_;
    std::function<void(CrashPoint)> crash_hook_;
};

}  // namespace pmdata
