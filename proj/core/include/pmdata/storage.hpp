#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmdata/model.hpp"
#include "pmdata/resolution.hpp"
#include "pmdata/sources.hpp"

struct sqlite3;

namespace pmdata {

/// Per-layer checkpoints plus cycle bookkeeping.
struct SyncState {
    std::map<Layer, SourceCursor> cursors;
    std::optional<Timestamp> last_cycle_at;
    std::uint64_t cycle_count = 0;

    /// Cursor for `layer`, at the origin when never persisted.
    SourceCursor cursor(Layer layer) const;
    bool operator==(const SyncState&) const = default;
};

struct RetryQueueEntry {
    TokenId asset_id;
    std::uint64_t first_seen_block = 0;
    std::uint32_t attempts = 0;
    std::uint64_t pending_fills = 0;
    bool exhausted = false;
    /// Cycle of the latest attempt; attempts are counted once per cycle.
    std::optional<std::uint64_t> last_attempt_cycle;

    bool operator==(const RetryQueueEntry&) const = default;
};

/// Amounts stay in integer base units; the accessors convert.
struct MarketDaySummary {
    ConditionId market_id;
    Day day{};
    std::uint64_t trade_count = 0;
    BaseUnits value_base = 0;
    BaseUnits fee_base = 0;
    std::uint64_t distinct_wallets = 0;
    std::optional<double> last_price_yes;

    double total_trade_value() const { return static_cast<double>(value_base) / kBaseUnitsPerToken; }
    double total_fee() const { return static_cast<double>(fee_base) / kBaseUnitsPerToken; }
    bool operator==(const MarketDaySummary&) const = default;
};

struct StoredOracleEvent {
    OracleEvent event;
    std::optional<ResolutionPath> path;
};

struct QualityReport {
    std::size_t total_markets = 0;
    std::size_t recovered_markets = 0;
    std::size_t traded_markets = 0;
    std::size_t oracle_linked_markets = 0;
    std::size_t total_fills = 0;
    std::size_t linked_fills = 0;
    std::size_t traded_tokens = 0;
    std::size_t resolved_tokens = 0;
    std::size_t total_oracle_events = 0;
    std::size_t linked_oracle_events = 0;
    std::map<OracleEventType, LinkCounts> linkage_by_type;
    std::map<ResolutionPath, std::size_t> linkage_by_path;
    std::size_t active_addresses = 0;
    std::size_t market_day_rows = 0;
    std::size_t broken_reference_count = 0;
    std::size_t retry_pending = 0;
    std::size_t retry_exhausted = 0;
    std::size_t mapping_conflicts = 0;
    std::size_t quarantined = 0;

    std::optional<double> traded_rate() const;
    std::optional<double> oracle_linked_rate() const;
    std::optional<double> fill_link_rate() const;
    std::optional<double> token_resolution_rate() const;
    std::optional<double> oracle_link_rate() const;

    nlohmann::json to_json() const;
    /// "metric,count,rate" rows; undefined rates are empty.
    std::string to_csv() const;

    bool operator==(const QualityReport&) const = default;
};

/// Canonical store on SQLite: markets, fills, oracle events, the token bridge,
/// the timestamp cache and sync state, plus
/// registrations, the retry queue, the quarantine log and market-day
/// summaries. One writer at a time; readers on other Store instances see
/// committed snapshots (WAL).
class Store {
public:
    /// ":memory:" opens a private in-memory database. Throws StorageUnavailable.
    explicit Store(const std::string& path);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    /// Every write inside `fn` commits atomically or not at all.
    void transact(const std::function<void()>& fn);

    /// Test hook: called before every outermost commit; returning true makes
    /// the commit fail with StorageUnavailable and roll back.
    void set_commit_fault(std::function<bool()> fault) { commit_fault_ = std::move(fault); }

    // --- M ---------------------------------------------------------------
    enum class MarketWrite { inserted, replaced, unchanged, kept_existing };
    /// Api records replace recovered ones; recovered never replaces api.
    MarketWrite upsert_market(const MarketRecord& record);
    /// Throws DuplicateKey when condition_id exists.
    void insert_market(const MarketRecord& record);
    std::optional<MarketRecord> get_market(const ConditionId& id) const;
    bool has_market(const ConditionId& id) const;
    std::vector<MarketRecord> markets() const;
    std::set<ConditionId> market_ids() const;

    // --- F ---------------------------------------------------------------
    /// False when (tx_hash, log_index) is already stored; nothing is written.
    bool insert_fill(const FillRecord& fill);
    /// Throws DuplicateKey.
    void insert_fill_strict(const FillRecord& fill);
    std::optional<FillRecord> get_fill(const LogKey& key) const;
    std::vector<FillRecord> fills_in_blocks(std::uint64_t from_block, std::uint64_t to_block) const;
    std::vector<FillRecord> fills_on_days(Day from, Day to) const;
    std::vector<FillRecord> fills_for_market(const ConditionId& id) const;
    std::vector<FillRecord> fills_for_asset(const TokenId& asset) const;
    std::vector<FillRecord> all_fills() const;
    /// Sets market_id on every fill of `asset`; returns the UTC days touched.
    std::set<Day> link_fills(const TokenId& asset, const ConditionId& market);

    // --- O ---------------------------------------------------------------
    bool insert_oracle_event(const OracleEvent& event, std::optional<ResolutionPath> path);
    void insert_oracle_event_strict(const OracleEvent& event, std::optional<ResolutionPath> path);
    std::optional<StoredOracleEvent> get_oracle_event(const LogKey& key) const;
    std::vector<StoredOracleEvent> oracle_events() const;
    std::vector<StoredOracleEvent> unlinked_oracle_events() const;
    std::vector<OracleEvent> oracle_events_for_market(const ConditionId& id) const;
    void link_oracle_event(const LogKey& key, const OracleResolution& resolution);

    // --- B ---------------------------------------------------------------
    void put_token_mapping(const TokenMapping& mapping);
    std::vector<TokenMapping> token_mappings() const;
    void put_question(const QuestionId& question, const ConditionId& condition);
    void put_request(const std::string& request_id, const QuestionId& question);
    std::map<QuestionId, ConditionId> questions() const;
    std::map<std::string, QuestionId> requests() const;
    void add_conflict(const MappingConflict& conflict);
    std::vector<MappingConflict> conflicts() const;

    // --- registrations -----------------------------------------------------
    bool insert_registration(const TokenRegistration& registration);
    /// Earliest registration listing `token` as token0 or token1.
    std::optional<TokenRegistration> registration_for_token(const TokenId& token) const;
    std::vector<TokenRegistration> registrations() const;

    // --- C ---------------------------------------------------------------
    std::optional<Timestamp> cached_timestamp(std::uint64_t block) const;
    /// Cached values are immutable: a second write for a block is ignored.
    void cache_timestamp(std::uint64_t block, Timestamp t);
    std::size_t cached_timestamp_count() const;

    // --- S ---------------------------------------------------------------
    SyncState load_sync_state() const;
    /// Throws PreconditionViolation if a cursor would move backwards.
    void save_cursor(const SourceCursor& cursor);
    void save_cycle(std::uint64_t cycle_count, std::optional<Timestamp> last_cycle_at);

    // --- retry queue ----------------------------------------------------------
    void put_retry(const RetryQueueEntry& entry);
    std::optional<RetryQueueEntry> get_retry(const TokenId& asset) const;
    std::vector<RetryQueueEntry> retry_queue() const;
    void remove_retry(const TokenId& asset);

    // --- quarantine -----------------------------------------------------------
    /// Idempotent on (layer, position, reason).
    void quarantine(const QuarantineEntry& entry);
    std::vector<QuarantineEntry> quarantine_log() const;

    // --- summaries ------------------------------------------------------------
    /// Recomputes every (market, day) row for days in [from, to] from the
    /// linked fills; returns rows written.
    std::size_t materialize_summaries(Day from, Day to);
    std::size_t materialize_days(const std::set<Day>& days);
    void put_summary(const MarketDaySummary& row);
    std::vector<MarketDaySummary> summaries() const;
    std::vector<MarketDaySummary> summaries_in(Day from, Day to) const;
    std::vector<MarketDaySummary> summaries_for_market(const ConditionId& id) const;

    // --- whole store ----------------------------------------------------------
    QualityReport compute_quality() const;
    BridgeStats bridge_stats() const;

    /// Every relation as sorted canonical records. Operational counters that
    /// depend on how work was split into cycles (cycle count, last cycle
    /// time, retry attempt bookkeeping) are excluded.
    std::string canonical_dump() const;

    /// One file per relation, canonical line-delimited records.
    void export_jsonl(const std::filesystem::path& dir) const;
    /// Loads an export into this (empty) store.
    void import_jsonl(const std::filesystem::path& dir);

private:
    class Statement;

    Statement prepare(std::string_view sql) const;
    void exec(std::string_view sql) const;
    void create_schema();
    std::vector<FillRecord> query_fills(std::string_view where,
                                        const std::function<void(Statement&)>& bind) const;
    std::vector<StoredOracleEvent> query_oracle(std::string_view where) const;
    std::vector<MarketDaySummary> query_summaries(std::string_view where,
                                                  const std::function<void(Statement&)>& bind) const;

    sqlite3* db_ = nullptr;
    int depth_ = 0;
    std::function<bool()> commit_fault_;
};

}  // namespace pmdata
