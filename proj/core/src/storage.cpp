#include "pmdata/storage.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <sqlite3.h>

#include "pmdata/errors.hpp"
#include "pmdata/records.hpp"

namespace pmdata {

using nlohmann::json;

SourceCursor SyncState::cursor(Layer layer) const {
    auto it = cursors.find(layer);
    return it == cursors.end() ? SourceCursor{layer, 0} : it->second;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::int64_t day_number(Day d) { return d.time_since_epoch().count(); }
Day day_from_number(std::int64_t n) { return Day{std::chrono::days{n}}; }

}  // namespace

std::optional<double> QualityReport::traded_rate() const { return ratio(traded_markets, total_markets); }
std::optional<double> QualityReport::oracle_linked_rate() const {
    return ratio(oracle_linked_markets, total_markets);
}
std::optional<double> QualityReport::fill_link_rate() const { return ratio(linked_fills, total_fills); }
std::optional<double> QualityReport::token_resolution_rate() const {
    return ratio(resolved_tokens, traded_tokens);
}
std::optional<double> QualityReport::oracle_link_rate() const {
    return ratio(linked_oracle_events, total_oracle_events);
}

json QualityReport::to_json() const {
    auto rate = [](std::optional<double> r) { return r ? json(*r) : json(nullptr); };
    json by_type = json::object();
    for (const auto& [type, c] : linkage_by_type) {
        by_type[std::string(pmdata::to_string(type))] = {
            {"total", c.total}, {"linked", c.linked}, {"rate", rate(c.rate())}};
    }
    json by_path = json::object();
    for (const auto& [path, n] : linkage_by_path) by_path[std::string(pmdata::to_string(path))] = n;
    return json{{"total_markets", total_markets},
                {"recovered_markets", recovered_markets},
                {"traded_markets", traded_markets},
                {"traded_rate", rate(traded_rate())},
                {"oracle_linked_markets", oracle_linked_markets},
                {"oracle_linked_rate", rate(oracle_linked_rate())},
                {"total_fills", total_fills},
                {"linked_fills", linked_fills},
                {"fill_link_rate", rate(fill_link_rate())},
                {"traded_tokens", traded_tokens},
                {"resolved_tokens", resolved_tokens},
                {"token_resolution_rate", rate(token_resolution_rate())},
                {"total_oracle_events", total_oracle_events},
                {"linked_oracle_events", linked_oracle_events},
                {"oracle_link_rate", rate(oracle_link_rate())},
                {"linkage_by_event_type", by_type},
                {"linkage_by_path", by_path},
                {"active_addresses", active_addresses},
                {"market_day_rows", market_day_rows},
                {"broken_reference_count", broken_reference_count},
                {"retry_pending", retry_pending},
                {"retry_exhausted", retry_exhausted},
                {"mapping_conflicts", mapping_conflicts},
                {"quarantined", quarantined}};
}

std::string QualityReport::to_csv() const {
    std::ostringstream out;
    auto row = [&](std::string_view name, std::size_t count, std::optional<double> rate) {
        out << name << ',' << count << ',';
        if (rate) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f%%", *rate * 100.0);
            out << buf;
        }
        out << '\n';
    };
    out << "metric,count,rate\n";
    row("Total canonical markets", total_markets, std::nullopt);
    row("Traded markets", traded_markets, traded_rate());
    row("Oracle-linked markets", oracle_linked_markets, oracle_linked_rate());
    row("Total fill-level trades", total_fills, std::nullopt);
    row("Linked fill-level trades", linked_fills, fill_link_rate());
    row("Resolved traded tokens", resolved_tokens, token_resolution_rate());
    row("Total oracle events", total_oracle_events, std::nullopt);
    row("Linked oracle events", linked_oracle_events, oracle_link_rate());
    for (const auto& [type, c] : linkage_by_type) {
        row("Linked " + std::string(pmdata::to_string(type)) + " events", c.linked, c.rate());
    }
    row("Active addresses", active_addresses, std::nullopt);
    row("Materialized market-day observations", market_day_rows, std::nullopt);
    row("Broken references", broken_reference_count, std::nullopt);
    row("Exhausted retry entries", retry_exhausted, std::nullopt);
    row("Token mapping conflicts", mapping_conflicts, std::nullopt);
    row("Quarantined records", quarantined, std::nullopt);
    return out.str();
}

// --- sqlite plumbing -----------------------------------------------------------

class Store::Statement {
public:
    Statement(sqlite3* db, std::string_view sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
            throw StorageUnavailable(std::string("prepare failed: ") + sqlite3_errmsg(db) + " in: " +
                                     std::string(sql));
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement(const Statement&) = delete;
    Statement(Statement&& other) noexcept : db_(other.db_), stmt_(std::exchange(other.stmt_, nullptr)) {}

    Statement& bind(int i, std::string_view v) {
        check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Statement& bind(int i, std::int64_t v) {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }
    Statement& bind(int i, std::uint64_t v) { return bind(i, static_cast<std::int64_t>(v)); }
    Statement& bind(int i, double v) {
        check(sqlite3_bind_double(stmt_, i, v));
        return *this;
    }
    Statement& bind_null(int i) {
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }
    template <typename T>
    Statement& bind(int i, const std::optional<T>& v) {
        return v ? bind(i, *v) : bind_null(i);
    }

    /// True while a row is available.
    bool step() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        if ((rc & 0xff) == SQLITE_CONSTRAINT) throw DuplicateKey(sqlite3_errmsg(db_));
        throw StorageUnavailable(sqlite3_errmsg(db_));
    }
    void run() {
        while (step()) {
        }
    }

    bool is_null(int c) const { return sqlite3_column_type(stmt_, c) == SQLITE_NULL; }
    std::string text(int c) const {
        auto p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, c));
        return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, c))) : std::string();
    }
    std::int64_t i64(int c) const { return sqlite3_column_int64(stmt_, c); }
    std::uint64_t u64(int c) const { return static_cast<std::uint64_t>(i64(c)); }
    double real(int c) const { return sqlite3_column_double(stmt_, c); }
    std::optional<std::string> opt_text(int c) const {
        return is_null(c) ? std::nullopt : std::optional<std::string>(text(c));
    }

private:
    void check(int rc) {
        if (rc != SQLITE_OK) throw StorageUnavailable(sqlite3_errmsg(db_));
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

Store::Statement Store::prepare(std::string_view sql) const { return Statement(db_, sql); }

void Store::exec(std::string_view sql) const {
    char* err = nullptr;
    if (sqlite3_exec(db_, std::string(sql).c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StorageUnavailable(msg);
    }
}

Store::Store(const std::string& path) {
    if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX,
                        nullptr) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw StorageUnavailable("cannot open store '" + path + "': " + msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    try {
        if (path != ":memory:") exec("PRAGMA journal_mode=WAL");
        exec("PRAGMA synchronous=NORMAL");
        create_schema();
    } catch (...) {
        sqlite3_close(db_);
        throw;
    }
}

Store::~Store() { sqlite3_close(db_); }

void Store::create_schema() {
    exec(R"sql(
CREATE TABLE IF NOT EXISTS markets(
  condition_id TEXT PRIMARY KEY, provenance TEXT NOT NULL, record TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS fills(
  tx_hash TEXT NOT NULL, log_index INTEGER NOT NULL, block INTEGER NOT NULL,
  asset_id TEXT NOT NULL, market_id TEXT, ts INTEGER, day INTEGER,
  maker TEXT NOT NULL, taker TEXT NOT NULL,
  maker_amount INTEGER NOT NULL, taker_amount INTEGER NOT NULL, fee INTEGER NOT NULL,
  side TEXT NOT NULL, source TEXT NOT NULL,
  PRIMARY KEY(tx_hash, log_index));
CREATE INDEX IF NOT EXISTS fills_block ON fills(block, log_index);
CREATE INDEX IF NOT EXISTS fills_asset ON fills(asset_id);
CREATE INDEX IF NOT EXISTS fills_market ON fills(market_id, block, log_index);
CREATE INDEX IF NOT EXISTS fills_day ON fills(day);
CREATE TABLE IF NOT EXISTS oracle_events(
  tx_hash TEXT NOT NULL, log_index INTEGER NOT NULL, block INTEGER NOT NULL,
  event_type TEXT NOT NULL, market_id TEXT, path TEXT, record TEXT NOT NULL,
  PRIMARY KEY(tx_hash, log_index));
CREATE INDEX IF NOT EXISTS oracle_market ON oracle_events(market_id);
CREATE TABLE IF NOT EXISTS token_bridge(
  asset_id TEXT PRIMARY KEY, condition_id TEXT NOT NULL, source TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS oracle_questions(
  question_id TEXT PRIMARY KEY, condition_id TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS negrisk_requests(
  request_id TEXT PRIMARY KEY, question_id TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS bridge_conflicts(
  asset_id TEXT NOT NULL, kept TEXT NOT NULL, kept_source TEXT NOT NULL,
  rejected TEXT NOT NULL, rejected_source TEXT NOT NULL,
  PRIMARY KEY(asset_id, kept, kept_source, rejected, rejected_source));
CREATE TABLE IF NOT EXISTS registrations(
  tx_hash TEXT NOT NULL, log_index INTEGER NOT NULL, block INTEGER NOT NULL,
  token0 TEXT NOT NULL, token1 TEXT NOT NULL, condition_id TEXT NOT NULL, source TEXT NOT NULL,
  PRIMARY KEY(tx_hash, log_index));
CREATE INDEX IF NOT EXISTS registrations_token0 ON registrations(token0);
CREATE INDEX IF NOT EXISTS registrations_token1 ON registrations(token1);
CREATE TABLE IF NOT EXISTS block_timestamps(block INTEGER PRIMARY KEY, ts INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS sync_cursors(layer TEXT PRIMARY KEY, position INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS sync_meta(key TEXT PRIMARY KEY, value INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS retry_queue(
  asset_id TEXT PRIMARY KEY, first_seen_block INTEGER NOT NULL, attempts INTEGER NOT NULL,
  pending_fills INTEGER NOT NULL, exhausted INTEGER NOT NULL, last_attempt_cycle INTEGER);
CREATE TABLE IF NOT EXISTS quarantine(
  layer TEXT NOT NULL, position INTEGER NOT NULL, reason TEXT NOT NULL,
  PRIMARY KEY(layer, position, reason));
CREATE TABLE IF NOT EXISTS market_day(
  market_id TEXT NOT NULL, day INTEGER NOT NULL, trade_count INTEGER NOT NULL,
  value_base INTEGER NOT NULL, fee_base INTEGER NOT NULL, distinct_wallets INTEGER NOT NULL,
  last_price_yes REAL, PRIMARY KEY(market_id, day));
)sql");
}

void Store::transact(const std::function<void()>& fn) {
    const int level = depth_;
    const std::string savepoint = "sp" + std::to_string(level);
    exec(level == 0 ? "BEGIN IMMEDIATE" : "SAVEPOINT " + savepoint);
    depth_ = level + 1;
    try {
        fn();
        if (level == 0 && commit_fault_ && commit_fault_()) throw StorageUnavailable("injected commit failure");
        exec(level == 0 ? "COMMIT" : "RELEASE " + savepoint);
        depth_ = level;
    } catch (...) {
        depth_ = level;
        try {
            exec(level == 0 ? "ROLLBACK" : "ROLLBACK TO " + savepoint + "; RELEASE " + savepoint);
        } catch (const Error&) {
        }
        throw;
    }
}

// --- M ------------------------------------------------------------------------

Store::MarketWrite Store::upsert_market(const MarketRecord& record) {
    auto existing = get_market(record.condition_id);
    if (!existing) {
        insert_market(record);
        return MarketWrite::inserted;
    }
    if (*existing == record) return MarketWrite::unchanged;
    if (existing->provenance == Provenance::api && record.provenance == Provenance::onchain_recovered) {
        return MarketWrite::kept_existing;
    }
    prepare("UPDATE markets SET provenance = ?2, record = ?3 WHERE condition_id = ?1")
        .bind(1, record.condition_id)
        .bind(2, to_string(record.provenance))
        .bind(3, to_record_line(record))
        .run();
    return MarketWrite::replaced;
}

void Store::insert_market(const MarketRecord& record) {
    prepare("INSERT INTO markets(condition_id, provenance, record) VALUES (?1, ?2, ?3)")
        .bind(1, record.condition_id)
        .bind(2, to_string(record.provenance))
        .bind(3, to_record_line(record))
        .run();
}

std::optional<MarketRecord> Store::get_market(const ConditionId& id) const {
    auto st = prepare("SELECT record FROM markets WHERE condition_id = ?1");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return parse_record_line<MarketRecord>(st.text(0));
}

bool Store::has_market(const ConditionId& id) const {
    auto st = prepare("SELECT 1 FROM markets WHERE condition_id = ?1");
    st.bind(1, id);
    return st.step();
}

std::vector<MarketRecord> Store::markets() const {
    std::vector<MarketRecord> out;
    auto st = prepare("SELECT record FROM markets ORDER BY condition_id");
    while (st.step()) out.push_back(parse_record_line<MarketRecord>(st.text(0)));
    return out;
}

std::set<ConditionId> Store::market_ids() const {
    std::set<ConditionId> out;
    auto st = prepare("SELECT condition_id FROM markets");
    while (st.step()) out.insert(st.text(0));
    return out;
}

// --- F ------------------------------------------------------------------------

namespace {

constexpr std::string_view kFillColumns =
    "tx_hash, log_index, block, asset_id, market_id, ts, maker, taker, maker_amount, taker_amount, fee, "
    "side, source";

}  // namespace

bool Store::insert_fill(const FillRecord& fill) {
    try {
        insert_fill_strict(fill);
        return true;
    } catch (const DuplicateKey&) {
        return false;
    }
}

void Store::insert_fill_strict(const FillRecord& f) {
    auto st = prepare(
        "INSERT INTO fills(tx_hash, log_index, block, asset_id, market_id, ts, day, maker, taker, "
        "maker_amount, taker_amount, fee, side, source) "
        "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14)");
    st.bind(1, f.tx_hash).bind(2, f.log_index).bind(3, f.block_number).bind(4, f.asset_id).bind(5, f.market_id);
    if (f.meta.block_timestamp) {
        st.bind(6, to_unix(*f.meta.block_timestamp)).bind(7, day_number(day_of(*f.meta.block_timestamp)));
    } else {
        st.bind_null(6).bind_null(7);
    }
    st.bind(8, f.maker)
        .bind(9, f.taker)
        .bind(10, f.maker_amount)
        .bind(11, f.taker_amount)
        .bind(12, f.fee)
        .bind(13, to_string(f.meta.side))
        .bind(14, to_string(f.meta.source_contract));
    st.run();
}

std::vector<FillRecord> Store::query_fills(std::string_view where,
                                           const std::function<void(Statement&)>& bind) const {
    std::string sql = "SELECT " + std::string(kFillColumns) + " FROM fills " + std::string(where);
    auto st = prepare(sql);
    if (bind) bind(st);
    std::vector<FillRecord> out;
    while (st.step()) {
        FillRecord f;
        f.tx_hash = st.text(0);
        f.log_index = st.u64(1);
        f.block_number = st.u64(2);
        f.asset_id = st.text(3);
        f.market_id = st.opt_text(4);
        if (!st.is_null(5)) f.meta.block_timestamp = from_unix(st.i64(5));
        f.maker = st.text(6);
        f.taker = st.text(7);
        f.maker_amount = st.u64(8);
        f.taker_amount = st.u64(9);
        f.fee = st.u64(10);
        f.meta.side = parse_side(st.text(11));
        f.meta.source_contract = parse_exchange(st.text(12));
        derive_size_and_price(f);
        out.push_back(std::move(f));
    }
    return out;
}

std::optional<FillRecord> Store::get_fill(const LogKey& key) const {
    auto rows = query_fills("WHERE tx_hash = ?1 AND log_index = ?2",
                            [&](Statement& st) { st.bind(1, key.tx_hash).bind(2, key.log_index); });
    if (rows.empty()) return std::nullopt;
    return rows.front();
}

std::vector<FillRecord> Store::fills_in_blocks(std::uint64_t from_block, std::uint64_t to_block) const {
    return query_fills("WHERE block BETWEEN ?1 AND ?2 ORDER BY block, log_index",
                       [&](Statement& st) { st.bind(1, from_block).bind(2, to_block); });
}

std::vector<FillRecord> Store::fills_on_days(Day from, Day to) const {
    return query_fills("WHERE day BETWEEN ?1 AND ?2 ORDER BY block, log_index", [&](Statement& st) {
        st.bind(1, day_number(from)).bind(2, day_number(to));
    });
}

std::vector<FillRecord> Store::fills_for_market(const ConditionId& id) const {
    return query_fills("WHERE market_id = ?1 ORDER BY block, log_index",
                       [&](Statement& st) { st.bind(1, id); });
}

std::vector<FillRecord> Store::fills_for_asset(const TokenId& asset) const {
    return query_fills("WHERE asset_id = ?1 ORDER BY block, log_index",
                       [&](Statement& st) { st.bind(1, asset); });
}

std::vector<FillRecord> Store::all_fills() const {
    return query_fills("ORDER BY block, log_index", nullptr);
}

std::set<Day> Store::link_fills(const TokenId& asset, const ConditionId& market) {
    std::set<Day> days;
    auto st = prepare(
        "SELECT DISTINCT day FROM fills WHERE asset_id = ?1 AND day IS NOT NULL "
        "AND (market_id IS NULL OR market_id <> ?2)");
    st.bind(1, asset).bind(2, market);
    while (st.step()) days.insert(day_from_number(st.i64(0)));
    prepare("UPDATE fills SET market_id = ?2 WHERE asset_id = ?1 AND (market_id IS NULL OR market_id <> ?2)")
        .bind(1, asset)
        .bind(2, market)
        .run();
    return days;
}

// --- O ------------------------------------------------------------------------

namespace {

std::string oracle_record_text(OracleEvent event) {
    event.market_id.reset();
    return to_record_line(event);
}

}  // namespace

bool Store::insert_oracle_event(const OracleEvent& event, std::optional<ResolutionPath> path) {
    try {
        insert_oracle_event_strict(event, path);
        return true;
    } catch (const DuplicateKey&) {
        return false;
    }
}

void Store::insert_oracle_event_strict(const OracleEvent& event, std::optional<ResolutionPath> path) {
    auto st = prepare(
        "INSERT INTO oracle_events(tx_hash, log_index, block, event_type, market_id, path, record) "
        "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)");
    st.bind(1, event.tx_hash)
        .bind(2, event.log_index)
        .bind(3, event.block_number)
        .bind(4, to_string(event.event_type))
        .bind(5, event.market_id);
    if (path) {
        st.bind(6, to_string(*path));
    } else {
        st.bind_null(6);
    }
    st.bind(7, oracle_record_text(event));
    st.run();
}

std::vector<StoredOracleEvent> Store::query_oracle(std::string_view where) const {
    auto st = prepare("SELECT record, market_id, path FROM oracle_events " + std::string(where));
    std::vector<StoredOracleEvent> out;
    while (st.step()) {
        StoredOracleEvent s{parse_record_line<OracleEvent>(st.text(0)), std::nullopt};
        s.event.market_id = st.opt_text(1);
        if (!st.is_null(2)) s.path = parse_resolution_path(st.text(2));
        out.push_back(std::move(s));
    }
    return out;
}

std::optional<StoredOracleEvent> Store::get_oracle_event(const LogKey& key) const {
    auto st = prepare("SELECT record, market_id, path FROM oracle_events WHERE tx_hash = ?1 AND log_index = ?2");
    st.bind(1, key.tx_hash).bind(2, key.log_index);
    if (!st.step()) return std::nullopt;
    StoredOracleEvent s{parse_record_line<OracleEvent>(st.text(0)), std::nullopt};
    s.event.market_id = st.opt_text(1);
    if (!st.is_null(2)) s.path = parse_resolution_path(st.text(2));
    return s;
}

std::vector<StoredOracleEvent> Store::oracle_events() const {
    return query_oracle("ORDER BY block, log_index");
}

std::vector<StoredOracleEvent> Store::unlinked_oracle_events() const {
    return query_oracle("WHERE market_id IS NULL ORDER BY block, log_index");
}

std::vector<OracleEvent> Store::oracle_events_for_market(const ConditionId& id) const {
    auto st = prepare("SELECT record, market_id FROM oracle_events WHERE market_id = ?1 ORDER BY block, log_index");
    st.bind(1, id);
    std::vector<OracleEvent> out;
    while (st.step()) {
        out.push_back(parse_record_line<OracleEvent>(st.text(0)));
        out.back().market_id = st.opt_text(1);
    }
    return out;
}

void Store::link_oracle_event(const LogKey& key, const OracleResolution& resolution) {
    prepare("UPDATE oracle_events SET market_id = ?3, path = ?4 WHERE tx_hash = ?1 AND log_index = ?2")
        .bind(1, key.tx_hash)
        .bind(2, key.log_index)
        .bind(3, resolution.market_id)
        .bind(4, to_string(resolution.path))
        .run();
}

// --- B ------------------------------------------------------------------------

void Store::put_token_mapping(const TokenMapping& m) {
    prepare("INSERT OR REPLACE INTO token_bridge(asset_id, condition_id, source) VALUES (?1, ?2, ?3)")
        .bind(1, m.asset_id)
        .bind(2, m.condition_id)
        .bind(3, to_string(m.source))
        .run();
}

std::vector<TokenMapping> Store::token_mappings() const {
    std::vector<TokenMapping> out;
    auto st = prepare("SELECT asset_id, condition_id, source FROM token_bridge ORDER BY asset_id");
    while (st.step()) out.push_back({st.text(0), st.text(1), parse_token_source(st.text(2))});
    return out;
}

void Store::put_question(const QuestionId& question, const ConditionId& condition) {
    prepare("INSERT OR IGNORE INTO oracle_questions(question_id, condition_id) VALUES (?1, ?2)")
        .bind(1, question)
        .bind(2, condition)
        .run();
}

void Store::put_request(const std::string& request_id, const QuestionId& question) {
    prepare("INSERT OR IGNORE INTO negrisk_requests(request_id, question_id) VALUES (?1, ?2)")
        .bind(1, request_id)
        .bind(2, question)
        .run();
}

std::map<QuestionId, ConditionId> Store::questions() const {
    std::map<QuestionId, ConditionId> out;
    auto st = prepare("SELECT question_id, condition_id FROM oracle_questions");
    while (st.step()) out.emplace(st.text(0), st.text(1));
    return out;
}

std::map<std::string, QuestionId> Store::requests() const {
    std::map<std::string, QuestionId> out;
    auto st = prepare("SELECT request_id, question_id FROM negrisk_requests");
    while (st.step()) out.emplace(st.text(0), st.text(1));
    return out;
}

void Store::add_conflict(const MappingConflict& c) {
    prepare(
        "INSERT OR IGNORE INTO bridge_conflicts(asset_id, kept, kept_source, rejected, rejected_source) "
        "VALUES (?1, ?2, ?3, ?4, ?5)")
        .bind(1, c.asset_id)
        .bind(2, c.kept)
        .bind(3, to_string(c.kept_source))
        .bind(4, c.rejected)
        .bind(5, to_string(c.rejected_source))
        .run();
}

std::vector<MappingConflict> Store::conflicts() const {
    std::vector<MappingConflict> out;
    auto st = prepare(
        "SELECT asset_id, kept, kept_source, rejected, rejected_source FROM bridge_conflicts "
        "ORDER BY asset_id, kept, kept_source, rejected, rejected_source");
    while (st.step()) {
        out.push_back({st.text(0), st.text(1), parse_token_source(st.text(2)), st.text(3),
                       parse_token_source(st.text(4))});
    }
    return out;
}

// --- registrations ----------------------------------------------------------------

bool Store::insert_registration(const TokenRegistration& r) {
    try {
        prepare(
            "INSERT INTO registrations(tx_hash, log_index, block, token0, token1, condition_id, source) "
            "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)")
            .bind(1, r.tx_hash)
            .bind(2, r.log_index)
            .bind(3, r.block_number)
            .bind(4, r.token0)
            .bind(5, r.token1)
            .bind(6, r.condition_id)
            .bind(7, to_string(r.source_contract))
            .run();
        return true;
    } catch (const DuplicateKey&) {
        return false;
    }
}

namespace {

constexpr std::string_view kRegistrationSelect =
    "SELECT tx_hash, log_index, block, token0, token1, condition_id, source FROM registrations ";

}  // namespace

std::optional<TokenRegistration> Store::registration_for_token(const TokenId& token) const {
    auto st = prepare(std::string(kRegistrationSelect) +
                      "WHERE token0 = ?1 OR token1 = ?1 ORDER BY block, log_index LIMIT 1");
    st.bind(1, token);
    if (!st.step()) return std::nullopt;
    return TokenRegistration{st.text(3), st.text(4), st.text(5), parse_exchange(st.text(6)),
                             st.u64(2),  st.text(0), st.u64(1)};
}

std::vector<TokenRegistration> Store::registrations() const {
    std::vector<TokenRegistration> out;
    auto st = prepare(std::string(kRegistrationSelect) + "ORDER BY block, log_index, tx_hash");
    while (st.step()) {
        out.push_back({st.text(3), st.text(4), st.text(5), parse_exchange(st.text(6)), st.u64(2), st.text(0),
                       st.u64(1)});
    }
    return out;
}

// --- C ------------------------------------------------------------------------

std::optional<Timestamp> Store::cached_timestamp(std::uint64_t block) const {
    auto st = prepare("SELECT ts FROM block_timestamps WHERE block = ?1");
    st.bind(1, block);
    if (!st.step()) return std::nullopt;
    return from_unix(st.i64(0));
}

void Store::cache_timestamp(std::uint64_t block, Timestamp t) {
    prepare("INSERT OR IGNORE INTO block_timestamps(block, ts) VALUES (?1, ?2)").bind(1, block).bind(2, to_unix(t)).run();
}

std::size_t Store::cached_timestamp_count() const {
    auto st = prepare("SELECT COUNT(*) FROM block_timestamps");
    st.step();
    return static_cast<std::size_t>(st.i64(0));
}

// --- S ------------------------------------------------------------------------

SyncState Store::load_sync_state() const {
    SyncState s;
    auto st = prepare("SELECT layer, position FROM sync_cursors");
    while (st.step()) {
        auto layer = parse_layer(st.text(0));
        s.cursors[layer] = SourceCursor{layer, st.u64(1)};
    }
    auto meta = prepare("SELECT key, value FROM sync_meta");
    while (meta.step()) {
        auto key = meta.text(0);
        if (key == "cycle_count") s.cycle_count = meta.u64(1);
        if (key == "last_cycle_at") s.last_cycle_at = from_unix(meta.i64(1));
    }
    return s;
}

void Store::save_cursor(const SourceCursor& cursor) {
    auto current = load_sync_state().cursor(cursor.layer);
    if (cursor.position < current.position) {
        throw PreconditionViolation("cursor for layer " + std::string(to_string(cursor.layer)) +
                                    " would regress from " + std::to_string(current.position) + " to " +
                                    std::to_string(cursor.position));
    }
    prepare("INSERT OR REPLACE INTO sync_cursors(layer, position) VALUES (?1, ?2)")
        .bind(1, to_string(cursor.layer))
        .bind(2, cursor.position)
        .run();
}

void Store::save_cycle(std::uint64_t cycle_count, std::optional<Timestamp> last_cycle_at) {
    prepare("INSERT OR REPLACE INTO sync_meta(key, value) VALUES ('cycle_count', ?1)").bind(1, cycle_count).run();
    if (last_cycle_at) {
        prepare("INSERT OR REPLACE INTO sync_meta(key, value) VALUES ('last_cycle_at', ?1)")
            .bind(1, to_unix(*last_cycle_at))
            .run();
    }
}

// --- retry queue --------------------------------------------------------------

void Store::put_retry(const RetryQueueEntry& e) {
    prepare(
        "INSERT OR REPLACE INTO retry_queue(asset_id, first_seen_block, attempts, pending_fills, exhausted, "
        "last_attempt_cycle) VALUES (?1, ?2, ?3, ?4, ?5, ?6)")
        .bind(1, e.asset_id)
        .bind(2, e.first_seen_block)
        .bind(3, static_cast<std::int64_t>(e.attempts))
        .bind(4, e.pending_fills)
        .bind(5, static_cast<std::int64_t>(e.exhausted))
        .bind(6, e.last_attempt_cycle)
        .run();
}

namespace {

constexpr std::string_view kRetrySelect =
    "SELECT asset_id, first_seen_block, attempts, pending_fills, exhausted, last_attempt_cycle FROM retry_queue ";

}  // namespace

std::optional<RetryQueueEntry> Store::get_retry(const TokenId& asset) const {
    auto st = prepare(std::string(kRetrySelect) + "WHERE asset_id = ?1");
    st.bind(1, asset);
    if (!st.step()) return std::nullopt;
    RetryQueueEntry e{st.text(0), st.u64(1), static_cast<std::uint32_t>(st.i64(2)), st.u64(3), st.i64(4) != 0,
                      std::nullopt};
    if (!st.is_null(5)) e.last_attempt_cycle = st.u64(5);
    return e;
}

std::vector<RetryQueueEntry> Store::retry_queue() const {
    std::vector<RetryQueueEntry> out;
    auto st = prepare(std::string(kRetrySelect) + "ORDER BY first_seen_block, asset_id");
    while (st.step()) {
        RetryQueueEntry e{st.text(0), st.u64(1), static_cast<std::uint32_t>(st.i64(2)), st.u64(3),
                          st.i64(4) != 0, std::nullopt};
        if (!st.is_null(5)) e.last_attempt_cycle = st.u64(5);
        out.push_back(std::move(e));
    }
    return out;
}

void Store::remove_retry(const TokenId& asset) {
    prepare("DELETE FROM retry_queue WHERE asset_id = ?1").bind(1, asset).run();
}

// --- quarantine -----------------------------------------------------------------

void Store::quarantine(const QuarantineEntry& e) {
    prepare("INSERT OR IGNORE INTO quarantine(layer, position, reason) VALUES (?1, ?2, ?3)")
        .bind(1, to_string(e.layer))
        .bind(2, e.position)
        .bind(3, e.reason)
        .run();
}

std::vector<QuarantineEntry> Store::quarantine_log() const {
    std::vector<QuarantineEntry> out;
    auto st = prepare("SELECT layer, position, reason FROM quarantine ORDER BY layer, position, reason");
    while (st.step()) out.push_back({parse_layer(st.text(0)), st.u64(1), st.text(2)});
    return out;
}

// --- summaries ------------------------------------------------------------------

std::size_t Store::materialize_summaries(Day from, Day to) {
    std::set<Day> days;
    for (Day d = from; d <= to; d += std::chrono::days{1}) days.insert(d);
    return materialize_days(days);
}

std::size_t Store::materialize_days(const std::set<Day>& days) {
    if (days.empty()) return 0;
    std::size_t written = 0;
    std::unordered_map<ConditionId, std::pair<TokenId, TokenId>> tokens;
    auto tokens_of = [&](const ConditionId& id) -> const std::pair<TokenId, TokenId>& {
        auto it = tokens.find(id);
        if (it == tokens.end()) {
            std::pair<TokenId, TokenId> pair;
            if (auto m = get_market(id)) {
                auto t = m->tokens();
                pair.first = t.size() > 0 ? t[0] : m->yes_token;
                pair.second = t.size() > 1 ? t[1] : m->no_token;
            }
            it = tokens.emplace(id, std::move(pair)).first;
        }
        return it->second;
    };

    transact([&] {
        for (Day day : days) {
            prepare("DELETE FROM market_day WHERE day = ?1").bind(1, day_number(day)).run();
            auto fills = query_fills(
                "WHERE day = ?1 AND market_id IS NOT NULL ORDER BY market_id, block, log_index",
                [&](Statement& st) { st.bind(1, day_number(day)); });
            for (std::size_t i = 0; i < fills.size();) {
                MarketDaySummary row;
                row.market_id = *fills[i].market_id;
                row.day = day;
                std::unordered_set<Address> wallets;
                const auto& [yes, no] = tokens_of(row.market_id);
                for (; i < fills.size() && *fills[i].market_id == row.market_id; ++i) {
                    const auto& f = fills[i];
                    ++row.trade_count;
                    row.value_base += collateral_amount(f);
                    row.fee_base += f.fee;
                    wallets.insert(f.maker);
                    wallets.insert(f.taker);
                    if (f.asset_id == yes) {
                        row.last_price_yes = f.price;
                    } else if (f.asset_id == no) {
                        row.last_price_yes = 1.0 - f.price;
                    }
                }
                row.distinct_wallets = wallets.size();
                put_summary(row);
                ++written;
            }
        }
    });
    return written;
}

void Store::put_summary(const MarketDaySummary& r) {
    prepare(
        "INSERT OR REPLACE INTO market_day(market_id, day, trade_count, value_base, fee_base, distinct_wallets, "
        "last_price_yes) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)")
        .bind(1, r.market_id)
        .bind(2, day_number(r.day))
        .bind(3, r.trade_count)
        .bind(4, r.value_base)
        .bind(5, r.fee_base)
        .bind(6, r.distinct_wallets)
        .bind(7, r.last_price_yes)
        .run();
}

std::vector<MarketDaySummary> Store::query_summaries(std::string_view where,
                                                     const std::function<void(Statement&)>& bind) const {
    auto st = prepare(
        "SELECT market_id, day, trade_count, value_base, fee_base, distinct_wallets, last_price_yes "
        "FROM market_day " +
        std::string(where));
    if (bind) bind(st);
    std::vector<MarketDaySummary> out;
    while (st.step()) {
        MarketDaySummary r;
        r.market_id = st.text(0);
        r.day = day_from_number(st.i64(1));
        r.trade_count = st.u64(2);
        r.value_base = st.u64(3);
        r.fee_base = st.u64(4);
        r.distinct_wallets = st.u64(5);
        if (!st.is_null(6)) r.last_price_yes = st.real(6);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MarketDaySummary> Store::summaries() const {
    return query_summaries("ORDER BY day, market_id", nullptr);
}

std::vector<MarketDaySummary> Store::summaries_in(Day from, Day to) const {
    return query_summaries("WHERE day BETWEEN ?1 AND ?2 ORDER BY day, market_id", [&](Statement& st) {
        st.bind(1, day_number(from)).bind(2, day_number(to));
    });
}

std::vector<MarketDaySummary> Store::summaries_for_market(const ConditionId& id) const {
    return query_summaries("WHERE market_id = ?1 ORDER BY day", [&](Statement& st) { st.bind(1, id); });
}

// --- whole store ----------------------------------------------------------------

QualityReport Store::compute_quality() const {
    auto count = [&](std::string_view sql) {
        auto st = prepare(sql);
        st.step();
        return static_cast<std::size_t>(st.i64(0));
    };
    QualityReport q;
    q.total_markets = count("SELECT COUNT(*) FROM markets");
    q.recovered_markets = count("SELECT COUNT(*) FROM markets WHERE provenance = 'onchain_recovered'");
    q.traded_markets = count(
        "SELECT COUNT(DISTINCT f.market_id) FROM fills f JOIN markets m ON m.condition_id = f.market_id");
    q.oracle_linked_markets = count(
        "SELECT COUNT(DISTINCT o.market_id) FROM oracle_events o JOIN markets m ON m.condition_id = o.market_id");
    q.total_fills = count("SELECT COUNT(*) FROM fills");
    q.linked_fills = count("SELECT COUNT(*) FROM fills WHERE market_id IS NOT NULL");
    q.traded_tokens = count("SELECT COUNT(DISTINCT asset_id) FROM fills");
    q.resolved_tokens = count("SELECT COUNT(DISTINCT asset_id) FROM fills WHERE market_id IS NOT NULL");
    q.total_oracle_events = count("SELECT COUNT(*) FROM oracle_events");
    q.linked_oracle_events = count("SELECT COUNT(*) FROM oracle_events WHERE market_id IS NOT NULL");
    auto stats = bridge_stats();
    q.linkage_by_type = stats.by_type;
    q.linkage_by_path = stats.by_path;
    q.active_addresses = count("SELECT COUNT(*) FROM (SELECT maker FROM fills UNION SELECT taker FROM fills)");
    q.market_day_rows = count("SELECT COUNT(*) FROM market_day");
    q.broken_reference_count =
        count("SELECT COUNT(*) FROM market_day WHERE market_id NOT IN (SELECT condition_id FROM markets)") +
        count(
            "SELECT COUNT(*) FROM oracle_events WHERE market_id IS NOT NULL "
            "AND market_id NOT IN (SELECT condition_id FROM markets)") +
        count(
            "SELECT COUNT(*) FROM fills WHERE market_id IS NOT NULL "
            "AND market_id NOT IN (SELECT condition_id FROM markets)");
    q.retry_pending = count("SELECT COUNT(*) FROM retry_queue WHERE exhausted = 0");
    q.retry_exhausted = count("SELECT COUNT(*) FROM retry_queue WHERE exhausted <> 0");
    q.mapping_conflicts = count("SELECT COUNT(*) FROM bridge_conflicts");
    q.quarantined = count("SELECT COUNT(*) FROM quarantine");
    return q;
}

BridgeStats Store::bridge_stats() const {
    std::vector<LinkedEvent> events;
    auto st = prepare("SELECT event_type, path FROM oracle_events");
    while (st.step()) {
        LinkedEvent e{parse_event_type(st.text(0)), std::nullopt};
        if (!st.is_null(1)) e.path = parse_resolution_path(st.text(1));
        events.push_back(e);
    }
    return pmdata::bridge_stats(events);
}

namespace {

struct Relation {
    std::string name;
    std::vector<std::string> lines;
};

json mapping_json(const TokenMapping& m) {
    return {{"asset_id", m.asset_id}, {"condition_id", m.condition_id}, {"source", to_string(m.source)}};
}

json summary_json(const MarketDaySummary& r) {
    json j{{"market_id", r.market_id},
           {"day", format_day(r.day)},
           {"trade_count", r.trade_count},
           {"total_trade_value_base", r.value_base},
           {"total_fee_base", r.fee_base},
           {"distinct_wallets", r.distinct_wallets}};
    if (r.last_price_yes) j["last_price_yes"] = *r.last_price_yes;
    return j;
}

std::vector<Relation> collect(const Store& s, bool operational) {
    std::vector<Relation> out;
    auto add = [&](std::string name, auto&& range, auto&& fn) {
        Relation r{std::move(name), {}};
        for (const auto& v : range) r.lines.push_back(fn(v));
        out.push_back(std::move(r));
    };
    add("markets", s.markets(), [](const MarketRecord& m) { return to_record_line(m); });
    add("fills", s.all_fills(), [](const FillRecord& f) { return to_record_line(f); });
    add("oracle_events", s.oracle_events(), [](const StoredOracleEvent& e) {
        json j = e.event;
        if (e.path) j["resolution_path"] = to_string(*e.path);
        return j.dump();
    });
    add("token_bridge", s.token_mappings(), [](const TokenMapping& m) { return mapping_json(m).dump(); });
    add("oracle_questions", s.questions(), [](const auto& kv) {
        return json{{"question_id", kv.first}, {"condition_id", kv.second}}.dump();
    });
    add("negrisk_requests", s.requests(), [](const auto& kv) {
        return json{{"request_id", kv.first}, {"question_id", kv.second}}.dump();
    });
    add("bridge_conflicts", s.conflicts(), [](const MappingConflict& c) {
        return json{{"asset_id", c.asset_id},
                    {"kept", c.kept},
                    {"kept_source", to_string(c.kept_source)},
                    {"rejected", c.rejected},
                    {"rejected_source", to_string(c.rejected_source)}}
            .dump();
    });
    add("registrations", s.registrations(), [](const TokenRegistration& r) { return to_record_line(r); });

    {
        SyncState state = s.load_sync_state();
        Relation sync{"sync_state", {}};
        for (const auto& [layer, c] : state.cursors) {
            sync.lines.push_back(json{{"layer", to_string(layer)}, {"position", c.position}}.dump());
        }
        if (operational) {
            json meta{{"cycle_count", state.cycle_count}};
            if (state.last_cycle_at) meta["last_cycle_at"] = format_iso8601(*state.last_cycle_at);
            sync.lines.push_back(meta.dump());
        }
        out.push_back(std::move(sync));
    }
    add("retry_queue", s.retry_queue(), [operational](const RetryQueueEntry& e) {
        json j{{"asset_id", e.asset_id}, {"first_seen_block", e.first_seen_block}, {"pending_fills", e.pending_fills}};
        if (operational) {
            j["attempts"] = e.attempts;
            j["exhausted"] = e.exhausted;
            if (e.last_attempt_cycle) j["last_attempt_cycle"] = *e.last_attempt_cycle;
        }
        return j.dump();
    });
    add("quarantine", s.quarantine_log(), [](const QuarantineEntry& e) {
        return json{{"layer", to_string(e.layer)}, {"position", e.position}, {"reason", e.reason}}.dump();
    });
    add("market_day", s.summaries(), [](const MarketDaySummary& r) { return summary_json(r).dump(); });
    return out;
}

}  // namespace

std::string Store::canonical_dump() const {
    std::string out;
    auto st = prepare("SELECT block, ts FROM block_timestamps ORDER BY block");
    std::vector<std::string> blocks;
    while (st.step()) {
        blocks.push_back(
            json{{"block_number", st.u64(0)}, {"timestamp", format_iso8601(from_unix(st.i64(1)))}}.dump());
    }
    auto relations = collect(*this, false);
    relations.push_back({"block_timestamps", std::move(blocks)});
    for (auto& r : relations) {
        std::sort(r.lines.begin(), r.lines.end());
        out += "# " + r.name + "\n";
        for (const auto& line : r.lines) {
            out += line;
            out += '\n';
        }
    }
    return out;
}

void Store::export_jsonl(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    auto relations = collect(*this, true);
    Relation blocks{"block_timestamps", {}};
    auto st = prepare("SELECT block, ts FROM block_timestamps ORDER BY block");
    while (st.step()) {
        blocks.lines.push_back(
            json{{"block_number", st.u64(0)}, {"timestamp", format_iso8601(from_unix(st.i64(1)))}}.dump());
    }
    relations.push_back(std::move(blocks));
    for (const auto& r : relations) {
        std::ofstream out(dir / (r.name + ".jsonl"), std::ios::binary | std::ios::trunc);
        if (!out) throw StorageUnavailable("cannot write export " + (dir / r.name).string());
        for (const auto& line : r.lines) out << line << '\n';
    }
}

void Store::import_jsonl(const std::filesystem::path& dir) {
    auto each_line = [&](const std::string& name, const std::function<void(const json&)>& fn) {
        std::ifstream in(dir / (name + ".jsonl"), std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                fn(json::parse(line));
            } catch (const json::exception& e) {
                throw DecodeError(name + ".jsonl: " + e.what());
            }
        }
    };
    transact([&] {
        each_line("markets", [&](const json& j) { insert_market(j.get<MarketRecord>()); });
        each_line("fills", [&](const json& j) { insert_fill_strict(j.get<FillRecord>()); });
        each_line("oracle_events", [&](const json& j) {
            std::optional<ResolutionPath> path;
            if (j.contains("resolution_path")) path = parse_resolution_path(j.at("resolution_path").get<std::string>());
            insert_oracle_event_strict(j.get<OracleEvent>(), path);
        });
        each_line("token_bridge", [&](const json& j) {
            put_token_mapping({j.at("asset_id").get<std::string>(), j.at("condition_id").get<std::string>(),
                               parse_token_source(j.at("source").get<std::string>())});
        });
        each_line("oracle_questions", [&](const json& j) {
            put_question(j.at("question_id").get<std::string>(), j.at("condition_id").get<std::string>());
        });
        each_line("negrisk_requests", [&](const json& j) {
            put_request(j.at("request_id").get<std::string>(), j.at("question_id").get<std::string>());
        });
        each_line("bridge_conflicts", [&](const json& j) {
            add_conflict({j.at("asset_id").get<std::string>(), j.at("kept").get<std::string>(),
                          parse_token_source(j.at("kept_source").get<std::string>()),
                          j.at("rejected").get<std::string>(),
                          parse_token_source(j.at("rejected_source").get<std::string>())});
        });
        each_line("registrations", [&](const json& j) { insert_registration(j.get<TokenRegistration>()); });
        each_line("block_timestamps", [&](const json& j) {
            cache_timestamp(j.at("block_number").get<std::uint64_t>(),
                            parse_iso8601(j.at("timestamp").get<std::string>()));
        });
        each_line("sync_state", [&](const json& j) {
            if (j.contains("layer")) {
                save_cursor({parse_layer(j.at("layer").get<std::string>()), j.at("position").get<std::uint64_t>()});
            } else {
                std::optional<Timestamp> at;
                if (j.contains("last_cycle_at")) at = parse_iso8601(j.at("last_cycle_at").get<std::string>());
                save_cycle(j.at("cycle_count").get<std::uint64_t>(), at);
            }
        });
        each_line("retry_queue", [&](const json& j) {
            RetryQueueEntry e{j.at("asset_id").get<std::string>(), j.at("first_seen_block").get<std::uint64_t>(),
                              j.value("attempts", 0u), j.at("pending_fills").get<std::uint64_t>(),
                              j.value("exhausted", false), std::nullopt};
            if (j.contains("last_attempt_cycle")) e.last_attempt_cycle = j.at("last_attempt_cycle").get<std::uint64_t>();
            put_retry(e);
        });
        each_line("quarantine", [&](const json& j) {
            quarantine({parse_layer(j.at("layer").get<std::string>()), j.at("position").get<std::uint64_t>(),
                        j.at("reason").get<std::string>()});
        });
        each_line("market_day", [&](const json& j) {
            MarketDaySummary r;
            r.market_id = j.at("market_id").get<std::string>();
            r.day = parse_day(j.at("day").get<std::string>());
            r.trade_count = j.at("trade_count").get<std::uint64_t>();
            r.value_base = j.at("total_trade_value_base").get<std::uint64_t>();
            r.fee_base = j.at("total_fee_base").get<std::uint64_t>();
            r.distinct_wallets = j.at("distinct_wallets").get<std::uint64_t>();
            if (j.contains("last_price_yes")) r.last_price_yes = j.at("last_price_yes").get<double>();
            put_summary(r);
        });
    });
}

}  // namespace pmdata
