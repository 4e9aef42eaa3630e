#include "pmdata/ingestion.hpp"

#include <algorithm>
#include <future>

#include "pmdata/errors.hpp"
#include "pmdata/simulator.hpp"

namespace pmdata {

using nlohmann::json;

namespace {

template <typename Codes>
std::string describe(std::string_view key, const Codes& violations) {
    std::string out(key);
    out += ':';
    for (std::size_t i = 0; i < violations.size(); ++i) {
        out += i == 0 ? " " : ",";
        out += to_string(violations[i]);
    }
    return out;
}

std::string log_key(const TxHash& tx, std::uint64_t log_index) {
    return tx + "#" + std::to_string(log_index);
}

}  // namespace

// --- timestamps ------------------------------------------------------------------

std::map<std::uint64_t, Timestamp> TimestampCache::timestamps_for(const std::set<std::uint64_t>& blocks) {
    std::map<std::uint64_t, Timestamp> out;
    for (auto block : blocks) {
        if (enabled_) {
            if (auto cached = store_.cached_timestamp(block)) {
                ++hits_;
                out.emplace(block, *cached);
                continue;
            }
        }
        ++misses_;
        Timestamp t = source_.block_timestamp(block);
        if (enabled_) store_.cache_timestamp(block, t);
        out.emplace(block, t);
    }
    return out;
}

Timestamp TimestampCache::get(std::uint64_t block) { return timestamps_for({block}).at(block); }

// --- reports -----------------------------------------------------------------------

json CycleReport::to_json() const {
    return json{{"cycle", cycle},
                {"head_block", head_block},
                {"cursors",
                 {{"market", market_cursor.position},
                  {"fill", fill_cursor.position},
                  {"oracle", oracle_cursor.position}}},
                {"market",
                 {{"polled", markets_polled},
                  {"inserted", markets.inserted},
                  {"replaced", markets.replaced},
                  {"unchanged", markets.unchanged},
                  {"kept_existing", markets.kept_existing},
                  {"quarantined", markets.quarantined},
                  {"new_token_entries", markets.new_token_entries},
                  {"conflicts", markets.conflicts}}},
                {"fill",
                 {{"polled", fills_polled},
                  {"inserted", fills.inserted},
                  {"duplicate", fills.duplicate},
                  {"unresolved", fills.unresolved},
                  {"quarantined", fills.quarantined},
                  {"registrations_scanned", registrations_scanned},
                  {"registrations_inserted", registrations_inserted},
                  {"retry_resolved", retry.resolved},
                  {"retry_exhausted", retry.exhausted},
                  {"recovered_markets", retry.recovered},
                  {"summary_rows", summary_rows}}},
                {"oracle",
                 {{"polled", oracle_polled},
                  {"inserted", oracle.inserted},
                  {"duplicate", oracle.duplicate},
                  {"linked", oracle.linked},
                  {"unlinked", oracle.unlinked},
                  {"quarantined", oracle.quarantined},
                  {"relinked", relinked}}},
                {"source_quarantined", source_quarantined},
                {"timestamps", {{"hits", timestamp_hits}, {"misses", timestamp_misses}}}};
}

// --- engine ------------------------------------------------------------------------

SyncEngine::SyncEngine(Store& store, DataSource& source, EngineOptions options)
    : store_(store), source_(source), options_(std::move(options)),
      timestamps_(store, source, options_.timestamp_cache) {
    options_.recovery_oracles.try_emplace(ExchangeContract::ctf_exchange, SimContracts::uma_adapter);
    options_.recovery_oracles.try_emplace(ExchangeContract::negrisk_exchange, SimContracts::negrisk_adapter);
    if (options_.retry_max_attempts == 0) throw InvalidConfig("retry_max_attempts must be positive");
    reload();
}

void SyncEngine::reload() {
    tokens_ = TokenBridge{};
    for (const auto& m : store_.token_mappings()) tokens_.insert(m);
    oracle_ = OracleBridge{};
    for (const auto& [q, c] : store_.questions()) oracle_.add_question(q, c);
    for (const auto& [r, q] : store_.requests()) oracle_.add_request(r, q);
    markets_ = store_.market_ids();
    dirty_days_.clear();
}

void SyncEngine::crash(CrashPoint point) {
    if (crash_hook_) crash_hook_(point);
}

void SyncEngine::persist_registration(const MarketRecord& market, TokenBridge::RegisterResult&& result) {
    std::vector<TokenId> tokens = market.tokens();
    for (const auto* t : {&market.yes_token, &market.no_token}) {
        if (!t->empty() && std::find(tokens.begin(), tokens.end(), *t) == tokens.end()) tokens.push_back(*t);
    }
    for (const auto& token : tokens) {
        if (auto mapping = tokens_.lookup(token)) store_.put_token_mapping(*mapping);
    }
    for (const auto& conflict : result.conflicts) store_.add_conflict(conflict);
    for (const auto& token : result.remapped) {
        auto days = store_.link_fills(token, *tokens_.resolve(token));
        dirty_days_.insert(days.begin(), days.end());
    }
}

MarketIngest SyncEngine::ingest_markets(const std::vector<MarketRecord>& batch, std::uint64_t position) {
    MarketIngest out;
    try {
        store_.transact([&] {
            for (const auto& record : batch) {
                auto violations = validate_market(record);
                if (!violations.empty()) {
                    store_.quarantine({Layer::market, position, describe(record.condition_id, violations)});
                    ++out.quarantined;
                    continue;
                }
                switch (store_.upsert_market(record)) {
                    case Store::MarketWrite::inserted: ++out.inserted; break;
                    case Store::MarketWrite::replaced: ++out.replaced; break;
                    case Store::MarketWrite::unchanged: ++out.unchanged; break;
                    case Store::MarketWrite::kept_existing: ++out.kept_existing; continue;
                }
                markets_.insert(record.condition_id);
                auto result = tokens_.register_market_tokens(record);
                out.new_token_entries += result.new_entries;
                out.conflicts += result.conflicts.size();
                persist_registration(record, std::move(result));
            }
        });
    } catch (...) {
        reload();
        throw;
    }
    return out;
}

void SyncEngine::fill_timestamps(std::vector<FillRecord>& fills) {
    if (timestamps_.enabled()) {
        std::set<std::uint64_t> blocks;
        for (const auto& f : fills) {
            if (!f.meta.block_timestamp) blocks.insert(f.block_number);
        }
        auto known = timestamps_.timestamps_for(blocks);
        for (auto& f : fills) {
            if (!f.meta.block_timestamp) f.meta.block_timestamp = known.at(f.block_number);
        }
    } else {
        for (auto& f : fills) {
            if (!f.meta.block_timestamp) f.meta.block_timestamp = timestamps_.get(f.block_number);
        }
    }
}

void SyncEngine::fill_timestamps(std::vector<OracleEvent>& events) {
    if (timestamps_.enabled()) {
        std::set<std::uint64_t> blocks;
        for (const auto& e : events) {
            if (!e.timestamp) blocks.insert(e.block_number);
        }
        auto known = timestamps_.timestamps_for(blocks);
        for (auto& e : events) {
            if (!e.timestamp) e.timestamp = known.at(e.block_number);
        }
    } else {
        for (auto& e : events) {
            if (!e.timestamp) e.timestamp = timestamps_.get(e.block_number);
        }
    }
}

FillIngest SyncEngine::ingest_fills(const std::vector<FillRecord>& batch) {
    FillIngest out;
    try {
        store_.transact([&] {
            std::vector<FillRecord> records = batch;
            fill_timestamps(records);
            for (auto& fill : records) {
                auto violations = validate_fill(fill);
                if (!violations.empty()) {
                    store_.quarantine(
                        {Layer::fill, fill.block_number, describe(log_key(fill.tx_hash, fill.log_index), violations)});
                    ++out.quarantined;
                    continue;
                }
                fill.market_id = tokens_.resolve(fill.asset_id);
                if (!store_.insert_fill(fill)) {
                    ++out.duplicate;
                    continue;
                }
                ++out.inserted;
                if (fill.market_id) {
                    dirty_days_.insert(day_of(*fill.meta.block_timestamp));
                    continue;
                }
                ++out.unresolved;
                auto entry = store_.get_retry(fill.asset_id)
                                 .value_or(RetryQueueEntry{fill.asset_id, fill.block_number, 0, 0, false, std::nullopt});
                ++entry.pending_fills;
                store_.put_retry(entry);
            }
        });
    } catch (...) {
        reload();
        throw;
    }
    return out;
}

std::optional<MarketRecord> SyncEngine::recover_market(const TokenId& asset_id) {
    if (auto condition = tokens_.resolve(asset_id)) return store_.get_market(*condition);
    auto registration = store_.registration_for_token(asset_id);
    if (!registration) return std::nullopt;

    MarketRecord market;
    market.condition_id = registration->condition_id;
    market.oracle_address = options_.recovery_oracles.at(registration->source_contract);
    market.yes_token = registration->token0;
    market.no_token = registration->token1;
    market.provenance = Provenance::onchain_recovered;
    market.metadata.slug = "recovered-" + registration->condition_id.substr(2, 16);

    std::optional<MarketRecord> out;
    try {
        store_.transact([&] {
            if (auto existing = store_.get_market(market.condition_id)) {
                persist_registration(market, tokens_.register_market_tokens(market));
                out = std::move(existing);
                return;
            }
            market.metadata.created_at = timestamps_.get(registration->block_number);
            store_.insert_market(market);
            markets_.insert(market.condition_id);
            persist_registration(market, tokens_.register_market_tokens(market));
            out = market;
        });
    } catch (...) {
        reload();
        throw;
    }
    return out;
}

RetryOutcome SyncEngine::process_retry_queue(std::uint32_t max_attempts) {
    if (max_attempts == 0) throw PreconditionViolation("max_attempts must be positive");
    RetryOutcome out;
    const std::uint64_t cycle = store_.load_sync_state().cycle_count + 1;
    try {
        store_.transact([&] {
            for (auto entry : store_.retry_queue()) {
                auto market = tokens_.resolve(entry.asset_id);
                if (!market && !entry.exhausted && options_.onchain_recovery) {
                    const auto before = markets_.size();
                    if (auto recovered = recover_market(entry.asset_id)) {
                        market = recovered->condition_id;
                        if (markets_.size() > before) ++out.recovered;
                    }
                }
                if (market) {
                    auto days = store_.link_fills(entry.asset_id, *market);
                    dirty_days_.insert(days.begin(), days.end());
                    store_.remove_retry(entry.asset_id);
                    ++out.resolved;
                    continue;
                }
                if (entry.exhausted) continue;
                ++entry.attempts;
                entry.last_attempt_cycle = cycle;
                if (!options_.retry) {
                    store_.remove_retry(entry.asset_id);
                    continue;
                }
                if (entry.attempts >= max_attempts) {
                    entry.exhausted = true;
                    ++out.exhausted;
                }
                store_.put_retry(entry);
            }
        });
    } catch (...) {
        reload();
        throw;
    }
    return out;
}

OracleIngest SyncEngine::ingest_oracle(const std::vector<OracleEvent>& batch) {
    OracleIngest out;
    auto exists = [this](const ConditionId& c) { return markets_.contains(c); };
    try {
        store_.transact([&] {
            std::vector<OracleEvent> events = batch;
            fill_timestamps(events);
            for (auto& event : events) {
                if (event.settled_price && !is_standard_settlement(*event.settled_price)) {
                    event.meta.try_emplace(std::string(kMetaNonstandardSettlement), "true");
                }
                auto violations = validate_oracle_event(event);
                if (!violations.empty()) {
                    store_.quarantine({Layer::oracle, event.block_number,
                                       describe(log_key(event.tx_hash, event.log_index), violations)});
                    ++out.quarantined;
                    continue;
                }
                oracle_.learn(event);
                if (event.event_type == OracleEventType::initialize && event.question_id) {
                    if (auto c = oracle_.condition_of(*event.question_id)) store_.put_question(*event.question_id, *c);
                    if (auto it = event.meta.find(kMetaRequestId); it != event.meta.end()) {
                        if (auto q = oracle_.question_of_request(it->second)) store_.put_request(it->second, *q);
                    }
                }
                event.market_id.reset();
                auto resolution = oracle_.resolve(event, options_.bridge_paths, exists);
                std::optional<ResolutionPath> path;
                if (resolution) {
                    event.market_id = resolution->market_id;
                    path = resolution->path;
                }
                if (!store_.insert_oracle_event(event, path)) {
                    ++out.duplicate;
                    continue;
                }
                ++out.inserted;
                resolution ? ++out.linked : ++out.unlinked;
            }
        });
    } catch (...) {
        reload();
        throw;
    }
    return out;
}

std::size_t SyncEngine::relink_oracle() {
    std::size_t linked = 0;
    auto exists = [this](const ConditionId& c) { return markets_.contains(c); };
    try {
        store_.transact([&] {
            for (const auto& stored : store_.unlinked_oracle_events()) {
                if (auto r = oracle_.resolve(stored.event, options_.bridge_paths, exists)) {
                    store_.link_oracle_event({stored.event.tx_hash, stored.event.log_index}, *r);
                    ++linked;
                }
            }
        });
    } catch (...) {
        reload();
        throw;
    }
    return linked;
}

std::size_t SyncEngine::flush_summaries() {
    auto days = std::move(dirty_days_);
    dirty_days_.clear();
    try {
        return store_.materialize_days(days);
    } catch (...) {
        reload();
        throw;
    }
}

// --- cycles --------------------------------------------------------------------------

struct SyncEngine::Polled {
    Poll<MarketRecord> markets;
    Scan<TokenRegistration> registrations;
    Scan<FillRecord> fills;
    Scan<OracleEvent> oracle;
};

SyncEngine::Polled SyncEngine::poll(const LayerRange& fills, const LayerRange& oracle) {
    const SourceCursor market_cursor = store_.load_sync_state().cursor(Layer::market);
    auto poll_markets = [&] { return source_.poll_markets(market_cursor); };
    auto poll_chain = [&] {
        std::pair<Scan<TokenRegistration>, Scan<FillRecord>> out;
        if (fills.empty()) return out;
        if (options_.onchain_recovery) out.first = source_.scan_token_registrations(fills.from, fills.to);
        out.second = source_.poll_fills(fills.from, fills.to);
        return out;
    };
    auto poll_oracle = [&] {
        return oracle.empty() ? Scan<OracleEvent>{} : source_.oracle_events_in(oracle.from, oracle.to);
    };

    Polled out;
    if (options_.parallel_polls) {
        auto m = std::async(std::launch::async, poll_markets);
        auto c = std::async(std::launch::async, poll_chain);
        auto o = std::async(std::launch::async, poll_oracle);
        out.markets = m.get();
        std::tie(out.registrations, out.fills) = c.get();
        out.oracle = o.get();
    } else {
        out.markets = poll_markets();
        std::tie(out.registrations, out.fills) = poll_chain();
        out.oracle = poll_oracle();
    }
    return out;
}

CycleReport SyncEngine::process(const LayerRange& fill_range, const LayerRange& oracle_range, bool contiguous) {
    CycleReport report;
    const auto hits_before = timestamps_.hits();
    const auto misses_before = timestamps_.misses();
    report.head_block = source_.head_block();
    Polled polled = poll(fill_range, oracle_range);

    auto advance = [&](Layer layer, std::uint64_t to) {
        auto current = store_.load_sync_state().cursor(layer);
        if (to > current.position) store_.save_cursor({layer, to});
    };

    try {
        store_.transact([&] {
            for (const auto& q : polled.markets.quarantined) store_.quarantine(q);
            report.source_quarantined += polled.markets.quarantined.size();
            report.markets_polled = polled.markets.batch.size();
            report.markets = ingest_markets(polled.markets.batch, polled.markets.next.position);
            advance(Layer::market, polled.markets.next.position);
        });
        crash(CrashPoint::after_market_commit);

        store_.transact([&] {
            for (const auto& q : polled.registrations.quarantined) store_.quarantine(q);
            for (const auto& q : polled.fills.quarantined) store_.quarantine(q);
            report.source_quarantined += polled.registrations.quarantined.size() + polled.fills.quarantined.size();
            report.registrations_scanned = polled.registrations.records.size();
            for (const auto& r : polled.registrations.records) {
                if (store_.insert_registration(r)) ++report.registrations_inserted;
            }
            report.fills_polled = polled.fills.records.size();
            report.fills = ingest_fills(polled.fills.records);
            report.retry = process_retry_queue(options_.retry_max_attempts);
            report.summary_rows = flush_summaries();
            if (!fill_range.empty() && contiguous) {
                advance(Layer::fill, fill_range.to);
                if (options_.onchain_recovery) advance(Layer::registration, fill_range.to);
            }
        });
        crash(CrashPoint::after_fill_commit);

        store_.transact([&] {
            for (const auto& q : polled.oracle.quarantined) store_.quarantine(q);
            report.source_quarantined += polled.oracle.quarantined.size();
            report.oracle_polled = polled.oracle.records.size();
            report.oracle = ingest_oracle(polled.oracle.records);
            report.relinked = relink_oracle();
            if (!oracle_range.empty() && contiguous) advance(Layer::oracle, oracle_range.to);
        });
        crash(CrashPoint::after_oracle_commit);
    } catch (...) {
        reload();
        throw;
    }

    auto state = store_.load_sync_state();
    report.market_cursor = state.cursor(Layer::market);
    report.fill_cursor = state.cursor(Layer::fill);
    report.oracle_cursor = state.cursor(Layer::oracle);
    report.timestamp_hits = timestamps_.hits() - hits_before;
    report.timestamp_misses = timestamps_.misses() - misses_before;
    return report;
}

CycleReport SyncEngine::run_cycle() {
    const std::uint64_t head = source_.head_block();
    const std::uint64_t target = head >= options_.confirmation_depth ? head - options_.confirmation_depth : 0;
    const SyncState state = store_.load_sync_state();

    auto range_for = [&](Layer layer) {
        LayerRange r{state.cursor(layer).position + 1, target};
        if (options_.max_blocks_per_cycle > 0 && !r.empty()) {
            r.to = std::min(r.to, r.from + options_.max_blocks_per_cycle - 1);
        }
        return r;
    };
    CycleReport report = process(range_for(Layer::fill), range_for(Layer::oracle), true);

    std::optional<Timestamp> at;
    try {
        at = source_.block_timestamp(head);
    } catch (const UnknownBlock&) {
    }
    report.cycle = state.cycle_count + 1;
    store_.transact([&] { store_.save_cycle(report.cycle, at); });
    crash(CrashPoint::after_cycle_commit);
    return report;
}

std::vector<CycleReport> SyncEngine::backfill(std::uint64_t from, std::uint64_t to, std::uint64_t window,
                                              std::uint64_t step) {
    require_range(from, to);
    if (window == 0) window = to - from + 1;
    if (step == 0) step = window;
    if (step > window) throw PreconditionViolation("backfill step larger than window leaves gaps");

    std::vector<CycleReport> reports;
    for (std::uint64_t a = from;; a += step) {
        const std::uint64_t b = std::min(to, a + window - 1);
        const auto state = store_.load_sync_state();
        // A layer that has never been synced starts wherever the backfill starts.
        auto joins = [&](Layer layer) {
            return !state.cursors.contains(layer) || a <= state.cursor(layer).position + 1;
        };
        const bool contiguous = joins(Layer::fill) && joins(Layer::oracle);
        reports.push_back(process({a, b}, {a, b}, contiguous));
        if (b == to) break;
    }
    return reports;
}

}  // namespace pmdata
