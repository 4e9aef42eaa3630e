#include "pmdata/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "pmdata/records.hpp"

namespace pmdata {

namespace fs = std::filesystem;
using nlohmann::json;

UniverseStats universe_stats(const Universe& u) {
    UniverseStats s;
    s.markets = u.markets.size();
    for (const auto& m : u.markets) {
        if (m.withheld) ++s.withheld_markets;
        if (m.disputed) ++s.disputed_markets;
        if (m.fill_count > 0) ++s.traded_markets;
    }
    s.fills = u.fills.size();
    s.oracle_events = u.oracle_events.size();
    s.registrations = u.registrations.size();
    for (const auto& type : {OracleEventType::initialize, OracleEventType::request, OracleEventType::propose,
                             OracleEventType::dispute, OracleEventType::settle}) {
        s.events_by_type[std::string(to_string(type))] = 0;
    }
    for (const auto& e : u.oracle_events) ++s.events_by_type[std::string(to_string(e.event_type))];
    return s;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

template <typename Range>
void write_lines(const fs::path& path, const Range& records) {
    auto out = open_out(path);
    for (const auto& r : records) out << to_record_line(r) << '\n';
}

template <typename T>
void read_chain_file(const fs::path& path, Layer layer, std::vector<T>& records,
                     std::vector<QuarantineEntry>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(parse_record_line<T>(line));
        } catch (const Error& e) {
            errors.push_back({layer, line_no, e.what()});
        }
    }
    std::stable_sort(records.begin(), records.end(), [](const T& a, const T& b) {
        return std::tie(a.block_number, a.log_index) < std::tie(b.block_number, b.log_index);
    });
}

template <typename T>
std::vector<T> block_slice(const std::vector<T>& sorted, std::uint64_t from, std::uint64_t to) {
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), from,
                               [](const T& r, std::uint64_t b) { return r.block_number < b; });
    auto hi = std::upper_bound(sorted.begin(), sorted.end(), to,
                               [](std::uint64_t b, const T& r) { return b < r.block_number; });
    return {lo, hi};
}

}  // namespace

void write_fixtures(const Universe& u, const fs::path& dir) {
    fs::create_directories(dir);
    {
        auto out = open_out(dir / FixtureFiles::markets);
        for (auto idx : u.metadata_stream) out << to_record_line(u.markets[idx].record) << '\n';
    }
    write_lines(dir / FixtureFiles::fills, u.fills);
    write_lines(dir / FixtureFiles::oracle_events, u.oracle_events);
    write_lines(dir / FixtureFiles::registrations, u.registrations);

    std::set<std::uint64_t> blocks{u.config.genesis_block, u.final_block};
    for (const auto& f : u.fills) blocks.insert(f.block_number);
    for (const auto& e : u.oracle_events) blocks.insert(e.block_number);
    for (const auto& r : u.registrations) blocks.insert(r.block_number);
    {
        auto out = open_out(dir / FixtureFiles::blocks);
        for (auto b : blocks) {
            out << json{{"block_number", b}, {"timestamp", format_iso8601(u.timestamp_of(b))}}.dump() << '\n';
        }
    }

    const auto stats = universe_stats(u);
    json manifest{{"head_block", u.final_block},
                  {"genesis_block", u.config.genesis_block},
                  {"seed", u.config.seed},
                  {"markets", stats.markets},
                  {"withheld_markets", stats.withheld_markets},
                  {"disputed_markets", stats.disputed_markets},
                  {"traded_markets", stats.traded_markets},
                  {"fills", stats.fills},
                  {"oracle_events", stats.oracle_events},
                  {"registrations", stats.registrations},
                  {"events_by_type", stats.events_by_type}};
    open_out(dir / FixtureFiles::manifest) << manifest.dump(2) << '\n';
}

FixtureSource::FixtureSource(const fs::path& dir) {
    std::ifstream manifest_in(dir / FixtureFiles::manifest);
    if (!manifest_in) throw SourceUnavailable("fixture manifest missing in " + dir.string());
    try {
        final_block_ = json::parse(manifest_in).at("head_block").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw DecodeError(std::string("fixture manifest: ") + e.what());
    }
    head_ = final_block_;

    std::ifstream markets_in(dir / FixtureFiles::markets, std::ios::binary);
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(markets_in, line)) {
        ++line_no;
        MarketLine entry{line_no, std::nullopt, {}};
        try {
            entry.record = parse_record_line<MarketRecord>(line);
        } catch (const Error& e) {
            entry.error = e.what();
        }
        markets_.push_back(std::move(entry));
    }
    read_chain_file(dir / FixtureFiles::fills, Layer::fill, fills_, fill_errors_);
    read_chain_file(dir / FixtureFiles::oracle_events, Layer::oracle, oracle_events_, oracle_errors_);
    read_chain_file(dir / FixtureFiles::registrations, Layer::registration, registrations_,
                    registration_errors_);

    std::ifstream blocks_in(dir / FixtureFiles::blocks, std::ios::binary);
    while (std::getline(blocks_in, line)) {
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            blocks_.emplace(j.at("block_number").get<std::uint64_t>(),
                            parse_iso8601(j.at("timestamp").get<std::string>()));
        } catch (const json::exception& e) {
            throw DecodeError(std::string("blocks.jsonl: ") + e.what());
        }
    }
}

Poll<MarketRecord> FixtureSource::poll_markets(const SourceCursor& cursor) {
    require_layer(cursor, Layer::market);
    if (cursor.position >= markets_.size()) return {{}, cursor, {}};
    Poll<MarketRecord> out;
    for (std::size_t i = cursor.position; i < markets_.size(); ++i) {
        const auto& entry = markets_[i];
        if (entry.record) {
            out.batch.push_back(*entry.record);
        } else {
            out.quarantined.push_back({Layer::market, entry.position, entry.error});
        }
    }
    out.next = SourceCursor{Layer::market, markets_.size()};
    return out;
}

Scan<FillRecord> FixtureSource::poll_fills(std::uint64_t from_block, std::uint64_t to_block) {
    require_range(from_block, to_block);
    Scan<FillRecord> out;
    if (!std::exchange(fill_errors_reported_, true)) out.quarantined = fill_errors_;
    to_block = std::min(to_block, head_);
    if (from_block <= to_block) out.records = block_slice(fills_, from_block, to_block);
    return out;
}

Scan<OracleEvent> FixtureSource::oracle_events_in(std::uint64_t from_block, std::uint64_t to_block) {
    require_range(from_block, to_block);
    Scan<OracleEvent> out;
    if (!std::exchange(oracle_errors_reported_, true)) out.quarantined = oracle_errors_;
    to_block = std::min(to_block, head_);
    if (from_block <= to_block) out.records = block_slice(oracle_events_, from_block, to_block);
    return out;
}

Scan<TokenRegistration> FixtureSource::scan_token_registrations(std::uint64_t from_block,
                                                                std::uint64_t to_block) {
    require_range(from_block, to_block);
    Scan<TokenRegistration> out;
    if (!std::exchange(registration_errors_reported_, true)) out.quarantined = registration_errors_;
    to_block = std::min(to_block, head_);
    if (from_block <= to_block) out.records = block_slice(registrations_, from_block, to_block);
    return out;
}

Timestamp FixtureSource::block_timestamp(std::uint64_t block) {
    auto it = blocks_.find(block);
    if (it == blocks_.end()) throw UnknownBlock(block);
    return it->second;
}

}  // namespace pmdata
