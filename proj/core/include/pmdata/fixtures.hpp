#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "pmdata/simulator.hpp"

namespace pmdata {

/// Fixture directory layout: one canonical record per line.
///   markets.jsonl         metadata stream, in stream order
///   fills.jsonl           OrderFilled logs, (block, log_index) order
///   oracle_events.jsonl   oracle and adapter logs, (block, log_index) order
///   registrations.jsonl   TokenRegistered logs
///   blocks.jsonl          {"block_number", "timestamp"} for referenced blocks
///   manifest.json         head block and universe statistics
struct FixtureFiles {
    static constexpr const char* markets = "markets.jsonl";
    static constexpr const char* fills = "fills.jsonl";
    static constexpr const char* oracle_events = "oracle_events.jsonl";
    static constexpr const char* registrations = "registrations.jsonl";
    static constexpr const char* blocks = "blocks.jsonl";
    static constexpr const char* manifest = "manifest.json";
};

struct UniverseStats {
    std::size_t markets = 0;
    std::size_t withheld_markets = 0;
    std::size_t disputed_markets = 0;
    std::size_t traded_markets = 0;
    std::size_t fills = 0;
    std::size_t oracle_events = 0;
    std::size_t registrations = 0;
    std::map<std::string, std::size_t> events_by_type;
};

UniverseStats universe_stats(const Universe& universe);

/// Writes a fixture directory. Output is a pure function of the universe.
void write_fixtures(const Universe& universe, const std::filesystem::path& dir);

/// DataSource over a fixture directory. Everything is loaded up front;
/// undecodable lines are quarantined with their 1-based line number as
/// position and reported once, on the first poll of their layer.
class FixtureSource final : public DataSource {
public:
    explicit FixtureSource(const std::filesystem::path& dir);

    std::uint64_t head_block() const override { return head_; }
    void set_head(std::uint64_t block) { head_ = std::min(block, final_block_); }

    Poll<MarketRecord> poll_markets(const SourceCursor& cursor) override;
    Scan<FillRecord> poll_fills(std::uint64_t from_block, std::uint64_t to_block) override;
    Scan<OracleEvent> oracle_events_in(std::uint64_t from_block, std::uint64_t to_block) override;
    Scan<TokenRegistration> scan_token_registrations(std::uint64_t from_block,
                                                     std::uint64_t to_block) override;
    Timestamp block_timestamp(std::uint64_t block) override;

private:
    struct MarketLine {
        std::uint64_t position;
        std::optional<MarketRecord> record;
        std::string error;
    };

    std::vector<MarketLine> markets_;
    std::vector<FillRecord> fills_;
    std::vector<OracleEvent> oracle_events_;
    std::vector<TokenRegistration> registrations_;
    std::map<std::uint64_t, Timestamp> blocks_;
    std::vector<QuarantineEntry> fill_errors_, oracle_errors_, registration_errors_;
    bool fill_errors_reported_ = false;
    bool oracle_errors_reported_ = false;
    bool registration_errors_reported_ = false;
    std::uint64_t head_ = 0;
    std::uint64_t final_block_ = 0;
};

}  // namespace pmdata
