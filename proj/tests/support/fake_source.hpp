#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "pmdata/errors.hpp"
#include "pmdata/sources.hpp"

namespace pmdata::test {

/// In-memory DataSource with hand-placed records; counts timestamp fetches.
class FakeSource final : public DataSource {
public:
    std::uint64_t head = 100;
    std::vector<MarketRecord> markets;
    std::vector<FillRecord> fills;
    std::vector<OracleEvent> events;
    std::vector<TokenRegistration> registrations;
    std::uint64_t timestamp_fetches = 0;
    Timestamp genesis = from_unix(1767225600);

    std::uint64_t head_block() const override { return head; }

    Poll<MarketRecord> poll_markets(const SourceCursor& cursor) override {
        require_layer(cursor, Layer::market);
        Poll<MarketRecord> out;
        for (std::size_t i = cursor.position; i < markets.size(); ++i) out.batch.push_back(markets[i]);
        out.next = {Layer::market, markets.size()};
        return out;
    }

    Scan<FillRecord> poll_fills(std::uint64_t from, std::uint64_t to) override {
        return {in_range(fills, from, to), {}};
    }
    Scan<OracleEvent> oracle_events_in(std::uint64_t from, std::uint64_t to) override {
        return {in_range(events, from, to), {}};
    }
    Scan<TokenRegistration> scan_token_registrations(std::uint64_t from, std::uint64_t to) override {
        return {in_range(registrations, from, to), {}};
    }

    Timestamp block_timestamp(std::uint64_t block) override {
        if (block > head) throw UnknownBlock(block);
        ++timestamp_fetches;
        return genesis + std::chrono::seconds(2 * block);
    }

private:
    template <typename T>
    static std::vector<T> in_range(const std::vector<T>& all, std::uint64_t from, std::uint64_t to) {
        require_range(from, to);
        std::vector<T> out;
        for (const auto& r : all) {
            if (r.block_number >= from && r.block_number <= to) out.push_back(r);
        }
        return out;
    }
};

}  // namespace pmdata::test
