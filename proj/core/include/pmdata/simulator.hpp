#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmdata/sources.hpp"

namespace pmdata {

/// Fee rate that starts applying to one category on a given simulation day.
struct FeeStep {
    int start_day = 0;
    std::string category;
    double rate = 0.0;

    bool operator==(const FeeStep&) const = default;
};

/// Deterministic market-lifecycle generator settings.
struct SimConfig {
    std::uint64_t seed = 7;
    int n_markets = 100;
    double dispute_rate = 0.05;
    /// Zero fees until a category's first step; later steps override earlier ones.
    std::vector<FeeStep> fee_regime;
    double trades_mean = 12.0;
    /// Negative-binomial shape; larger means less over-dispersed.
    double trades_dispersion = 2.0;
    int horizon_days = 30;

    Timestamp genesis_time = from_unix(1767225600);  // 2026-01-01T00:00:00Z
    std::uint64_t genesis_block = 1'000'000;
    int block_time_seconds = 2;

    /// Exact share of markets missing from the metadata stream (registered on chain).
    double withheld_fraction = 0.0;
    /// Exact share of markets whose metadata arrives after their first trade.
    double late_metadata_fraction = 0.0;
    double negrisk_fraction = 0.2;
    /// Exact share of all oracle events stripped to indirect identifiers only.
    double indirect_oracle_fraction = 0.0;
    double tie_rate = 0.01;
    std::vector<std::string> topics{"Sports", "Crypto", "Politics", "Games", "Science", "Culture"};

    /// Throws InvalidConfig.
    void validate() const;

    bool operator==(const SimConfig&) const = default;
};

/// Fixed contract addresses used by the simulator.
struct SimContracts {
    static constexpr const char* ctf_exchange = "0x4bfb0000000000000000000000000000000000e1";
    static constexpr const char* negrisk_exchange = "0xc5d50000000000000000000000000000000000e2";
    static constexpr const char* uma_adapter = "0x6a9d0000000000000000000000000000000000a1";
    static constexpr const char* negrisk_adapter = "0xd91e0000000000000000000000000000000000a2";
    static constexpr const char* optimistic_oracle = "0xee3a0000000000000000000000000000000000a3";
};

struct SimMarket {
    MarketRecord record;  ///< api form, as the metadata stream would serve it
    ExchangeContract exchange = ExchangeContract::ctf_exchange;
    bool withheld = false;
    bool late_metadata = false;
    bool disputed = false;
    std::uint64_t listing_block = 0;
    std::uint64_t metadata_block = 0;  ///< first block at which metadata is visible
    std::uint64_t settle_block = 0;
    double outcome = 0.0;  ///< settled YES price
    std::size_t fill_count = 0;
    std::optional<std::string> request_id;  ///< negative-risk request id
};

/// Immutable event universe backing every poll operation of a SimulatorSource.
struct Universe {
    SimConfig config;
    std::vector<SimMarket> markets;
    /// Indices into `markets` in metadata stream order; withheld markets absent.
    std::vector<std::size_t> metadata_stream;
    std::vector<TokenRegistration> registrations;
    std::vector<FillRecord> fills;          ///< market_id and block_timestamp unset
    std::vector<OracleEvent> oracle_events;  ///< market_id and timestamp unset
    std::uint64_t final_block = 0;

    Timestamp timestamp_of(std::uint64_t block) const;
    std::uint64_t blocks_per_day() const;
    /// Condition id of the market owning `token`, if any.
    std::optional<ConditionId> market_of_token(const TokenId& token) const;
};

/// Same seed and config always yields an identical universe.
/// Throws InvalidConfig.
Universe generate_lifecycle(const SimConfig& config);

/// Reference DataSource over a generated universe. The visible head can be
/// moved to emulate a live chain; metadata appears once its block is visible.
class SimulatorSource final : public DataSource {
public:
    explicit SimulatorSource(std::shared_ptr<const Universe> universe);

    const Universe& universe() const { return *universe_; }

    /// Clamped to [genesis_block, final_block].
    void set_head(std::uint64_t block);

    std::uint64_t head_block() const override { return head_.load(); }
    Poll<MarketRecord> poll_markets(const SourceCursor& cursor) override;
    Scan<FillRecord> poll_fills(std::uint64_t from_block, std::uint64_t to_block) override;
    Scan<OracleEvent> oracle_events_in(std::uint64_t from_block, std::uint64_t to_block) override;
    Scan<TokenRegistration> scan_token_registrations(std::uint64_t from_block,
                                                     std::uint64_t to_block) override;
    Timestamp block_timestamp(std::uint64_t block) override;

    /// Number of block_timestamp calls served.
    std::uint64_t timestamp_fetches() const { return timestamp_fetches_.load(); }

private:
    std::shared_ptr<const Universe> universe_;
    std::atomic<std::uint64_t> head_;
    std::atomic<std::uint64_t> timestamp_fetches_{0};
};

}  // namespace pmdata
