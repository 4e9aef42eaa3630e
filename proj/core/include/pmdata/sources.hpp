#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "pmdata/model.hpp"

namespace pmdata {

/// Position within one layer's stream. Chain layers count blocks (the last
/// fully scanned block); the market layer counts metadata stream entries.
struct SourceCursor {
    Layer layer = Layer::market;
    std::uint64_t position = 0;

    auto operator<=>(const SourceCursor&) const = default;
};

/// A record the source could not decode. It is skipped, never retried.
struct QuarantineEntry {
    Layer layer = Layer::market;
    std::uint64_t position = 0;
    std::string reason;

    auto operator<=>(const QuarantineEntry&) const = default;
};

template <typename T>
struct Poll {
    std::vector<T> batch;
    SourceCursor next;
    std::vector<QuarantineEntry> quarantined;
};

template <typename T>
struct Scan {
    std::vector<T> records;
    std::vector<QuarantineEntry> quarantined;
};

/// Pull-based access to the three data layers plus on-chain registrations
/// and block timestamps. An instance has a single consumer per layer;
/// different layers may be polled from different threads.
class DataSource {
public:
    virtual ~DataSource() = default;

    /// Highest block currently visible to this source.
    virtual std::uint64_t head_block() const = 0;

    /// Every metadata record strictly after `cursor`, in stream order.
    virtual Poll<MarketRecord> poll_markets(const SourceCursor& cursor) = 0;

    /// Fills from both exchanges in [from_block, to_block], ordered by
    /// (block_number, log_index), market_id unset.
    virtual Scan<FillRecord> poll_fills(std::uint64_t from_block, std::uint64_t to_block) = 0;

    /// Oracle and adapter events in [from_block, to_block], position-ordered.
    virtual Scan<OracleEvent> oracle_events_in(std::uint64_t from_block,
                                               std::uint64_t to_block) = 0;

    virtual Scan<TokenRegistration> scan_token_registrations(std::uint64_t from_block,
                                                             std::uint64_t to_block) = 0;

    /// Throws UnknownBlock.
    virtual Timestamp block_timestamp(std::uint64_t block) = 0;

    /// Events after `cursor` up to min(head, up_to). An exhausted stream
    /// returns an empty batch and the same cursor.
    Poll<OracleEvent> poll_oracle_events(const SourceCursor& cursor,
                                         std::uint64_t up_to = UINT64_MAX);
};

void require_layer(const SourceCursor& cursor, Layer expected);
void require_range(std::uint64_t from_block, std::uint64_t to_block);

}  // namespace pmdata
