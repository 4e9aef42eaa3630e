#pragma once

#include <string>
#include <vector>

#include "pmdata/sources.hpp"

namespace pmdata {

struct LiveEndpoints {
    std::string metadata_api_url;  ///< market metadata HTTP API
    std::string chain_rpc_url;     ///< JSON-RPC endpoint of the chain
    std::vector<Address> fill_exchanges;
    std::vector<Address> oracle_contracts;
};

/// Placeholder for the production metadata-API and chain-RPC adapters. It
/// satisfies the DataSource contract but every call reports the source as
/// unavailable; the engine treats that as a transient failure.
class LiveSource final : public DataSource {
public:
    explicit LiveSource(LiveEndpoints endpoints) : endpoints_(std::move(endpoints)) {}

    const LiveEndpoints& endpoints() const { return endpoints_; }

    std::uint64_t head_block() const override;
    Poll<MarketRecord> poll_markets(const SourceCursor& cursor) override;
    Scan<FillRecord> poll_fills(std::uint64_t from_block, std::uint64_t to_block) override;
    Scan<OracleEvent> oracle_events_in(std::uint64_t from_block, std::uint64_t to_block) override;
    Scan<TokenRegistration> scan_token_registrations(std::uint64_t from_block,
                                                     std::uint64_t to_block) override;
    Timestamp block_timestamp(std::uint64_t block) override;

private:
    [[noreturn]] void unavailable(const char* what) const;

    LiveEndpoints endpoints_;
};

}  // namespace pmdata
