#include "pmdata/live.hpp"

#include "pmdata/errors.hpp"

namespace pmdata {

void LiveSource::unavailable(const char* what) const {
    const std::string& url = endpoints_.chain_rpc_url.empty() ? endpoints_.metadata_api_url
                                                              : endpoints_.chain_rpc_url;
    throw SourceUnavailable(std::string("live adapter not wired: ") + what +
                            (url.empty() ? " (no endpoint configured)" : " via " + url));
}

std::uint64_t LiveSource::head_block() const { unavailable("head_block"); }

Poll<MarketRecord> LiveSource::poll_markets(const SourceCursor& cursor) {
    require_layer(cursor, Layer::market);
    unavailable("poll_markets");
}

Scan<FillRecord> LiveSource::poll_fills(std::uint64_t from_block, std::uint64_t to_block) {
    require_range(from_block, to_block);
    unavailable("poll_fills");
}

Scan<OracleEvent> LiveSource::oracle_events_in(std::uint64_t from_block, std::uint64_t to_block) {
    require_range(from_block, to_block);
    unavailable("oracle_events_in");
}

Scan<TokenRegistration> LiveSource::scan_token_registrations(std::uint64_t from_block,
                                                             std::uint64_t to_block) {
    require_range(from_block, to_block);
    unavailable("scan_token_registrations");
}

Timestamp LiveSource::block_timestamp(std::uint64_t) { unavailable("block_timestamp"); }

}  // namespace pmdata
