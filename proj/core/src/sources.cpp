#include "pmdata/sources.hpp"

#include <algorithm>

#include "pmdata/errors.hpp"

namespace pmdata {

void require_layer(const SourceCursor& cursor, Layer expected) {
    if (cursor.layer != expected) {
        throw PreconditionViolation("cursor for layer " + std::string(to_string(cursor.layer)) +
                                    " used on layer " + std::string(to_string(expected)));
    }
}

void require_range(std::uint64_t from_block, std::uint64_t to_block) {
    if (from_block > to_block) {
        throw PreconditionViolation("block range is inverted: " + std::to_string(from_block) + " > " +
                                    std::to_string(to_block));
    }
}

Poll<OracleEvent> DataSource::poll_oracle_events(const SourceCursor& cursor, std::uint64_t up_to) {
    require_layer(cursor, Layer::oracle);
    const std::uint64_t limit = std::min(head_block(), up_to);
    if (limit <= cursor.position) return {{}, cursor, {}};
    auto scan = oracle_events_in(cursor.position + 1, limit);
    return {std::move(scan.records), SourceCursor{Layer::oracle, limit}, std::move(scan.quarantined)};
}

}  // namespace pmdata
