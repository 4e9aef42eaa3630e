#include "pmdata/analytics/oracle_risk.hpp"

#include <algorithm>
#include <cmath>

#include "pmdata/analytics/stats.hpp"
#include "pmdata/errors.hpp"

namespace pmdata::analytics {

std::string_view to_string(AnchorKind v) {
    return v == AnchorKind::first_dispute ? "first_dispute" : "last_propose";
}

std::optional<AnchorPoint> oracle_risk_anchor(const std::vector<OracleEvent>& events) {
    std::optional<Timestamp> first_dispute;
    std::optional<Timestamp> last_propose;
    for (const auto& e : events) {
        if (!e.timestamp) continue;
        if (e.event_type == OracleEventType::dispute) {
            first_dispute = first_dispute ? std::min(*first_dispute, *e.timestamp) : *e.timestamp;
        } else if (e.event_type == OracleEventType::propose) {
            last_propose = last_propose ? std::max(*last_propose, *e.timestamp) : *e.timestamp;
        }
    }
    if (first_dispute) return AnchorPoint{*first_dispute, AnchorKind::first_dispute};
    if (last_propose) return AnchorPoint{*last_propose, AnchorKind::last_propose};
    return std::nullopt;
}

ContinuedBetting continued_betting(const std::vector<Timestamp>& trade_times, Timestamp anchor,
                                   std::chrono::seconds window) {
    std::optional<Timestamp> first;
    for (auto t : trade_times) {
        if (t > anchor && t <= anchor + window && (!first || t < *first)) first = t;
    }
    if (!first) return {};
    return {true, hours_between(anchor, *first)};
}

ContinuedBetting continued_betting(const std::vector<FillRecord>& fills, Timestamp anchor,
                                   std::chrono::seconds window) {
    std::vector<Timestamp> times;
    for (const auto& f : fills) {
        if (f.market_id && f.meta.block_timestamp) times.push_back(*f.meta.block_timestamp);
    }
    return continued_betting(times, anchor, window);
}

PostAnchorHistogram post_anchor_histogram(const std::vector<RiskAnchor>& cohort,
                                          const std::map<ConditionId, std::vector<Timestamp>>& trade_times,
                                          int hours) {
    if (hours < 1) throw PreconditionViolation("post_anchor_histogram: hours must be positive");
    PostAnchorHistogram h;
    h.cohort_size = cohort.size();
    h.hourly_trades.assign(static_cast<std::size_t>(hours), 0);
    h.first_trade_counts.assign(static_cast<std::size_t>(hours), 0);
    const std::chrono::seconds window = std::chrono::hours{hours};

    std::vector<double> delays;
    std::size_t within_3h = 0;
    for (const auto& market : cohort) {
        auto it = trade_times.find(market.market_id);
        if (it == trade_times.end()) continue;
        std::optional<double> first;
        for (auto t : it->second) {
            if (t <= market.anchor_time || t > market.anchor_time + window) continue;
            const double delay = hours_between(market.anchor_time, t);
            const auto bucket = std::min(static_cast<std::size_t>(std::floor(delay)), h.hourly_trades.size() - 1);
            ++h.hourly_trades[bucket];
            if (!first || delay < *first) first = delay;
        }
        if (!first) continue;
        ++h.resumed;
        delays.push_back(*first);
        if (*first < 3.0) ++within_3h;
        const auto bucket = std::min(static_cast<std::size_t>(std::floor(*first)), h.first_trade_counts.size() - 1);
        ++h.first_trade_counts[bucket];
    }
    std::uint64_t running = 0;
    for (auto c : h.first_trade_counts) {
        running += c;
        h.cumulative_share.push_back(
            h.cohort_size == 0 ? 0.0 : static_cast<double>(running) / static_cast<double>(h.cohort_size));
    }
    if (h.cohort_size > 0) h.share_within_3h = static_cast<double>(within_3h) / static_cast<double>(h.cohort_size);
    h.median_delay_hours = median(delays);
    return h;
}

}  // namespace pmdata::analytics
