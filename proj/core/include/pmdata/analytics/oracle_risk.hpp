#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <vector>

#include "pmdata/model.hpp"

namespace pmdata::analytics {

enum class AnchorKind { first_dispute, last_propose };

std::string_view to_string(AnchorKind v);

struct AnchorPoint {
    Timestamp time{};
    AnchorKind kind = AnchorKind::last_propose;

    bool operator==(const AnchorPoint&) const = default;
};

/// First dispute when any exists, otherwise the last propose. Events
/// without a timestamp are ignored. Absent when neither kind is present.
std::optional<AnchorPoint> oracle_risk_anchor(const std::vector<OracleEvent>& events);

struct ContinuedBetting {
    bool flag = false;
    std::optional<double> first_trade_delay_hours;

    bool operator==(const ContinuedBetting&) const = default;
};

/// Looks for linked trades in (anchor, anchor + window].
ContinuedBetting continued_betting(const std::vector<Timestamp>& trade_times, Timestamp anchor,
                                   std::chrono::seconds window = std::chrono::hours{24});
ContinuedBetting continued_betting(const std::vector<FillRecord>& fills, Timestamp anchor,
                                   std::chrono::seconds window = std::chrono::hours{24});

struct RiskAnchor {
    ConditionId market_id;
    Timestamp anchor_time{};
    AnchorKind anchor_kind = AnchorKind::last_propose;
    bool continued_betting = false;
    std::optional<double> first_trade_delay_hours;

    bool operator==(const RiskAnchor&) const = default;
};

struct PostAnchorHistogram {
    std::size_t cohort_size = 0;
    std::size_t resumed = 0;
    /// Trades in hour bucket [h, h+1) after the anchor, summed over the cohort.
    std::vector<std::uint64_t> hourly_trades;
    /// Markets whose first post-anchor trade falls in hour bucket h.
    std::vector<std::uint64_t> first_trade_counts;
    /// Share of the whole cohort resumed by the end of hour h; tops out at
    /// resumed / cohort_size.
    std::vector<double> cumulative_share;
    /// Share of the cohort with first-trade delay strictly below 3 hours.
    std::optional<double> share_within_3h;
    std::optional<double> median_delay_hours;
};

/// `trade_times` holds the linked trade timestamps of each cohort market.
PostAnchorHistogram post_anchor_histogram(const std::vector<RiskAnchor>& cohort,
                                          const std::map<ConditionId, std::vector<Timestamp>>& trade_times,
                                          int hours = 24);

}  // namespace pmdata::analytics
