#pragma once

#include <map>
#include <string>
#include <vector>

#include "pmdata/model.hpp"
#include "pmdata/storage.hpp"

namespace pmdata::analytics {

struct DailyActivity {
    Day day{};
    std::uint64_t transactions = 0;
    std::uint64_t active_wallets = 0;
    std::uint64_t traded_markets = 0;
    double transactions_norm = 0.0;
    double active_wallets_norm = 0.0;
    double traded_markets_norm = 0.0;

    bool operator==(const DailyActivity&) const = default;
};

/// Per-day counts over linked, timestamped fills. Days run densely from the
/// first to the last day with activity inside [from, to]; each series is
/// divided by its maximum over those days (all-zero stays zero).
std::vector<DailyActivity> daily_activity(const std::vector<FillRecord>& fills, Day from, Day to);
std::vector<DailyActivity> daily_activity(const Store& store, Day from, Day to);

const std::vector<std::string>& default_topic_priority();

/// First topic of `priority` found among the tags (case-insensitive), then
/// the category, else "Other".
std::string primary_topic(const MarketRecord& market,
                          const std::vector<std::string>& priority = default_topic_priority());

struct TopicVolume {
    std::string topic;
    Day day{};
    double daily_volume = 0.0;
    double rolling_mean = 0.0;

    bool operator==(const TopicVolume&) const = default;
};

/// Trailing inclusive window of `window_days` ending at each day. Days with
/// no trades count as zero; windows reaching before the first observed day
/// average over the observed days only. Sorted by (topic, day).
std::vector<TopicVolume> rolling_volume_by_topic(const std::vector<MarketDaySummary>& summaries,
                                                 const std::map<ConditionId, std::string>& topic_of,
                                                 int window_days = 30);
std::vector<TopicVolume> rolling_volume_by_topic(const Store& store, int window_days = 30,
                                                 const std::vector<std::string>& priority = default_topic_priority());

}  // namespace pmdata::analytics
