#include "pmdata/analytics/activity.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "pmdata/errors.hpp"

namespace pmdata::analytics {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::vector<DailyActivity> daily_activity(const std::vector<FillRecord>& fills, Day from, Day to) {
    struct Acc {
        std::uint64_t transactions = 0;
        std::unordered_set<Address> wallets;
        std::unordered_set<ConditionId> markets;
    };
    std::map<Day, Acc> days;
    for (const auto& f : fills) {
        if (!f.market_id || !f.meta.block_timestamp) continue;
        const Day d = day_of(*f.meta.block_timestamp);
        if (d < from || d > to) continue;
        auto& acc = days[d];
        ++acc.transactions;
        acc.wallets.insert(f.maker);
        acc.wallets.insert(f.taker);
        acc.markets.insert(*f.market_id);
    }
    std::vector<DailyActivity> out;
    if (days.empty()) return out;
    for (Day d = days.begin()->first; d <= days.rbegin()->first; d += std::chrono::days{1}) {
        DailyActivity row;
        row.day = d;
        if (auto it = days.find(d); it != days.end()) {
            row.transactions = it->second.transactions;
            row.active_wallets = it->second.wallets.size();
            row.traded_markets = it->second.markets.size();
        }
        out.push_back(row);
    }
    auto normalize = [&](auto count, auto norm) {
        std::uint64_t max = 0;
        for (const auto& r : out) max = std::max(max, r.*count);
        for (auto& r : out) r.*norm = max == 0 ? 0.0 : static_cast<double>(r.*count) / static_cast<double>(max);
    };
    normalize(&DailyActivity::transactions, &DailyActivity::transactions_norm);
    normalize(&DailyActivity::active_wallets, &DailyActivity::active_wallets_norm);
    normalize(&DailyActivity::traded_markets, &DailyActivity::traded_markets_norm);
    return out;
}

std::vector<DailyActivity> daily_activity(const Store& store, Day from, Day to) {
    if (from > to) return {};
    return daily_activity(store.fills_on_days(from, to), from, to);
}

const std::vector<std::string>& default_topic_priority() {
    static const std::vector<std::string> topics{"Sports",  "Crypto",    "Politics", "Geopolitics",
                                                 "Games",   "Science",   "Culture",  "Economics",
                                                 "Finance", "Tech",      "Weather",  "Mentions"};
    return topics;
}

std::string primary_topic(const MarketRecord& market, const std::vector<std::string>& priority) {
    std::set<std::string> tags;
    for (const auto& t : market.metadata.tags) tags.insert(lower(t));
    for (const auto& topic : priority) {
        if (tags.contains(lower(topic))) return topic;
    }
    if (market.metadata.category) {
        const auto category = lower(*market.metadata.category);
        for (const auto& topic : priority) {
            if (lower(topic) == category) return topic;
        }
    }
    return "Other";
}

std::vector<TopicVolume> rolling_volume_by_topic(const std::vector<MarketDaySummary>& summaries,
                                                 const std::map<ConditionId, std::string>& topic_of,
                                                 int window_days) {
    if (window_days < 1) throw PreconditionViolation("window_days must be positive");
    std::map<std::string, std::map<Day, double>> daily;
    std::optional<Day> first, last;
    for (const auto& row : summaries) {
        auto it = topic_of.find(row.market_id);
        const std::string& topic = it == topic_of.end() ? std::string("Other") : it->second;
        daily[topic][row.day] += row.total_trade_value();
        first = first ? std::min(*first, row.day) : row.day;
        last = last ? std::max(*last, row.day) : row.day;
    }
    std::vector<TopicVolume> out;
    if (!first) return out;
    const std::chrono::days window{window_days};
    for (const auto& [topic, series] : daily) {
        for (Day d = *first; d <= *last; d += std::chrono::days{1}) {
            const Day start = std::max(*first, d - window + std::chrono::days{1});
            double sum = 0.0;
            for (auto it = series.lower_bound(start); it != series.end() && it->first <= d; ++it) sum += it->second;
            auto today = series.find(d);
            const double v = today == series.end() ? 0.0 : today->second;
            out.push_back({topic, d, v, sum / static_cast<double>((d - start).count() + 1)});
        }
    }
    return out;
}

std::vector<TopicVolume> rolling_volume_by_topic(const Store& store, int window_days,
                                                 const std::vector<std::string>& priority) {
    std::map<ConditionId, std::string> topic_of;
    for (const auto& m : store.markets()) topic_of.emplace(m.condition_id, primary_topic(m, priority));
    return rolling_volume_by_topic(store.summaries(), topic_of, window_days);
}

}  // namespace pmdata::analytics
