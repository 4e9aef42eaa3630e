#include <gtest/gtest.h>

#include "pmdata/analytics/activity.hpp"
#include "pmdata/errors.hpp"
#include "support/builders.hpp"

namespace pmdata::analytics {
namespace {

const Timestamp kT0 = from_unix(1767225600);

FillRecord linked(std::uint64_t n, int market, Timestamp ts, int maker, int taker) {
    auto f = test::fill(n, test::token(2 * market), 0.5, 1, n, ts);
    f.market_id = test::condition(market);
    f.maker = test::address(maker);
    f.taker = test::address(taker);
    return f;
}

TEST(DailyActivity, SingleDay) {
    std::vector<FillRecord> fills;
    const int makers[] = {1, 2, 3, 1, 2};
    for (std::uint64_t i = 0; i < 5; ++i) {
        fills.push_back(linked(i, i < 3 ? 1 : 2, kT0 + std::chrono::hours(i), makers[i], makers[(i + 1) % 5]));
    }
    const auto rows = daily_activity(fills, day_of(kT0), day_of(kT0));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].transactions, 5u);
    EXPECT_EQ(rows[0].active_wallets, 3u);
    EXPECT_EQ(rows[0].traded_markets, 2u);
    EXPECT_EQ(rows[0].transactions_norm, 1.0);
    EXPECT_EQ(rows[0].active_wallets_norm, 1.0);
    EXPECT_EQ(rows[0].traded_markets_norm, 1.0);
}

TEST(DailyActivity, EmptyRangeAndUnlinked) {
    EXPECT_TRUE(daily_activity(std::vector<FillRecord>{}, day_of(kT0), day_of(kT0)).empty());
    auto f = linked(1, 1, kT0, 1, 2);
    f.market_id.reset();
    EXPECT_TRUE(daily_activity({f}, day_of(kT0), day_of(kT0)).empty());
    EXPECT_TRUE(daily_activity({linked(1, 1, kT0, 1, 2)}, day_of(kT0) + std::chrono::days(1),
                               day_of(kT0) + std::chrono::days(3))
                    .empty());
}

TEST(DailyActivity, NormalizesByMaximumAndFillsGaps) {
    std::vector<FillRecord> fills;
    for (std::uint64_t i = 0; i < 10; ++i) fills.push_back(linked(i, 1, kT0, 1, 2));
    for (std::uint64_t i = 10; i < 15; ++i) fills.push_back(linked(i, 1, kT0 + std::chrono::days(2), 1, 2));
    const auto rows = daily_activity(fills, day_of(kT0), day_of(kT0) + std::chrono::days(5));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].transactions_norm, 1.0);
    EXPECT_EQ(rows[1].transactions, 0u);
    EXPECT_EQ(rows[1].transactions_norm, 0.0);
    EXPECT_EQ(rows[2].transactions_norm, 0.5);
}

TEST(PrimaryTopic, PriorityThenCategoryThenOther) {
    auto m = test::market(1);
    m.metadata.tags = {"nba", "crypto", "sports"};
    EXPECT_EQ(primary_topic(m), "Sports");
    m.metadata.tags = {"misc"};
    m.metadata.category = "Politics";
    EXPECT_EQ(primary_topic(m), "Politics");
    m.metadata.category.reset();
    EXPECT_EQ(primary_topic(m), "Other");
}

MarketDaySummary row(int market, int day, double value) {
    MarketDaySummary r;
    r.market_id = test::condition(market);
    r.day = day_of(kT0) + std::chrono::days(day);
    r.value_base = static_cast<BaseUnits>(value * kBaseUnitsPerToken);
    r.trade_count = 1;
    return r;
}

TEST(RollingVolume, ConstantSeries) {
    std::vector<MarketDaySummary> rows;
    for (int d = 0; d < 40; ++d) rows.push_back(row(1, d, 7.0));
    const auto out = rolling_volume_by_topic(rows, {{test::condition(1), "Crypto"}}, 30);
    ASSERT_EQ(out.size(), 40u);
    for (const auto& r : out) EXPECT_DOUBLE_EQ(r.rolling_mean, 7.0);
}

TEST(RollingVolume, SingleSpikeAveragesOverWindow) {
    const auto out = rolling_volume_by_topic({row(1, 0, 30.0), row(2, 29, 0.0), row(2, 30, 0.0)},
                                             {{test::condition(1), "Sports"}, {test::condition(2), "Sports"}}, 30);
    ASSERT_EQ(out.size(), 31u);
    EXPECT_DOUBLE_EQ(out[29].rolling_mean, 30.0 / 30.0);
    EXPECT_DOUBLE_EQ(out[30].rolling_mean, 0.0);
    EXPECT_DOUBLE_EQ(out[0].daily_volume, 30.0);
}

TEST(RollingVolume, UnknownMarketsGroupUnderOther) {
    const auto out = rolling_volume_by_topic({row(1, 0, 5.0)}, {}, 30);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].topic, "Other");
    EXPECT_THROW(rolling_volume_by_topic({}, {}, 0), PreconditionViolation);
}

}  // namespace
}  // namespace pmdata::analytics
