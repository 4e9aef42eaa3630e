#include <gtest/gtest.h>

#include <random>

#include "pmdata/analytics/calibration.hpp"
#include "pmdata/errors.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

namespace pmdata::analytics {
namespace {

const Timestamp kGame = parse_iso8601("2025-01-15T00:00:00Z");

Timestamp before(int h) { return kGame - std::chrono::hours(h); }

FillRecord priced(std::uint64_t n, const TokenId& asset, double price, double size, Timestamp ts,
                  Side side = Side::buy) {
    return test::fill(n, asset, price, size, n, ts, side);
}

TEST(CleanFills, DropsMirroredBuyAtOne) {
    auto polluted = priced(1, test::token(1), 1.0, 10, before(5));
    auto mirror = priced(1, test::token(1), 0.48, 10, before(5), Side::sell);
    mirror.log_index = polluted.log_index + 1;
    const auto out = clean_fills_for_pricing({polluted, mirror});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].meta.side, Side::sell);
    EXPECT_NEAR(out[0].price, 0.48, 1e-12);
}

TEST(CleanFills, KeepsStandalonePriceOneAndRecomputes) {
    auto lone = priced(1, test::token(1), 1.0, 10, before(5));
    auto stale = priced(2, test::token(1), 0.3, 10, before(5));
    stale.price = 0.9;
    const auto out = clean_fills_for_pricing({lone, stale});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].price, 1.0);
    EXPECT_NEAR(out[1].price, 0.3, 1e-12);
}

TEST(CleanFills, DropsOutOfRangeAndZeroAmounts) {
    auto over = priced(1, test::token(1), 0.5, 10, before(5));
    over.maker_amount = 2 * over.taker_amount;
    auto zero = priced(2, test::token(1), 0.5, 10, before(5));
    zero.maker_amount = 0;
    EXPECT_TRUE(clean_fills_for_pricing({over, zero}).empty());
}

TEST(SizeWeightedProb, Examples) {
    EXPECT_NEAR(size_weighted_prob({priced(1, test::token(1), 0.6, 5, before(1))}, kGame), 0.6, 1e-12);
    EXPECT_NEAR(size_weighted_prob({priced(1, test::token(1), 0.4, 3, before(2)),
                                    priced(2, test::token(1), 0.8, 1, before(1)),
                                    priced(3, test::token(1), 0.1, 100, kGame)},
                                   kGame),
                0.5, 1e-12);
    EXPECT_THROW(size_weighted_prob({priced(1, test::token(1), 0.4, 3, kGame)}, kGame), NoPregameTrades);
    EXPECT_THROW(size_weighted_prob({}, kGame), NoPregameTrades);
}

TEST(SizeWeightedProb, StaysWithinInputRange) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> cents(1, 99), size(1, 50);
    for (int k = 0; k < 50; ++k) {
        std::vector<FillRecord> fills;
        double lo = 1, hi = 0;
        for (std::uint64_t i = 0; i < 6; ++i) {
            fills.push_back(priced(i, test::token(1), cents(rng) / 100.0, size(rng), before(2)));
            lo = std::min(lo, fills.back().price);
            hi = std::max(hi, fills.back().price);
        }
        const double p = size_weighted_prob(fills, kGame);
        EXPECT_GE(p, lo - 1e-12);
        EXPECT_LE(p, hi + 1e-12);
    }
}

TEST(Season, OctoberStartsNextSeason) {
    EXPECT_EQ(season_of(parse_iso8601("2025-10-21T23:00:00Z")), 2026);
    EXPECT_EQ(season_of(parse_iso8601("2025-06-10T00:00:00Z")), 2025);
    EXPECT_EQ(season_of(parse_iso8601("2026-01-05T00:00:00Z")), 2026);
}

CalibrationMarket nba_market(std::uint64_t n, const std::string& title, std::optional<double> settled) {
    auto m = test::market(n, title);
    m.metadata.end_date = kGame;
    return {m, {}, settled};
}

TEST(Dataset, TwoRowsWhenBothSidesTrade) {
    auto c = nba_market(1, "Lakers vs. Celtics", 1.0);
    c.fills = {priced(1, c.market.yes_token, 0.6, 10, before(3)), priced(2, c.market.no_token, 0.45, 10, before(2))};
    const auto d = build_calibration_dataset({c});
    ASSERT_EQ(d.samples.size(), 2u);
    EXPECT_EQ(d.samples[0].team, "Los Angeles Lakers");
    EXPECT_EQ(d.samples[0].y, 1);
    EXPECT_NEAR(d.samples[0].p, 0.6, 1e-12);
    EXPECT_EQ(d.samples[1].team, "Boston Celtics");
    EXPECT_EQ(d.samples[1].y, 0);
    EXPECT_NEAR(d.samples[1].p, 0.45, 1e-12);
    EXPECT_EQ(d.samples[0].season, 2025);
    EXPECT_EQ(d.markets_with_rows, 1u);
}

TEST(Dataset, OneSidedMarketHasNoSyntheticComplement) {
    auto c = nba_market(1, "Will the Knicks beat the Heat?", 0.0);
    c.fills = {priced(1, c.market.yes_token, 0.7, 10, before(3)), priced(2, c.market.no_token, 0.3, 10, kGame)};
    const auto d = build_calibration_dataset({c});
    ASSERT_EQ(d.samples.size(), 1u);
    EXPECT_EQ(d.samples[0].team, "New York Knicks");
    EXPECT_EQ(d.samples[0].y, 0);
}

TEST(Dataset, ExcludedQuestionsGiveNoRows) {
    auto spread = nba_market(1, "Spread: Lakers (-5.5) vs. Celtics", 1.0);
    spread.fills = {priced(1, spread.market.yes_token, 0.5, 10, before(3))};
    auto other = nba_market(2, "Will it rain in Boston?", 1.0);
    const auto d = build_calibration_dataset({spread, other});
    EXPECT_TRUE(d.samples.empty());
    EXPECT_EQ(d.candidate_markets, 2u);
    EXPECT_EQ(d.matched_markets, 0u);
}

TEST(Dataset, UndecidedSettlementIsUnlabeledAndSplitBySeason) {
    auto a = nba_market(1, "Bulls vs. Bucks", 0.5);
    a.fills = {priced(1, a.market.yes_token, 0.5, 10, before(3))};
    auto b = nba_market(2, "Suns vs. Jazz", 1.0);
    b.market.metadata.end_date = parse_iso8601("2025-11-01T00:00:00Z");
    b.fills = {priced(2, b.market.yes_token, 0.5, 10, *b.market.metadata.end_date - std::chrono::hours(1))};
    auto c = nba_market(3, "Kings vs. Spurs", 0.0);
    c.fills = {priced(3, c.market.yes_token, 0.5, 10, before(3))};
    const auto d = build_calibration_dataset({a, b, c});
    ASSERT_EQ(d.samples.size(), 3u);
    EXPECT_FALSE(d.samples[0].y);
    EXPECT_EQ(d.train().size(), 1u);
    EXPECT_EQ(d.test().size(), 1u);
    EXPECT_EQ(d.test()[0].season, 2026);
}

TEST(Dataset, FromStoreUsesSettleEvent) {
    Store store(":memory:");
    auto c = nba_market(1, "Warriors vs. Rockets", std::nullopt);
    store.insert_market(c.market);
    auto f = priced(1, c.market.yes_token, 0.55, 10, before(3));
    f.market_id = c.market.condition_id;
    store.insert_fill(f);
    auto settle = test::oracle_event(1, OracleEventType::settle, c.market.condition_id, kGame);
    settle.market_id = c.market.condition_id;
    settle.settled_price = 0.0;
    store.insert_oracle_event(settle, ResolutionPath::direct);
    const auto d = build_calibration_dataset(store);
    ASSERT_EQ(d.samples.size(), 1u);
    EXPECT_EQ(d.samples[0].y, 0);
}

double sse(const IsotonicModel& f, const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (y[i] - f(x[i])) * (y[i] - f(x[i]));
    return s;
}

TEST(Isotonic, Examples) {
    const auto id = isotonic_fit({0.1, 0.5, 0.9}, {0, 0.5, 1});
    EXPECT_EQ(id(0.1), 0.0);
    EXPECT_EQ(id(0.5), 0.5);
    EXPECT_EQ(id(0.9), 1.0);

    const auto pooled = isotonic_fit({0.3, 0.7}, {1, 0});
    EXPECT_DOUBLE_EQ(pooled(0.3), 0.5);
    EXPECT_DOUBLE_EQ(pooled(0.7), 0.5);

    const auto flat = isotonic_fit({0.2, 0.4, 0.6}, {0.3, 0.3, 0.3});
    EXPECT_DOUBLE_EQ(flat(0.0), 0.3);
    EXPECT_DOUBLE_EQ(flat(1.0), 0.3);

    EXPECT_THROW(isotonic_fit({}, {}), PreconditionViolation);
    EXPECT_THROW(isotonic_fit({0.1}, {1, 0}), PreconditionViolation);
}

TEST(Isotonic, StepInterpolationAndClamping) {
    const auto f = isotonic_fit({0.2, 0.6}, {0, 1});
    EXPECT_EQ(f(0.0), 0.0);
    EXPECT_EQ(f(0.4), 0.0);
    EXPECT_EQ(f(0.6), 1.0);
    EXPECT_EQ(f(0.99), 1.0);
}

TEST(Isotonic, TiesAveragedFirst) {
    const auto f = isotonic_fit({0.5, 0.5, 0.5, 0.8}, {1, 0, 0, 1});
    EXPECT_DOUBLE_EQ(f(0.5), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(f(0.8), 1.0);
}

TEST(Isotonic, MatchesExhaustiveOracle) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> len(1, 8), grid(0, 4), bit(0, 1);
    for (int k = 0; k < 200; ++k) {
        const int n = len(rng);
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = 0.25 * grid(rng);
            y[i] = bit(rng);
        }
        const auto f = isotonic_fit(x, y);
        EXPECT_NEAR(sse(f, x, y), test::oracle::isotonic_min_sse(x, y), 1e-12);
        for (std::size_t i = 1; i < f.values().size(); ++i) EXPECT_LE(f.values()[i - 1], f.values()[i]);
    }
}

TEST(Metrics, Examples) {
    const auto perfect = calibration_metrics({0, 1, 1, 0}, {0, 1, 1, 0});
    EXPECT_EQ(perfect.brier, 0.0);
    EXPECT_EQ(perfect.ece, 0.0);
    EXPECT_EQ(perfect.mce, 0.0);
    EXPECT_LT(perfect.log_loss, 1e-12);

    const auto coin = calibration_metrics({0.5, 0.5}, {1, 0});
    EXPECT_DOUBLE_EQ(coin.brier, 0.25);
    EXPECT_DOUBLE_EQ(coin.ece, 0.0);
    EXPECT_NEAR(coin.log_loss, std::log(2.0), 1e-15);

    const auto gap = calibration_metrics(std::vector<double>(10, 0.8), {1, 1, 1, 1, 1, 1, 0, 0, 0, 0});
    EXPECT_NEAR(gap.ece, 0.2, 1e-12);
    EXPECT_NEAR(gap.mce, 0.2, 1e-12);
    ASSERT_EQ(gap.bins.size(), 10u);
    EXPECT_EQ(gap.bins[8].count, 10u);
}

TEST(Metrics, LogLossClipsExtremes) {
    const auto m = calibration_metrics({0.0}, {1});
    EXPECT_NEAR(m.log_loss, -std::log(kLogLossEpsilon), 1e-9);
}

TEST(Metrics, Preconditions) {
    EXPECT_THROW(calibration_metrics({}, {}), PreconditionViolation);
    EXPECT_THROW(calibration_metrics({1.2}, {1}), PreconditionViolation);
    EXPECT_THROW(calibration_metrics({0.2}, {2}), PreconditionViolation);
    EXPECT_THROW(calibration_metrics({0.2, 0.3}, {1}), PreconditionViolation);
}

TEST(Metrics, MatchesDirectOracle) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> len(1, 40);
    for (int k = 0; k < 50; ++k) {
        const int n = len(rng);
        std::vector<double> p(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            p[i] = k % 5 == 0 ? std::round(u(rng) * 10) / 10 : u(rng);
            y[i] = u(rng) < p[i];
        }
        const auto got = calibration_metrics(p, y);
        const auto want = test::oracle::calibration_metrics(p, y, 10);
        EXPECT_NEAR(got.brier, want.brier, 1e-12);
        EXPECT_NEAR(got.log_loss, want.log_loss, 1e-12);
        EXPECT_NEAR(got.ece, want.ece, 1e-12);
        EXPECT_NEAR(got.mce, want.mce, 1e-12);
    }
}

TEST(Evaluate, IsotonicNeverWorsensTrainBrier) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0, 1);
    CalibrationDataset d;
    for (int i = 0; i < 300; ++i) {
        CalibrationSample s;
        s.market_id = test::condition(i);
        s.team = "t";
        s.p = u(rng);
        s.y = u(rng) < s.p * s.p;
        s.season = i < 200 ? 2025 : 2026;
        d.samples.push_back(s);
    }
    const auto r = evaluate_calibration(d);
    EXPECT_EQ(r.train_rows, 200u);
    EXPECT_EQ(r.test_rows, 100u);
    ASSERT_TRUE(r.train_raw && r.train_isotonic && r.test_raw && r.test_isotonic);
    EXPECT_LE(r.train_isotonic->brier, r.train_raw->brier);
}

TEST(Evaluate, EmptySplitsStayAbsent) {
    const auto r = evaluate_calibration(CalibrationDataset{});
    EXPECT_EQ(r.train_rows, 0u);
    EXPECT_FALSE(r.train_raw);
    EXPECT_FALSE(r.test_isotonic);
}

}  // namespace
}  // namespace pmdata::analytics
