#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pmdata/analytics/cpi.hpp"
#include "pmdata/errors.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

namespace pmdata::analytics {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const Timestamp kT0 = from_unix(1767225600);

std::vector<BucketSpec> partition() {
    return {{-kInf, 0.05}, {0.05, 0.15}, {0.15, 0.25}, {0.25, 0.35}, {0.35, kInf}};
}

double oracle_mass(double mu, double sigma, const BucketSpec& b) {
    auto cdf = [&](double x) {
        if (std::isinf(x)) return x < 0 ? 0.0L : 1.0L;
        return test::oracle::normal_cdf((x - mu) / sigma);
    };
    return static_cast<double>(cdf(b.upper) - cdf(b.lower));
}

std::vector<ObservedBucket> masses(double mu, double sigma) {
    std::vector<ObservedBucket> out;
    for (const auto& b : partition()) out.push_back({b, oracle_mass(mu, sigma, b)});
    return out;
}

TEST(EventProb, Sides) {
    EXPECT_DOUBLE_EQ(cpi_event_prob(0.3, OutcomeSide::no), 0.7);
    EXPECT_DOUBLE_EQ(cpi_event_prob(0.3, OutcomeSide::yes), 0.3);
    EXPECT_DOUBLE_EQ(cpi_event_prob(1.0, OutcomeSide::no), 0.0);
    EXPECT_THROW(cpi_event_prob(1.2, OutcomeSide::yes), PreconditionViolation);
}

TEST(BucketParse, Forms) {
    const auto mid = parse_cpi_bucket("Will CPI increase by 0.2% in June?");
    ASSERT_TRUE(mid);
    EXPECT_NEAR(mid->lower, 0.15, 1e-12);
    EXPECT_NEAR(mid->upper, 0.25, 1e-12);
    const auto low = parse_cpi_bucket("CPI 0.0% or less");
    ASSERT_TRUE(low);
    EXPECT_EQ(low->lower, -kInf);
    EXPECT_NEAR(low->upper, 0.05, 1e-12);
    const auto high = parse_cpi_bucket("CPI 0.4% or more");
    ASSERT_TRUE(high);
    EXPECT_NEAR(high->lower, 0.35, 1e-12);
    EXPECT_EQ(high->upper, kInf);
    EXPECT_FALSE(parse_cpi_bucket("CPI up in June?"));
}

TEST(BucketMass, Examples) {
    EXPECT_DOUBLE_EQ(bucket_mass(0, 1, {-kInf, 0}), 0.5);
    EXPECT_NEAR(bucket_mass(0, 1, {-1, 1}), 0.682689, 1e-5);
    EXPECT_NEAR(bucket_mass(0, 1, {-1, 1}), oracle_mass(0, 1, {-1, 1}), 1e-12);
    EXPECT_EQ(bucket_mass(0.3, 0.2, {}), 1.0);
    EXPECT_THROW(bucket_mass(0, 0, {-1, 1}), PreconditionViolation);
}

TEST(BucketMass, PartitionSumsToOne) {
    for (double mu : {-1.0, 0.0, 0.2, 0.33, 2.0}) {
        for (double sigma : {0.01, 0.1, 0.7}) {
            double total = 0;
            for (const auto& b : partition()) total += bucket_mass(mu, sigma, b);
            EXPECT_NEAR(total, 1.0, 1e-9);
        }
    }
}

TEST(GaussianFit, RoundTrip) {
    const auto fit = fit_gaussian_to_buckets(masses(0.25, 0.08));
    EXPECT_NEAR(fit.mu, 0.25, 1e-3);
    EXPECT_NEAR(fit.sigma, 0.08, 1e-3);
    EXPECT_LT(fit.residual, 1e-10);
}

TEST(GaussianFit, SymmetricMassesCentreOnMidpoint) {
    const std::vector<ObservedBucket> obs{{{0.05, 0.15}, 0.25}, {{0.15, 0.25}, 0.5}, {{0.25, 0.35}, 0.25}};
    EXPECT_NEAR(fit_gaussian_to_buckets(obs).mu, 0.2, 1e-6);
}

TEST(GaussianFit, NormalizesMasses) {
    auto obs = masses(0.18, 0.1);
    for (auto& o : obs) o.mass *= 3.0;
    const auto fit = fit_gaussian_to_buckets(obs);
    EXPECT_NEAR(fit.mu, 0.18, 1e-3);
    EXPECT_NEAR(fit.sigma, 0.1, 1e-3);
}

TEST(GaussianFit, Errors) {
    EXPECT_THROW(fit_gaussian_to_buckets({{{-kInf, 0}, 1.0}, {{0, kInf}, 0.0}}), FitDegenerate);
    EXPECT_THROW(fit_gaussian_to_buckets({{{-kInf, 0}, 1.0}}), PreconditionViolation);
    EXPECT_THROW(fit_gaussian_to_buckets({{{0, 1}, 0.0}, {{1, 2}, 0.0}}), PreconditionViolation);
}

TEST(GaussianFit, SigmaRespectsFloor) {
    GaussianFitOptions opts;
    opts.sigma_floor = 0.05;
    const std::vector<ObservedBucket> obs{{{0.05, 0.15}, 0.0}, {{0.15, 0.25}, 1.0}, {{0.25, 0.35}, 0.0}};
    EXPECT_GE(fit_gaussian_to_buckets(obs, opts).sigma, 0.05);
}

CpiTrade trade(const std::string& key, double hours, double p, double v) {
    return {key, kT0 + std::chrono::seconds(static_cast<long>(hours * 3600)), p, v};
}

TEST(Snapshot, ValueWeightedWindow) {
    const auto t = kT0 + std::chrono::hours(30);
    EXPECT_EQ(cpi_token_snapshot({trade("a", 20, 0.5, 10)}, t), (std::map<std::string, double>{{"a", 0.5}}));
    const auto two = cpi_token_snapshot({trade("a", 20, 0.2, 1), trade("a", 25, 0.6, 3)}, t);
    EXPECT_NEAR(two.at("a"), 0.5, 1e-12);
    EXPECT_TRUE(cpi_token_snapshot({trade("a", 20, 0.05, 1)}, t).empty());
    EXPECT_TRUE(cpi_token_snapshot({trade("a", 6, 0.5, 1)}, t).empty());
    EXPECT_EQ(cpi_token_snapshot({trade("a", 30, 0.5, 1)}, t).size(), 1u);
    EXPECT_EQ(window_probabilities({trade("a", 20, 0.05, 1)}, t).at("a"), 0.05);
}

MarketRecord cpi_market(std::uint64_t n, const std::string& label) {
    auto m = test::market(n, "Will June CPI come in at " + label + "?");
    m.metadata.event_slug = "cpi-june";
    return m;
}

TEST(Grouping, GroupsByEventAndSortsBuckets) {
    std::vector<MarketRecord> ms{cpi_market(1, "0.3%"), cpi_market(2, "0.1% or less"), cpi_market(3, "0.5% or more"),
                                 test::market(4, "Will GDP grow 0.2%?")};
    auto no_slug = cpi_market(5, "0.2%");
    no_slug.metadata.event_slug.reset();
    ms.push_back(no_slug);
    const auto groups = group_cpi_markets(ms);
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].event_slug, "cpi-june");
    ASSERT_EQ(groups[0].buckets.size(), 3u);
    EXPECT_EQ(groups[0].buckets[0].market_id, test::condition(2));
    EXPECT_EQ(groups[0].buckets[2].market_id, test::condition(3));
}

TEST(Grouping, NoTokenMapsToComplement) {
    const auto group = group_cpi_markets({cpi_market(1, "0.3%"), cpi_market(2, "0.2%")}).at(0);
    const auto m = cpi_market(1, "0.3%");
    auto yes = test::fill(1, m.yes_token, 0.3, 10, 1, kT0);
    auto no = test::fill(2, m.no_token, 0.6, 10, 1, kT0);
    auto foreign = test::fill(3, test::token(999), 0.6, 10, 1, kT0);
    const auto trades = cpi_trades(group, {yes, no, foreign});
    ASSERT_EQ(trades.size(), 2u);
    EXPECT_EQ(trades[0].key, m.condition_id);
    EXPECT_NEAR(trades[0].prob, 0.3, 1e-12);
    EXPECT_NEAR(trades[1].prob, 0.4, 1e-12);
    EXPECT_NEAR(trades[1].value, 6.0, 1e-12);
}

CpiMarketGroup synthetic_group() {
    CpiMarketGroup g{"cpi", {}};
    const char* keys[] = {"b0", "b1", "b2", "b3", "b4"};
    const auto parts = partition();
    for (std::size_t i = 0; i < parts.size(); ++i) g.buckets.push_back({keys[i], keys[i], parts[i], "", ""});
    return g;
}

TEST(ImpliedPath, FlatPathOnSingleBucket) {
    const auto g = synthetic_group();
    std::vector<CpiTrade> trades;
    for (int h = 0; h < 48; h += 6) {
        trades.push_back(trade("b2", h, 0.98, 5));
        trades.push_back(trade("b1", h, 0.01, 5));
        trades.push_back(trade("b3", h, 0.01, 5));
    }
    const auto path = implied_cpi_path(g, trades, time_grid(kT0 + std::chrono::hours(1), kT0 + std::chrono::hours(47)));
    ASSERT_FALSE(path.empty());
    for (const auto& p : path) EXPECT_NEAR(p.mu, 0.2, 1e-3);
}

TEST(ImpliedPath, EmptyWithoutTrades) {
    EXPECT_TRUE(implied_cpi_path(synthetic_group(), {}, time_grid(kT0, kT0 + std::chrono::hours(5))).empty());
}

TEST(ImpliedPath, ShiftingMassMovesMean) {
    const auto g = synthetic_group();
    std::vector<CpiTrade> trades;
    for (const auto& o : masses(0.15, 0.1)) {
        const auto& spec = o.bucket;
        for (const auto& b : g.buckets) {
            if (b.bucket == spec) trades.push_back(trade(b.market_id, 1, o.mass, 1));
        }
    }
    for (const auto& o : masses(0.28, 0.1)) {
        for (const auto& b : g.buckets) {
            if (b.bucket == o.bucket) trades.push_back(trade(b.market_id, 49, o.mass, 1));
        }
    }
    const auto path =
        implied_cpi_path(g, trades, {kT0 + std::chrono::hours(2), kT0 + std::chrono::hours(50)});
    ASSERT_EQ(path.size(), 2u);
    EXPECT_LT(path[0].mu, path[1].mu);
}

TEST(TimeGrid, Inclusive) {
    const auto g = time_grid(kT0, kT0 + std::chrono::hours(3));
    ASSERT_EQ(g.size(), 4u);
    EXPECT_EQ(g.back(), kT0 + std::chrono::hours(3));
    EXPECT_TRUE(time_grid(kT0 + std::chrono::hours(1), kT0).empty());
}

}  // namespace
}  // namespace pmdata::analytics
