#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pmdata/analytics/stats.hpp"
#include "pmdata/errors.hpp"
#include "support/oracles.hpp"

namespace pmdata::analytics {
namespace {

TEST(Pearson, Examples) {
    EXPECT_NEAR(pearson_r({1, 2, 3}, {1, 2, 3}), 1.0, 1e-12);
    EXPECT_NEAR(pearson_r({1, 2, 3}, {-1, -2, -3}), -1.0, 1e-12);
    // cov = 3, var_x = 2, var_y = 42/9
    EXPECT_NEAR(pearson_r({1, 2, 3}, {1, 2, 4}), 9.0 / std::sqrt(84.0), 1e-12);
    EXPECT_NEAR(pearson_r({1, 2, 3}, {1, 2, 4}), 0.9820, 1e-4);
}

TEST(Pearson, Preconditions) {
    EXPECT_THROW(pearson_r({1}, {1}), PreconditionViolation);
    EXPECT_THROW(pearson_r({1, 2}, {1, 2, 3}), PreconditionViolation);
    EXPECT_THROW(pearson_r({1, 1, 1}, {1, 2, 3}), DegenerateInput);
}

TEST(Pearson, AffineInvariance) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> a(0.1, 10), b(-5, 5);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> x(12), y(12), x2(12);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = n(rng);
            y[i] = 0.5 * x[i] + n(rng);
        }
        const double s = a(rng), t = b(rng);
        for (std::size_t i = 0; i < x.size(); ++i) x2[i] = s * x[i] + t;
        EXPECT_NEAR(pearson_r(x2, y), pearson_r(x, y), 1e-9);
    }
}

TEST(Anova, HandExample) {
    const auto r = anova_oneway({{1, 2, 3}, {4, 5, 6}});
    EXPECT_DOUBLE_EQ(r.f, 13.5);
    EXPECT_EQ(r.df_between, 1u);
    EXPECT_EQ(r.df_within, 4u);
    // F(1,4) = t(4)^2; two-sided t tail in closed form with theta = atan(t/2).
    const double theta = std::atan(std::sqrt(13.5) / 2.0);
    const double p = 1.0 - std::sin(theta) * (1.0 + 0.5 * std::cos(theta) * std::cos(theta));
    EXPECT_NEAR(r.p_value, p, 1e-10);
}

TEST(Anova, IdenticalGroupsAndPreconditions) {
    EXPECT_DOUBLE_EQ(anova_oneway({{1, 2, 3}, {1, 2, 3}}).f, 0.0);
    EXPECT_THROW(anova_oneway({{1, 2, 3}}), PreconditionViolation);
    EXPECT_THROW(anova_oneway({{1, 2}, {}}), PreconditionViolation);
    EXPECT_THROW(anova_oneway({{1}, {2}}), PreconditionViolation);
    EXPECT_THROW(anova_oneway({{1, 1}, {2, 2}}), DegenerateInput);
}

TEST(Anova, ShiftAndScaleInvariance) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int k = 0; k < 30; ++k) {
        std::vector<std::vector<double>> g(3, std::vector<double>(6));
        for (std::size_t j = 0; j < g.size(); ++j) {
            for (auto& v : g[j]) v = n(rng) + 0.3 * static_cast<double>(j);
        }
        auto h = g;
        for (auto& grp : h) {
            for (auto& v : grp) v = 3.5 * v + 11.0;
        }
        const double f = anova_oneway(g).f;
        EXPECT_NEAR(anova_oneway(h).f, f, 1e-9 * std::max(1.0, f));
    }
}

TEST(KruskalWallis, HandExamples) {
    const auto r = kruskal_wallis({{1, 2}, {3, 4}});
    // 12/(4*5) * (3^2/2 + 7^2/2) - 3*5
    EXPECT_NEAR(r.h_uncorrected, 2.4, 1e-12);
    EXPECT_NEAR(r.h, 2.4, 1e-12);
    EXPECT_EQ(r.df, 1u);
    EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(2.4 / 2.0)), 1e-10);

    EXPECT_NEAR(kruskal_wallis({{1, 2, 3}, {1, 2, 3}}).h, 0.0, 1e-12);
    const auto flat = kruskal_wallis({{5, 5}, {5, 5, 5}});
    EXPECT_EQ(flat.h, 0.0);
    EXPECT_EQ(flat.p_value, 1.0);
}

TEST(KruskalWallis, TieCorrection) {
    // ranks: 1 -> 1.5, 1 -> 1.5, 2 -> 3, 3 -> 4; sums 3 and 7.
    const auto r = kruskal_wallis({{1, 1}, {2, 3}});
    EXPECT_NEAR(r.h_uncorrected, 2.4, 1e-12);
    // C = 1 - (2^3 - 2) / (4^3 - 4) = 0.9
    EXPECT_NEAR(r.h, 2.4 / 0.9, 1e-12);
}

TEST(NormalCdf, AgainstSeriesOracle) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    for (double x = -6.0; x <= 6.0; x += 0.37) {
        EXPECT_NEAR(normal_cdf(x), test::oracle::normal_cdf(x), 1e-12) << x;
    }
    EXPECT_NEAR(normal_cdf(1.0) - normal_cdf(-1.0), 0.682689, 1e-5);
}

TEST(Summary, MeanAndMedian) {
    EXPECT_DOUBLE_EQ(mean({1, 2, 6}), 3.0);
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    EXPECT_FALSE(median({}));
}

}  // namespace
}  // namespace pmdata::analytics
