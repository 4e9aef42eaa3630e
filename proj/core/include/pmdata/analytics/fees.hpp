#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmdata/analytics/stats.hpp"
#include "pmdata/storage.hpp"

namespace pmdata::analytics {

struct FeeRateRow {
    ConditionId market_id;
    double rate = 0.0;    ///< positive-fee-day fee / positive-fee-day value
    double volume = 0.0;  ///< trade value over positive-fee days
    std::string category;
    std::size_t positive_fee_days = 0;

    bool operator==(const FeeRateRow&) const = default;
};

/// Rows of one market. Absent when no day has a positive fee.
std::optional<FeeRateRow> effective_fee_rate(const std::vector<MarketDaySummary>& market_rows,
                                             const std::string& category = "Other");

/// Pooled fee / value ratio. Throws PreconditionViolation for value <= 0.
double pooled_fee_rate(double trade_value, double total_fee);

struct CategoryFeeSummary {
    std::string category;
    double trade_value = 0.0;  ///< inside the fee window
    double total_fee = 0.0;
    std::optional<Day> first_nonzero_fee_day;
    std::size_t positive_fee_markets = 0;

    bool operator==(const CategoryFeeSummary&) const = default;
};

struct CorrelationRow {
    double min_rate = 0.0;  ///< rows kept when rate >= min_rate
    std::size_t n = 0;
    std::optional<double> r;  ///< Pearson r of (log volume, rate)
    std::optional<double> r_squared;
};

struct FeeAnalysis {
    std::optional<Day> fee_window_start;  ///< first day with any positive fee
    std::optional<Day> fee_window_end;
    std::vector<FeeRateRow> rates;
    std::vector<CategoryFeeSummary> categories;  ///< sorted by trade value, descending
    std::vector<CorrelationRow> correlations;
    std::vector<std::string> tested_categories;
    std::optional<AnovaResult> anova;
    std::optional<KruskalWallisResult> kruskal;
};

struct FeeAnalysisOptions {
    std::vector<double> rate_thresholds{0.0, 0.001, 0.005};
    std::size_t min_category_markets = 30;
};

FeeAnalysis analyze_fees(const std::vector<MarketDaySummary>& summaries,
                         const std::map<ConditionId, std::string>& category_of,
                         const FeeAnalysisOptions& options = {});

}  // namespace pmdata::analytics
