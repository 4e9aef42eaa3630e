#include "pmdata/analytics/fees.hpp"

#include <algorithm>
#include <cmath>

#include "pmdata/errors.hpp"

namespace pmdata::analytics {

std::optional<FeeRateRow> effective_fee_rate(const std::vector<MarketDaySummary>& rows, const std::string& category) {
    if (rows.empty()) return std::nullopt;
    FeeRateRow out;
    out.market_id = rows.front().market_id;
    out.category = category;
    BaseUnits fee = 0;
    BaseUnits value = 0;
    for (const auto& r : rows) {
        if (r.fee_base == 0) continue;
        fee += r.fee_base;
        value += r.value_base;
        ++out.positive_fee_days;
    }
    if (out.positive_fee_days == 0 || value == 0) return std::nullopt;
    out.rate = static_cast<double>(fee) / static_cast<double>(value);
    out.volume = static_cast<double>(value) / kBaseUnitsPerToken;
    return out;
}

double pooled_fee_rate(double trade_value, double total_fee) {
    if (!(trade_value > 0.0)) throw PreconditionViolation("pooled_fee_rate: trade value must be positive");
    return total_fee / trade_value;
}

FeeAnalysis analyze_fees(const std::vector<MarketDaySummary>& summaries,
                         const std::map<ConditionId, std::string>& category_of,
                         const FeeAnalysisOptions& options) {
    FeeAnalysis out;
    auto category = [&](const ConditionId& id) {
        auto it = category_of.find(id);
        return it == category_of.end() ? std::string("Other") : it->second;
    };

    std::map<ConditionId, std::vector<MarketDaySummary>> by_market;
    for (const auto& row : summaries) {
        by_market[row.market_id].push_back(row);
        if (row.fee_base > 0) {
            out.fee_window_start = out.fee_window_start ? std::min(*out.fee_window_start, row.day) : row.day;
        }
        out.fee_window_end = out.fee_window_end ? std::max(*out.fee_window_end, row.day) : row.day;
    }
    for (const auto& [id, rows] : by_market) {
        if (auto row = effective_fee_rate(rows, category(id))) out.rates.push_back(*row);
    }

    std::map<std::string, CategoryFeeSummary> cats;
    for (const auto& row : summaries) {
        auto& c = cats[category(row.market_id)];
        c.category = category(row.market_id);
        if (row.fee_base > 0) {
            c.first_nonzero_fee_day = c.first_nonzero_fee_day ? std::min(*c.first_nonzero_fee_day, row.day) : row.day;
        }
        if (out.fee_window_start && row.day >= *out.fee_window_start) {
            c.trade_value += row.total_trade_value();
            c.total_fee += row.total_fee();
        }
    }
    for (const auto& r : out.rates) ++cats[r.category].positive_fee_markets;
    for (auto& [_, c] : cats) out.categories.push_back(c);
    std::stable_sort(out.categories.begin(), out.categories.end(),
                     [](const auto& a, const auto& b) { return a.trade_value > b.trade_value; });

    for (double threshold : options.rate_thresholds) {
        CorrelationRow c{threshold, 0, std::nullopt, std::nullopt};
        std::vector<double> x, y;
        for (const auto& r : out.rates) {
            if (r.rate >= threshold && r.volume > 0.0) {
                x.push_back(std::log(r.volume));
                y.push_back(r.rate);
            }
        }
        c.n = x.size();
        try {
            c.r = pearson_r(x, y);
            c.r_squared = *c.r * *c.r;
        } catch (const Error&) {
        }
        out.correlations.push_back(c);
    }

    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : out.rates) groups[r.category].push_back(r.rate);
    std::vector<std::vector<double>> tested;
    for (auto& [name, g] : groups) {
        if (g.size() >= options.min_category_markets) {
            out.tested_categories.push_back(name);
            tested.push_back(std::move(g));
        }
    }
    if (tested.size() >= 2) {
        try {
            out.anova = anova_oneway(tested);
        } catch (const Error&) {
        }
        out.kruskal = kruskal_wallis(tested);
    }
    return out;
}

}  // namespace pmdata::analytics
