#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmdata/analytics/teams.hpp"
#include "pmdata/model.hpp"
#include "pmdata/storage.hpp"

namespace pmdata::analytics {

/// Recomputes every price from the integer amounts, drops buy rows priced
/// exactly 1.0 that have a mirror (same tx hash, same size, opposite side),
/// and keeps only prices in (0, 1]. Input order is preserved.
std::vector<FillRecord> clean_fills_for_pricing(const std::vector<FillRecord>& fills);

/// sum(s*p) / sum(s) over fills timestamped strictly before `cutoff`.
/// Throws NoPregameTrades.
double size_weighted_prob(const std::vector<FillRecord>& fills, Timestamp cutoff);

/// Seasons are named by the calendar year they end in; October onwards
/// belongs to the next season.
int season_of(Timestamp game_start);

struct CalibrationSample {
    ConditionId market_id;
    std::string team;
    double p = 0.0;
    std::optional<int> y;  ///< absent when the market has no decisive settlement
    int season = 0;

    bool operator==(const CalibrationSample&) const = default;
};

/// One candidate market with its linked fills and settled YES price.
struct CalibrationMarket {
    MarketRecord market;
    std::vector<FillRecord> fills;
    std::optional<double> settled_yes;
};

struct CalibrationDataset {
    std::vector<CalibrationSample> samples;
    std::size_t candidate_markets = 0;
    std::size_t matched_markets = 0;
    std::size_t markets_with_rows = 0;

    /// Labeled rows with season < test_season.
    std::vector<CalibrationSample> train(int test_season = 2026) const;
    /// Labeled rows with season == test_season.
    std::vector<CalibrationSample> test(int test_season = 2026) const;
};

/// YES is team A, NO is team B. Game start is the market's end_date; each
/// side contributes a row only if it traded before the game.
CalibrationDataset build_calibration_dataset(const std::vector<CalibrationMarket>& markets,
                                             const TeamLexicon& lexicon = nba_lexicon());
CalibrationDataset build_calibration_dataset(const Store& store, const TeamLexicon& lexicon = nba_lexicon());

/// Nondecreasing step function fitted by pool-adjacent-violators.
class IsotonicModel {
public:
    IsotonicModel(std::vector<double> knots, std::vector<double> values);

    /// Value of the last knot at or below x; clamped outside the knot range.
    double operator()(double x) const;
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

/// Least-squares nondecreasing fit. Tied x values are averaged first.
/// Throws PreconditionViolation on empty or mismatched input.
IsotonicModel isotonic_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ReliabilityBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double confidence = 0.0;  ///< mean prediction
    double accuracy = 0.0;    ///< mean label

    bool operator==(const ReliabilityBin&) const = default;
};

struct CalibrationMetrics {
    double brier = 0.0;
    double log_loss = 0.0;
    double ece = 0.0;
    double mce = 0.0;
    std::vector<ReliabilityBin> bins;
};

inline constexpr double kLogLossEpsilon = 1e-15;

/// Equal-width bins on [0, 1]; p lands in bin min(floor(p * n_bins), n_bins - 1).
/// Throws PreconditionViolation for empty input, p outside [0, 1] or y outside {0, 1}.
CalibrationMetrics calibration_metrics(const std::vector<double>& p, const std::vector<int>& y, int n_bins = 10);

struct CalibrationReport {
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::optional<CalibrationMetrics> train_raw;
    std::optional<CalibrationMetrics> train_isotonic;
    std::optional<CalibrationMetrics> test_raw;
    std::optional<CalibrationMetrics> test_isotonic;
};

/// Fits isotonic regression on the training split and scores both splits.
CalibrationReport evaluate_calibration(const CalibrationDataset& dataset, int test_season = 2026, int n_bins = 10);

}  // namespace pmdata::analytics
