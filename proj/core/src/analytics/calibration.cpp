#include "pmdata/analytics/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmdata/errors.hpp"

namespace pmdata::analytics {

std::vector<FillRecord> clean_fills_for_pricing(const std::vector<FillRecord>& fills) {
    std::vector<FillRecord> priced;
    priced.reserve(fills.size());
    for (auto f : fills) {
        if (f.maker_amount == 0 || f.taker_amount == 0) continue;
        derive_size_and_price(f);
        priced.push_back(std::move(f));
    }
    auto has_mirror = [&](const FillRecord& f) {
        return std::any_of(priced.begin(), priced.end(), [&](const FillRecord& g) {
            return &g != &f && g.tx_hash == f.tx_hash && g.meta.side != f.meta.side &&
                   token_amount(g) == token_amount(f);
        });
    };
    std::vector<FillRecord> out;
    out.reserve(priced.size());
    for (const auto& f : priced) {
        if (f.meta.side == Side::buy && f.price == 1.0 && has_mirror(f)) continue;
        if (!(f.price > 0.0 && f.price <= 1.0)) continue;
        out.push_back(f);
    }
    return out;
}

double size_weighted_prob(const std::vector<FillRecord>& fills, Timestamp cutoff) {
    double weighted = 0.0;
    double size = 0.0;
    for (const auto& f : fills) {
        if (!f.meta.block_timestamp || *f.meta.block_timestamp >= cutoff) continue;
        weighted += f.size * f.price;
        size += f.size;
    }
    if (!(size > 0.0)) throw NoPregameTrades();
    return weighted / size;
}

int season_of(Timestamp game_start) {
    const std::chrono::year_month_day ymd{day_of(game_start)};
    const int year = static_cast<int>(ymd.year());
    return static_cast<unsigned>(ymd.month()) >= 10 ? year + 1 : year;
}

namespace {

std::vector<CalibrationSample> labeled(const std::vector<CalibrationSample>& rows, auto keep) {
    std::vector<CalibrationSample> out;
    for (const auto& r : rows) {
        if (r.y && keep(r.season)) out.push_back(r);
    }
    return out;
}

}  // namespace

std::vector<CalibrationSample> CalibrationDataset::train(int test_season) const {
    return labeled(samples, [&](int s) { return s < test_season; });
}

std::vector<CalibrationSample> CalibrationDataset::test(int test_season) const {
    return labeled(samples, [&](int s) { return s == test_season; });
}

CalibrationDataset build_calibration_dataset(const std::vector<CalibrationMarket>& markets,
                                             const TeamLexicon& lexicon) {
    CalibrationDataset out;
    out.candidate_markets = markets.size();
    for (const auto& candidate : markets) {
        const auto& market = candidate.market;
        auto matchup = match_winner_question(market.metadata.title, lexicon);
        if (!matchup || !market.metadata.end_date) continue;
        const auto tokens = market.tokens();
        if (tokens.size() != 2) continue;
        ++out.matched_markets;

        const Timestamp start = *market.metadata.end_date;
        std::optional<int> yes_label;
        if (candidate.settled_yes && (*candidate.settled_yes == 1.0 || *candidate.settled_yes == 0.0)) {
            yes_label = *candidate.settled_yes == 1.0 ? 1 : 0;
        }
        const auto cleaned = clean_fills_for_pricing(candidate.fills);
        bool any = false;
        for (int side = 0; side < 2; ++side) {
            std::vector<FillRecord> side_fills;
            for (const auto& f : cleaned) {
                if (f.asset_id == tokens[static_cast<std::size_t>(side)]) side_fills.push_back(f);
            }
            double p = 0.0;
            try {
                p = size_weighted_prob(side_fills, start);
            } catch (const NoPregameTrades&) {
                continue;
            }
            CalibrationSample row;
            row.market_id = market.condition_id;
            row.team = side == 0 ? matchup->team_a : matchup->team_b;
            row.p = p;
            if (yes_label) row.y = side == 0 ? *yes_label : 1 - *yes_label;
            row.season = season_of(start);
            out.samples.push_back(std::move(row));
            any = true;
        }
        if (any) ++out.markets_with_rows;
    }
    return out;
}

CalibrationDataset build_calibration_dataset(const Store& store, const TeamLexicon& lexicon) {
    std::vector<CalibrationMarket> candidates;
    for (auto& market : store.markets()) {
        if (!match_winner_question(market.metadata.title, lexicon)) continue;
        CalibrationMarket c{market, store.fills_for_market(market.condition_id), std::nullopt};
        for (const auto& e : store.oracle_events_for_market(market.condition_id)) {
            if (e.event_type == OracleEventType::settle && e.settled_price) c.settled_yes = e.settled_price;
        }
        candidates.push_back(std::move(c));
    }
    return build_calibration_dataset(candidates, lexicon);
}

IsotonicModel::IsotonicModel(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size()) {
        throw PreconditionViolation("isotonic model needs matching, non-empty knots and values");
    }
}

double IsotonicModel::operator()(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    if (it == knots_.begin()) return values_.front();
    return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

IsotonicModel isotonic_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.empty() || x.size() != y.size()) throw PreconditionViolation("isotonic_fit: need equal, non-empty inputs");
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    struct Block {
        double sum;
        double weight;
        std::size_t first_knot;
        double mean() const { return sum / weight; }
    };
    std::vector<double> knots;
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < order.size() && x[order[j]] == x[order[i]]) sum += y[order[j++]];
        knots.push_back(x[order[i]]);
        blocks.push_back({sum, static_cast<double>(j - i), knots.size() - 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            Block last = blocks.back();
            blocks.pop_back();
            blocks.back().sum += last.sum;
            blocks.back().weight += last.weight;
        }
        i = j;
    }
    std::vector<double> values(knots.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const std::size_t end = b + 1 < blocks.size() ? blocks[b + 1].first_knot : knots.size();
        std::fill(values.begin() + static_cast<std::ptrdiff_t>(blocks[b].first_knot),
                  values.begin() + static_cast<std::ptrdiff_t>(end), blocks[b].mean());
    }
    return IsotonicModel(std::move(knots), std::move(values));
}

CalibrationMetrics calibration_metrics(const std::vector<double>& p, const std::vector<int>& y, int n_bins) {
    if (p.empty() || p.size() != y.size()) throw PreconditionViolation("calibration_metrics: need equal, non-empty inputs");
    if (n_bins < 1) throw PreconditionViolation("calibration_metrics: n_bins must be positive");
    const auto bins = static_cast<std::size_t>(n_bins);
    const double n = static_cast<double>(p.size());

    CalibrationMetrics m;
    std::vector<double> conf_sum(bins, 0.0), acc_sum(bins, 0.0);
    std::vector<std::size_t> count(bins, 0);
    double brier = 0.0, log_loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw PreconditionViolation("calibration_metrics: p outside [0, 1]");
        if (y[i] != 0 && y[i] != 1) throw PreconditionViolation("calibration_metrics: label outside {0, 1}");
        const double label = y[i];
        brier += (p[i] - label) * (p[i] - label);
        const double q = std::clamp(p[i], kLogLossEpsilon, 1.0 - kLogLossEpsilon);
        log_loss += label * std::log(q) + (1.0 - label) * std::log(1.0 - q);
        const auto b = std::min(static_cast<std::size_t>(std::floor(p[i] * n_bins)), bins - 1);
        conf_sum[b] += p[i];
        acc_sum[b] += label;
        ++count[b];
    }
    m.brier = brier / n;
    m.log_loss = -log_loss / n;
    for (std::size_t b = 0; b < bins; ++b) {
        ReliabilityBin bin;
        bin.lower = static_cast<double>(b) / n_bins;
        bin.upper = static_cast<double>(b + 1) / n_bins;
        bin.count = count[b];
        if (count[b] > 0) {
            bin.confidence = conf_sum[b] / static_cast<double>(count[b]);
            bin.accuracy = acc_sum[b] / static_cast<double>(count[b]);
            const double gap = std::abs(bin.accuracy - bin.confidence);
            m.ece += static_cast<double>(count[b]) / n * gap;
            m.mce = std::max(m.mce, gap);
        }
        m.bins.push_back(bin);
    }
    return m;
}

CalibrationReport evaluate_calibration(const CalibrationDataset& dataset, int test_season, int n_bins) {
    CalibrationReport r;
    auto split = [](const std::vector<CalibrationSample>& rows) {
        std::pair<std::vector<double>, std::vector<int>> out;
        for (const auto& s : rows) {
            out.first.push_back(s.p);
            out.second.push_back(*s.y);
        }
        return out;
    };
    auto [train_p, train_y] = split(dataset.train(test_season));
    auto [test_p, test_y] = split(dataset.test(test_season));
    r.train_rows = train_p.size();
    r.test_rows = test_p.size();
    if (!train_p.empty()) r.train_raw = calibration_metrics(train_p, train_y, n_bins);
    if (!test_p.empty()) r.test_raw = calibration_metrics(test_p, test_y, n_bins);
    if (train_p.empty()) return r;

    std::vector<double> train_labels(train_y.begin(), train_y.end());
    const auto model = isotonic_fit(train_p, train_labels);
    auto apply = [&](const std::vector<double>& p) {
        std::vector<double> out;
        for (double v : p) out.push_back(model(v));
        return out;
    };
    r.train_isotonic = calibration_metrics(apply(train_p), train_y, n_bins);
    if (!test_p.empty()) r.test_isotonic = calibration_metrics(apply(test_p), test_y, n_bins);
    return r;
}

}  // namespace pmdata::analytics
