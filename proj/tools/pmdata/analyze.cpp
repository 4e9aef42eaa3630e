#include <fstream>

#include "pmdata/analytics/activity.hpp"
#include "pmdata/analytics/calibration.hpp"
#include "pmdata/analytics/cpi.hpp"
#include "pmdata/analytics/fees.hpp"
#include "pmdata/analytics/oracle_risk.hpp"
#include "pmdata/commands.hpp"
#include "pmdata/csv.hpp"
#include "pmdata/errors.hpp"

namespace pmdata::cli {

namespace {

namespace an = pmdata::analytics;
using nlohmann::json;
using Files = std::vector<std::filesystem::path>;

void write_json(const std::filesystem::path& file, const json& j) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw StorageUnavailable("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

json opt(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

Files activity(const Store& store, const std::filesystem::path& dir) {
    using namespace std::chrono;
    const auto days = an::daily_activity(store, sys_days{year{1970} / 1 / 1}, sys_days{year{2200} / 1 / 1});
    CsvWriter daily(dir / "activity_daily.csv", {"day", "transactions", "active_wallets", "traded_markets",
                                                  "transactions_norm", "active_wallets_norm", "traded_markets_norm"});
    std::uint64_t transactions = 0;
    for (const auto& d : days) {
        daily.row({format_day(d.day), std::to_string(d.transactions), std::to_string(d.active_wallets),
                   std::to_string(d.traded_markets), fmt(d.transactions_norm), fmt(d.active_wallets_norm),
                   fmt(d.traded_markets_norm)});
        transactions += d.transactions;
    }
    const auto volume = an::rolling_volume_by_topic(store, 30);
    CsvWriter topics(dir / "topic_volume.csv", {"topic", "day", "daily_volume", "rolling_mean_30d"});
    for (const auto& v : volume) topics.row({v.topic, format_day(v.day), fmt(v.daily_volume), fmt(v.rolling_mean)});

    json summary{{"days", days.size()}, {"transactions", transactions}, {"topic_rows", volume.size()}};
    if (!days.empty()) {
        summary["first_day"] = format_day(days.front().day);
        summary["last_day"] = format_day(days.back().day);
    }
    write_json(dir / "activity_summary.json", summary);
    return {dir / "activity_daily.csv", dir / "topic_volume.csv", dir / "activity_summary.json"};
}

Files fees(const Store& store, const std::filesystem::path& dir) {
    std::map<ConditionId, std::string> category_of;
    for (const auto& m : store.markets()) category_of[m.condition_id] = an::primary_topic(m);
    const auto fa = an::analyze_fees(store.summaries(), category_of);

    CsvWriter rates(dir / "fee_rates.csv", {"market_id", "category", "rate", "volume", "positive_fee_days"});
    for (const auto& r : fa.rates) {
        rates.row({r.market_id, r.category, fmt(r.rate), fmt(r.volume), std::to_string(r.positive_fee_days)});
    }
    CsvWriter cats(dir / "fee_categories.csv", {"category", "trade_value", "total_fee", "pooled_rate",
                                                 "first_nonzero_fee_day", "positive_fee_markets"});
    for (const auto& c : fa.categories) {
        const std::optional<double> pooled =
            c.trade_value > 0.0 ? std::optional(an::pooled_fee_rate(c.trade_value, c.total_fee)) : std::nullopt;
        cats.row({c.category, fmt(c.trade_value), fmt(c.total_fee), fmt(pooled),
                  c.first_nonzero_fee_day ? format_day(*c.first_nonzero_fee_day) : "",
                  std::to_string(c.positive_fee_markets)});
    }
    CsvWriter corr(dir / "fee_correlations.csv", {"min_rate", "n", "r", "r_squared"});
    for (const auto& c : fa.correlations) corr.row({fmt(c.min_rate), std::to_string(c.n), fmt(c.r), fmt(c.r_squared)});

    json summary{{"markets_with_fees", fa.rates.size()}, {"tested_categories", fa.tested_categories}};
    summary["fee_window_start"] = fa.fee_window_start ? json(format_day(*fa.fee_window_start)) : json(nullptr);
    summary["fee_window_end"] = fa.fee_window_end ? json(format_day(*fa.fee_window_end)) : json(nullptr);
    summary["anova"] = fa.anova ? json{{"f", fa.anova->f},
                                       {"df_between", fa.anova->df_between},
                                       {"df_within", fa.anova->df_within},
                                       {"p_value", fa.anova->p_value}}
                                : json(nullptr);
    summary["kruskal_wallis"] =
        fa.kruskal ? json{{"h", fa.kruskal->h}, {"df", fa.kruskal->df}, {"p_value", fa.kruskal->p_value}} : json(nullptr);
    write_json(dir / "fees_summary.json", summary);
    return {dir / "fee_rates.csv", dir / "fee_categories.csv", dir / "fee_correlations.csv", dir / "fees_summary.json"};
}

Files oracle(const Store& store, const std::filesystem::path& dir) {
    std::vector<an::RiskAnchor> cohort;
    std::map<ConditionId, std::vector<Timestamp>> trade_times;
    std::size_t disputed = 0;
    for (const auto& id : store.market_ids()) {
        const auto anchor = an::oracle_risk_anchor(store.oracle_events_for_market(id));
        if (!anchor) continue;
        const auto fills = store.fills_for_market(id);
        auto& times = trade_times[id];
        for (const auto& f : fills) {
            if (f.meta.block_timestamp) times.push_back(*f.meta.block_timestamp);
        }
        const auto cb = an::continued_betting(times, anchor->time);
        cohort.push_back({id, anchor->time, anchor->kind, cb.flag, cb.first_trade_delay_hours});
        if (anchor->kind == an::AnchorKind::first_dispute) ++disputed;
    }
    CsvWriter anchors(dir / "oracle_anchors.csv", {"market_id", "anchor_kind", "anchor_time", "continued_betting",
                                                    "first_trade_delay_hours"});
    for (const auto& a : cohort) {
        anchors.row({a.market_id, std::string(an::to_string(a.anchor_kind)), format_iso8601(a.anchor_time),
                     a.continued_betting ? "1" : "0", fmt(a.first_trade_delay_hours)});
    }
    const auto hist = an::post_anchor_histogram(cohort, trade_times);
    CsvWriter h(dir / "oracle_histogram.csv", {"hour", "trades", "first_trades", "cumulative_share"});
    for (std::size_t i = 0; i < hist.hourly_trades.size(); ++i) {
        h.row({std::to_string(i), std::to_string(hist.hourly_trades[i]), std::to_string(hist.first_trade_counts[i]),
               fmt(hist.cumulative_share[i])});
    }
    write_json(dir / "oracle_summary.json", {{"anchored_markets", hist.cohort_size},
                                             {"disputed_markets", disputed},
                                             {"continued_betting_markets", hist.resumed},
                                             {"share_within_3h", opt(hist.share_within_3h)},
                                             {"median_delay_hours", opt(hist.median_delay_hours)}});
    return {dir / "oracle_anchors.csv", dir / "oracle_histogram.csv", dir / "oracle_summary.json"};
}

json metrics_json(const std::optional<an::CalibrationMetrics>& m) {
    if (!m) return nullptr;
    return {{"brier", m->brier}, {"log_loss", m->log_loss}, {"ece", m->ece}, {"mce", m->mce}};
}

Files nba(const Store& store, const std::filesystem::path& dir) {
    const auto data = an::build_calibration_dataset(store);
    CsvWriter samples(dir / "nba_samples.csv", {"market_id", "team", "season", "p", "y"});
    for (const auto& s : data.samples) {
        samples.row({s.market_id, s.team, std::to_string(s.season), fmt(s.p), s.y ? std::to_string(*s.y) : ""});
    }
    const auto report = an::evaluate_calibration(data);
    CsvWriter rel(dir / "nba_reliability.csv",
                  {"split", "model", "bin_lower", "bin_upper", "count", "confidence", "accuracy"});
    auto bins = [&](const char* split, const char* model, const std::optional<an::CalibrationMetrics>& m) {
        if (!m) return;
        for (const auto& b : m->bins) {
            rel.row({split, model, fmt(b.lower), fmt(b.upper), std::to_string(b.count),
                     b.count ? fmt(b.confidence) : "", b.count ? fmt(b.accuracy) : ""});
        }
    };
    bins("train", "raw", report.train_raw);
    bins("train", "isotonic", report.train_isotonic);
    bins("test", "raw", report.test_raw);
    bins("test", "isotonic", report.test_isotonic);
    write_json(dir / "nba_summary.json", {{"candidate_markets", data.candidate_markets},
                                          {"matched_markets", data.matched_markets},
                                          {"markets_with_rows", data.markets_with_rows},
                                          {"train_rows", report.train_rows},
                                          {"test_rows", report.test_rows},
                                          {"train_raw", metrics_json(report.train_raw)},
                                          {"train_isotonic", metrics_json(report.train_isotonic)},
                                          {"test_raw", metrics_json(report.test_raw)},
                                          {"test_isotonic", metrics_json(report.test_isotonic)}});
    return {dir / "nba_samples.csv", dir / "nba_reliability.csv", dir / "nba_summary.json"};
}

Files cpi(const Store& store, const std::filesystem::path& dir) {
    const auto paths = an::implied_cpi_paths(store);
    CsvWriter csv(dir / "cpi_path.csv", {"event_slug", "t", "mu", "sigma", "residual", "retained", "observed"});
    json groups = json::array();
    for (const auto& gp : paths) {
        for (const auto& p : gp.path) {
            csv.row({gp.group.event_slug, format_iso8601(p.t), fmt(p.mu), fmt(p.sigma), fmt(p.residual),
                     std::to_string(p.retained), std::to_string(p.observed)});
        }
        groups.push_back({{"event_slug", gp.group.event_slug},
                          {"buckets", gp.group.buckets.size()},
                          {"points", gp.path.size()}});
    }
    write_json(dir / "cpi_summary.json", {{"groups", groups}});
    return {dir / "cpi_path.csv", dir / "cpi_summary.json"};
}

}  // namespace

std::vector<std::filesystem::path> analyze_store(const Store& store, Analysis analysis,
                                                 const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    switch (analysis) {
        case Analysis::activity: return activity(store, out_dir);
        case Analysis::fees: return fees(store, out_dir);
        case Analysis::oracle: return oracle(store, out_dir);
        case Analysis::nba: return nba(store, out_dir);
        case Analysis::cpi: return cpi(store, out_dir);
    }
    return {};
}

}  // namespace pmdata::cli
