#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>

#include "criteria.hpp"
#include "pmdata/analytics/calibration.hpp"
#include "pmdata/analytics/cpi.hpp"
#include "pmdata/analytics/fees.hpp"
#include "pmdata/analytics/oracle_risk.hpp"
#include "pmdata/analytics/stats.hpp"
#include "pmdata/ingestion.hpp"
#include "pmdata/simulator.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

namespace pmdata::acceptance {
namespace {

namespace an = analytics;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

// 6 -----------------------------------------------------------------------------

Outcome isotonic_equivalence() {
    std::mt19937_64 rng(606);
    std::uniform_int_distribution<int> len(1, 8), grid(0, 4), bit(0, 1);
    int matched = 0;
    double worst = 0;
    for (int k = 0; k < 500; ++k) {
        const int n = len(rng);
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = 0.25 * grid(rng);
            y[i] = bit(rng);
        }
        const auto f = an::isotonic_fit(x, y);
        double sse = 0;
        for (int i = 0; i < n; ++i) sse += (y[i] - f(x[i])) * (y[i] - f(x[i]));
        bool monotone = true;
        for (std::size_t i = 1; i < f.values().size(); ++i) monotone &= f.values()[i - 1] <= f.values()[i];
        const double gap = std::abs(sse - test::oracle::isotonic_min_sse(x, y));
        worst = std::max(worst, gap);
        matched += gap <= 1e-12 && monotone;
    }

    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> size(20, 300);
    int improved = 0;
    for (int k = 0; k < 100; ++k) {
        const int n = size(rng);
        std::vector<double> p(n), yd(n);
        std::vector<int> y(n);
        const double skew = 0.5 + 1.5 * u(rng);
        for (int i = 0; i < n; ++i) {
            p[i] = std::round(u(rng) * 100) / 100;
            y[i] = u(rng) < std::pow(p[i], skew);
            yd[i] = y[i];
        }
        const auto f = an::isotonic_fit(p, yd);
        std::vector<double> q(n);
        for (int i = 0; i < n; ++i) q[i] = f(p[i]);
        improved += an::calibration_metrics(q, y).brier <= an::calibration_metrics(p, y).brier;
    }
    return {matched == 500 && improved == 100,
            format("%d/500 match exhaustive search (max |dSSE| %.1e); train Brier not worse after fit on %d/100",
                   matched, worst, improved)};
}

// 7 -----------------------------------------------------------------------------

Outcome metrics_oracle() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> u(0, 1);
    std::uniform_int_distribution<int> len(1, 30);
    int matched = 0;
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const int n = len(rng);
        std::vector<double> p(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            // A share of instances sits exactly on bin edges and the ends of [0, 1].
            p[i] = k % 4 == 0 ? std::round(u(rng) * 10) / 10 : u(rng);
            y[i] = u(rng) < p[i];
        }
        const auto got = an::calibration_metrics(p, y);
        const auto want = test::oracle::calibration_metrics(p, y, 10);
        const double gap = std::max({std::abs(got.brier - want.brier), std::abs(got.log_loss - want.log_loss),
                                     std::abs(got.ece - want.ece), std::abs(got.mce - want.mce)});
        worst = std::max(worst, gap);
        matched += gap <= 1e-12;
    }
    return {matched == 100, format("%d/100 instances within 1e-12 (max gap %.1e)", matched, worst)};
}

// 8 -----------------------------------------------------------------------------

std::vector<an::BucketSpec> partition() {
    return {{-kInf, 0.05}, {0.05, 0.15}, {0.15, 0.25}, {0.25, 0.35}, {0.35, kInf}};
}

double oracle_mass(double mu, double sigma, const an::BucketSpec& b) {
    // The series loses its last digits far in the tails; clamp to a probability.
    auto phi = [](long double x) { return std::clamp(test::oracle::normal_cdf(x), 0.0L, 1.0L); };
    auto z = [&](double x) { return (static_cast<long double>(x) - mu) / sigma; };
    // The open upper bucket uses the lower tail by symmetry so no 1 - P cancellation occurs.
    if (std::isinf(b.upper)) return static_cast<double>(phi(-z(b.lower)));
    const long double lo = std::isinf(b.lower) ? 0.0L : phi(z(b.lower));
    return static_cast<double>(std::max(0.0L, phi(z(b.upper)) - lo));
}

Outcome gaussian_round_trip() {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> mu_dist(0.05, 0.35), sigma_dist(0.02, 0.25);
    int recovered = 0;
    double worst_mu = 0, worst_sigma = 0, worst_sum = 0;
    for (int k = 0; k < 200; ++k) {
        const double mu = mu_dist(rng), sigma = sigma_dist(rng);
        std::vector<an::ObservedBucket> obs;
        double sum = 0;
        for (const auto& b : partition()) {
            obs.push_back({b, oracle_mass(mu, sigma, b)});
            sum += an::bucket_mass(mu, sigma, b);
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        const auto fit = an::fit_gaussian_to_buckets(obs);
        worst_mu = std::max(worst_mu, std::abs(fit.mu - mu));
        worst_sigma = std::max(worst_sigma, std::abs(fit.sigma - sigma));
        recovered += std::abs(fit.mu - mu) <= 1e-3 && std::abs(fit.sigma - sigma) <= 1e-3;
    }
    std::uniform_real_distribution<double> wide(-3, 3), spread(0.01, 2);
    for (int k = 0; k < 1000; ++k) {
        double sum = 0;
        const double mu = wide(rng), sigma = spread(rng);
        for (const auto& b : partition()) sum += an::bucket_mass(mu, sigma, b);
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    double worst_cdf = 0;
    for (int i = 0; i < 1000; ++i) {
        const double x = -8.0 + 16.0 * i / 999.0;
        worst_cdf = std::max(worst_cdf, static_cast<double>(std::abs(an::normal_cdf(x) - test::oracle::normal_cdf(x))));
    }
    const bool ok = recovered == 200 && worst_sum <= 1e-9 && worst_cdf <= 1e-10;
    return {ok, format("%d/200 fits within 1e-3 (max |dmu| %.1e, |dsigma| %.1e); max |sum-1| %.1e; max |dPhi| %.1e",
                       recovered, worst_mu, worst_sigma, worst_sum, worst_cdf)};
}

// 9 -----------------------------------------------------------------------------

Outcome statistics() {
    const auto anova = an::anova_oneway({{1, 2, 3}, {4, 5, 6}});
    const bool f_exact = anova.f == 13.5 && anova.df_between == 1 && anova.df_within == 4;
    const double r = an::pearson_r({1, 2, 3}, {1, 2, 4});
    const bool r_ok = std::abs(r - 9.0 / std::sqrt(84.0)) <= 1e-9 &&
                      std::abs(an::pearson_r({1, 2, 3}, {1, 2, 3}) - 1.0) <= 1e-9 &&
                      std::abs(an::pearson_r({1, 2, 3}, {-1, -2, -3}) + 1.0) <= 1e-9;
    const auto kw = an::kruskal_wallis({{1, 2}, {3, 4}});
    const bool kw_ok = std::abs(kw.h_uncorrected - 2.4) <= 1e-9 &&
                       std::abs(an::kruskal_wallis({{1, 2, 3}, {1, 2, 3}}).h) <= 1e-9 &&
                       an::kruskal_wallis({{5, 5}, {5, 5}}).h == 0.0;

    std::mt19937_64 rng(909);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> scale(0.1, 20), shift(-50, 50);
    int invariant = 0;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x(15), y(15), x2(15), y2(15);
        const double a = scale(rng), b = shift(rng), c = scale(rng), d = shift(rng);
        for (int i = 0; i < 15; ++i) {
            x[i] = n01(rng);
            y[i] = 0.4 * x[i] + n01(rng);
            x2[i] = a * x[i] + b;
            y2[i] = c * y[i] + d;
        }
        std::vector<std::vector<double>> g(3), h(3);
        for (int j = 0; j < 3; ++j) {
            for (int i = 0; i < 5; ++i) {
                g[j].push_back(n01(rng) + 0.5 * j);
                h[j].push_back(a * g[j].back() + b);
            }
        }
        const double f = an::anova_oneway(g).f;
        invariant += std::abs(an::pearson_r(x2, y2) - an::pearson_r(x, y)) <= 1e-9 &&
                     std::abs(an::anova_oneway(h).f - f) <= 1e-9 * std::max(1.0, f) &&
                     std::abs(an::kruskal_wallis(h).h - an::kruskal_wallis(g).h) <= 1e-12;
    }
    const bool ok = f_exact && r_ok && kw_ok && invariant == 100;
    return {ok, format("F=%.17g df=(%zu,%zu); r=%.10f; H=%.10f; affine invariance %d/100", anova.f,
                       anova.df_between, anova.df_within, r, kw.h_uncorrected, invariant)};
}

// 10 ----------------------------------------------------------------------------

std::unique_ptr<Store> ingest(const std::shared_ptr<const Universe>& u) {
    auto store = std::make_unique<Store>(":memory:");
    SimulatorSource source(u);
    SyncEngine(*store, source).backfill(u->config.genesis_block, u->final_block);
    return store;
}

Outcome oracle_risk() {
    SimConfig c;
    c.seed = 1010;
    c.n_markets = 100;
    c.horizon_days = 10;
    c.dispute_rate = 0.4;
    c.trades_mean = 30;
    const auto u = std::make_shared<const Universe>(generate_lifecycle(c));
    const auto store = ingest(u);

    std::vector<an::RiskAnchor> cohort;
    std::map<ConditionId, std::vector<Timestamp>> times;
    std::vector<an::RiskAnchor> brute;
    std::map<ConditionId, std::vector<double>> brute_delays;
    std::size_t anchors_equal = 0, disputes = 0;
    for (const auto& m : u->markets) {
        const auto& id = m.record.condition_id;
        // Pipeline side: linked store records.
        const auto anchor = an::oracle_risk_anchor(store->oracle_events_for_market(id));
        auto& ts = times[id];
        for (const auto& f : store->fills_for_market(id)) ts.push_back(*f.meta.block_timestamp);
        if (anchor) {
            const auto cb = an::continued_betting(ts, anchor->time);
            cohort.push_back({id, anchor->time, anchor->kind, cb.flag, cb.first_trade_delay_hours});
        }

        // Brute force from the raw universe.
        std::optional<Timestamp> first_dispute, last_propose;
        for (const auto& e : u->oracle_events) {
            if (e.condition_id != id) continue;
            const Timestamp t = u->timestamp_of(e.block_number);
            if (e.event_type == OracleEventType::dispute && (!first_dispute || t < *first_dispute)) first_dispute = t;
            if (e.event_type == OracleEventType::propose && (!last_propose || t > *last_propose)) last_propose = t;
        }
        if (!first_dispute && !last_propose) continue;
        an::RiskAnchor b;
        b.market_id = id;
        b.anchor_time = first_dispute ? *first_dispute : *last_propose;
        b.anchor_kind = first_dispute ? an::AnchorKind::first_dispute : an::AnchorKind::last_propose;
        disputes += first_dispute.has_value();
        auto& delays = brute_delays[id];
        for (const auto& f : u->fills) {
            if (f.asset_id != m.record.yes_token && f.asset_id != m.record.no_token) continue;
            const auto secs = (u->timestamp_of(f.block_number) - b.anchor_time).count();
            if (secs > 0 && secs <= 24 * 3600) delays.push_back(static_cast<double>(secs) / 3600.0);
        }
        if (!delays.empty()) {
            b.continued_betting = true;
            b.first_trade_delay_hours = *std::min_element(delays.begin(), delays.end());
        }
        brute.push_back(b);
        if (!cohort.empty() && cohort.back() == b) ++anchors_equal;
    }

    const auto h = an::post_anchor_histogram(cohort, times);
    std::vector<std::uint64_t> hourly(24), first(24);
    std::size_t resumed = 0;
    for (const auto& b : brute) {
        for (double d : brute_delays[b.market_id]) ++hourly[std::min<std::size_t>(static_cast<std::size_t>(d), 23)];
        if (b.first_trade_delay_hours) {
            ++resumed;
            ++first[std::min<std::size_t>(static_cast<std::size_t>(*b.first_trade_delay_hours), 23)];
        }
    }
    bool cumulative_ok = h.cumulative_share.size() == 24;
    double running = 0;
    for (std::size_t i = 0; i < h.cumulative_share.size(); ++i) {
        running += static_cast<double>(first[i]);
        cumulative_ok &= h.cumulative_share[i] == running / static_cast<double>(brute.size());
        if (i > 0) cumulative_ok &= h.cumulative_share[i - 1] <= h.cumulative_share[i];
        cumulative_ok &= h.cumulative_share[i] <= 1.0;
    }
    const bool ok = cohort.size() == brute.size() && anchors_equal == brute.size() && h.hourly_trades == hourly &&
                    h.first_trade_counts == first && h.resumed == resumed && cumulative_ok;
    return {ok, format("%zu/%zu anchors+flags+delays equal (%zu dispute-anchored); histogram equal: %s; "
                       "resumed %zu; cumulative monotone: %s",
                       anchors_equal, brute.size(), disputes,
                       h.hourly_trades == hourly && h.first_trade_counts == first ? "yes" : "no", h.resumed,
                       cumulative_ok ? "yes" : "no")};
}

// 11 ----------------------------------------------------------------------------

Outcome fee_analytics() {
    SimConfig c;
    c.seed = 1111;
    c.n_markets = 300;
    c.horizon_days = 30;
    c.fee_regime = {{8, "Crypto", 0.02}, {15, "Sports", 0.005}, {22, "Crypto", 0.03}};
    const auto u = std::make_shared<const Universe>(generate_lifecycle(c));
    const auto store = ingest(u);

    std::map<ConditionId, std::map<Day, std::pair<BaseUnits, BaseUnits>>> raw;  // fee, value
    for (const auto& f : u->fills) {
        auto& cell = raw[*u->market_of_token(f.asset_id)][day_of(u->timestamp_of(f.block_number))];
        cell.first += f.fee;
        cell.second += collateral_amount(f);
    }
    std::size_t checked = 0, equal = 0, fee_markets = 0;
    for (const auto& m : u->markets) {
        const auto& id = m.record.condition_id;
        const auto got = an::effective_fee_rate(store->summaries_for_market(id));
        BaseUnits fee = 0, value = 0;
        std::size_t days = 0;
        for (const auto& [day, cell] : raw[id]) {
            if (cell.first == 0) continue;
            fee += cell.first;
            value += cell.second;
            ++days;
        }
        ++checked;
        if (days == 0) {
            equal += !got.has_value();
            continue;
        }
        ++fee_markets;
        equal += got && got->rate == static_cast<double>(fee) / static_cast<double>(value) &&
                 got->volume == static_cast<double>(value) / kBaseUnitsPerToken && got->positive_fee_days == days;
    }
    const double pooled = an::pooled_fee_rate(5.7030e9, 4.576785e8);
    const bool ok = equal == checked && fee_markets > 0 && std::abs(pooled - 0.08026) <= 1e-5;
    return {ok, format("%zu/%zu markets match brute force (%zu with positive-fee days); pooled Crypto rate %.7f",
                       equal, checked, fee_markets, pooled)};
}

// 12 ----------------------------------------------------------------------------

Outcome cpi_path() {
    const auto start = std::chrono::steady_clock::now();
    const Timestamp t0 = from_unix(1767225600);
    const int days = 30;
    const double sigma = 0.2;
    auto mu_at = [&](int d) { return 0.10 + 0.15 * d / (days - 1); };

    const std::vector<std::pair<std::string, an::BucketSpec>> labels{
        {"0.0% or less", {-kInf, 0.05}}, {"0.1%", {0.05, 0.15}}, {"0.2%", {0.15, 0.25}},
        {"0.3%", {0.25, 0.35}},          {"0.4% or more", {0.35, kInf}}};
    Store store(":memory:");
    std::vector<MarketRecord> markets;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto m = test::market(i, "Will March CPI increase by " + labels[i].first + "?");
        m.metadata.event_slug = "march-cpi";
        store.insert_market(m);
        markets.push_back(m);
    }
    std::uint64_t n = 0;
    std::vector<Timestamp> grid;
    for (int d = 0; d < days; ++d) {
        const Timestamp t = t0 + std::chrono::days(d) + std::chrono::hours(12);
        grid.push_back(t);
        for (std::size_t i = 0; i < markets.size(); ++i) {
            const double mass = oracle_mass(mu_at(d), sigma, labels[i].second);
            // Prices on a 1e-4 grid; the NO token trades the complement.
            const double yes = std::round(mass * 1e4) / 1e4;
            for (int k = 0; k < 2; ++k) {
                ++n;
                auto f = test::fill(n, k == 0 ? markets[i].yes_token : markets[i].no_token, k == 0 ? yes : 1.0 - yes,
                                    100, 1000 + n, t - std::chrono::hours(1 + k));
                f.market_id = markets[i].condition_id;
                store.insert_fill(f);
            }
        }
    }

    const auto groups = an::group_cpi_markets(store.markets());
    if (groups.size() != 1 || groups[0].buckets.size() != 5) return {false, "bucket markets not grouped"};
    const auto trades = an::cpi_trades(groups[0], store.all_fills());
    const auto path = an::implied_cpi_path(groups[0], trades, grid);

    std::size_t within = 0, eligible = 0;
    double worst = 0;
    for (const auto& p : path) {
        if (p.retained < 2) continue;
        ++eligible;
        const int d = static_cast<int>(std::chrono::duration_cast<std::chrono::days>(p.t - t0).count());
        const double err = std::abs(p.mu - mu_at(d));
        worst = std::max(worst, err);
        within += err <= 2e-3;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = eligible == grid.size() && within == eligible && secs < 30.0;
    return {ok, format("%zu/%zu grid points within 2e-3 (max |dmu| %.1e, %zu points emitted); runtime %.2fs (<30s)",
                       within, eligible, worst, path.size(), secs)};
}

}  // namespace

std::vector<Criterion> analytics_criteria() {
    return {
        {6, "Isotonic oracle equivalence", isotonic_equivalence},
        {7, "Calibration metrics oracle", metrics_oracle},
        {8, "Gaussian bucket fit", gaussian_round_trip},
        {9, "Statistics", statistics},
        {10, "Oracle-risk definitions", oracle_risk},
        {11, "Fee analytics", fee_analytics},
        {12, "End-to-end CPI path", cpi_path},
    };
}

}  // namespace pmdata::acceptance
