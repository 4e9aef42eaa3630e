#include "pmdata/analytics/cpi.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <regex>
#include <utility>

#include "pmdata/analytics/stats.hpp"
#include "pmdata/errors.hpp"

namespace pmdata::analytics {

double cpi_event_prob(double price, OutcomeSide side) {
    if (!(price >= 0.0 && price <= 1.0)) throw PreconditionViolation("cpi_event_prob: price outside [0, 1]");
    return side == OutcomeSide::yes ? price : 1.0 - price;
}

std::optional<BucketSpec> parse_cpi_bucket(std::string_view text, double half_width) {
    static const std::regex pct(R"((-?\d+(?:\.\d+)?)\s*%(\s+or\s+(less|lower|below|more|higher|above))?)",
                                std::regex::icase);
    std::string s(text);
    std::smatch last;
    bool found = false;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), pct); it != std::sregex_iterator(); ++it) {
        last = *it;
        found = true;
    }
    if (!found) return std::nullopt;
    const double x = std::stod(last[1].str());
    BucketSpec b{x - half_width, x + half_width};
    if (last[3].matched) {
        std::string dir = last[3].str();
        std::transform(dir.begin(), dir.end(), dir.begin(), [](unsigned char c) { return std::tolower(c); });
        if (dir == "less" || dir == "lower" || dir == "below") {
            b.lower = -std::numeric_limits<double>::infinity();
        } else {
            b.upper = std::numeric_limits<double>::infinity();
        }
    }
    return b;
}

double bucket_mass(double mu, double sigma, const BucketSpec& bucket) {
    if (!(sigma > 0.0)) throw PreconditionViolation("bucket_mass: sigma must be positive");
    const double hi = std::isinf(bucket.upper) ? (bucket.upper > 0 ? 1.0 : 0.0)
                                               : normal_cdf((bucket.upper - mu) / sigma);
    const double lo = std::isinf(bucket.lower) ? (bucket.lower > 0 ? 1.0 : 0.0)
                                               : normal_cdf((bucket.lower - mu) / sigma);
    return std::clamp(hi - lo, 0.0, 1.0);
}

namespace {

double sse(const std::vector<ObservedBucket>& obs, double mu, double sigma) {
    double s = 0.0;
    for (const auto& o : obs) {
        const double d = bucket_mass(mu, sigma, o.bucket) - o.mass;
        s += d * d;
    }
    return s;
}

template <typename F>
std::pair<double, double> golden_min(F&& f, double a, double b) {
    const double r = (std::sqrt(5.0) - 1) / 2;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 60 && b - a > 1e-13; ++i) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - r * (b - a), fc = f(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + r * (b - a), fd = f(d);
        }
    }
    return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

struct Simplex {
    std::array<std::array<double, 2>, 3> x;
    std::array<double, 3> f;
};

// Nelder-Mead on (mu, log sigma).
template <typename F>
std::array<double, 2> nelder_mead(F&& f, std::array<double, 2> start, std::array<double, 2> step, int max_iter) {
    Simplex s;
    s.x[0] = start;
    s.x[1] = {start[0] + step[0], start[1]};
    s.x[2] = {start[0], start[1] + step[1]};
    for (int i = 0; i < 3; ++i) s.f[i] = f(s.x[i]);

    auto lerp = [](const std::array<double, 2>& a, const std::array<double, 2>& b, double t) {
        return std::array<double, 2>{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    };
    for (int iter = 0; iter < max_iter; ++iter) {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return s.f[a] < s.f[b]; });
        const int best = idx[0], mid = idx[1], worst = idx[2];
        const double size = std::max(std::abs(s.x[worst][0] - s.x[best][0]) + std::abs(s.x[mid][0] - s.x[best][0]),
                                     std::abs(s.x[worst][1] - s.x[best][1]) + std::abs(s.x[mid][1] - s.x[best][1]));
        if (size < 1e-12) break;

        const std::array<double, 2> centroid{(s.x[best][0] + s.x[mid][0]) / 2, (s.x[best][1] + s.x[mid][1]) / 2};
        const auto xr = lerp(centroid, s.x[worst], -1.0);
        const double fr = f(xr);
        if (fr < s.f[best]) {
            const auto xe = lerp(centroid, s.x[worst], -2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s.x[worst] = xe, s.f[worst] = fe;
            } else {
                s.x[worst] = xr, s.f[worst] = fr;
            }
            continue;
        }
        if (fr < s.f[mid]) {
            s.x[worst] = xr, s.f[worst] = fr;
            continue;
        }
        const bool outside = fr < s.f[worst];
        const auto xc = outside ? lerp(centroid, s.x[worst], -0.5) : lerp(centroid, s.x[worst], 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : s.f[worst])) {
            s.x[worst] = xc, s.f[worst] = fc;
            continue;
        }
        for (int i : {mid, worst}) {
            s.x[i] = lerp(s.x[best], s.x[i], 0.5);
            s.f[i] = f(s.x[i]);
        }
    }
    const auto best = std::min_element(s.f.begin(), s.f.end()) - s.f.begin();
    return s.x[static_cast<std::size_t>(best)];
}

}  // namespace

GaussianFit fit_gaussian_to_buckets(const std::vector<ObservedBucket>& observed, const GaussianFitOptions& options) {
    if (observed.size() < 2) throw PreconditionViolation("fit_gaussian_to_buckets: need at least 2 buckets");
    double total = 0.0;
    for (const auto& o : observed) {
        if (!(o.mass >= 0.0)) throw PreconditionViolation("fit_gaussian_to_buckets: negative mass");
        total += o.mass;
    }
    if (!(total > 0.0)) throw PreconditionViolation("fit_gaussian_to_buckets: zero total mass");
    std::vector<ObservedBucket> obs = observed;
    for (auto& o : obs) o.mass /= total;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t nonzero = 0;
    const ObservedBucket* only = nullptr;
    for (const auto& o : obs) {
        for (double b : {o.bucket.lower, o.bucket.upper}) {
            if (std::isfinite(b)) lo = std::min(lo, b), hi = std::max(hi, b);
        }
        if (o.mass > 0.0) ++nonzero, only = &o;
    }
    if (!std::isfinite(lo)) throw FitDegenerate("fit_gaussian_to_buckets: no finite bucket bounds");
    if (nonzero == 1 && (std::isinf(only->bucket.lower) || std::isinf(only->bucket.upper))) {
        throw FitDegenerate("fit_gaussian_to_buckets: all mass in one unbounded bucket");
    }

    const double floor = std::max(options.sigma_floor, 1e-12);
    const double mu_lo = lo - options.mu_margin;
    const double mu_hi = hi + options.mu_margin;
    const auto mu_n = static_cast<long>(std::floor((mu_hi - mu_lo) / options.mu_step + 1e-9));
    const int sigma_n = std::max(options.sigma_steps, 2);
    const double ratio = std::pow(options.sigma_max / options.sigma_min, 1.0 / (sigma_n - 1));

    // Profile over sigma: grid search in mu, then a golden-section polish within
    // one grid step, so near-flat directions in sigma are compared fairly.
    double best_f = std::numeric_limits<double>::infinity();
    double best_mu = mu_lo, best_sigma = std::max(options.sigma_min, floor);
    for (int j = 0; j < sigma_n; ++j) {
        const double sigma = std::max(options.sigma_min * std::pow(ratio, j), floor);
        double row_f = std::numeric_limits<double>::infinity(), row_mu = mu_lo;
        for (long i = 0; i <= mu_n; ++i) {
            const double mu = mu_lo + static_cast<double>(i) * options.mu_step;
            const double f = sse(obs, mu, sigma);
            if (f < row_f) row_f = f, row_mu = mu;
        }
        const auto [mu, f] = golden_min([&](double m) { return sse(obs, m, sigma); }, row_mu - options.mu_step,
                                        row_mu + options.mu_step);
        if (f < row_f) row_f = f, row_mu = mu;
        if (row_f < best_f) best_f = row_f, best_mu = row_mu, best_sigma = sigma;
    }

    auto objective = [&](const std::array<double, 2>& p) {
        return sse(obs, p[0], std::max(std::exp(p[1]), floor));
    };
    auto refined = nelder_mead(objective, {best_mu, std::log(best_sigma)},
                               {options.mu_step, std::log(ratio)}, options.max_iterations);
    // Restart once from the refined point to escape an early collapse.
    refined = nelder_mead(objective, refined, {options.mu_step / 4, std::log(ratio) / 4}, options.max_iterations);

    GaussianFit fit;
    fit.mu = refined[0];
    fit.sigma = std::max(std::exp(refined[1]), floor);
    fit.residual = sse(obs, fit.mu, fit.sigma);
    if (fit.residual > best_f) fit = {best_mu, best_sigma, best_f};
    return fit;
}

std::map<std::string, double> window_probabilities(const std::vector<CpiTrade>& trades, Timestamp t,
                                                   std::chrono::seconds window) {
    std::map<std::string, std::pair<double, double>> acc;
    for (const auto& tr : trades) {
        if (tr.ts <= t - window || tr.ts > t) continue;
        auto& [weighted, value] = acc[tr.key];
        weighted += tr.value * tr.prob;
        value += tr.value;
    }
    std::map<std::string, double> out;
    for (const auto& [key, a] : acc) {
        if (a.second > 0.0) out[key] = a.first / a.second;
    }
    return out;
}

std::map<std::string, double> cpi_token_snapshot(const std::vector<CpiTrade>& trades, Timestamp t,
                                                 std::chrono::seconds window, double min_prob) {
    auto all = window_probabilities(trades, t, window);
    std::erase_if(all, [&](const auto& kv) { return !(kv.second > min_prob); });
    return all;
}

std::vector<CpiMarketGroup> group_cpi_markets(const std::vector<MarketRecord>& markets) {
    static const std::regex cpi_word(R"(\bCPI\b)", std::regex::icase);
    std::map<std::string, CpiMarketGroup> groups;
    for (const auto& m : markets) {
        if (!m.metadata.event_slug || !std::regex_search(m.metadata.title, cpi_word)) continue;
        auto bucket = parse_cpi_bucket(m.metadata.title);
        const auto tokens = m.tokens();
        if (!bucket || tokens.size() != 2) continue;
        auto& g = groups[*m.metadata.event_slug];
        g.event_slug = *m.metadata.event_slug;
        g.buckets.push_back({m.condition_id, m.metadata.title, *bucket, tokens[0], tokens[1]});
    }
    std::vector<CpiMarketGroup> out;
    for (auto& [slug, g] : groups) {
        std::sort(g.buckets.begin(), g.buckets.end(),
                  [](const auto& a, const auto& b) { return a.bucket.lower < b.bucket.lower; });
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<CpiTrade> cpi_trades(const CpiMarketGroup& group, const std::vector<FillRecord>& fills) {
    std::map<TokenId, std::pair<ConditionId, OutcomeSide>, std::less<>> token_side;
    for (const auto& b : group.buckets) {
        token_side[b.yes_token] = {b.market_id, OutcomeSide::yes};
        token_side[b.no_token] = {b.market_id, OutcomeSide::no};
    }
    std::vector<CpiTrade> out;
    for (const auto& f : fills) {
        auto it = token_side.find(f.asset_id);
        if (it == token_side.end() || !f.meta.block_timestamp) continue;
        if (!(f.price >= 0.0 && f.price <= 1.0)) continue;
        out.push_back({it->second.first, *f.meta.block_timestamp, cpi_event_prob(f.price, it->second.second),
                       trade_value(f)});
    }
    return out;
}

std::vector<ImpliedPathPoint> implied_cpi_path(const CpiMarketGroup& group, const std::vector<CpiTrade>& trades,
                                               const std::vector<Timestamp>& grid, const CpiPathOptions& options) {
    std::map<std::string, BucketSpec, std::less<>> bucket_of;
    for (const auto& b : group.buckets) bucket_of[b.market_id] = b.bucket;

    std::vector<ImpliedPathPoint> out;
    for (const auto t : grid) {
        const auto probs = window_probabilities(trades, t, options.window);
        std::vector<ObservedBucket> obs;
        std::size_t retained = 0;
        for (const auto& [key, p] : probs) {
            auto it = bucket_of.find(key);
            if (it == bucket_of.end()) continue;
            const bool keep = p > options.min_prob;
            retained += keep ? 1 : 0;
            obs.push_back({it->second, keep ? p : 0.0});
        }
        if (obs.size() < 2 || retained == 0) continue;
        try {
            const auto fit = fit_gaussian_to_buckets(obs, options.fit);
            out.push_back({t, fit.mu, fit.sigma, fit.residual, retained, obs.size()});
        } catch (const FitDegenerate&) {
        }
    }
    return out;
}

std::vector<Timestamp> time_grid(Timestamp from, Timestamp to, std::chrono::seconds step) {
    if (step <= std::chrono::seconds::zero()) throw PreconditionViolation("time_grid: step must be positive");
    std::vector<Timestamp> out;
    for (auto t = from; t <= to; t += step) out.push_back(t);
    return out;
}

std::vector<CpiGroupPath> implied_cpi_paths(const Store& store, const CpiPathOptions& options,
                                            std::chrono::seconds step) {
    std::vector<CpiGroupPath> out;
    for (auto& group : group_cpi_markets(store.markets())) {
        std::vector<FillRecord> fills;
        for (const auto& b : group.buckets) {
            auto f = store.fills_for_market(b.market_id);
            fills.insert(fills.end(), f.begin(), f.end());
        }
        auto trades = cpi_trades(group, fills);
        CpiGroupPath gp{std::move(group), {}};
        if (!trades.empty()) {
            auto [first, last] = std::minmax_element(trades.begin(), trades.end(),
                                                     [](const auto& a, const auto& b) { return a.ts < b.ts; });
            const auto start = std::chrono::ceil<std::chrono::hours>(first->ts);
            gp.path = implied_cpi_path(gp.group, trades, time_grid(start, last->ts + options.window, step), options);
        }
        out.push_back(std::move(gp));
    }
    return out;
}

}  // namespace pmdata::analytics
