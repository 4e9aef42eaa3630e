#include "pmdata/analytics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include "pmdata/errors.hpp"

namespace pmdata::analytics {

double mean(const std::vector<double>& v) {
    if (v.empty()) throw PreconditionViolation("mean of empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> median(std::vector<double> v) {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw PreconditionViolation("pearson_r: length mismatch");
    if (x.size() < 2) throw PreconditionViolation("pearson_r: need at least 2 points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson_r: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw PreconditionViolation("anova_oneway: need at least 2 groups");
    std::size_t n = 0;
    double total = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) throw PreconditionViolation("anova_oneway: empty group");
        n += g.size();
        total += std::accumulate(g.begin(), g.end(), 0.0);
    }
    const std::size_t k = groups.size();
    if (n <= k) throw PreconditionViolation("anova_oneway: need more observations than groups");
    const double grand = total / static_cast<double>(n);

    double ssb = 0.0, ssw = 0.0;
    for (const auto& g : groups) {
        const double m = mean(g);
        ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) ssw += (v - m) * (v - m);
    }
    if (ssw == 0.0) throw DegenerateInput("anova_oneway: zero within-group variance");

    AnovaResult r;
    r.df_between = k - 1;
    r.df_within = n - k;
    r.f = (ssb / static_cast<double>(r.df_between)) / (ssw / static_cast<double>(r.df_within));
    boost::math::fisher_f dist(static_cast<double>(r.df_between), static_cast<double>(r.df_within));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.f));
    return r;
}

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw PreconditionViolation("kruskal_wallis: need at least 2 groups");
    struct Obs {
        double value;
        std::size_t group;
    };
    std::vector<Obs> all;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw PreconditionViolation("kruskal_wallis: empty group");
        for (double v : groups[g]) all.push_back({v, g});
    }
    std::sort(all.begin(), all.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });

    const double n = static_cast<double>(all.size());
    std::vector<double> rank_sum(groups.size(), 0.0);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].value == all[i].value) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        for (std::size_t m = i; m < j; ++m) rank_sum[all[m].group] += midrank;
        i = j;
    }

    KruskalWallisResult r;
    r.df = groups.size() - 1;
    double s = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) s += rank_sum[g] * rank_sum[g] / static_cast<double>(groups[g].size());
    r.h_uncorrected = 12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0);
    const double correction = 1.0 - tie_term / (n * n * n - n);
    r.h = correction > 0.0 ? r.h_uncorrected / correction : 0.0;
    if (r.h < 0.0) r.h = 0.0;
    boost::math::chi_squared dist(static_cast<double>(r.df));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.h));
    return r;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace pmdata::analytics
