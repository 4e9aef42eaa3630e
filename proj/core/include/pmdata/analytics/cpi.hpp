#pragma once

#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmdata/model.hpp"
#include "pmdata/storage.hpp"

namespace pmdata::analytics {

enum class OutcomeSide { yes, no };

/// Probability of the bucket event implied by a trade on either outcome token.
double cpi_event_prob(double price, OutcomeSide side);

/// Interval (lower, upper] in percentage points. Bounds may be infinite.
struct BucketSpec {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool operator==(const BucketSpec&) const = default;
};

/// "0.2%" -> (0.15, 0.25], "0.0% or less" -> (-inf, 0.05], "0.4% or more" -> (0.35, inf).
/// Uses the last percentage in the text; absent when none is found.
std::optional<BucketSpec> parse_cpi_bucket(std::string_view text, double half_width = 0.05);

/// Gaussian mass inside the bucket. Throws PreconditionViolation unless sigma > 0.
double bucket_mass(double mu, double sigma, const BucketSpec& bucket);

struct ObservedBucket {
    BucketSpec bucket;
    double mass = 0.0;
};

struct GaussianFitOptions {
    double mu_step = 1e-3;
    double mu_margin = 0.5;
    double sigma_min = 0.01;
    double sigma_max = 1.0;
    int sigma_steps = 96;
    double sigma_floor = 0.01;
    int max_iterations = 4000;
};

struct GaussianFit {
    double mu = 0.0;
    double sigma = 0.0;
    double residual = 0.0;  ///< sum of squared mass errors
};

/// Least-squares fit of bucket masses (normalized to sum 1 first): grid search
/// then Nelder-Mead. Throws PreconditionViolation for fewer than 2 buckets or
/// zero total mass, FitDegenerate when all mass sits in one unbounded bucket.
GaussianFit fit_gaussian_to_buckets(const std::vector<ObservedBucket>& observed,
                                    const GaussianFitOptions& options = {});

/// A trade already mapped onto its bucket event.
struct CpiTrade {
    std::string key;  ///< bucket market (or token) the trade counts towards
    Timestamp ts{};
    double prob = 0.0;
    double value = 0.0;
};

/// Value-weighted event probability per key over trades in (t - window, t].
std::map<std::string, double> window_probabilities(const std::vector<CpiTrade>& trades, Timestamp t,
                                                   std::chrono::seconds window = std::chrono::hours(24));

/// window_probabilities restricted to values above min_prob.
std::map<std::string, double> cpi_token_snapshot(const std::vector<CpiTrade>& trades, Timestamp t,
                                                 std::chrono::seconds window = std::chrono::hours(24),
                                                 double min_prob = 0.10);

struct CpiBucketMarket {
    ConditionId market_id;
    std::string title;
    BucketSpec bucket;
    TokenId yes_token;
    TokenId no_token;
};

/// Bucket markets sharing one target month.
struct CpiMarketGroup {
    std::string event_slug;
    std::vector<CpiBucketMarket> buckets;
};

/// Markets whose title mentions CPI, grouped by event slug; markets without
/// a parseable bucket or an event slug are skipped.
std::vector<CpiMarketGroup> group_cpi_markets(const std::vector<MarketRecord>& markets);

/// Maps fills of the group's tokens onto bucket events keyed by market id.
std::vector<CpiTrade> cpi_trades(const CpiMarketGroup& group, const std::vector<FillRecord>& fills);

struct ImpliedPathPoint {
    Timestamp t{};
    double mu = 0.0;
    double sigma = 0.0;
    double residual = 0.0;
    std::size_t retained = 0;  ///< buckets above the probability threshold
    std::size_t observed = 0;  ///< buckets entering the fit
};

struct CpiPathOptions {
    std::chrono::seconds window = std::chrono::hours(24);
    double min_prob = 0.10;
    GaussianFitOptions fit;
};

/// For each grid time: snapshot, normalize, fit. Buckets traded in the window
/// but below the threshold enter the fit with zero mass. Points with fewer
/// than 2 observed buckets, or a degenerate fit, are skipped.
std::vector<ImpliedPathPoint> implied_cpi_path(const CpiMarketGroup& group, const std::vector<CpiTrade>& trades,
                                               const std::vector<Timestamp>& grid,
                                               const CpiPathOptions& options = {});

/// from, from + step, ... up to and including to.
std::vector<Timestamp> time_grid(Timestamp from, Timestamp to, std::chrono::seconds step = std::chrono::hours(1));

struct CpiGroupPath {
    CpiMarketGroup group;
    std::vector<ImpliedPathPoint> path;
};

/// Hourly path per group, spanning the group's first to last linked trade.
std::vector<CpiGroupPath> implied_cpi_paths(const Store& store, const CpiPathOptions& options = {},
                                            std::chrono::seconds step = std::chrono::hours(1));

}  // namespace pmdata::analytics
