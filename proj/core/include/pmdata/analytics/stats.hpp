#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace pmdata::analytics {

/// Product-moment correlation. Throws PreconditionViolation on length
/// mismatch or fewer than 2 points, DegenerateInput on zero variance.
double pearson_r(const std::vector<double>& x, const std::vector<double>& y);

struct AnovaResult {
    double f = 0.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
    double p_value = 0.0;  ///< upper tail of F(df_between, df_within)
};

/// Throws PreconditionViolation (fewer than 2 groups, an empty group, or
/// n <= number of groups) and DegenerateInput (zero within-group variance).
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

struct KruskalWallisResult {
    double h = 0.0;            ///< tie-corrected statistic
    double h_uncorrected = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;      ///< upper tail of chi-squared(df)
};

/// Midranks for ties. When every value is equal, H is 0.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

/// Standard normal CDF.
double normal_cdf(double x);

double mean(const std::vector<double>& v);
/// Average of the two middle values for even sizes; absent for empty input.
std::optional<double> median(std::vector<double> v);

}  // namespace pmdata::analytics
