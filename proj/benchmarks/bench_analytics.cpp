#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "pmdata/analytics/calibration.hpp"
#include "pmdata/analytics/cpi.hpp"

namespace an = pmdata::analytics;

static void BM_IsotonicFit(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = u(rng);
        y[i] = u(rng) < x[i];
    }
    for (auto _ : state) benchmark::DoNotOptimize(an::isotonic_fit(x, y));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_IsotonicFit)->Range(1 << 8, 1 << 18);

static void BM_BucketMass(benchmark::State& state) {
    const an::BucketSpec b{0.15, 0.25};
    double mu = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(an::bucket_mass(mu, 0.1, b));
        mu = mu < 0.4 ? mu + 1e-6 : 0.1;
    }
}
BENCHMARK(BM_BucketMass);

static void BM_GaussianFit(benchmark::State& state) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::vector<an::BucketSpec> buckets{{-inf, 0.05}, {0.05, 0.15}, {0.15, 0.25}, {0.25, 0.35}, {0.35, inf}};
    std::vector<an::ObservedBucket> obs;
    for (const auto& b : buckets) obs.push_back({b, an::bucket_mass(0.22, 0.09, b)});
    for (auto _ : state) benchmark::DoNotOptimize(an::fit_gaussian_to_buckets(obs));
}
BENCHMARK(BM_GaussianFit);
