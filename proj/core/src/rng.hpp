#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pmdata::detail {

// Portable transforms over mt19937_64. The standard distributions are
// implementation-defined, so they would break cross-platform determinism.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// [0, n)
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    /// [lo, hi]
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Marsaglia-Tsang; shape > 0, unit scale.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u;
            do {
                u = uniform();
            } while (u <= 0.0);
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Inversion by sequential search; fine for the small means used here.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 500.0) {
            const double x = std::round(mean + std::sqrt(mean) * normal());
            return x < 0.0 ? 0 : static_cast<std::uint64_t>(x);
        }
        double p = std::exp(-mean);
        double cdf = p;
        const double u = uniform();
        std::uint64_t k = 0;
        while (u > cdf && k < 100000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    /// Gamma-Poisson mixture with the given mean and shape.
    std::uint64_t negative_binomial(double mean, double shape) {
        if (mean <= 0.0) return 0;
        return poisson(gamma(shape) * mean / shape);
    }

    std::string hex(std::size_t bytes) {
        static constexpr char digits[] = "0123456789abcdef";
        std::string out = "0x";
        out.reserve(2 + 2 * bytes);
        std::uint64_t word = 0;
        for (std::size_t i = 0; i < 2 * bytes; ++i) {
            if (i % 16 == 0) word = next();
            out.push_back(digits[word & 0xf]);
            word >>= 4;
        }
        return out;
    }

    /// Decimal token id of roughly 38 digits with no leading zero.
    std::string token_id() {
        std::string out = std::to_string(1 + below(9));
        for (int i = 0; i < 2; ++i) {
            std::string part = std::to_string(below(1'000'000'000'000'000'000ULL));
            out += std::string(18 - part.size(), '0') + part;
        }
        return out;
    }

    /// Exactly `k` distinct indices from [0, n), ascending.
    std::vector<std::size_t> choose(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k && i < n; ++i) {
            std::swap(idx[i], idx[i + below(n - i)]);
        }
        idx.resize(std::min(k, n));
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pmdata::detail
