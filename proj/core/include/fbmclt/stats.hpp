#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fbmclt {

// count/mean/M2 accumulator with an associative, order-stable merge
// (Chan et al. pooling); reductions over fixed-size blocks are bit-identical
// for any thread count.
struct Accum {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_of_mean() const noexcept;
};

Accum merge(const Accum& a, const Accum& b) noexcept;

struct KsResult {
    double d_stat;
    double p_value;
    std::int64_t n_a;
    std::int64_t n_b;
};

// two-sample Kolmogorov-Smirnov with the asymptotic p-value; ties broken by
// the strict-inequality CDF convention (both CDFs evaluated right-continuously
// at every merged point)
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}
double ks_asymptotic_q(double lambda);

struct OlsFit {
    double slope;
    double intercept;
};

OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

} // namespace fbmclt
