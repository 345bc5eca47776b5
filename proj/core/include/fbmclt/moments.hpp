#pragma once

#include "fbmclt/fbm.hpp"
#include "fbmclt/hurst.hpp"
#include "fbmclt/rng.hpp"
#include "fbmclt/test_function.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace fbmclt {

// disjoint ordered intervals (a_i, b_i] with exponents m_i: the argument of
// the mixed-moment formula for the limit variable's increments
struct MomentSpec {
    std::vector<std::pair<double, double>> intervals;
    std::vector<int> multi_index;

    void validate() const;
    int total_order() const noexcept; // |m|
    bool any_odd() const noexcept;
};

struct MomentEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t samples = 0;
    bool exact = false; // odd case / closed form; implies stderr_ == 0
};

// E[prod_i (W(L_{b_i}) - W(L_{a_i}))^{m_i}] via the even-moment formula:
// prefactor * integral over prod [a_i,b_i]^{m_i/2} of det(A(w))^{-d/2}, by
// uniform Monte Carlo over the boxes; exact 0 when any m_i is odd. Draws are
// blocked on substreams of (seed, stage), so the result is independent of the
// thread count.
MomentEstimate limit_moment(const MomentSpec& spec, const HurstModel& model,
                            std::int64_t mc_samples, std::uint64_t seed, std::uint32_t stage = 0,
                            int threads = 1);

// closed form for a single interval with m = 2:
// (2 pi)^{-d/2} (b^{1-Hd} - a^{1-Hd}) / (1-Hd)
double limit_moment_m2_closed_form(const HurstModel& model, double a, double b);

// full CLT moment target: chd^{|m|/2} * ||f||^{|m|} * limit_moment(spec)
MomentEstimate clt_moment_target(const MomentSpec& spec, const HurstModel& model,
                                 const TestFunction& f, std::int64_t mc_samples,
                                 std::uint64_t seed, std::uint32_t stage = 0, int threads = 1);

struct LndReport {
    double min_ratio = 0.0;
    int configs_tested = 0;
    std::vector<double> worst_times;
    std::vector<double> worst_vectors; // row-major n_points x d
};

// randomized search for the local-nondeterminism ratio
//   Var(sum u_i . (B(s_i)-B(s_{i-1}))) / sum |u_i|^2 (s_i - s_{i-1})^{2H};
// reports the empirical minimum (the theory asserts it stays above some
// k_H > 0, identically 1 for H = 1/2)
LndReport lnd_scan(const HurstModel& model, int max_points, int n_configs, RngStream& stream);

namespace detail {
// deterministic 200x200 tensor-quadrature oracle for the single-interval m=4
// moment (Gauss-Legendre on the ordered simplex with square-power maps)
double limit_moment_single4_quadrature(const HurstModel& model, double a, double b);
} // namespace detail

} // namespace fbmclt
