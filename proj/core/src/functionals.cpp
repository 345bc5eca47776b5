#include "fbmclt/functionals.hpp"

#include <algorithm>
#include <cmath>

namespace fbmclt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double radius2_at(const FbmPath& path, std::int64_t k) {
    const int d = path.model.d;
    const double* v = &path.values[static_cast<std::size_t>(k) * d];
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) r2 += v[c] * v[c];
    return r2;
}

inline double midpoint_radius2(const FbmPath& path, std::int64_t k) {
    const int d = path.model.d;
    const double* v0 = &path.values[static_cast<std::size_t>(k) * d];
    const double* v1 = &path.values[static_cast<std::size_t>(k + 1) * d];
    double r2 = 0.0;
    for (int c = 0; c < d; ++c) {
        const double m = 0.5 * (v0[c] + v1[c]);
        r2 += m * m;
    }
    return r2;
}

// left/midpoint Riemann sum of fn over [0, length) on the dt=1 grid, with the
// final partial step linearly weighted
template <class Fn>
double riemann_sum(const FbmPath& path, double length, RiemannRule rule, Fn&& fn) {
    if (path.grid.dt != 1.0)
        throw config_error("additive functionals require the dt = 1 grid convention");
    if (length < 0.0) throw config_error("additive functionals: negative horizon");
    const std::int64_t full = static_cast<std::int64_t>(std::floor(length));
    const double frac = length - static_cast<double>(full);
    const std::int64_t top = (frac > 0.0) ? full : full - 1; // last k evaluated
    const std::int64_t need = (rule == RiemannRule::midpoint) ? top + 1 : top;
    if (need > path.grid.n_steps)
        throw config_error("path horizon " + std::to_string(path.grid.n_steps) +
                           " too short for n*t = " + std::to_string(length));

    double sum = 0.0;
    if (rule == RiemannRule::left) {
        for (std::int64_t k = 0; k < full; ++k) sum += fn(radius2_at(path, k));
        if (frac > 0.0) sum += frac * fn(radius2_at(path, full));
    } else {
        for (std::int64_t k = 0; k < full; ++k) sum += fn(midpoint_radius2(path, k));
        if (frac > 0.0) sum += frac * fn(midpoint_radius2(path, full));
    }
    return sum;
}

} // namespace

FunctionalSample additive_functional(const FbmPath& path, const TestFunction& f, double n,
                                     double t, RiemannRule rule) {
    if (f.d != path.model.d) throw config_error("additive_functional: dimension mismatch");
    if (!(n > 0.0) || t < 0.0) throw config_error("additive_functional: need n > 0, t >= 0");
    const double hd = path.model.hd();
    const double sum = riemann_sum(path, n * t, rule, [&](double r2) { return f.eval_radius2(r2); });
    return {n, t, std::pow(n, 0.5 * (hd - 1.0)) * sum, rule};
}

double first_order_functional(const FbmPath& path, const SingleGaussian& g, double n, double t) {
    if (g.d != path.model.d) throw config_error("first_order_functional: dimension mismatch");
    if (!(n > 0.0) || t < 0.0) throw config_error("first_order_functional: need n > 0, t >= 0");
    const double hd = path.model.hd();
    const double sum =
        riemann_sum(path, n * t, RiemannRule::left, [&](double r2) { return g.eval_radius2(r2); });
    return std::pow(n, hd - 1.0) * sum;
}

LocalTimeEstimate local_time_estimate(const FbmPath& path, double t, double epsilon) {
    if (!(epsilon > 0.0)) throw config_error("local_time_estimate: epsilon must be positive");
    if (t < 0.0 || t > path.grid.horizon() + 1e-12)
        throw config_error("local_time_estimate: t outside the path horizon");
    path.model.require_local_time();

    const double dt = path.grid.dt;
    const double norm = std::pow(kTwoPi * epsilon, -0.5 * path.model.d);
    const double inv2e = 0.5 / epsilon;
    double sum = 0.0;
    const std::int64_t kmax = std::min<std::int64_t>(
        path.grid.n_steps, static_cast<std::int64_t>(std::ceil(t / dt - 1e-12)));
    for (std::int64_t k = 0; k < kmax; ++k) sum += std::exp(-radius2_at(path, k) * inv2e);
    return {t, epsilon, norm * sum * dt};
}

double expected_local_time(const HurstModel& model, double t) {
    model.require_local_time();
    if (t < 0.0) throw config_error("expected_local_time: negative time");
    const double hd = model.hd();
    return std::pow(kTwoPi, -0.5 * model.d) * std::pow(t, 1.0 - hd) / (1.0 - hd);
}

double simulate_limit_variable(const FbmSampler& sampler, double f_norm, double chd, double t,
                               double epsilon, RngStream& stream) {
    sampler.model().require_clt_regime();
    const FbmPath path = sampler.sample(stream);
    const double lhat = local_time_estimate(path, t, epsilon).value;
    const double z = stream.next_gaussian();
    return std::sqrt(chd) * f_norm * std::sqrt(std::max(lhat, 0.0)) * z;
}

double tightness_gamma_sup(const HurstModel& model) {
    model.require_clt_regime();
    const double x = 1.0 - model.hd();
    return 0.5 * std::min(x, 2.0 * model.h - x);
}

} // namespace fbmclt
