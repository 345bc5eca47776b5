#pragma once

#include "fbmclt/constants.hpp"
#include "fbmclt/fbm.hpp"
#include "fbmclt/test_function.hpp"

namespace fbmclt {

enum class RiemannRule { left, midpoint };

struct FunctionalSample {
    double n;
    double t;
    double value;
    RiemannRule rule;
};

// F_n(t) = n^{(Hd-1)/2} * sum_{t_k < nt} f(B(t_k)) dt, last partial step
// linearly weighted. Requires the dt = 1 grid convention (exact stationary
// increments at scale n; no rescaling step).
FunctionalSample additive_functional(const FbmPath& path, const TestFunction& f, double n,
                                     double t, RiemannRule rule = RiemannRule::left);

// first-order scaling n^{Hd-1} with a nonzero-integral bump g; the law of
// large numbers sends this to L_t(0) * integral(g)
double first_order_functional(const FbmPath& path, const SingleGaussian& g, double n, double t);

struct LocalTimeEstimate {
    double t;
    double epsilon;
    double value;
};

// Gaussian mollification of the occupation density at the origin:
// sum_{t_k < t} (2 pi eps)^{-d/2} e^{-|B(t_k)|^2 / (2 eps)} dt
LocalTimeEstimate local_time_estimate(const FbmPath& path, double t, double epsilon);

// E L_t(0) = (2 pi)^{-d/2} t^{1-Hd} / (1-Hd), the closed-form oracle used to
// certify the kernel estimator
double expected_local_time(const HurstModel& model, double t);

struct BandwidthPolicy {
    double eps0_factor = 1e-3; // starting bandwidth = factor * t^{2H}
    double stability_tol = 0.03;
    int max_halvings = 3;
};

// One draw of the limit variable sqrt(chd) * f_norm * sqrt(Lhat) * Z with Z
// standard normal independent of the path. (W(L) given L is centered Gaussian
// with variance L.) f_norm is the norm ||f||, not its square.
double simulate_limit_variable(const FbmSampler& sampler, double f_norm, double chd, double t,
                               double epsilon, RngStream& stream);

// gamma upper bound of the tightness exponent band:
// min(1-Hd, 2H-(1-Hd)) / 2, positive throughout the CLT regime
double tightness_gamma_sup(const HurstModel& model);

} // namespace fbmclt
