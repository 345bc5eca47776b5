#pragma once

#include "fbmclt/hurst.hpp"
#include "fbmclt/test_function.hpp"

namespace fbmclt {

struct ChdValue {
    enum class Method { closed_form, quadrature };
    double value;
    Method method;
    double abs_error_estimate;
};

// C_{H,d} = 2^{1-1/(2H)} Gamma((Hd+2H-1)/(2H)) / ((1-Hd) pi^{d/2});
// finite exactly on 1/(d+2) < H < 1/d, throws regime_error outside
ChdValue chd_closed_form(const HurstModel& model);

// same constant from the integral form 2 (2pi)^{-d/2} int_0^inf w^{-Hd}
// (1 - e^{-1/(2 w^{2H})}) dw, split at w=1 with the substitution w = 1/v on
// (0,1]; residual algebraic endpoints removed by power-law maps (see source)
ChdValue chd_quadrature(const HurstModel& model);

struct BetaNorm {
    enum class Method { spectral, direct };
    double beta;
    double value_squared;
    Method method;
};

// The constant c_{beta,d} pairing the two sides of the energy-norm identity
//   -int int f(x) f(y) |x-y|^beta dx dy = c_{beta,d} int |fhat(x)|^2 |x|^{-beta-d} dx.
// Calibrated once per (beta, d) on the (1,2) Gaussian-difference reference and
// verified on the (0.5,1.5) reference to 1e-4 relative; cached thereafter.
double riesz_constant(double beta, int d);

// right side of the identity: c_{beta,d} * S_{d-1} * int_0^inf fhat(r)^2 r^{-beta-1} dr
BetaNorm beta_norm_spectral(const TestFunction& f, double beta);

// left side: -int int f(x) f(y) |x-y|^beta, tensor quadrature on a truncation
// box: d=1 nested with a kink split; d >= 2 exact angular reduction to the
// two radii (closed-form angle factor in d = 3)
BetaNorm beta_norm_direct(const TestFunction& f, double beta);

// the bilinear form behind the norm, spectral route (seminorm/triangle checks)
double beta_inner_spectral(const TestFunction& f, const TestFunction& g, double beta);

} // namespace fbmclt
