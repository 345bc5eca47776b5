#pragma once

#include "fbmclt/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <string>

namespace fbmclt {

// Adaptive 15-point Gauss-Kronrod on [a,b]. Accepts the result when the
// error estimate meets abs 1e-10 or rel 1e-8; integrands are expected to be
// pre-regularized (power-law substitutions at singular endpoints).
struct QuadratureResult {
    double value;
    double abs_error;
};

template <class F>
QuadratureResult integrate(const F& f, double a, double b, double abs_tol = 1e-10,
                           double rel_tol = 1e-8, unsigned max_depth = 15) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, max_depth, rel_tol, &err);
    if (!(err <= abs_tol || err <= rel_tol * std::abs(v)) || !std::isfinite(v))
        throw numerical_error("quadrature did not converge on [" + std::to_string(a) + "," +
                              std::to_string(b) + "]: value=" + std::to_string(v) +
                              " err=" + std::to_string(err));
    return {v, err};
}

// fixed-order Gauss-Legendre nodes mapped to [a,b] (deterministic oracle grids)
template <unsigned Points, class F>
double gauss_fixed(const F& f, double a, double b) {
    return boost::math::quadrature::gauss<double, Points>::integrate(f, a, b);
}

} // namespace fbmclt
