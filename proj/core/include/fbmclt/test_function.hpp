#pragma once

#include "fbmclt/errors.hpp"

#include <span>
#include <string>

namespace fbmclt {

// The certified test family: difference of two unit-mass centered Gaussians,
//   f(x) = amp * ( N(0, s1^2 I_d)(x) - N(0, s2^2 I_d)(x) ),
// so  integral f = 0 exactly and  fhat(xi) = amp*(e^{-s1^2|xi|^2/2} - e^{-s2^2|xi|^2/2})
// under the convention fhat(xi) = integral f(x) e^{-i<xi,x>} dx.
struct TestFunction {
    double sigma1;
    double sigma2;
    double amplitude;
    int d;

    TestFunction(double s1, double s2, double amp, int dim)
        : sigma1(s1), sigma2(s2), amplitude(amp), d(dim) {
        if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
            throw config_error("TestFunction: widths must be positive");
        if (d < 1) throw config_error("TestFunction: d must be >= 1");
    }

    double eval_radius2(double r2) const noexcept; // value at |x|^2 = r2
    double eval(std::span<const double> x) const;
    double eval1(double x) const noexcept { return eval_radius2(x * x); } // d=1 shorthand

    double fourier_radial(double rho) const noexcept; // fhat at |xi| = rho, real by symmetry

    // radius where the two Gaussian bells cross (f changes sign); +inf if s1 == s2
    double sign_change_radius() const noexcept;
};

// lone Gaussian bump with nonzero integral, for the first-order (law of large
// numbers) functional: g(x) = weight * N(0, s^2 I_d)(x), integral g = weight
struct SingleGaussian {
    double sigma;
    double weight;
    int d;

    SingleGaussian(double s, double w, int dim) : sigma(s), weight(w), d(dim) {
        if (!(sigma > 0.0)) throw config_error("SingleGaussian: width must be positive");
        if (d < 1) throw config_error("SingleGaussian: d must be >= 1");
    }

    double eval_radius2(double r2) const noexcept;
    double integral() const noexcept { return weight; }
};

struct MembershipCertificate {
    double beta;
    double abs_beta_moment; // integral |f(x)| |x|^beta dx, finite
    double integral_bound;  // |integral f| over quadrature, <= 1e-12
    bool ok;
    std::string violation; // empty when ok
};

// checks the two admissibility conditions: zero integral and finite absolute
// beta-moment
MembershipCertificate verify_membership(const TestFunction& f, double beta);

} // namespace fbmclt
