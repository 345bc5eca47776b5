#include "fbmclt/test_function.hpp"

#include "fbmclt/errors.hpp"
#include "fbmclt/quadrature.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace fbmclt;

TEST_CASE("gaussian difference point values") {
    const TestFunction f(1.0, 2.0, 1.0, 1);
    // at the origin: (2pi)^{-1/2} (1/s1 - 1/s2)
    CHECK(f.eval1(0.0) == doctest::Approx(0.19947114020071635).epsilon(1e-12));
    CHECK(f.eval_radius2(0.0) == f.eval1(0.0));
    const std::array<double, 1> x{1.5};
    CHECK(f.eval(x) == f.eval1(1.5));
    CHECK(f.eval1(-1.5) == f.eval1(1.5));

    // amplitude is a plain scale factor
    const TestFunction g(1.0, 2.0, -2.5, 1);
    CHECK(g.eval1(0.7) == doctest::Approx(-2.5 * f.eval1(0.7)).epsilon(1e-15));

    CHECK_THROWS_AS(TestFunction(0.0, 2.0, 1.0, 1), config_error);
    CHECK_THROWS_AS(TestFunction(1.0, -1.0, 1.0, 1), config_error);
    CHECK_THROWS_AS(TestFunction(1.0, 2.0, 1.0, 0), config_error);
}

TEST_CASE("fourier transform is the bell difference") {
    const TestFunction f(1.0, 2.0, 1.0, 1);
    CHECK(f.fourier_radial(0.0) == 0.0); // zero integral, exactly
    CHECK(f.fourier_radial(1.0) == doctest::Approx(0.47119537647602072).epsilon(1e-12));
    // dimension does not enter the radial profile
    const TestFunction f3(1.0, 2.0, 1.0, 3);
    CHECK(f3.fourier_radial(1.0) == f.fourier_radial(1.0));
}

TEST_CASE("sign change radius") {
    const TestFunction f(1.0, 2.0, 1.0, 1);
    const double r = f.sign_change_radius();
    CHECK(r == doctest::Approx(1.3595559868917603).epsilon(1e-10));
    // f is positive inside, negative outside (narrow bell wins at the origin)
    CHECK(f.eval1(r - 1e-3) > 0.0);
    CHECK(f.eval1(r + 1e-3) < 0.0);
    // d = 2: radius grows like sqrt(d)
    const TestFunction f2(1.0, 2.0, 1.0, 2);
    CHECK(f2.sign_change_radius() == doctest::Approx(r * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("parseval check on the squared integral") {
    const TestFunction f(1.0, 2.0, 1.0, 1);
    const double direct =
        integrate([&](double x) { return f.eval1(x) * f.eval1(x); }, -24.0, 24.0).value;
    // exact: 1/sqrt(4 pi s1^2) - 2/sqrt(2 pi (s1^2+s2^2)) + 1/sqrt(4 pi s2^2)
    CHECK(direct == doctest::Approx(0.066317364430304489).epsilon(1e-9));
    const double spectral =
        integrate([&](double r) { return f.fourier_radial(r) * f.fourier_radial(r); }, 0.0,
                  40.0)
            .value /
        M_PI; // (2pi)^{-1} * 2 (even integrand)
    CHECK(spectral == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("membership certificate") {
    const TestFunction f(1.0, 2.0, 1.0, 1);
    const MembershipCertificate cert = verify_membership(f, 1.5);
    CHECK(cert.ok);
    CHECK(cert.violation.empty());
    CHECK(cert.beta == 1.5);
    CHECK(cert.integral_bound <= 1e-12);
    CHECK(cert.abs_beta_moment == doctest::Approx(1.8169856221346152).epsilon(1e-8));

    // d = 2 certificate is finite as well
    const TestFunction f2(1.0, 2.0, 1.0, 2);
    const MembershipCertificate cert2 = verify_membership(f2, 4.0 / 3.0);
    CHECK(cert2.ok);
    CHECK(cert2.abs_beta_moment > 0.0);
    CHECK(std::isfinite(cert2.abs_beta_moment));
}

TEST_CASE("single gaussian bump") {
    const SingleGaussian g(0.8, 2.0, 1);
    CHECK(g.integral() == 2.0);
    // peak value: weight / sqrt(2 pi s^2)
    CHECK(g.eval_radius2(0.0) ==
          doctest::Approx(2.0 / std::sqrt(2.0 * M_PI * 0.64)).epsilon(1e-12));
    const double quad = integrate([&](double x) { return g.eval_radius2(x * x); }, -12.0, 12.0).value;
    CHECK(quad == doctest::Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(SingleGaussian(0.0, 1.0, 1), config_error);
}
