#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"

#include "dilute/errors.hpp"
#include "dilute/testfn.hpp"

using namespace dilute;
using std::numbers::pi;

namespace {

// (1/pi) int_{-pi/2}^{pi/2} g(x + eta tan theta) d theta by Simpson, independent of the library.
template <class G>
double poisson_ref(const G& g, double x, double eta, std::size_t panels = 4000) {
  auto f = [&](double t) {
    const double theta = t - 0.5 * pi;
    if (std::abs(std::cos(theta)) < 1e-300) return 0.0;
    return g(x + eta * std::tan(theta));
  };
  return oracle::simpson_theta(f, panels) / pi;
}

double gauss_ref(double x, double c, double w) { return std::exp(-(x - c) * (x - c) / (2 * w * w)); }

// (P_eta * gaussian)(y) integrated in the original variable over the bump's support.
double smoothed_gauss_ref(double y, double c, double w, double eta) {
  auto f = [&](double t) { return eta / (pi * ((y - t) * (y - t) + eta * eta)) * gauss_ref(t, c, w); };
  return oracle::trapezoid(f, c - 12 * w, c + 12 * w, 6000);
}

}  // namespace

TEST_CASE("pointwise values") {
  CHECK(evaluate(TestFunction::chebyshev(2), 2.0) == doctest::Approx(1.0));
  CHECK(evaluate(TestFunction::monomial(2), 1.5) == 2.25);
  CHECK(evaluate(TestFunction::constant(3.0), -7.0) == 3.0);
  CHECK(evaluate(TestFunction::gaussian(1.0, 2.0), 3.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(evaluate(TestFunction(), 1.0) == 0.0);
  const ComplexPoint z(0.5, 2.0);
  CHECK(evaluate(TestFunction::resolvent_re(z), 1.0) == doctest::Approx((1.0 / (1.0 - z.value())).real()));
  CHECK(evaluate(TestFunction::resolvent_im(z), 1.0) == doctest::Approx((1.0 / (1.0 - z.value())).imag()));
  const TestFunction combo = 0.5 * TestFunction::chebyshev(2) + TestFunction::monomial(4);
  CHECK(combo(1.2) == doctest::Approx(0.5 * (0.5 * 1.44 - 1.0) + std::pow(1.2, 4)));
  CHECK((combo - combo)(0.7) == doctest::Approx(0.0));
}

TEST_CASE("Chebyshev recurrence matches the trigonometric form") {
  for (int k = 0; k <= 25; ++k) {
    const TestFunction t = TestFunction::chebyshev(k);
    for (int i = 0; i <= 400; ++i) {
      const double x = -2.0 + 4.0 * i / 400.0;
      REQUIRE(t(x) == doctest::Approx(std::cos(k * std::acos(x / 2.0))).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("derivatives agree with central differences") {
  const ComplexPoint z(0.3, 0.8);
  const TestFunction fns[] = {
      TestFunction::chebyshev(5), TestFunction::monomial(3), TestFunction::gaussian(0.2, 0.7),
      TestFunction::cosh_weighted(1.0, TestFunction::gaussian(0.0, 1.0)),
      TestFunction::resolvent_re(z), TestFunction::resolvent_im(z),
      poisson_smooth(TestFunction::gaussian(0.0, 1.0), 0.4),
      poisson_smooth(TestFunction::resolvent_im(z), 0.2)};
  for (const auto& f : fns)
    for (double x : {-1.7, -0.4, 0.0, 0.9, 1.6}) {
      const double h = 1e-5;
      const double fd = (f(x + h) - f(x - h)) / (2 * h);
      CHECK(f.derivative(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("parameter checks") {
  CHECK_THROWS_AS(TestFunction::chebyshev(-1), ParameterError);
  CHECK_THROWS_AS(TestFunction::gaussian(0.0, 0.0), ParameterError);
  CHECK_THROWS_AS(TestFunction::cosh_weighted(0.0, TestFunction::gaussian(0, 1)), ParameterError);
  CHECK_THROWS_AS(poisson_smooth(TestFunction::gaussian(0, 1), 0.0), ParameterError);
  CHECK_THROWS_AS(poisson_smooth(TestFunction::gaussian(0, 1), -1.0), ParameterError);
  CHECK_THROWS_AS(poisson_smooth(TestFunction::monomial(2), 0.5), UnsupportedError);
}

TEST_CASE("cosh weighting guards overflow") {
  const TestFunction bad = TestFunction::cosh_weighted(1.0, TestFunction::resolvent_im(ComplexPoint(0, 1)));
  CHECK_THROWS_AS(bad(800.0), RangeError);
  const TestFunction good = TestFunction::cosh_weighted(1.0, TestFunction::gaussian(0, 1));
  CHECK(good(800.0) == 0.0);
  CHECK(good(1.0) == doctest::Approx(std::cosh(1.0) * std::exp(-0.5)));
}

TEST_CASE("classification and canonical spec") {
  CHECK(TestFunction::monomial(2).has_polynomial_part());
  CHECK_FALSE(TestFunction::constant(1.0).has_polynomial_part());
  CHECK(TestFunction::constant(1.0).is_bounded());
  CHECK_FALSE(TestFunction::chebyshev(1).is_bounded());
  CHECK(TestFunction::gaussian(0, 1).is_bounded());
  const TestFunction f = 0.5 * TestFunction::chebyshev(2) + TestFunction::monomial(4);
  CHECK(f.to_spec() == "0.5*chebyshev:2+1*monomial:4");
}

TEST_CASE("Poisson smoothing") {
  SUBCASE("constants are preserved") {
    const TestFunction one = poisson_smooth(TestFunction::constant(1.0), 0.7);
    for (double x : {-3.0, 0.0, 2.5}) CHECK(one(x) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("semigroup against a nested quadrature") {
    const TestFunction g = TestFunction::gaussian(0.3, 0.8);
    const TestFunction twice = poisson_smooth(poisson_smooth(g, 0.3), 0.2);
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double x : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
      auto outer = [&](double th) { return smoothed_gauss_ref(x + 0.2 * std::tan(th), 0.3, 0.8, 0.3); };
      const double nested = ts.integrate(outer, -0.5 * pi, 0.5 * pi, 1e-12) / pi;
      CHECK(std::abs(twice(x) - nested) < 1e-8);
    }
  }
  SUBCASE("resolvent parts have closed forms") {
    const ComplexPoint z(0.4, 0.6);
    for (double eta : {0.1, 1.0}) {
      const TestFunction re = poisson_smooth(TestFunction::resolvent_re(z), eta);
      const TestFunction im = poisson_smooth(TestFunction::resolvent_im(z), eta);
      for (double x : {-1.0, 0.4, 2.0}) {
        const auto w = 1.0 / (x - z.value() - std::complex<double>(0.0, eta));
        CHECK(re(x) == doctest::Approx(poisson_ref([&](double t) { return (1.0 / (t - z.value())).real(); }, x, eta)).epsilon(1e-7));
        CHECK(im(x) == doctest::Approx(poisson_ref([&](double t) { return (1.0 / (t - z.value())).imag(); }, x, eta)).epsilon(1e-7));
        CHECK(re(x) == doctest::Approx(w.real()).epsilon(1e-14));
        CHECK(im(x) == doctest::Approx(w.imag()).epsilon(1e-14));
      }
    }
  }
  SUBCASE("averaging lowers a strict maximum") {
    const TestFunction g = TestFunction::gaussian(0.0, 1.0);
    CHECK(poisson_smooth(g, 0.5)(0.0) < g(0.0));
  }
  SUBCASE("L1 distance shrinks with eta") {
    const TestFunction g = TestFunction::gaussian(0.0, 1.0);
    double last = 1e300;
    for (double eta : {0.5, 0.25, 0.125}) {
      const TestFunction s = poisson_smooth(g, eta);
      const double d = oracle::trapezoid([&](double x) { return std::abs(g(x) - s(x)); }, -4.0, 4.0, 800);
      CHECK(d < last);
      last = d;
    }
  }
}

TEST_CASE("Fourier transforms") {
  SUBCASE("standard Gaussian") {
    const auto f0 = fourier_transform(TestFunction::gaussian(0.0, 1.0), 0.0);
    CHECK(f0.real() == doctest::Approx(1.0 / std::sqrt(2 * pi)).epsilon(1e-15));
    CHECK(f0.imag() == 0.0);
    for (double k : {-2.0, 0.5, 1.3}) {
      const auto f = fourier_transform(TestFunction::gaussian(0.0, 1.0), k);
      CHECK(f.real() == doctest::Approx(std::exp(-k * k / 2) / std::sqrt(2 * pi)).epsilon(1e-14));
    }
  }
  SUBCASE("closed forms against a high-resolution quadrature") {
    const TestFunction fns[] = {TestFunction::gaussian(0.7, 0.6),
                                TestFunction::cosh_weighted(1.0, TestFunction::gaussian(0.2, 1.0)),
                                TestFunction::cosh_weighted(0.5, 2.0 * TestFunction::gaussian(-0.3, 0.8))};
    for (const auto& f : fns)
      for (double k : {-1.5, 0.0, 0.4, 2.0}) {
        const auto ref = oracle::trapezoid(
                             [&](double x) { return std::complex<double>(f(x) * std::cos(k * x), f(x) * std::sin(k * x)); },
                             -40.0, 40.0, 16000) /
                         (2 * pi);
        CHECK(std::abs(fourier_transform(f, k) - ref) < 1e-12);
      }
  }
  SUBCASE("resolvent parts") {
    const ComplexPoint z(0.5, 1.5);
    boost::math::quadrature::ooura_fourier_cos<double> cos_q;
    boost::math::quadrature::ooura_fourier_sin<double> sin_q;
    for (const auto& f : {TestFunction::resolvent_re(z), TestFunction::resolvent_im(z)})
      for (double k : {0.5, 1.0, 2.0}) {
        auto even = [&](double x) { return f(x) + f(-x); };
        auto odd = [&](double x) { return f(x) - f(-x); };
        const std::complex<double> ref(cos_q.integrate(even, k).first, sin_q.integrate(odd, k).first);
        CHECK(std::abs(fourier_transform(f, k) - ref / (2 * pi)) < 1e-8);
      }
  }
  SUBCASE("convolution theorem at k = +-1") {
    const TestFunction base = TestFunction::gaussian(0.3, 0.9);
    const double eta = 0.4;
    const TestFunction smoothed = poisson_smooth(base, eta);
    auto phi_eta = [&](double x) { return smoothed_gauss_ref(x, 0.3, 0.9, eta); };
    boost::math::quadrature::ooura_fourier_cos<double> cos_q;
    boost::math::quadrature::ooura_fourier_sin<double> sin_q;
    auto even = [&](double x) { return phi_eta(x) + phi_eta(-x); };
    auto odd = [&](double x) { return phi_eta(x) - phi_eta(-x); };
    const std::complex<double> direct(cos_q.integrate(even, 1.0).first, sin_q.integrate(odd, 1.0).first);
    const std::complex<double> plus = direct / (2 * pi);
    const std::complex<double> minus = std::conj(plus);
    CHECK(std::abs(fourier_transform(smoothed, 1.0) - plus) < 1e-7);
    CHECK(std::abs(fourier_transform(smoothed, -1.0) - minus) < 1e-7);
    CHECK(std::abs(fourier_transform(smoothed, 1.0) - fourier_transform(base, 1.0) * std::exp(-eta)) < 1e-15);
  }
  SUBCASE("zero and unsupported") {
    CHECK(fourier_transform(TestFunction(), 3.0) == std::complex<double>(0.0, 0.0));
    CHECK_THROWS_AS(fourier_transform(TestFunction::monomial(2), 1.0, TransformOptions{false}), UnsupportedError);
    const TestFunction c = TestFunction::cosh_weighted(1.0, TestFunction::resolvent_im(ComplexPoint(0, 1)));
    CHECK_THROWS_AS(fourier_transform(c, 1.0), UnsupportedError);
  }
  SUBCASE("windowed polynomials: parity and window") {
    for (double k : {0.3, 1.0, 4.0}) {
      const auto even = fourier_transform(TestFunction::monomial(2), k);
      const auto odd = fourier_transform(TestFunction::monomial(3), k);
      CHECK(std::abs(even.imag()) < 1e-14 * std::max(1.0, std::abs(even)));
      CHECK(std::abs(odd.real()) < 1e-14 * std::max(1.0, std::abs(odd)));
      const auto ref = oracle::trapezoid(
                           [&](double x) { return x * x * polynomial_window(x) * std::cos(k * x); }, -4.0, 4.0, 20000) /
                       (2 * pi);
      CHECK(even.real() == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK(polynomial_window(2.9) == 1.0);
    CHECK(polynomial_window(-4.0) == 0.0);
    CHECK(polynomial_window(3.5) == doctest::Approx(0.5));
  }
}

TEST_CASE("Sobolev norms") {
  const TestFunction g = TestFunction::gaussian(0.0, 1.0);
  SUBCASE("exact Gaussian moments") {
    // |g_hat(k)|^2 = e^{-k^2} / (2 pi); expand (1 + 2k)^{2s} for s = 2 and use
    // int_0^inf k^m e^{-k^2} dk = Gamma((m + 1) / 2) / 2.
    double exact = 0.0;
    const double binom[] = {1, 4, 6, 4, 1};
    for (int m = 0; m <= 4; ++m) exact += binom[m] * std::pow(2.0, m) * 0.5 * std::tgamma((m + 1) / 2.0);
    exact = std::sqrt(2.0 * exact / (2 * pi));
    boost::math::quadrature::exp_sinh<double> es;
    const double second = std::sqrt(
        2.0 * es.integrate([](double k) { return k > 60 ? 0.0 : std::pow(1 + 2 * k, 4) * std::exp(-k * k) / (2 * pi); }));
    CHECK(exact == doctest::Approx(second).epsilon(1e-9));
    CHECK(sobolev_norm(g, 2.0).value == doctest::Approx(exact).epsilon(1e-6));
  }
  SUBCASE("zero, homogeneity and monotonicity") {
    CHECK(sobolev_norm(TestFunction(), 2.0).value == 0.0);
    CHECK(sobolev_norm(3.0 * g, 1.75).value == doctest::Approx(3.0 * sobolev_norm(g, 1.75).value).epsilon(1e-9));
    double last = 0.0;
    for (double s : {0.5, 1.0, 1.5, 1.75, 2.0, 3.0}) {
      const double v = sobolev_norm(g, s).value;
      CHECK(v > last);
      last = v;
    }
    CHECK_THROWS_AS(sobolev_norm(g, 0.0), ParameterError);
  }
  SUBCASE("windowed polynomial and smoothed functions converge") {
    CHECK(sobolev_norm(TestFunction::chebyshev(2), 2.0).value > 0.0);
    const TestFunction s = poisson_smooth(TestFunction::resolvent_im(ComplexPoint(0, 1)), 0.5);
    CHECK(sobolev_norm(s, 1.75).value == doctest::Approx(sobolev_norm(TestFunction::resolvent_im(ComplexPoint(0, 1.5)), 1.75).value).epsilon(1e-9));
  }
  SUBCASE("divergence is reported with the partial sum") {
    try {
      detail::integrate_sobolev_weight([](double k) { return 1.0 / ((1 + k) * (1 + k)); }, 1.0);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.partial_sum() > 1e6);
      CHECK(e.last_increment() > 0.0);
    }
  }
}
