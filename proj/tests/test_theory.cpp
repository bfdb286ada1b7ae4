#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "dilute/ensemble.hpp"
#include "dilute/errors.hpp"
#include "dilute/theory.hpp"

using namespace dilute;
using std::numbers::pi;
using cplx = std::complex<double>;

namespace {

double binomial(int n, int k) { return std::round(std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0))); }

// Arcsine moments E[l^k] for the law dl / (pi sqrt(4 - l^2)): C(k, k/2) for even k.
double arcsine_moment(int k) { return k % 2 ? 0.0 : binomial(k, k / 2); }

// Wallis: int_0^pi cos^{2j} = pi (2j-1)!! / (2j)!!.
double wallis(int j) {
  double v = pi;
  for (int i = 1; i <= j; ++i) v *= (2.0 * i - 1.0) / (2.0 * i);
  return v;
}

// I[mu^{2m}] = 4^m int_0^pi cos^{2m}(2 - 4 cos^2) = 4^m (2 W_m - 4 W_{m+1}); odd powers vanish.
double condition_integral_monomial(int degree) {
  if (degree % 2) return 0.0;
  const int m = degree / 2;
  return std::pow(4.0, m) * (2.0 * wallis(m) - 4.0 * wallis(m + 1));
}

using Poly2 = std::map<std::pair<int, int>, double>;

Poly2 multiply(const Poly2& a, const Poly2& b) {
  Poly2 r;
  for (auto [ka, va] : a)
    for (auto [kb, vb] : b) r[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
  return r;
}

// Wigner first term for mu^d from the arcsine-moment expansion of
// E[q^2 (4 - l1 l2)] with q = sum_{a+b=d-1} l1^a l2^b, times pi^2 / (2 pi^2).
double wigner_first_term_monomial(int d) {
  Poly2 q;
  for (int a = 0; a < d; ++a) q[{a, d - 1 - a}] += 1.0;
  Poly2 kernel{{{0, 0}, 4.0}, {{1, 1}, -1.0}};
  const Poly2 full = multiply(multiply(q, q), kernel);
  double e = 0.0;
  for (auto [k, v] : full) e += v * arcsine_moment(k.first) * arcsine_moment(k.second);
  return e / 2.0;
}

// f(z) = int rho(l) / (l - z) dl with l = 2 cos(theta), rho dl = (2/pi) sin^2 dtheta.
cplx stieltjes_ref(cplx z) {
  auto g = [&](double t) { return cplx(2.0 / pi * std::sin(t) * std::sin(t)) / (2.0 * std::cos(t) - z); };
  return oracle::trapezoid(g, 0.0, pi, 4000);
}

}  // namespace

TEST_CASE("Gauss-Chebyshev rule") {
  const QuadratureRule r = QuadratureRule::gauss_chebyshev(16);
  REQUIRE(r.nodes.size() == 16);
  CHECK(r.order == 16);
  for (std::size_t k = 0; k < 16; ++k) {
    CHECK(r.nodes[k] == doctest::Approx(2.0 * std::cos((2.0 * (k + 1) - 1.0) * pi / 32.0)).epsilon(1e-15));
    CHECK(r.weights[k] == doctest::Approx(pi / 16.0).epsilon(1e-15));
  }
  for (int deg = 0; deg <= 31; ++deg) {
    double s = 0.0;
    for (std::size_t k = 0; k < 16; ++k) s += r.weights[k] * std::pow(r.nodes[k], deg);
    // Odd moments vanish; the rounding floor is set by the term size pi 2^deg.
    CHECK(std::abs(s - pi * arcsine_moment(deg)) <= 1e-13 * pi * std::pow(2.0, deg));
  }
  CHECK_THROWS_AS(QuadratureRule::gauss_chebyshev(0), ParameterError);
}

TEST_CASE("semicircle law") {
  CHECK(semicircle_density(0.0) == doctest::Approx(1.0 / pi));
  CHECK(semicircle_density(2.0) == 0.0);
  CHECK(semicircle_density(-2.0) == 0.0);
  CHECK(semicircle_density(3.0) == 0.0);
  const QuadratureRule r = QuadratureRule::gauss_chebyshev(64);
  const double catalan[] = {1, 1, 2, 5, 14};
  for (int m = 0; m <= 4; ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      const double l = r.nodes[k];
      s += r.weights[k] * std::pow(l, 2 * m) * (4.0 - l * l) / (2.0 * pi);
    }
    CHECK(s == doctest::Approx(catalan[m]).epsilon(1e-13));
  }
  CHECK(semicircle_cdf(-2.5) == 0.0);
  CHECK(semicircle_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(semicircle_cdf(2.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double x : {-1.9, -1.0, 0.3, 1.5}) {
    const double h = 1e-6;
    CHECK((semicircle_cdf(x + h) - semicircle_cdf(x - h)) / (2 * h) == doctest::Approx(semicircle_density(x)).epsilon(1e-7));
  }
  for (double u : {0.01, 0.25, 0.5, 0.9}) CHECK(semicircle_cdf(semicircle_quantile(u)) == doctest::Approx(u).epsilon(1e-12));
}

TEST_CASE("Stieltjes transform") {
  const cplx f2i = stieltjes_f(ComplexPoint(0.0, 2.0));
  CHECK(std::abs(f2i - cplx(0.0, std::sqrt(2.0) - 1.0)) < 1e-15);
  CHECK(std::abs(f2i - stieltjes_ref(cplx(0.0, 2.0))) < 1e-10);
  for (ComplexPoint z : {ComplexPoint(1.0, 0.5), ComplexPoint(-2.5, 1.0), ComplexPoint(0.0, 5.0)})
    CHECK(std::abs(stieltjes_f(z) - stieltjes_ref(z.value())) < 1e-10);
  const ComplexPoint big(0.0, 1e6);
  CHECK(std::abs(stieltjes_f(big) - (-1.0 / big.value())) < 1e-11 * 1e-6);
  SUBCASE("quadratic identity on a grid") {
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 4; ++b) {
        const cplx z(-3.0 + 1.5 * a, 0.05 + 0.9 * b);
        const cplx f = stieltjes_f(z);
        CHECK(std::abs(f * f + z * f + 1.0) < 1e-12);
      }
  }
  SUBCASE("upper half-plane maps into itself") {
    for (int a = 0; a < 10; ++a)
      for (int b = 0; b < 10; ++b) {
        const ComplexPoint z(-5.0 + a * 1.1, 0.01 + b * 0.7);
        CHECK(stieltjes_f(z).imag() > 0.0);
        CHECK(stieltjes_f(z.conjugate()) == std::conj(stieltjes_f(z)));
      }
  }
  CHECK_THROWS_AS(sqrt_z2_minus_4(cplx(1.0, 0.0)), ParameterError);
}

TEST_CASE("limiting variance: Chebyshev orthogonality and Wallis oracles") {
  for (int n : {64, 128}) {
    const QuadratureRule r = QuadratureRule::gauss_chebyshev(n);
    const VarianceResult t2 = clt_variance(TestFunction::chebyshev(2), r);
    CHECK(t2.condition_integral == doctest::Approx(-pi).epsilon(1e-13));
    CHECK(std::abs(t2.variance - 0.5) < 1e-12);
    CHECK_FALSE(t2.degenerate);
    for (int k : {1, 3, 4, 5}) {
      const VarianceResult v = clt_variance(TestFunction::chebyshev(k), r);
      CHECK(std::abs(v.variance) < 1e-12);
      CHECK(v.degenerate);
    }
    CHECK(clt_variance(TestFunction::monomial(1), r).degenerate);
    for (int d = 0; d <= 12; ++d) {
      const VarianceResult v = clt_variance(TestFunction::monomial(d), r);
      const double ref = condition_integral_monomial(d);
      const double term = 2 * pi * std::pow(2.0, d + 2);
      CHECK(std::abs(v.condition_integral - ref) <= 1e-13 * term);
      CHECK(std::abs(v.variance - ref * ref / (2 * pi * pi)) <= 1e-12 * std::max(1.0, ref * ref));
    }
    CHECK(std::abs(clt_variance(TestFunction::monomial(2), r).variance - 2.0) < 1e-12);
    CHECK(std::abs(clt_variance(TestFunction::monomial(4), r).variance - 32.0) < 1e-12);
  }
}

TEST_CASE("limiting variance is quadratic") {
  const QuadratureRule r = QuadratureRule::gauss_chebyshev(64);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(gen), b = u(gen);
    const TestFunction phi = TestFunction::chebyshev(2) + 0.7 * TestFunction::chebyshev(6);
    const TestFunction psi = TestFunction::monomial(4) - TestFunction::chebyshev(3);
    const double ip = clt_variance(phi, r).condition_integral, iq = clt_variance(psi, r).condition_integral;
    CHECK(clt_variance(a * phi + b * psi, r).condition_integral == doctest::Approx(a * ip + b * iq).epsilon(1e-12));
    CHECK(clt_variance(a * phi, r).variance == doctest::Approx(a * a * clt_variance(phi, r).variance).epsilon(1e-12));
    for (int k : {0, 1, 3, 4, 7}) {
      CHECK(clt_variance(phi + TestFunction::chebyshev(k), r).variance ==
            doctest::Approx(clt_variance(phi, r).variance).epsilon(1e-12));
    }
  }
}

TEST_CASE("adaptive order") {
  const auto g = clt_variance_adaptive(TestFunction::gaussian(0.0, 1.0));
  CHECK(g.converged);
  CHECK(g.result.order >= 64);
  CHECK(g.result.variance == doctest::Approx(clt_variance(TestFunction::gaussian(0, 1), QuadratureRule::gauss_chebyshev(1024)).variance).epsilon(1e-10));
  const auto c = clt_variance_adaptive(TestFunction::cosh_weighted(1.0, TestFunction::gaussian(0, 1)));
  CHECK(c.converged);
}

TEST_CASE("Wigner variance") {
  const QuadratureRule r = QuadratureRule::gauss_chebyshev(64);
  const TestFunction mu2 = TestFunction::monomial(2);
  CHECK(wigner_first_term_monomial(2) == doctest::Approx(4.0));
  CHECK(wigner_variance(mu2, 0.0, 2.0, r) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(wigner_variance(mu2, 1.0, 2.0, r) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(std::abs(wigner_variance(TestFunction::constant(3.0), 1.7, 0.4, r)) < 1e-12);
  for (int d = 1; d <= 5; ++d) {
    const TestFunction m = TestFunction::monomial(d);
    const double i = condition_integral_monomial(d);
    const double odd = pi * arcsine_moment(d + 1);
    for (double kappa : {-0.5, 0.0, 2.0})
      for (double w2 : {0.0, 2.0}) {
        const double ref = wigner_first_term_monomial(d) + kappa / (2 * pi * pi) * i * i +
                           (w2 - 2.0) / (4 * pi * pi) * odd * odd;
        CHECK(wigner_variance(m, kappa, w2, r) == doctest::Approx(ref).epsilon(1e-11));
      }
  }
  SUBCASE("spectral scale rescales the argument") {
    for (double s : {0.5, 0.866}) {
      CHECK(wigner_variance(mu2, -0.4, 0.0, r, s) == doctest::Approx(std::pow(s, 4) * wigner_variance(mu2, -0.4, 0.0, r)).epsilon(1e-12));
    }
  }
  SUBCASE("kappa4 term dominates in the dilute limit") {
    EnsembleParams e;
    e.n = 100000000;
    e.p = 1000.0;
    const double k4 = entry_moments(e).kappa4;
    CHECK(e.p / e.n * wigner_variance(mu2, k4, 0.0, r) == doctest::Approx(2.0).epsilon(1e-3));
  }
}

TEST_CASE("covariance kernel") {
  const double c0 = std::pow(3.0 - 2.0 * std::sqrt(2.0), 2) / 4.0;
  const cplx z(0.0, 2.0);
  CHECK(std::abs(covariance_kernel(z, z) - cplx(-c0, 0.0)) < 1e-15);
  CHECK(std::abs(covariance_kernel(z, std::conj(z)) - cplx(c0, 0.0)) < 1e-15);
  CHECK(c0 == doctest::Approx(7.3593e-3).epsilon(1e-4));
  CHECK(std::abs(covariance_kernel(cplx(0, 4), cplx(0, -4))) < std::abs(covariance_kernel(z, std::conj(z))));
  CHECK_THROWS_AS(covariance_kernel(cplx(1.0, 0.0), z), ParameterError);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> re(-3, 3), im(0.05, 3);
  for (int t = 0; t < 10; ++t) {
    const cplx a(re(gen), (t % 2 ? 1 : -1) * im(gen)), b(re(gen), im(gen));
    CHECK(covariance_kernel(a, b) == covariance_kernel(b, a));
  }
  SUBCASE("bilinear form of the condition integral") {
    const QuadratureRule r = QuadratureRule::gauss_chebyshev(4096);
    auto condition = [&](cplx w) {
      const ComplexPoint p(w.real(), std::abs(w.imag()));
      const double a = clt_variance(TestFunction::resolvent_re(p), r).condition_integral;
      const double b = clt_variance(TestFunction::resolvent_im(p), r).condition_integral;
      return w.imag() > 0 ? cplx(a, b) : cplx(a, -b);
    };
    const std::pair<cplx, cplx> pairs[] = {{{0, 2}, {0, 2}}, {{0, 2}, {0, -2}}, {{0.5, 1}, {-1, 1.5}},
                                           {{1.5, 0.8}, {0.3, -1.2}}, {{-2.5, 1}, {2.5, 2}}};
    for (auto [a, b] : pairs) {
      const cplx bilinear = condition(a) * condition(b) / (2 * pi * pi);
      CHECK(std::abs(bilinear - covariance_kernel(a, b)) < 1e-8);
    }
  }
}

TEST_CASE("arcsine identities") {
  CHECK(arcsine_identities_check(ComplexPoint(0, 2), QuadratureRule::gauss_chebyshev(64)) < 1e-10);
  CHECK(arcsine_identities_check(ComplexPoint(0.1, 0.05), QuadratureRule::gauss_chebyshev(512)) < 1e-6);
  for (int n : {1, 2, 7, 100}) {
    const QuadratureRule r = QuadratureRule::gauss_chebyshev(n);
    double mass = 0.0;
    for (double w : r.weights) mass += w;
    CHECK(mass / pi == doctest::Approx(1.0).epsilon(1e-15));
  }
}
