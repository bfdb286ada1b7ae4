#include "dilute/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dilute/eigen.hpp"
#include "dilute/errors.hpp"

namespace dilute {

namespace {
constexpr double kPi = std::numbers::pi;
}

QuadratureRule QuadratureRule::gauss_chebyshev(int order) {
  if (order < 1) throw ParameterError("quadrature order must be >= 1");
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.assign(static_cast<std::size_t>(order), kPi / order);
  for (int k = 1; k <= order; ++k)
    rule.nodes[static_cast<std::size_t>(k - 1)] = 2.0 * std::cos((2.0 * k - 1.0) * kPi / (2.0 * order));
  return rule;
}

double semicircle_density(double x) {
  if (!(std::abs(x) < 2.0)) return 0.0;
  return std::sqrt(4.0 - x * x) / (2.0 * kPi);
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * kPi) + std::asin(0.5 * x) / kPi;
}

double semicircle_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw ParameterError("semicircle_quantile: u must lie in (0, 1)");
  double lo = -2.0, hi = 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (semicircle_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::complex<double> sqrt_z2_minus_4(std::complex<double> z) {
  if (!(z.imag() != 0.0)) throw ParameterError("sqrt(z^2 - 4): z must be off the real axis");
  if (z.imag() < 0.0) return std::conj(sqrt_z2_minus_4(std::conj(z)));
  return std::sqrt(z - 2.0) * std::sqrt(z + 2.0);
}

std::complex<double> stieltjes_f(std::complex<double> z) {
  return -2.0 / (sqrt_z2_minus_4(z) + z);
}

std::complex<double> stieltjes_f(const ComplexPoint& z) { return stieltjes_f(z.value()); }

VarianceResult clt_variance(const TestFunction& phi, const QuadratureRule& rule,
                            double degeneracy_threshold) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double mu = rule.nodes[k];
    const double v = phi(mu);
    if (!std::isfinite(v)) throw DataError("clt_variance: test function is not finite on [-2, 2]");
    acc.add(rule.weights[k] * v * (2.0 - mu * mu));
  }
  VarianceResult r;
  r.order = rule.order;
  r.condition_integral = acc.value();
  r.variance = r.condition_integral * r.condition_integral / (2.0 * kPi * kPi);
  r.degenerate = std::abs(r.condition_integral) < degeneracy_threshold;
  return r;
}

AdaptiveVarianceResult clt_variance_adaptive(const TestFunction& phi, double degeneracy_threshold) {
  int order = kDefaultQuadratureOrder;
  VarianceResult prev = clt_variance(phi, QuadratureRule::gauss_chebyshev(order), degeneracy_threshold);
  while (order < kMaxQuadratureOrder) {
    order *= 2;
    VarianceResult next =
        clt_variance(phi, QuadratureRule::gauss_chebyshev(order), degeneracy_threshold);
    const double scale = std::max(1.0, std::abs(next.condition_integral));
    if (std::abs(next.condition_integral - prev.condition_integral) <= 1e-10 * scale)
      return {next, true};
    prev = next;
  }
  return {prev, false};
}

double odd_moment_integral(const TestFunction& phi, const QuadratureRule& rule) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    acc.add(rule.weights[k] * phi(rule.nodes[k]) * rule.nodes[k]);
  return acc.value();
}

double wigner_variance(const TestFunction& phi, double kappa4, double w2,
                       const QuadratureRule& rule, double spectral_scale) {
  if (!(spectral_scale > 0.0)) throw ParameterError("wigner_variance: spectral_scale must be positive");
  const std::size_t N = rule.nodes.size();
  const double s = spectral_scale;
  std::vector<double> val(N), der(N);
  for (std::size_t k = 0; k < N; ++k) {
    val[k] = phi(s * rule.nodes[k]);
    der[k] = s * phi.derivative(s * rule.nodes[k]);
  }

  CompensatedSum gauss_part;
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t k = 0; k < N; ++k) {
      const double l1 = rule.nodes[j], l2 = rule.nodes[k];
      const double dq = std::abs(l1 - l2) < 1e-8 ? der[j] : (val[j] - val[k]) / (l1 - l2);
      gauss_part.add(rule.weights[j] * rule.weights[k] * dq * dq * (4.0 - l1 * l2));
    }
  }

  CompensatedSum cond, odd;
  for (std::size_t k = 0; k < N; ++k) {
    const double mu = rule.nodes[k];
    cond.add(rule.weights[k] * val[k] * (2.0 - mu * mu));
    odd.add(rule.weights[k] * val[k] * mu);
  }
  const double I = cond.value();
  const double J = odd.value();
  return gauss_part.value() / (2.0 * kPi * kPi) + kappa4 / (2.0 * kPi * kPi) * I * I +
         (w2 - 2.0) / (4.0 * kPi * kPi) * J * J;
}

std::complex<double> covariance_kernel(std::complex<double> z1, std::complex<double> z2) {
  if (z1.imag() == 0.0 || z2.imag() == 0.0)
    throw ParameterError("covariance_kernel: arguments must be off the real axis");
  // One factor per argument so that swapping them gives the same bits.
  auto factor = [](std::complex<double> z) {
    const auto f = stieltjes_f(z);
    return f * f / sqrt_z2_minus_4(z);
  };
  return 2.0 * (factor(z1) * factor(z2));
}

double arcsine_identities_check(const ComplexPoint& z, const QuadratureRule& rule) {
  CompensatedSum re, im, mass;
  const std::complex<double> zz = z.value();
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const std::complex<double> t = rule.weights[k] / (zz - rule.nodes[k]);
    re.add(t.real());
    im.add(t.imag());
    mass.add(rule.weights[k]);
  }
  const std::complex<double> lhs = std::complex<double>(re.value(), im.value()) / kPi;
  const double r1 = std::abs(lhs - 1.0 / sqrt_z2_minus_4(zz));
  const double r2 = std::abs(mass.value() / kPi - 1.0);
  return std::max(r1, r2);
}

}  // namespace dilute
