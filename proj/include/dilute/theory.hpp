#pragma once

#include <complex>
#include <vector>

#include "dilute/complex_point.hpp"
#include "dilute/testfn.hpp"

namespace dilute {

/// Gauss-Chebyshev rule of the first kind mapped to [-2, 2]:
///   int_{-2}^{2} q(mu) / sqrt(4 - mu^2) dmu ~= (pi/N) sum_k q(mu_k),
///   mu_k = 2 cos((2k - 1) pi / (2N)).
/// Exact for polynomials q of degree <= 2N - 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  static QuadratureRule gauss_chebyshev(int order);
};

inline constexpr int kDefaultQuadratureOrder = 64;
inline constexpr int kMaxQuadratureOrder = 4096;
inline constexpr double kDefaultDegeneracyThreshold = 1e-8;

/// (1/2pi) sqrt(4 - x^2) on [-2, 2], zero outside.
double semicircle_density(double x);
/// Distribution function of the semicircle law.
double semicircle_cdf(double x);
/// Inverse of semicircle_cdf on (0, 1), by bisection.
double semicircle_quantile(double u);

/// sqrt(z^2 - 4) on the branch that behaves like z at infinity, computed as
/// sqrt(z - 2) sqrt(z + 2) in the upper half-plane and by conjugation below it.
/// Throws ParameterError on the real axis.
std::complex<double> sqrt_z2_minus_4(std::complex<double> z);

/// f(z) = (sqrt(z^2 - 4) - z) / 2, the Stieltjes transform of the semicircle law,
/// evaluated as -2 / (sqrt(z^2 - 4) + z) to avoid cancellation for large |z|.
std::complex<double> stieltjes_f(const ComplexPoint& z);
/// Same, for any off-axis argument; f(conj z) = conj f(z).
std::complex<double> stieltjes_f(std::complex<double> z);

struct VarianceResult {
  /// I[phi] = int phi(mu) (2 - mu^2) / sqrt(4 - mu^2) dmu.
  double condition_integral = 0.0;
  /// V[phi] = I^2 / (2 pi^2).
  double variance = 0.0;
  /// |I| below the threshold: no Gaussian limit under this normalization.
  bool degenerate = false;
  int order = 0;
};

/// Limiting variance of the rescaled fluctuation (p/n)^{1/2} N_n[phi]°.
VarianceResult clt_variance(const TestFunction& phi, const QuadratureRule& rule,
                            double degeneracy_threshold = kDefaultDegeneracyThreshold);

struct AdaptiveVarianceResult {
  VarianceResult result;
  bool converged = false;
};

/// clt_variance with the order doubled from 64 until two successive condition
/// integrals agree to 1e-10 (relative to max(1, |I|)), capped at 4096.
AdaptiveVarianceResult clt_variance_adaptive(
    const TestFunction& phi, double degeneracy_threshold = kDefaultDegeneracyThreshold);

/// int phi(mu) mu / sqrt(4 - mu^2) dmu.
double odd_moment_integral(const TestFunction& phi, const QuadratureRule& rule);

/// Limiting variance of N_n[phi]° for a Wigner matrix n^{-1/2} w with unit
/// off-diagonal variance, fourth-cumulant excess kappa4 and diagonal variance w2/n:
///
///   (1/2pi^2) int int ((phi(l1) - phi(l2))/(l1 - l2))^2 (4 - l1 l2) / (sqrt(4-l1^2) sqrt(4-l2^2))
///   + (kappa4 / 2pi^2) I[phi]^2 + ((w2 - 2) / 4pi^2) (int phi(mu) mu / sqrt(4-mu^2))^2.
///
/// spectral_scale s evaluates the formula for mu -> phi(s mu), i.e. for a matrix whose
/// off-diagonal variance is s^2/n. The difference quotient falls back to the derivative
/// when |l1 - l2| < 1e-8.
double wigner_variance(const TestFunction& phi, double kappa4, double w2,
                       const QuadratureRule& rule, double spectral_scale = 1.0);

/// C(z1, z2) = 2 f(z1)^2 f(z2)^2 / (sqrt(z1^2 - 4) sqrt(z2^2 - 4)), the limit of
/// (p/n) Cov(gamma_n(z1), gamma_n(z2)). Either argument may lie in the lower half-plane.
std::complex<double> covariance_kernel(std::complex<double> z1, std::complex<double> z2);

/// Max residual of the two arcsine identities
///   (1/pi) int dl / ((z - l) sqrt(4 - l^2)) = 1 / sqrt(z^2 - 4),
///   (1/pi) int dl / sqrt(4 - l^2) = 1,
/// both evaluated with the given rule.
double arcsine_identities_check(const ComplexPoint& z, const QuadratureRule& rule);

}  // namespace dilute
