#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "dilute/complex_point.hpp"
#include "dilute/ensemble.hpp"

namespace dilute {

class TestFunction;

/// Eigenvalues of one matrix, sorted ascending.
struct Spectrum {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double min() const { return values.front(); }
  double max() const { return values.back(); }
};

inline constexpr double kDefaultEigenTolerance = 1e-10;
inline constexpr int kMaxSweepsPerEigenvalue = 50;

/// All eigenvalues of a real symmetric matrix.
///
/// Householder reduction to tridiagonal form (updating the lower triangle only)
/// followed by implicit-shift QL. After the solve the trace and Frobenius
/// identities are checked against n * tol * ||A||; a violation is reported as a
/// NumericalError. Non-finite entries raise DataError.
Spectrum eigenvalues(const SymmetricMatrix& m, double tol = kDefaultEigenTolerance);

/// Eigenvalues of the symmetric tridiagonal matrix (diag, sub), sorted ascending.
/// sub[i] couples diag[i] and diag[i + 1]; sub.size() == diag.size() - 1.
Spectrum tridiagonal_eigenvalues(std::vector<double> diag, std::vector<double> sub);

/// N_n[phi] = sum_i phi(lambda_i), Neumaier-compensated.
double linear_statistic(const Spectrum& s, const TestFunction& phi);

/// gamma_n(z) = Tr (A - z)^{-1} = sum_i 1/(lambda_i - z).
std::complex<double> resolvent_trace(const Spectrum& s, const ComplexPoint& z);

/// Fraction of eigenvalues <= x.
double empirical_cdf(const Spectrum& s, double x);

/// Neumaier (improved Kahan) accumulator.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace dilute
