#include "dilute/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dilute/errors.hpp"
#include "dilute/testfn.hpp"

namespace dilute {

ComplexPoint::ComplexPoint(double re, double im) : re_(re), im_(im) {
  if (!std::isfinite(re) || !std::isfinite(im))
    throw ParameterError("complex point must be finite");
  if (!(im > 0.0))
    throw ParameterError("complex point must lie in the upper half-plane (Im z > 0)");
}

namespace {

// Householder reduction of a dense symmetric matrix to tridiagonal form.
// Works on a copy; only the lower triangle of the trailing block is kept current.
void tridiagonalize(std::vector<double>& a, std::size_t n, std::vector<double>& diag,
                    std::vector<double>& sub) {
  diag.assign(n, 0.0);
  sub.assign(n > 0 ? n - 1 : 0, 0.0);
  std::vector<double> v(n), p(n);

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;  // trailing block size
    diag[k] = a[k * n + k];

    double scale = 0.0;
    for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(a[(k + 1 + i) * n + k]));
    if (scale == 0.0) {
      sub[k] = 0.0;
      continue;
    }
    double norm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = a[(k + 1 + i) * n + k] / scale;
      norm2 += v[i] * v[i];
    }
    const double norm = std::sqrt(norm2);
    const double x0 = v[0];
    const double alpha = x0 > 0.0 ? -norm : norm;
    sub[k] = alpha * scale;
    v[0] = x0 - alpha;
    // |x - alpha e1|^2 with alpha^2 = |x|^2
    const double beta = 1.0 / (norm2 - alpha * x0);

    // p = beta * B v, B symmetric, lower triangle rows.
    std::fill(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = &a[(k + 1 + i) * n + (k + 1)];
      const double vi = v[i];
      double s = row[i] * vi;
      for (std::size_t j = 0; j < i; ++j) {
        s += row[j] * v[j];
        p[j] += row[j] * vi;
      }
      p[i] += s;
    }
    double ptv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      p[i] *= beta;
      ptv += p[i] * v[i];
    }
    const double half = 0.5 * beta * ptv;
    for (std::size_t i = 0; i < m; ++i) p[i] -= half * v[i];  // p is now w

    for (std::size_t i = 0; i < m; ++i) {
      double* row = &a[(k + 1 + i) * n + (k + 1)];
      const double vi = v[i];
      const double wi = p[i];
      for (std::size_t j = 0; j <= i; ++j) row[j] -= vi * p[j] + wi * v[j];
    }
  }
  if (n >= 2) {
    diag[n - 2] = a[(n - 2) * n + (n - 2)];
    diag[n - 1] = a[(n - 1) * n + (n - 1)];
    sub[n - 2] = a[(n - 1) * n + (n - 2)];
  } else if (n == 1) {
    diag[0] = a[0];
  }
}

// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues left in d.
void ql_implicit(std::vector<double>& d, std::vector<double>& e) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(d.size());
  e.resize(d.size(), 0.0);
  if (n > 0) e[static_cast<std::size_t>(n - 1)] = 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (std::ptrdiff_t l = 0; l < n; ++l) {
    int iter = 0;
    std::ptrdiff_t m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == kMaxSweepsPerEigenvalue)
          throw NumericalError("eigenvalues: implicit QL did not converge for eigenvalue index " +
                                   std::to_string(l),
                               static_cast<std::size_t>(l));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        std::ptrdiff_t i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

Spectrum tridiagonal_eigenvalues(std::vector<double> diag, std::vector<double> sub) {
  if (!diag.empty() && sub.size() + 1 != diag.size())
    throw ParameterError("tridiagonal_eigenvalues: sub-diagonal must have n - 1 entries");
  ql_implicit(diag, sub);
  std::sort(diag.begin(), diag.end());
  return Spectrum{std::move(diag)};
}

Spectrum eigenvalues(const SymmetricMatrix& m, double tol) {
  const std::size_t n = m.size();
  for (double x : m.data())
    if (!std::isfinite(x)) throw DataError("eigenvalues: matrix has non-finite entries");
  if (n == 0) return {};

  std::vector<double> work(m.data().begin(), m.data().end());
  std::vector<double> diag, sub;
  tridiagonalize(work, n, diag, sub);
  Spectrum s = tridiagonal_eigenvalues(std::move(diag), std::move(sub));

  // Residual contract: sum and square-sum must reproduce the invariants.
  const double norm = m.norm_inf();
  CompensatedSum sum, sq;
  for (double x : s.values) {
    sum.add(x);
    sq.add(x * x);
  }
  const double bound = static_cast<double>(n) * tol * std::max(norm, 1e-300);
  if (std::abs(sum.value() - m.trace()) > bound ||
      std::abs(sq.value() - m.frobenius_squared()) > bound * std::max(norm, 1.0))
    throw NumericalError("eigenvalues: trace/Frobenius check failed", 0);
  return s;
}

double linear_statistic(const Spectrum& s, const TestFunction& phi) {
  CompensatedSum acc;
  for (double x : s.values) {
    const double y = phi(x);
    if (!std::isfinite(y))
      throw DataError("linear_statistic: test function is not finite at " + std::to_string(x));
    acc.add(y);
  }
  return acc.value();
}

std::complex<double> resolvent_trace(const Spectrum& s, const ComplexPoint& z) {
  CompensatedSum re, im;
  const double a = z.re(), b = z.im();
  for (double x : s.values) {
    // 1/(x - z) = ((x - a) + i b) / ((x - a)^2 + b^2)
    const double dx = x - a;
    const double den = dx * dx + b * b;
    re.add(dx / den);
    im.add(b / den);
  }
  return {re.value(), im.value()};
}

double empirical_cdf(const Spectrum& s, double x) {
  if (s.values.empty()) return 0.0;
  const auto it = std::upper_bound(s.values.begin(), s.values.end(), x);
  return static_cast<double>(it - s.values.begin()) / static_cast<double>(s.values.size());
}

}  // namespace dilute
