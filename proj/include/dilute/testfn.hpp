#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dilute/complex_point.hpp"

namespace dilute {

class TestFunction;

namespace family {

/// T_k(mu / 2), the Chebyshev polynomial adapted to [-2, 2].
struct Chebyshev {
  int degree = 0;
};
/// mu^k.
struct Monomial {
  int degree = 0;
};
/// exp(-(mu - center)^2 / (2 width^2)).
struct GaussianBump {
  double center = 0.0;
  double width = 1.0;
};
/// cosh(rate * mu) * base(mu).
struct CoshWeighted {
  double rate = 0.0;
  std::shared_ptr<const TestFunction> base;
};
/// (P_eta * base)(mu) with the Poisson kernel P_eta(x) = eta / (pi (x^2 + eta^2)).
struct PoissonSmoothed {
  double eta = 0.0;
  std::shared_ptr<const TestFunction> base;
};
/// Re 1/(mu - z).
struct ResolventRe {
  ComplexPoint z;
};
/// Im 1/(mu - z).
struct ResolventIm {
  ComplexPoint z;
};

}  // namespace family

using Atom = std::variant<family::Chebyshev, family::Monomial, family::GaussianBump,
                          family::CoshWeighted, family::PoissonSmoothed, family::ResolventRe,
                          family::ResolventIm>;

struct Term {
  double weight = 1.0;
  Atom atom;
};

/// A finite real linear combination of closed-family atoms. Immutable once built;
/// nested bases are shared.
class TestFunction {
public:
  /// The zero function.
  TestFunction() = default;

  static TestFunction chebyshev(int degree);
  static TestFunction monomial(int degree);
  static TestFunction constant(double value);
  static TestFunction gaussian(double center, double width);
  /// cosh(rate mu) base(mu); rate > 0.
  static TestFunction cosh_weighted(double rate, TestFunction base);
  static TestFunction resolvent_re(ComplexPoint z);
  static TestFunction resolvent_im(ComplexPoint z);

  double operator()(double x) const;
  double derivative(double x) const;

  std::span<const Term> terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  /// True when some term is a polynomial of positive degree; those are windowed for transforms.
  bool has_polynomial_part() const;
  /// Polynomials of degree 0 only, Gaussians, resolvent parts and smoothings of those.
  bool is_bounded() const;

  /// Canonical mini-grammar form, e.g. "0.5*chebyshev:2+1*monomial:4". Weights and
  /// parameters use 17 significant digits so the string round-trips.
  std::string to_spec() const;

  friend TestFunction operator+(const TestFunction& a, const TestFunction& b);
  friend TestFunction operator*(double a, const TestFunction& f);
  friend TestFunction operator-(const TestFunction& a, const TestFunction& b) {
    return a + (-1.0) * b;
  }

  /// Builds a function from raw terms; validates every atom's parameters.
  static TestFunction from_terms(std::vector<Term> terms);

private:
  explicit TestFunction(Atom atom);

  std::vector<Term> terms_;
};

double evaluate(const TestFunction& phi, double x);

/// (P_eta * base). Throws ParameterError for eta <= 0 and UnsupportedError when the
/// base is not bounded (polynomials of positive degree have no Poisson average).
/// Smoothing an already smoothed function adds the widths.
TestFunction poisson_smooth(const TestFunction& base, double eta);

/// Smooth cutoff equal to 1 on [-3, 3] and 0 outside [-4, 4].
double polynomial_window(double x);
inline constexpr double kWindowInner = 3.0;
inline constexpr double kWindowOuter = 4.0;
/// Frequencies above this are treated as zero for windowed polynomials.
inline constexpr double kWindowedBandLimit = 4096.0;

struct TransformOptions {
  /// Multiply polynomial terms by polynomial_window() before transforming.
  bool window_polynomials = true;
};

/// phi_hat(k) = (1 / 2 pi) int e^{ikx} phi(x) dx.
///
/// Closed forms for Gaussians, cosh-weighted Gaussians, resolvent parts and their
/// Poisson smoothings; windowed polynomial terms are integrated numerically over the
/// window support [-4, 4], so there is no truncation tail.
std::complex<double> fourier_transform(const TestFunction& phi, double k,
                                       const TransformOptions& options = {});

struct SobolevNorm {
  double s = 0.0;
  double value = 0.0;
};

/// ||phi||_s = ( int (1 + 2|k|)^{2s} |phi_hat(k)|^2 dk )^{1/2}.
SobolevNorm sobolev_norm(const TestFunction& phi, double s, const TransformOptions& options = {});

namespace detail {

/// int_R (1 + 2|k|)^{2s} g(|k|) dk for an even spectral weight g, integrated over
/// dyadic segments of [0, inf). Throws DivergenceError (with the partial sum) when the
/// segment contributions stop shrinking before k = 2^40.
double integrate_sobolev_weight(const std::function<double(double)>& abs2_transform, double s);

/// (1/pi) int_{-pi/2}^{pi/2} g(x + eta tan(theta)) dtheta, the Poisson average of g.
double poisson_average(const std::function<double(double)>& g, double x, double eta);

}  // namespace detail

}  // namespace dilute
