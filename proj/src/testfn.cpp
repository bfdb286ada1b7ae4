#include "dilute/testfn.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "dilute/eigen.hpp"
#include "dilute/errors.hpp"

namespace dilute {

namespace {

using boost::math::quadrature::gauss_kronrod;
using cplx = std::complex<double>;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double chebyshev_t(int k, double t) {
  if (k == 0) return 1.0;
  double prev = 1.0, cur = t;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * t * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double chebyshev_u(int k, double t) {
  if (k == 0) return 1.0;
  double prev = 1.0, cur = 2.0 * t;
  for (int j = 1; j < k; ++j) {
    const double next = 2.0 * t * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double power(double x, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= x;
  return r;
}

double checked_cosh(double rate, double x) {
  const double c = std::cosh(rate * x);
  if (!std::isfinite(c))
    throw RangeError("cosh-weighted test function overflows at x = " + fmt17(x));
  return c;
}

double checked_sinh(double rate, double x) {
  const double s = std::sinh(rate * x);
  if (!std::isfinite(s))
    throw RangeError("cosh-weighted test function overflows at x = " + fmt17(x));
  return s;
}

bool is_polynomial_atom(const Atom& a, int* degree = nullptr) {
  if (auto c = std::get_if<family::Chebyshev>(&a)) {
    if (degree) *degree = c->degree;
    return true;
  }
  if (auto m = std::get_if<family::Monomial>(&a)) {
    if (degree) *degree = m->degree;
    return true;
  }
  return false;
}

bool all_gaussian(const TestFunction& f) {
  for (const Term& t : f.terms())
    if (!std::holds_alternative<family::GaussianBump>(t.atom)) return false;
  return true;
}

// Smoothed value of one base atom; closed forms where the family has one.
double smoothed_value(const TestFunction& base, double eta, double x, bool derivative);

double atom_value(const Atom& atom, double x) {
  return std::visit(
      overloaded{
          [&](const family::Chebyshev& c) { return chebyshev_t(c.degree, 0.5 * x); },
          [&](const family::Monomial& m) { return power(x, m.degree); },
          [&](const family::GaussianBump& g) {
            const double u = (x - g.center) / g.width;
            return std::exp(-0.5 * u * u);
          },
          [&](const family::CoshWeighted& c) {
            if (!all_gaussian(*c.base)) return checked_cosh(c.rate, x) * (*c.base)(x);
            // cosh(rx) exp(-u^2/2) as a sum of exponentials, finite wherever the product is.
            double v = 0.0;
            for (const Term& t : c.base->terms()) {
              const auto& g = std::get<family::GaussianBump>(t.atom);
              const double u = (x - g.center) / g.width;
              v += t.weight * 0.5 *
                   (std::exp(c.rate * x - 0.5 * u * u) + std::exp(-c.rate * x - 0.5 * u * u));
            }
            if (!std::isfinite(v))
              throw RangeError("cosh-weighted test function overflows at x = " + fmt17(x));
            return v;
          },
          [&](const family::PoissonSmoothed& p) {
            return smoothed_value(*p.base, p.eta, x, false);
          },
          [&](const family::ResolventRe& r) {
            const double u = x - r.z.re(), b = r.z.im();
            return u / (u * u + b * b);
          },
          [&](const family::ResolventIm& r) {
            const double u = x - r.z.re(), b = r.z.im();
            return b / (u * u + b * b);
          },
      },
      atom);
}

double atom_derivative(const Atom& atom, double x) {
  return std::visit(
      overloaded{
          [&](const family::Chebyshev& c) {
            return c.degree == 0 ? 0.0 : 0.5 * c.degree * chebyshev_u(c.degree - 1, 0.5 * x);
          },
          [&](const family::Monomial& m) {
            return m.degree == 0 ? 0.0 : m.degree * power(x, m.degree - 1);
          },
          [&](const family::GaussianBump& g) {
            const double u = (x - g.center) / g.width;
            return -u / g.width * std::exp(-0.5 * u * u);
          },
          [&](const family::CoshWeighted& c) {
            if (all_gaussian(*c.base)) {
              double v = 0.0;
              for (const Term& t : c.base->terms()) {
                const auto& g = std::get<family::GaussianBump>(t.atom);
                const double u = (x - g.center) / g.width;
                const double slope = -u / g.width;
                v += t.weight * 0.5 *
                     ((c.rate + slope) * std::exp(c.rate * x - 0.5 * u * u) +
                      (slope - c.rate) * std::exp(-c.rate * x - 0.5 * u * u));
              }
              if (!std::isfinite(v))
                throw RangeError("cosh-weighted test function overflows at x = " + fmt17(x));
              return v;
            }
            return c.rate * checked_sinh(c.rate, x) * (*c.base)(x) +
                   checked_cosh(c.rate, x) * c.base->derivative(x);
          },
          [&](const family::PoissonSmoothed& p) {
            return smoothed_value(*p.base, p.eta, x, true);
          },
          [&](const family::ResolventRe& r) {
            const double u = x - r.z.re(), b = r.z.im();
            const double d = u * u + b * b;
            return (b * b - u * u) / (d * d);
          },
          [&](const family::ResolventIm& r) {
            const double u = x - r.z.re(), b = r.z.im();
            const double d = u * u + b * b;
            return -2.0 * u * b / (d * d);
          },
      },
      atom);
}

double smoothed_value(const TestFunction& base, double eta, double x, bool derivative) {
  double total = 0.0;
  for (const Term& t : base.terms()) {
    double v;
    int degree = 0;
    if (is_polynomial_atom(t.atom, &degree)) {
      // Only constants reach here (poisson_smooth rejects positive degrees).
      v = derivative ? 0.0 : 1.0;
    } else if (auto r = std::get_if<family::ResolventRe>(&t.atom)) {
      // P_eta * 1/(. - z) = 1/(x - z - i eta)
      const Atom shifted = family::ResolventRe{ComplexPoint(r->z.re(), r->z.im() + eta)};
      v = derivative ? atom_derivative(shifted, x) : atom_value(shifted, x);
    } else if (auto r = std::get_if<family::ResolventIm>(&t.atom)) {
      const Atom shifted = family::ResolventIm{ComplexPoint(r->z.re(), r->z.im() + eta)};
      v = derivative ? atom_derivative(shifted, x) : atom_value(shifted, x);
    } else if (auto p = std::get_if<family::PoissonSmoothed>(&t.atom)) {
      v = smoothed_value(*p->base, p->eta + eta, x, derivative);
    } else {
      const Atom& a = t.atom;
      auto g = [&](double y) { return derivative ? atom_derivative(a, y) : atom_value(a, y); };
      v = detail::poisson_average(g, x, eta);
    }
    total += t.weight * v;
  }
  return total;
}

// Analytic continuation of the Gaussian transform to a complex frequency.
cplx gaussian_transform(const family::GaussianBump& g, cplx k) {
  const cplx i(0.0, 1.0);
  return g.width / std::sqrt(2.0 * std::numbers::pi) *
         std::exp(i * k * g.center - 0.5 * g.width * g.width * k * k);
}

// Trapezoid sum on [-4, 4]; spectrally accurate since the windowed integrand is smooth and
// vanishes with all derivatives at the ends. Past kWindowedBandLimit the transform is far
// below double resolution and is returned as zero.
cplx windowed_polynomial_transform(const std::vector<const Term*>& poly, double k) {
  if (std::abs(k) > kWindowedBandLimit) return 0.0;
  const double span = 2.0 * kWindowOuter;
  std::size_t nodes = 4096;
  while (span / static_cast<double>(nodes) * std::abs(k) > 0.25) nodes *= 2;
  const double h = span / static_cast<double>(nodes);
  CompensatedSum re, im;
  for (std::size_t j = 1; j < nodes; ++j) {
    const double x = -kWindowOuter + h * static_cast<double>(j);
    const double w = polynomial_window(x);
    if (w == 0.0) continue;
    double s = 0.0;
    for (const Term* t : poly) s += t->weight * atom_value(t->atom, x);
    s *= w;
    re.add(s * std::cos(k * x));
    im.add(s * std::sin(k * x));
  }
  return cplx(re.value(), im.value()) * (h / (2.0 * std::numbers::pi));
}

cplx atom_transform(const Atom& atom, double k, const TransformOptions& options) {
  const cplx i(0.0, 1.0);
  return std::visit(
      overloaded{
          [&](const family::Chebyshev&) -> cplx {
            throw UnsupportedError("polynomial terms are handled by the windowed transform");
          },
          [&](const family::Monomial&) -> cplx {
            throw UnsupportedError("polynomial terms are handled by the windowed transform");
          },
          [&](const family::GaussianBump& g) { return gaussian_transform(g, cplx(k, 0.0)); },
          [&](const family::CoshWeighted& c) -> cplx {
            if (!all_gaussian(*c.base))
              throw UnsupportedError(
                  "fourier_transform: cosh-weighted functions need a Gaussian base");
            cplx s = 0.0;
            for (const Term& t : c.base->terms()) {
              const auto& g = std::get<family::GaussianBump>(t.atom);
              s += t.weight * 0.5 *
                   (gaussian_transform(g, cplx(k, -c.rate)) + gaussian_transform(g, cplx(k, c.rate)));
            }
            return s;
          },
          [&](const family::PoissonSmoothed& p) {
            return fourier_transform(*p.base, k, TransformOptions{false}) *
                   std::exp(-p.eta * std::abs(k));
          },
          [&](const family::ResolventRe& r) {
            const double sign = k > 0.0 ? 1.0 : (k < 0.0 ? -1.0 : 0.0);
            return 0.5 * i * sign * std::exp(i * k * r.z.re() - r.z.im() * std::abs(k));
          },
          [&](const family::ResolventIm& r) {
            return 0.5 * std::exp(i * k * r.z.re() - r.z.im() * std::abs(k));
          },
      },
      atom);
  (void)options;
}

void validate_atom(const Atom& atom) {
  std::visit(overloaded{
                 [](const family::Chebyshev& c) {
                   if (c.degree < 0) throw ParameterError("chebyshev degree must be >= 0");
                 },
                 [](const family::Monomial& m) {
                   if (m.degree < 0) throw ParameterError("monomial degree must be >= 0");
                 },
                 [](const family::GaussianBump& g) {
                   if (!(g.width > 0.0) || !std::isfinite(g.width) || !std::isfinite(g.center))
                     throw ParameterError("gaussian width must be positive");
                 },
                 [](const family::CoshWeighted& c) {
                   if (!(c.rate > 0.0) || !std::isfinite(c.rate))
                     throw ParameterError("cosh growth rate must be positive");
                   if (!c.base) throw ParameterError("cosh-weighted function needs a base");
                   if (c.base->has_polynomial_part())
                     throw ParameterError("cosh-weighted base must be integrable");
                 },
                 [](const family::PoissonSmoothed& p) {
                   if (!(p.eta > 0.0) || !std::isfinite(p.eta))
                     throw ParameterError("poisson smoothing width must be positive");
                   if (!p.base) throw ParameterError("smoothed function needs a base");
                 },
                 [](const family::ResolventRe&) {},
                 [](const family::ResolventIm&) {},
             },
             atom);
}

}  // namespace

TestFunction::TestFunction(Atom atom) {
  validate_atom(atom);
  terms_.push_back(Term{1.0, std::move(atom)});
}

namespace {

// Checks a smoothing and collapses a smoothing of a single smoothing by the semigroup property.
Term smoothed_term(const TestFunction& base, double eta, double weight) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ParameterError("poisson_smooth: eta must be positive");
  if (!base.is_bounded())
    throw UnsupportedError(
        "poisson_smooth: base must be bounded (no polynomial terms of positive degree)");
  if (base.terms().size() == 1) {
    if (auto p = std::get_if<family::PoissonSmoothed>(&base.terms()[0].atom))
      return smoothed_term(*p->base, p->eta + eta, weight * base.terms()[0].weight);
  }
  return Term{weight, family::PoissonSmoothed{eta, std::make_shared<const TestFunction>(base)}};
}

}  // namespace

TestFunction TestFunction::from_terms(std::vector<Term> terms) {
  TestFunction f;
  for (Term& t : terms) {
    if (!std::isfinite(t.weight)) throw ParameterError("term weight must be finite");
    validate_atom(t.atom);
    if (auto p = std::get_if<family::PoissonSmoothed>(&t.atom)) {
      f.terms_.push_back(smoothed_term(*p->base, p->eta, t.weight));
      continue;
    }
    f.terms_.push_back(std::move(t));
  }
  return f;
}

TestFunction TestFunction::chebyshev(int degree) { return TestFunction(family::Chebyshev{degree}); }
TestFunction TestFunction::monomial(int degree) { return TestFunction(family::Monomial{degree}); }
TestFunction TestFunction::constant(double value) { return value * monomial(0); }
TestFunction TestFunction::gaussian(double center, double width) {
  return TestFunction(family::GaussianBump{center, width});
}
TestFunction TestFunction::cosh_weighted(double rate, TestFunction base) {
  return TestFunction(
      family::CoshWeighted{rate, std::make_shared<const TestFunction>(std::move(base))});
}
TestFunction TestFunction::resolvent_re(ComplexPoint z) { return TestFunction(family::ResolventRe{z}); }
TestFunction TestFunction::resolvent_im(ComplexPoint z) { return TestFunction(family::ResolventIm{z}); }

double TestFunction::operator()(double x) const {
  double s = 0.0;
  for (const Term& t : terms_) s += t.weight * atom_value(t.atom, x);
  return s;
}

double TestFunction::derivative(double x) const {
  double s = 0.0;
  for (const Term& t : terms_) s += t.weight * atom_derivative(t.atom, x);
  return s;
}

bool TestFunction::has_polynomial_part() const {
  for (const Term& t : terms_) {
    int degree = 0;
    if (is_polynomial_atom(t.atom, &degree) && degree > 0) return true;
    if (auto c = std::get_if<family::CoshWeighted>(&t.atom); c && c->base->has_polynomial_part())
      return true;
    if (auto p = std::get_if<family::PoissonSmoothed>(&t.atom); p && p->base->has_polynomial_part())
      return true;
  }
  return false;
}

bool TestFunction::is_bounded() const {
  for (const Term& t : terms_) {
    int degree = 0;
    if (is_polynomial_atom(t.atom, &degree)) {
      if (degree > 0) return false;
    } else if (auto c = std::get_if<family::CoshWeighted>(&t.atom)) {
      if (!all_gaussian(*c->base)) return false;
    } else if (auto p = std::get_if<family::PoissonSmoothed>(&t.atom)) {
      if (!p->base->is_bounded()) return false;
    }
  }
  return true;
}

std::string TestFunction::to_spec() const {
  if (terms_.empty()) return "0*monomial:0";
  std::string out;
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const Term& t = terms_[j];
    if (j > 0) out += '+';
    out += fmt17(t.weight);
    out += '*';
    out += std::visit(
        overloaded{
            [](const family::Chebyshev& c) { return "chebyshev:" + std::to_string(c.degree); },
            [](const family::Monomial& m) { return "monomial:" + std::to_string(m.degree); },
            [](const family::GaussianBump& g) {
              return "gauss:" + fmt17(g.center) + "," + fmt17(g.width);
            },
            [](const family::CoshWeighted& c) {
              return "cosh:" + fmt17(c.rate) + "(" + c.base->to_spec() + ")";
            },
            [](const family::PoissonSmoothed& p) {
              return "poisson:" + fmt17(p.eta) + "(" + p.base->to_spec() + ")";
            },
            [](const family::ResolventRe& r) {
              return "resolvent_re:" + fmt17(r.z.re()) + "," + fmt17(r.z.im());
            },
            [](const family::ResolventIm& r) {
              return "resolvent_im:" + fmt17(r.z.re()) + "," + fmt17(r.z.im());
            },
        },
        t.atom);
  }
  return out;
}

TestFunction operator+(const TestFunction& a, const TestFunction& b) {
  TestFunction r = a;
  r.terms_.insert(r.terms_.end(), b.terms_.begin(), b.terms_.end());
  return r;
}

TestFunction operator*(double a, const TestFunction& f) {
  if (!std::isfinite(a)) throw ParameterError("scalar multiple must be finite");
  TestFunction r = f;
  for (Term& t : r.terms_) t.weight *= a;
  return r;
}

double evaluate(const TestFunction& phi, double x) {
  if (!std::isfinite(x)) throw ParameterError("evaluate: argument must be finite");
  return phi(x);
}

TestFunction poisson_smooth(const TestFunction& base, double eta) {
  return TestFunction::from_terms({Term{
      1.0, family::PoissonSmoothed{eta, std::make_shared<const TestFunction>(base)}}});
}

double polynomial_window(double x) {
  const double a = std::abs(x);
  if (a <= kWindowInner) return 1.0;
  if (a >= kWindowOuter) return 0.0;
  const double t = (a - kWindowInner) / (kWindowOuter - kWindowInner);
  const double up = std::exp(-1.0 / (1.0 - t));
  const double down = std::exp(-1.0 / t);
  return up / (up + down);
}

std::complex<double> fourier_transform(const TestFunction& phi, double k,
                                       const TransformOptions& options) {
  if (!std::isfinite(k)) throw ParameterError("fourier_transform: k must be finite");
  cplx total = 0.0;
  std::vector<const Term*> poly;
  for (const Term& t : phi.terms()) {
    int degree = 0;
    if (is_polynomial_atom(t.atom, &degree)) {
      poly.push_back(&t);
      continue;
    }
    if (auto c = std::get_if<family::CoshWeighted>(&t.atom); c && !all_gaussian(*c->base))
      throw UnsupportedError("fourier_transform: cosh-weighted functions need a Gaussian base");
    if (auto p = std::get_if<family::PoissonSmoothed>(&t.atom);
        p && p->base->has_polynomial_part())
      throw UnsupportedError("fourier_transform: smoothed polynomial is not integrable");
    if (auto p = std::get_if<family::PoissonSmoothed>(&t.atom)) {
      for (const Term& bt : p->base->terms())
        if (is_polynomial_atom(bt.atom))
          throw UnsupportedError("fourier_transform: smoothed constant is not integrable");
    }
    total += t.weight * atom_transform(t.atom, k, options);
  }
  if (!poly.empty()) {
    if (!options.window_polynomials)
      throw UnsupportedError("fourier_transform: polynomial terms are not integrable without a window");
    total += windowed_polynomial_transform(poly, k);
  }
  return total;
}

SobolevNorm sobolev_norm(const TestFunction& phi, double s, const TransformOptions& options) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("sobolev_norm: s must be positive");
  if (phi.is_zero()) return {s, 0.0};
  // Validate transform support once before integrating.
  (void)fourier_transform(phi, 0.0, options);
  auto abs2 = [&](double k) { return std::norm(fourier_transform(phi, k, options)); };
  return {s, std::sqrt(detail::integrate_sobolev_weight(abs2, s))};
}

namespace detail {

// Bisection on GK61 panels against an absolute target, so segments whose integrand carries
// rounding noise far below the running total stop refining.
template <class F>
double panel_integrate(const F& f, double a, double b, double abs_tol, int depth) {
  double err = 0.0;
  const double v = gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &err);
  if (err <= abs_tol || depth == 0) return v;
  const double m = 0.5 * (a + b);
  return panel_integrate(f, a, m, 0.5 * abs_tol, depth - 1) +
         panel_integrate(f, m, b, 0.5 * abs_tol, depth - 1);
}

double integrate_sobolev_weight(const std::function<double(double)>& abs2_transform, double s) {
  auto integrand = [&](double k) { return std::pow(1.0 + 2.0 * k, 2.0 * s) * abs2_transform(k); };
  constexpr int depth = 16;
  constexpr double rel_tol = 1e-12;
  constexpr int max_segments = 41;  // last segment ends at 2^40

  auto segment = [&](double lo, double hi, double scale) {
    double err = 0.0;
    const double coarse = gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 0, 0.0, &err);
    const double target = rel_tol * std::max(std::abs(scale), std::abs(coarse));
    if (err <= target) return coarse;
    return panel_integrate(integrand, lo, hi, target, depth);
  };

  double total = segment(0.0, 1.0, 0.0);
  double lo = 1.0;
  double last = total;
  int small_in_a_row = 0;
  for (int seg = 1; seg < max_segments; ++seg) {
    const double hi = 2.0 * lo;
    last = segment(lo, hi, total);
    total += last;
    lo = hi;
    if (std::abs(last) <= 1e-14 * std::abs(total)) {
      if (++small_in_a_row == 3) return 2.0 * total;
    } else {
      small_in_a_row = 0;
    }
  }
  throw DivergenceError("sobolev_norm: integral over k does not converge (partial sum " +
                            fmt17(2.0 * total) + " up to |k| = " + fmt17(lo) +
                            ", last segment " + fmt17(2.0 * last) + ")",
                        2.0 * total, 2.0 * last);
}

double poisson_average(const std::function<double(double)>& g, double x, double eta) {
  const double half_pi = 0.5 * std::numbers::pi;
  auto f = [&](double theta) { return g(x + eta * std::tan(theta)); };
  // Panels break where the argument crosses fixed points around the spectrum, so a bump
  // that is narrow in theta still falls inside a panel edge region.
  constexpr double anchors[] = {-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> cuts{-half_pi};
  for (double y : anchors) cuts.push_back(std::atan((y - x) / eta));
  cuts.push_back(half_pi);
  double coarse = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
    coarse += std::abs(gauss_kronrod<double, 61>::integrate(f, cuts[j], cuts[j + 1], 0, 0.0));
  const double target = 1e-13 * std::max(1.0, coarse) / static_cast<double>(cuts.size());
  double value = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j)
    if (cuts[j + 1] > cuts[j]) value += panel_integrate(f, cuts[j], cuts[j + 1], target, 16);
  return value / std::numbers::pi;
}

}  // namespace detail

}  // namespace dilute
