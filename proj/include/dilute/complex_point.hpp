#pragma once

#include <complex>

namespace dilute {

/// A point of the open upper half-plane.
class ComplexPoint {
public:
  /// Throws ParameterError unless im > 0 and both parts are finite.
  ComplexPoint(double re, double im);

  double re() const noexcept { return re_; }
  double im() const noexcept { return im_; }
  std::complex<double> value() const noexcept { return {re_, im_}; }
  /// The mirror point in the lower half-plane.
  std::complex<double> conjugate() const noexcept { return {re_, -im_}; }

  bool operator==(const ComplexPoint&) const = default;

private:
  double re_;
  double im_;
};

}  // namespace dilute
