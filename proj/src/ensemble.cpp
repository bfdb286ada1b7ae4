#include "dilute/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dilute/errors.hpp"

namespace dilute {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::DilutedGraph:
      return "diluted";
    case EnsembleKind::WignerComparison:
      return "wigner";
  }
  return "diluted";
}

EnsembleKind parse_ensemble_kind(std::string_view text) {
  if (text == "diluted") return EnsembleKind::DilutedGraph;
  if (text == "wigner") return EnsembleKind::WignerComparison;
  throw ParameterError("unknown ensemble kind '" + std::string(text) +
                       "' (expected 'diluted' or 'wigner')");
}

void EnsembleParams::validate() const {
  if (n < 2) throw ParameterError("ensemble: n must be >= 2, got " + std::to_string(n));
  if (!(p > 0.0) || !std::isfinite(p))
    throw ParameterError("ensemble: p must be positive and finite");
  if (p > static_cast<double>(n))
    throw ParameterError("ensemble: p must not exceed n");
}

double EnsembleParams::edge_value() const {
  const double nd = static_cast<double>(n);
  return (nd - p) / (nd * std::sqrt(p));
}

double EnsembleParams::non_edge_value() const {
  return -std::sqrt(p) / static_cast<double>(n);
}

double SymmetricMatrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += data_[i * n_ + i];
  return s;
}

double SymmetricMatrix::frobenius_squared() const {
  // Neumaier summation; n^2 terms of one sign.
  double s = 0.0, c = 0.0;
  for (double v : data_) {
    const double x = v * v;
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

double SymmetricMatrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double r = 0.0;
    for (double v : row(i)) r += std::abs(v);
    best = std::max(best, r);
  }
  return best;
}

EntryMoments entry_moments(const EnsembleParams& params) {
  params.validate();
  const double nd = static_cast<double>(params.n);
  const double q = params.edge_probability();
  const double v1 = params.edge_value();
  const double v2 = params.non_edge_value();

  EntryMoments m;
  m.mean = 0.0;
  m.variance = (1.0 / nd) * (1.0 - q);
  const double fourth = q * std::pow(v1, 4) + (1.0 - q) * std::pow(v2, 4);
  m.kappa4 = nd * nd * (fourth - 3.0 * m.variance * m.variance);
  m.w2 = 0.0;
  // p = n makes every entry zero; the standardized cumulant is then taken as 0.
  m.kappa4_standardized = m.variance > 0.0 ? fourth / (m.variance * m.variance) - 3.0 : 0.0;
  m.spectral_scale = std::sqrt(nd * m.variance);
  return m;
}

std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) {
  return splitmix64(splitmix64(seed) ^ splitmix64(replica + 0x9E3779B97F4A7C15ULL));
}

SymmetricMatrix sample_with_stream_seed(const EnsembleParams& params, std::uint64_t stream_seed) {
  params.validate();
  const std::size_t n = params.n;
  const double q = params.edge_probability();
  const double edge = params.edge_value();
  const double non_edge = params.non_edge_value();

  std::mt19937_64 engine(stream_seed);
  SymmetricMatrix m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
      m.set(i, j, u < q ? edge : non_edge);
    }
  }
  return m;
}

SymmetricMatrix sample(const EnsembleParams& params, std::uint64_t replica) {
  return sample_with_stream_seed(params, replica_seed(params.seed, replica));
}

}  // namespace dilute
