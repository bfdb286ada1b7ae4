#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dilute {

enum class EnsembleKind { DilutedGraph, WignerComparison };

std::string_view to_string(EnsembleKind kind);
EnsembleKind parse_ensemble_kind(std::string_view text);

struct EnsembleParams {
  std::size_t n = 2;
  double p = 1.0;
  EnsembleKind kind = EnsembleKind::DilutedGraph;
  std::uint64_t seed = 0;

  /// Throws ParameterError unless n >= 2 and 0 < p <= n.
  void validate() const;

  /// Probability p/n that an off-diagonal slot carries an edge.
  double edge_probability() const { return p / static_cast<double>(n); }
  /// Entry value on an edge, 1/sqrt(p) - sqrt(p)/n, written as (n - p)/(n sqrt(p)).
  double edge_value() const;
  /// Entry value off an edge, -sqrt(p)/n.
  double non_edge_value() const;
};

/// Dense row-major symmetric matrix. Only the ensemble and tests write to it.
class SymmetricMatrix {
public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  /// Writes both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value) {
    data_[i * n_ + j] = value;
    data_[j * n_ + i] = value;
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }
  std::span<const double> data() const noexcept { return data_; }

  double trace() const;
  double frobenius_squared() const;
  /// Max absolute row sum; an upper bound on the spectral norm.
  double norm_inf() const;

  bool operator==(const SymmetricMatrix&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Exact moments of the two-point entry law.
struct EntryMoments {
  double mean = 0.0;
  /// (1/n)(1 - p/n).
  double variance = 0.0;
  /// n^2 (E a^4 - 3 E^2 a^2), the raw fourth-cumulant excess.
  double kappa4 = 0.0;
  /// n E a_ii^2; zero because the diagonal is zero.
  double w2 = 0.0;
  /// E a^4 / (E a^2)^2 - 3: kappa4 of the entries rescaled to variance 1/n; 0 when p = n.
  double kappa4_standardized = 0.0;
  /// sqrt(n * variance). The spectrum is this multiple of a unit-variance Wigner-type spectrum.
  double spectral_scale = 1.0;
};

EntryMoments entry_moments(const EnsembleParams& params);

/// Counter-based stream split: the 64-bit seed of the generator for one replica.
///
///   replica_seed = splitmix64(splitmix64(seed) ^ splitmix64(replica + 0x9E3779B97F4A7C15))
///
/// The generator is std::mt19937_64 seeded with that single value, so every
/// replica is a pure function of (seed, replica).
std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica);

/// One draw of the centered, rescaled dilute adjacency ensemble.
///
/// Upper-triangle slots are filled row by row, (0,1), (0,2), ..., (n-2,n-1).
/// Each slot consumes one 64-bit output u and is an edge iff
/// (u >> 11) * 2^-53 < p/n. The diagonal is zero.
SymmetricMatrix sample(const EnsembleParams& params, std::uint64_t replica);

/// Same as sample() with an explicit generator seed; used by fixtures.
SymmetricMatrix sample_with_stream_seed(const EnsembleParams& params, std::uint64_t stream_seed);

}  // namespace dilute
