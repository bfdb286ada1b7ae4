#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dilute/complex_point.hpp"
#include "dilute/eigen.hpp"
#include "dilute/ensemble.hpp"
#include "dilute/testfn.hpp"

namespace dilute {

struct StatisticsFlags {
  bool clt = true;
  bool kernel = false;
  bool semicircle = false;
  bool variance_bound = false;
  bool char_function = true;
};

/// How fluctuations are scaled and which limit they are compared with.
enum class FluctuationScaling {
  /// S = (p/n)^{1/2} (N - mean), compared with V[phi].
  Dilute,
  /// S = N - mean, compared with the Wigner variance of the unit-variance ensemble.
  Unscaled,
};

struct Tolerances {
  /// Variance must lie in target * [1 - tol, 1 + tol].
  double variance_rel_tol = 0.25;
  /// Defaults 3.3 sqrt(6/M) and 3.3 sqrt(24/M).
  std::optional<double> skew_max;
  std::optional<double> kurtosis_max;
  double ks_alpha = 0.01;
  /// Default 4/sqrt(M).
  std::optional<double> char_tol;
  double kernel_ratio_lo = 0.6;
  double kernel_ratio_hi = 1.4;
  double semicircle_ks_max = 0.05;
  double degeneracy_threshold = 1e-8;

  double skew_limit(std::size_t m) const;
  double kurtosis_limit(std::size_t m) const;
  double char_limit(std::size_t m) const;
};

struct NamedFunction {
  std::string name;
  TestFunction function;
  /// Overrides Tolerances::variance_rel_tol for this function.
  std::optional<double> variance_rel_tol;
};

inline constexpr std::size_t kMinNormalityReplicas = 30;
inline constexpr std::size_t kMinKernelReplicas = 100;

struct ExperimentConfig {
  EnsembleParams ensemble;
  std::size_t replicas = 30;
  std::vector<NamedFunction> test_functions;
  std::vector<ComplexPoint> resolvent_points;
  StatisticsFlags statistics;
  Tolerances tolerances;
  FluctuationScaling scaling = FluctuationScaling::Dilute;
  std::vector<double> char_grid{1.0};

  /// Throws ConfigError (or ParameterError for the ensemble).
  void validate() const;
};

struct ExecutionOptions {
  unsigned workers = 1;
};

struct ReplicaResult {
  std::size_t index = 0;
  std::vector<double> statistics;
  std::vector<std::complex<double>> traces;
  double spectrum_min = 0.0;
  double spectrum_max = 0.0;
  /// Semicircle KS distance of this replica alone (0 unless the check is enabled).
  double semicircle_ks = 0.0;
  /// Counts of eigenvalues <= each semicircle grid point (empty unless enabled).
  std::vector<std::uint32_t> grid_counts;
};

struct NormalityResult {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
};

struct SampleMoments {
  double mean = 0.0;
  /// Unbiased, 1/(M - 1).
  double variance = 0.0;
  /// Adjusted Fisher-Pearson G1; 0 for a constant sample.
  double skewness = 0.0;
  /// Sample excess kurtosis G2; 0 for a constant sample.
  double excess_kurtosis = 0.0;
};

struct FunctionReport {
  std::string name;
  std::string spec;
  bool windowed = false;
  double sample_mean = 0.0;
  std::vector<double> samples;
  double empirical_variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  /// Absent for degenerate functions: no Gaussian target.
  std::optional<double> ks_statistic;
  std::optional<double> ks_p_value;
  std::vector<double> char_grid;
  std::vector<std::complex<double>> char_values;
  std::string target;  // "clt" or "wigner"
  double condition_integral = 0.0;
  double theoretical_variance = 0.0;
  /// Wigner target with the raw kappa4 and no variance standardization (Unscaled only).
  std::optional<double> wigner_variance_raw;
  bool degenerate = false;
  bool quadrature_converged = true;
  double variance_lo = 0.0;
  double variance_hi = 0.0;
  bool variance_pass = false;
  bool skew_pass = false;
  bool kurtosis_pass = false;
  bool ks_pass = false;
  bool char_pass = false;
};

struct KernelArg {
  ComplexPoint z;
  bool conjugate = false;
  std::complex<double> value() const { return conjugate ? z.conjugate() : z.value(); }
};

struct KernelCheck {
  std::complex<double> empirical;
  std::complex<double> predicted;
  std::complex<double> ratio;
};

struct KernelReport {
  KernelArg z1;
  KernelArg z2;
  KernelCheck check;
  /// Only (z, conj z) pairs are gated; their ratio is real and positive in the limit.
  bool gated = false;
  bool pass = true;
};

struct Criterion {
  std::string name;
  bool pass = false;
};

struct CltReport {
  EnsembleParams ensemble;
  std::size_t replicas = 0;
  FluctuationScaling scaling = FluctuationScaling::Dilute;
  double rescaling_factor = 1.0;
  std::vector<ReplicaResult> replica_results;
  std::vector<FunctionReport> functions;
  std::vector<KernelReport> kernels;
  std::optional<double> semicircle_ks;
  std::vector<Criterion> criteria;

  bool variance_pass() const;
  bool all_pass() const;
};

/// One replica: sample -> eigenvalues -> statistics.
ReplicaResult run_replica(const ExperimentConfig& cfg, std::size_t replica);

/// Runs replicas 0..M-1 on `workers` threads; results are in replica order and do not
/// depend on the worker count. A failing replica is rethrown as RunError.
std::vector<ReplicaResult> run_replicas(const ExperimentConfig& cfg, const ExecutionOptions& exec);

CltReport run_experiment(const ExperimentConfig& cfg, const ExecutionOptions& exec = {});

/// Aggregates precomputed replica results (in replica order) into a report.
CltReport build_report(const ExperimentConfig& cfg, std::vector<ReplicaResult> replicas);

SampleMoments sample_moments(std::span<const double> samples);

/// Moment statistics plus one-sample KS against N(0, target_variance).
/// Throws ParameterError for fewer than 30 samples or target_variance <= 0.
NormalityResult normality_tests(std::span<const double> samples, double target_variance);

/// Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_survival(double lambda);

/// Z(x) = (1/M) sum_m exp(i x S_m).
std::vector<std::complex<double>> empirical_char_function(std::span<const double> samples,
                                                          std::span<const double> x_grid);

/// (p/n) (1/(M-1)) sum_m (g1_m - mean g1)(g2_m - mean g2) against covariance_kernel(z1, z2).
/// traces1/traces2 are the upper half-plane traces at z1.z and z2.z; conjugate arguments
/// use their conjugates. Refuses fewer than 100 replicas (ConfigError).
KernelCheck kernel_check(const EnsembleParams& ensemble, const KernelArg& z1, const KernelArg& z2,
                         std::span<const std::complex<double>> traces1,
                         std::span<const std::complex<double>> traces2);

inline constexpr std::size_t kSemicircleGridSize = 512;
/// x_g = -2.5 + 5 g / 512, g = 0..511 (contains 0).
double semicircle_grid_point(std::size_t g);
/// Max over the grid of |pooled empirical CDF - semicircle CDF|.
double semicircle_check(std::span<const Spectrum> spectra);

struct HistogramBin {
  double center = 0.0;
  double empirical_density = 0.0;
  double semicircle_density = 0.0;
};
/// Pooled histogram over [min(-2.5, lo), max(2.5, hi)], normalized to unit mass.
std::vector<HistogramBin> spectral_histogram(std::span<const Spectrum> spectra, std::size_t bins = 64);

/// Spectra of replicas 0..M-1.
std::vector<Spectrum> sample_spectra(const EnsembleParams& ensemble, std::size_t replicas,
                                     const ExecutionOptions& exec = {});

struct SweepConfig {
  std::vector<std::size_t> n_grid;
  double theta = 0.5;
  ComplexPoint z{0.0, 2.0};
  std::size_t replicas = 200;
  std::uint64_t seed = 0;
  double envelope = 10.0;
  /// Functions for the Sobolev-norm variance bound.
  std::vector<NamedFunction> sobolev_functions;
  double sobolev_s = 1.75;
  double sobolev_envelope = 100.0;

  void validate() const;
  /// p = floor(n^theta).
  double p_for(std::size_t n) const;
};

struct SweepRow {
  std::size_t n = 0;
  double p = 0.0;
  double rescaled_variance = 0.0;
  double kernel_prediction = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

struct SobolevRow {
  std::string name;
  std::size_t n = 0;
  double rescaled_variance = 0.0;
  double norm_squared = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SobolevRow> sobolev;
  /// |ratio - 1| is smallest at the largest n.
  bool largest_n_closest = false;
  bool all_within_envelope() const;
};

/// (p/n) Var{gamma_n(z)} over a grid of n with p = floor(n^theta), compared with C(z, conj z).
SweepResult variance_bound_check(const SweepConfig& cfg, const ExecutionOptions& exec = {});

}  // namespace dilute
