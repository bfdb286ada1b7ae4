#include "dilute/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "dilute/errors.hpp"
#include "dilute/theory.hpp"

namespace dilute {

namespace {

constexpr double kPi = std::numbers::pi;

double normal_cdf(double x, double sigma) {
  return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

std::vector<std::uint32_t> grid_counts(const Spectrum& s) {
  std::vector<std::uint32_t> counts(kSemicircleGridSize);
  for (std::size_t g = 0; g < kSemicircleGridSize; ++g) {
    const auto it = std::upper_bound(s.values.begin(), s.values.end(), semicircle_grid_point(g));
    counts[g] = static_cast<std::uint32_t>(it - s.values.begin());
  }
  return counts;
}

double grid_ks(const std::vector<std::uint64_t>& counts, double total) {
  double ks = 0.0;
  for (std::size_t g = 0; g < kSemicircleGridSize; ++g) {
    const double emp = static_cast<double>(counts[g]) / total;
    ks = std::max(ks, std::abs(emp - semicircle_cdf(semicircle_grid_point(g))));
  }
  return ks;
}

template <class Job>
void parallel_for(std::size_t count, unsigned workers, Job job) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw RunError("replica " + std::to_string(i) + " failed: " + e.what(), i);
    }
  }
}

}  // namespace

double Tolerances::skew_limit(std::size_t m) const {
  return skew_max ? *skew_max : 3.3 * std::sqrt(6.0 / static_cast<double>(m));
}
double Tolerances::kurtosis_limit(std::size_t m) const {
  return kurtosis_max ? *kurtosis_max : 3.3 * std::sqrt(24.0 / static_cast<double>(m));
}
double Tolerances::char_limit(std::size_t m) const {
  return char_tol ? *char_tol : 4.0 / std::sqrt(static_cast<double>(m));
}

void ExperimentConfig::validate() const {
  ensemble.validate();
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (statistics.clt && replicas < kMinNormalityReplicas)
    throw ConfigError("normality testing needs at least 30 replicas, got " + std::to_string(replicas));
  if (statistics.kernel && replicas < kMinKernelReplicas)
    throw ConfigError("kernel check needs at least 100 replicas, got " + std::to_string(replicas));
  if (statistics.kernel && resolvent_points.empty())
    throw ConfigError("kernel check needs at least one resolvent point");
  if (!(tolerances.variance_rel_tol > 0.0)) throw ConfigError("variance_rel_tol must be positive");
  if (!(tolerances.ks_alpha > 0.0 && tolerances.ks_alpha < 1.0))
    throw ConfigError("ks_alpha must lie in (0, 1)");
  if (!(tolerances.kernel_ratio_lo < tolerances.kernel_ratio_hi))
    throw ConfigError("kernel ratio bracket is empty");
  for (const auto& f : test_functions)
    if (f.variance_rel_tol && !(*f.variance_rel_tol > 0.0))
      throw ConfigError("variance_rel_tol of '" + f.name + "' must be positive");
  for (double x : char_grid)
    if (!std::isfinite(x)) throw ConfigError("characteristic-function grid must be finite");
}

bool CltReport::variance_pass() const {
  bool any = false;
  for (const auto& f : functions) {
    if (f.degenerate) continue;
    any = true;
    if (!f.variance_pass) return false;
  }
  return any;
}

bool CltReport::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

ReplicaResult run_replica(const ExperimentConfig& cfg, std::size_t replica) {
  const SymmetricMatrix m = sample(cfg.ensemble, replica);
  const Spectrum s = eigenvalues(m);
  ReplicaResult r;
  r.index = replica;
  r.statistics.reserve(cfg.test_functions.size());
  for (const auto& f : cfg.test_functions) r.statistics.push_back(linear_statistic(s, f.function));
  r.traces.reserve(cfg.resolvent_points.size());
  for (const auto& z : cfg.resolvent_points) r.traces.push_back(resolvent_trace(s, z));
  r.spectrum_min = s.min();
  r.spectrum_max = s.max();
  if (cfg.statistics.semicircle) {
    r.grid_counts = grid_counts(s);
    std::vector<std::uint64_t> c(r.grid_counts.begin(), r.grid_counts.end());
    r.semicircle_ks = grid_ks(c, static_cast<double>(s.size()));
  }
  return r;
}

std::vector<ReplicaResult> run_replicas(const ExperimentConfig& cfg, const ExecutionOptions& exec) {
  std::vector<ReplicaResult> out(cfg.replicas);
  parallel_for(cfg.replicas, exec.workers, [&](std::size_t i) { out[i] = run_replica(cfg, i); });
  return out;
}

CltReport run_experiment(const ExperimentConfig& cfg, const ExecutionOptions& exec) {
  cfg.validate();
  return build_report(cfg, run_replicas(cfg, exec));
}

CltReport build_report(const ExperimentConfig& cfg, std::vector<ReplicaResult> replicas) {
  cfg.validate();
  const std::size_t M = replicas.size();
  CltReport report;
  report.ensemble = cfg.ensemble;
  report.replicas = M;
  report.scaling = cfg.scaling;
  const double p_over_n = cfg.ensemble.edge_probability();
  report.rescaling_factor = cfg.scaling == FluctuationScaling::Dilute ? std::sqrt(p_over_n) : 1.0;
  const EntryMoments moments = entry_moments(cfg.ensemble);
  const QuadratureRule wigner_rule = QuadratureRule::gauss_chebyshev(256);

  for (std::size_t j = 0; j < cfg.test_functions.size(); ++j) {
    const NamedFunction& nf = cfg.test_functions[j];
    FunctionReport fr;
    fr.name = nf.name;
    fr.spec = nf.function.to_spec();
    fr.windowed = nf.function.has_polynomial_part();

    const auto adaptive = clt_variance_adaptive(nf.function, cfg.tolerances.degeneracy_threshold);
    fr.condition_integral = adaptive.result.condition_integral;
    fr.quadrature_converged = adaptive.converged;
    if (cfg.scaling == FluctuationScaling::Dilute) {
      fr.target = "clt";
      fr.theoretical_variance = adaptive.result.variance;
      fr.degenerate = adaptive.result.degenerate;
    } else {
      fr.target = "wigner";
      fr.theoretical_variance = wigner_variance(nf.function, moments.kappa4_standardized, moments.w2,
                                                wigner_rule, moments.spectral_scale);
      fr.wigner_variance_raw = wigner_variance(nf.function, moments.kappa4, moments.w2, wigner_rule);
      fr.degenerate = !(fr.theoretical_variance > cfg.tolerances.degeneracy_threshold);
    }

    CompensatedSum total;
    for (const auto& r : replicas) total.add(r.statistics[j]);
    fr.sample_mean = total.value() / static_cast<double>(M);
    fr.samples.reserve(M);
    for (const auto& r : replicas)
      fr.samples.push_back(report.rescaling_factor * (r.statistics[j] - fr.sample_mean));

    const SampleMoments sm = sample_moments(fr.samples);
    fr.empirical_variance = sm.variance;
    fr.skewness = sm.skewness;
    fr.excess_kurtosis = sm.excess_kurtosis;
    if (cfg.statistics.char_function) {
      fr.char_grid = cfg.char_grid;
      fr.char_values = empirical_char_function(fr.samples, fr.char_grid);
    }

    const double tol = nf.variance_rel_tol.value_or(cfg.tolerances.variance_rel_tol);
    fr.variance_lo = fr.theoretical_variance * (1.0 - tol);
    fr.variance_hi = fr.theoretical_variance * (1.0 + tol);
    if (!fr.degenerate && cfg.statistics.clt) {
      const NormalityResult nr = normality_tests(fr.samples, fr.theoretical_variance);
      fr.ks_statistic = nr.ks_statistic;
      fr.ks_p_value = nr.ks_p_value;
      fr.variance_pass = fr.empirical_variance >= fr.variance_lo && fr.empirical_variance <= fr.variance_hi;
      fr.skew_pass = std::abs(fr.skewness) < cfg.tolerances.skew_limit(M);
      fr.kurtosis_pass = std::abs(fr.excess_kurtosis) < cfg.tolerances.kurtosis_limit(M);
      fr.ks_pass = nr.ks_p_value > cfg.tolerances.ks_alpha;
      fr.char_pass = true;
      for (std::size_t g = 0; g < fr.char_values.size(); ++g) {
        const double x = fr.char_grid[g];
        const double gauss = std::exp(-0.5 * x * x * fr.theoretical_variance);
        if (!(std::abs(fr.char_values[g] - gauss) < cfg.tolerances.char_limit(M))) fr.char_pass = false;
      }
      report.criteria.push_back({fr.name + ": variance", fr.variance_pass});
      report.criteria.push_back({fr.name + ": skewness", fr.skew_pass});
      report.criteria.push_back({fr.name + ": excess kurtosis", fr.kurtosis_pass});
      report.criteria.push_back({fr.name + ": ks", fr.ks_pass});
      if (cfg.statistics.char_function)
        report.criteria.push_back({fr.name + ": characteristic function", fr.char_pass});
    }
    report.functions.push_back(std::move(fr));
  }

  if (cfg.statistics.kernel) {
    for (std::size_t j = 0; j < cfg.resolvent_points.size(); ++j) {
      std::vector<std::complex<double>> tr;
      tr.reserve(M);
      for (const auto& r : replicas) tr.push_back(r.traces[j]);
      const ComplexPoint z = cfg.resolvent_points[j];
      for (bool conj : {true, false}) {
        KernelReport kr{KernelArg{z, false}, KernelArg{z, conj}, {}, conj, true};
        kr.check = kernel_check(cfg.ensemble, kr.z1, kr.z2, tr, tr);
        if (kr.gated) {
          const double ratio = kr.check.ratio.real();
          kr.pass = ratio >= cfg.tolerances.kernel_ratio_lo && ratio <= cfg.tolerances.kernel_ratio_hi;
          report.criteria.push_back({"kernel at z = " + std::to_string(z.re()) + "+" +
                                         std::to_string(z.im()) + "i",
                                     kr.pass});
        }
        report.kernels.push_back(kr);
      }
    }
  }

  if (cfg.statistics.semicircle) {
    std::vector<std::uint64_t> counts(kSemicircleGridSize, 0);
    for (const auto& r : replicas)
      for (std::size_t g = 0; g < kSemicircleGridSize; ++g) counts[g] += r.grid_counts[g];
    report.semicircle_ks =
        grid_ks(counts, static_cast<double>(M) * static_cast<double>(cfg.ensemble.n));
    report.criteria.push_back(
        {"semicircle ks", *report.semicircle_ks < cfg.tolerances.semicircle_ks_max});
  }

  report.replica_results = std::move(replicas);
  return report;
}

SampleMoments sample_moments(std::span<const double> samples) {
  SampleMoments m;
  const std::size_t M = samples.size();
  if (M == 0) return m;
  CompensatedSum total;
  for (double x : samples) total.add(x);
  m.mean = total.value() / static_cast<double>(M);
  CompensatedSum c2, c3, c4;
  for (double x : samples) {
    const double d = x - m.mean;
    const double d2 = d * d;
    c2.add(d2);
    c3.add(d2 * d);
    c4.add(d2 * d2);
  }
  const double n = static_cast<double>(M);
  m.variance = M > 1 ? c2.value() / (n - 1.0) : 0.0;
  const double m2 = c2.value() / n, m3 = c3.value() / n, m4 = c4.value() / n;
  if (m2 > 0.0 && M > 3) {
    const double g1 = m3 / std::pow(m2, 1.5);
    const double g2 = m4 / (m2 * m2) - 3.0;
    m.skewness = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
    m.excess_kurtosis = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
  }
  return m;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Complementary (theta-function) form converges fast for small lambda.
    const double c = std::sqrt(2.0 * kPi) / lambda;
    double s = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double a = (2.0 * j - 1.0) * kPi / lambda;
      const double term = std::exp(-a * a / 8.0);
      s += term;
      if (term < 1e-300) break;
    }
    return std::clamp(1.0 - c * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

NormalityResult normality_tests(std::span<const double> samples, double target_variance) {
  if (samples.size() < kMinNormalityReplicas)
    throw ParameterError("normality_tests: need at least 30 samples, got " +
                         std::to_string(samples.size()));
  if (!(target_variance > 0.0) || !std::isfinite(target_variance))
    throw ParameterError("normality_tests: target variance must be positive");
  NormalityResult r;
  const SampleMoments m = sample_moments(samples);
  r.skewness = m.skewness;
  r.excess_kurtosis = m.excess_kurtosis;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sigma = std::sqrt(target_variance);
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i], sigma);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  r.ks_statistic = d;
  const double sq = std::sqrt(n);
  r.ks_p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  return r;
}

std::vector<std::complex<double>> empirical_char_function(std::span<const double> samples,
                                                          std::span<const double> x_grid) {
  if (samples.empty()) throw ParameterError("empirical_char_function: no samples");
  std::vector<std::complex<double>> out;
  out.reserve(x_grid.size());
  const double M = static_cast<double>(samples.size());
  for (double x : x_grid) {
    CompensatedSum re, im;
    for (double s : samples) {
      const double t = x * s;
      re.add(std::cos(t));
      im.add(std::sin(t));
    }
    out.emplace_back(re.value() / M, im.value() / M);
  }
  return out;
}

KernelCheck kernel_check(const EnsembleParams& ensemble, const KernelArg& z1, const KernelArg& z2,
                         std::span<const std::complex<double>> traces1,
                         std::span<const std::complex<double>> traces2) {
  if (traces1.size() != traces2.size()) throw ParameterError("kernel_check: trace counts differ");
  const std::size_t M = traces1.size();
  if (M < kMinKernelReplicas)
    throw ConfigError("kernel_check: at least 100 replicas are required, got " + std::to_string(M));
  auto pick = [](const std::complex<double>& g, bool conj) { return conj ? std::conj(g) : g; };

  CompensatedSum r1, i1, r2, i2;
  for (std::size_t m = 0; m < M; ++m) {
    const auto a = pick(traces1[m], z1.conjugate), b = pick(traces2[m], z2.conjugate);
    r1.add(a.real());
    i1.add(a.imag());
    r2.add(b.real());
    i2.add(b.imag());
  }
  const double Md = static_cast<double>(M);
  const std::complex<double> mean1(r1.value() / Md, i1.value() / Md);
  const std::complex<double> mean2(r2.value() / Md, i2.value() / Md);
  CompensatedSum cr, ci;
  for (std::size_t m = 0; m < M; ++m) {
    const auto prod = (pick(traces1[m], z1.conjugate) - mean1) * (pick(traces2[m], z2.conjugate) - mean2);
    cr.add(prod.real());
    ci.add(prod.imag());
  }
  KernelCheck k;
  k.empirical = ensemble.edge_probability() * std::complex<double>(cr.value(), ci.value()) / (Md - 1.0);
  k.predicted = covariance_kernel(z1.value(), z2.value());
  k.ratio = k.empirical / k.predicted;
  return k;
}

double semicircle_grid_point(std::size_t g) {
  return -2.5 + 5.0 * static_cast<double>(g) / static_cast<double>(kSemicircleGridSize);
}

double semicircle_check(std::span<const Spectrum> spectra) {
  if (spectra.empty()) throw ParameterError("semicircle_check: no spectra");
  std::vector<std::uint64_t> counts(kSemicircleGridSize, 0);
  double total = 0.0;
  for (const auto& s : spectra) {
    const auto c = grid_counts(s);
    for (std::size_t g = 0; g < kSemicircleGridSize; ++g) counts[g] += c[g];
    total += static_cast<double>(s.size());
  }
  return grid_ks(counts, total);
}

std::vector<HistogramBin> spectral_histogram(std::span<const Spectrum> spectra, std::size_t bins) {
  if (spectra.empty() || bins == 0) throw ParameterError("spectral_histogram: no spectra or bins");
  double lo = -2.5, hi = 2.5;
  std::size_t total = 0;
  for (const auto& s : spectra) {
    if (s.values.empty()) continue;
    lo = std::min(lo, s.min());
    hi = std::max(hi, s.max());
    total += s.size();
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& s : spectra)
    for (double x : s.values) {
      auto b = static_cast<std::ptrdiff_t>(std::floor((x - lo) / width));
      b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
      ++counts[static_cast<std::size_t>(b)];
    }
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].center = lo + (static_cast<double>(b) + 0.5) * width;
    out[b].empirical_density = static_cast<double>(counts[b]) / (static_cast<double>(total) * width);
    out[b].semicircle_density = semicircle_density(out[b].center);
  }
  return out;
}

std::vector<Spectrum> sample_spectra(const EnsembleParams& ensemble, std::size_t replicas,
                                     const ExecutionOptions& exec) {
  ensemble.validate();
  std::vector<Spectrum> out(replicas);
  parallel_for(replicas, exec.workers,
               [&](std::size_t i) { out[i] = eigenvalues(sample(ensemble, i)); });
  return out;
}

void SweepConfig::validate() const {
  if (n_grid.empty()) throw ConfigError("sweep: n_grid must not be empty");
  if (!(theta > 0.0 && theta < 1.0))
    throw ConfigError("sweep: theta must lie in (0, 1) (dilute regime p/n -> 0)");
  for (std::size_t n : n_grid)
    if (n < 100) throw ConfigError("sweep: every n must be >= 100");
  if (replicas < 2) throw ConfigError("sweep: replicas must be >= 2");
  if (!(envelope > 0.0)) throw ConfigError("sweep: envelope must be positive");
  if (!(sobolev_s > 0.0)) throw ConfigError("sweep: sobolev_s must be positive");
}

double SweepConfig::p_for(std::size_t n) const {
  return std::floor(std::pow(static_cast<double>(n), theta) + 1e-9);
}

bool SweepResult::all_within_envelope() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.pass; }) &&
         std::all_of(sobolev.begin(), sobolev.end(), [](const SobolevRow& r) { return r.pass; });
}

SweepResult variance_bound_check(const SweepConfig& cfg, const ExecutionOptions& exec) {
  cfg.validate();
  SweepResult result;
  const auto kernel = covariance_kernel(cfg.z.value(), cfg.z.conjugate()).real();

  std::vector<double> norms;
  for (const auto& f : cfg.sobolev_functions) {
    const double v = sobolev_norm(f.function, cfg.sobolev_s).value;
    norms.push_back(v * v);
  }

  for (std::size_t n : cfg.n_grid) {
    ExperimentConfig ec;
    ec.ensemble = EnsembleParams{n, cfg.p_for(n), EnsembleKind::DilutedGraph, cfg.seed};
    ec.replicas = cfg.replicas;
    ec.resolvent_points = {cfg.z};
    ec.test_functions = cfg.sobolev_functions;
    ec.statistics = StatisticsFlags{false, false, false, true, false};
    ec.validate();
    const auto reps = run_replicas(ec, exec);

    const double p_over_n = ec.ensemble.edge_probability();
    const double M = static_cast<double>(reps.size());
    CompensatedSum re, im;
    for (const auto& r : reps) {
      re.add(r.traces[0].real());
      im.add(r.traces[0].imag());
    }
    const std::complex<double> mean(re.value() / M, im.value() / M);
    CompensatedSum var;
    for (const auto& r : reps) var.add(std::norm(r.traces[0] - mean));

    SweepRow row;
    row.n = n;
    row.p = ec.ensemble.p;
    row.rescaled_variance = p_over_n * var.value() / (M - 1.0);
    row.kernel_prediction = kernel;
    row.ratio = row.rescaled_variance / kernel;
    row.pass = row.ratio > 0.0 && row.ratio <= cfg.envelope;
    result.rows.push_back(row);

    for (std::size_t j = 0; j < cfg.sobolev_functions.size(); ++j) {
      std::vector<double> stats;
      for (const auto& r : reps) stats.push_back(r.statistics[j]);
      SobolevRow sr;
      sr.name = cfg.sobolev_functions[j].name;
      sr.n = n;
      sr.rescaled_variance = p_over_n * sample_moments(stats).variance;
      sr.norm_squared = norms[j];
      sr.bound = cfg.sobolev_envelope * norms[j];
      sr.pass = sr.rescaled_variance <= sr.bound;
      result.sobolev.push_back(sr);
    }
  }

  const auto largest = std::max_element(result.rows.begin(), result.rows.end(),
                                        [](const SweepRow& a, const SweepRow& b) { return a.n < b.n; });
  result.largest_n_closest = std::all_of(result.rows.begin(), result.rows.end(), [&](const SweepRow& r) {
    return std::abs(largest->ratio - 1.0) <= std::abs(r.ratio - 1.0);
  });
  return result;
}

}  // namespace dilute
