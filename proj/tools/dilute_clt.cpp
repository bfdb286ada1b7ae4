// dilute-clt: command-line driver for the dilute random-graph CLT experiments.
//
// Exit codes: 0 ok, 2 degenerate (--strict), 64 usage/config, 65 numeric failure or
// failed check, 70 replica failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "dilute/config.hpp"
#include "dilute/errors.hpp"
#include "dilute/harness.hpp"
#include "dilute/report.hpp"
#include "dilute/theory.hpp"

namespace {

using namespace dilute;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitDegenerate = 2;
constexpr int kExitUsage = 64;
constexpr int kExitNumeric = 65;
constexpr int kExitReplica = 70;

constexpr const char* kWorkersEnv = "DILUTE_CLT_WORKERS";

unsigned resolve_workers(const std::optional<unsigned>& flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const RunError*>(&e)) return kExitReplica;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const UnsupportedError*>(&e))
    return kExitUsage;
  return kExitNumeric;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct VarianceArgs {
  std::string spec;
  std::optional<double> s;
  std::optional<int> order;
  bool strict = false;
  std::string json_path;
  double threshold = kDefaultDegeneracyThreshold;
};

int cmd_variance(const VarianceArgs& a) {
  const TestFunction phi = parse_function_spec(a.spec);
  VarianceResult r;
  bool converged = true;
  if (a.order) {
    r = clt_variance(phi, QuadratureRule::gauss_chebyshev(*a.order), a.threshold);
  } else {
    const auto ad = clt_variance_adaptive(phi, a.threshold);
    r = ad.result;
    converged = ad.converged;
  }
  std::printf("function            %s\n", phi.to_spec().c_str());
  std::printf("condition_integral  %s\n", format_double(r.condition_integral).c_str());
  std::printf("variance            %s\n", format_double(r.variance).c_str());
  std::printf("degenerate          %s\n", r.degenerate ? "true" : "false");
  std::printf("quadrature_order    %d%s\n", r.order, converged ? "" : " (not converged)");
  if (!converged) std::fprintf(stderr, "warning: quadrature did not converge by N = %d\n", r.order);

  nlohmann::json j = {{"function", phi.to_spec()},
                      {"condition_integral", r.condition_integral},
                      {"variance", r.variance},
                      {"degenerate", r.degenerate},
                      {"quadrature_order", r.order},
                      {"quadrature_converged", converged}};
  if (a.s) {
    const SobolevNorm norm = sobolev_norm(phi, *a.s);
    std::printf("sobolev_norm        %s (s = %s)\n", format_double(norm.value).c_str(),
                format_double(norm.s).c_str());
    const bool windowed = phi.has_polynomial_part();
    std::printf("transform_window    %s\n",
                windowed ? "smooth cutoff, 1 on [-3,3], 0 outside [-4,4]" : "none");
    j["sobolev_norm"] = {{"s", norm.s}, {"value", norm.value}, {"windowed", windowed}};
  }
  if (!a.json_path.empty()) write_file(a.json_path, dump_json(j));
  if (a.strict && r.degenerate) return kExitDegenerate;
  return kExitOk;
}

int cmd_clt_run(const std::string& config_path, const std::string& out_dir,
                const std::optional<unsigned>& workers_flag) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = experiment_from_json(load_json_file(config_path));
  const unsigned workers = resolve_workers(workers_flag);
  fs::create_directories(out_dir);

  RunManifest manifest;
  manifest.config = experiment_to_json(cfg);
  manifest.seed = cfg.ensemble.seed;
  manifest.workers = workers;
  int code = kExitOk;
  try {
    const CltReport report = run_experiment(cfg, ExecutionOptions{workers});
    write_file(fs::path(out_dir) / "report.json", dump_json(report_to_json(report)));
    write_file(fs::path(out_dir) / "samples.csv", samples_csv(report, cfg));
    manifest.criteria = report.criteria;
    for (const auto& c : report.criteria)
      std::printf("[%s] %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str());
    for (const auto& f : report.functions)
      if (f.degenerate)
        std::printf("[INFO] %s: degenerate (I = %s), Gaussian comparison refused\n", f.name.c_str(),
                    format_double(f.condition_integral).c_str());
    code = report.all_pass() ? kExitOk : kExitNumeric;
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    manifest.error = e.what();
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  manifest.exit_code = code;
  manifest.wall_seconds = seconds_since(t0);
  write_file(fs::path(out_dir) / "manifest.json", dump_json(manifest_to_json(manifest)));
  return code;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path,
              const std::optional<unsigned>& workers_flag) {
  const SweepConfig cfg = sweep_from_json(load_json_file(config_path));
  const unsigned workers = resolve_workers(workers_flag);
  const SweepResult result = variance_bound_check(cfg, ExecutionOptions{workers});
  const std::string csv = sweep_csv(result);
  if (out_path.empty())
    std::fputs(csv.c_str(), stdout);
  else
    write_file(out_path, csv);
  for (const auto& s : result.sobolev)
    std::fprintf(stderr, "sobolev %s n=%zu: (p/n)Var = %s <= %s : %s\n", s.name.c_str(), s.n,
                 format_double(s.rescaled_variance).c_str(), format_double(s.bound).c_str(),
                 s.pass ? "ok" : "VIOLATED");
  std::fprintf(stderr, "largest n closest to kernel: %s\n", result.largest_n_closest ? "yes" : "no");
  return result.all_within_envelope() ? kExitOk : kExitNumeric;
}

int cmd_semicircle(const std::string& config_path, const std::optional<unsigned>& workers_flag) {
  const ExperimentConfig cfg = experiment_from_json(load_json_file(config_path));
  const unsigned workers = resolve_workers(workers_flag);
  const auto spectra = sample_spectra(cfg.ensemble, cfg.replicas, ExecutionOptions{workers});
  const double ks = semicircle_check(spectra);
  std::printf("ks_distance %s\n", format_double(ks).c_str());
  std::printf("bin_center,empirical_density,semicircle_density\n");
  for (const auto& b : spectral_histogram(spectra, 64))
    std::printf("%s,%s,%s\n", format_double(b.center).c_str(),
                format_double(b.empirical_density).c_str(), format_double(b.semicircle_density).c_str());
  return ks < cfg.tolerances.semicircle_ks_max ? kExitOk : kExitNumeric;
}

int cmd_kernel_check(const std::string& config_path, const std::optional<unsigned>& workers_flag) {
  ExperimentConfig cfg = experiment_from_json(load_json_file(config_path));
  cfg.statistics.kernel = true;
  cfg.statistics.clt = false;
  cfg.statistics.semicircle = false;
  const unsigned workers = resolve_workers(workers_flag);
  const CltReport report = run_experiment(cfg, ExecutionOptions{workers});
  std::printf("z1,z2,empirical_re,empirical_im,predicted_re,predicted_im,ratio_re,gated,pass\n");
  bool ok = true;
  for (const auto& k : report.kernels) {
    auto pt = [](const KernelArg& a) {
      return format_double(a.z.re()) + (a.conjugate ? "-" : "+") + format_double(a.z.im()) + "i";
    };
    std::printf("%s,%s,%s,%s,%s,%s,%s,%s,%s\n", pt(k.z1).c_str(), pt(k.z2).c_str(),
                format_double(k.check.empirical.real()).c_str(),
                format_double(k.check.empirical.imag()).c_str(),
                format_double(k.check.predicted.real()).c_str(),
                format_double(k.check.predicted.imag()).c_str(),
                format_double(k.check.ratio.real()).c_str(), k.gated ? "true" : "false",
                k.pass ? "true" : "false");
    ok = ok && k.pass;
  }
  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for linear eigenvalue statistics of dilute random graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  VarianceArgs va;
  auto* variance = app.add_subcommand("variance", "Limiting CLT variance V[phi] of a test function");
  variance->add_option("--fn", va.spec, "Function spec, e.g. \"0.5*chebyshev:2+monomial:4\"")->required();
  variance->add_option("--s", va.s, "Also report the Sobolev norm ||phi||_s");
  variance->add_option("--order", va.order, "Fixed Gauss-Chebyshev order (default: adaptive)")
      ->check(CLI::Range(1, kMaxQuadratureOrder));
  variance->add_option("--threshold", va.threshold, "Degeneracy threshold on |I[phi]|");
  variance->add_flag("--strict", va.strict, "Exit 2 when the function is degenerate");
  variance->add_option("--json", va.json_path, "Also write the result as JSON");

  std::string config_path, out_dir, out_path;
  std::optional<unsigned> workers;

  auto* clt = app.add_subcommand("clt-run", "Run a CLT experiment and write report.json, samples.csv, manifest.json");
  clt->add_option("config", config_path, "Experiment config (JSON)")->required();
  clt->add_option("--out", out_dir, "Output directory")->required();
  clt->add_option("--workers", workers, "Worker threads (overrides DILUTE_CLT_WORKERS)");

  auto* sweep = app.add_subcommand("sweep", "Variance-bound sweep over n; CSV to stdout or --out");
  sweep->add_option("config", config_path, "Sweep config (JSON)")->required();
  sweep->add_option("--out", out_path, "CSV output file");
  sweep->add_option("--workers", workers, "Worker threads (overrides DILUTE_CLT_WORKERS)");

  auto* semi = app.add_subcommand("semicircle", "Pooled KS distance to the semicircle law and a histogram");
  semi->add_option("config", config_path, "Experiment config (JSON)")->required();
  semi->add_option("--workers", workers, "Worker threads (overrides DILUTE_CLT_WORKERS)");

  auto* kern = app.add_subcommand("kernel-check", "Resolvent covariance against the limiting kernel");
  kern->add_option("config", config_path, "Experiment config (JSON)")->required();
  kern->add_option("--workers", workers, "Worker threads (overrides DILUTE_CLT_WORKERS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*variance) return cmd_variance(va);
    if (*clt) return cmd_clt_run(config_path, out_dir, workers);
    if (*sweep) return cmd_sweep(config_path, out_path, workers);
    if (*semi) return cmd_semicircle(config_path, workers);
    if (*kern) return cmd_kernel_check(config_path, workers);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n  partial sum %s, last increment %s\n", e.what(),
                 format_double(e.partial_sum()).c_str(), format_double(e.last_increment()).c_str());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return kExitUsage;
}
