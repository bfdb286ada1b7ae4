#include "dilute/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace dilute {

using nlohmann::json;

namespace {

json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json kernel_arg_json(const KernelArg& a) {
  return {{"re", a.z.re()}, {"im", a.conjugate ? -a.z.im() : a.z.im()}};
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json report_to_json(const CltReport& r) {
  json j;
  j["schema"] = kReportSchema;
  j["ensemble"] = {{"n", r.ensemble.n},
                   {"p", r.ensemble.p},
                   {"kind", std::string(to_string(r.ensemble.kind))},
                   {"seed", r.ensemble.seed}};
  j["replicas"] = r.replicas;
  j["scaling"] = r.scaling == FluctuationScaling::Dilute ? "dilute" : "unscaled";
  j["rescaling_factor"] = r.rescaling_factor;
  j["centering"] = "across-replica sample mean (one degree of freedom used)";
  j["variance_pass"] = r.variance_pass();
  j["all_pass"] = r.all_pass();

  json fns = json::array();
  for (const auto& f : r.functions) {
    json cf = json::array();
    for (std::size_t g = 0; g < f.char_values.size(); ++g) {
      json point = complex_json(f.char_values[g]);
      point["x"] = f.char_grid[g];
      point["gaussian"] = std::exp(-0.5 * f.char_grid[g] * f.char_grid[g] * f.theoretical_variance);
      cf.push_back(point);
    }
    json fj = {{"name", f.name},
               {"spec", f.spec},
               {"windowed_for_transforms", f.windowed},
               {"target", f.target},
               {"condition_integral", f.condition_integral},
               {"theoretical_variance", f.theoretical_variance},
               {"degenerate", f.degenerate},
               {"quadrature_converged", f.quadrature_converged},
               {"sample_mean", f.sample_mean},
               {"empirical_variance", f.empirical_variance},
               {"skewness", f.skewness},
               {"excess_kurtosis", f.excess_kurtosis},
               {"ks_statistic", optional_json(f.ks_statistic)},
               {"ks_p_value", optional_json(f.ks_p_value)},
               {"gaussian_comparison", f.degenerate ? "refused: condition integral vanishes"
                                                    : "performed"},
               {"variance_bracket", {f.variance_lo, f.variance_hi}},
               {"variance_pass", f.variance_pass},
               {"skew_pass", f.skew_pass},
               {"kurtosis_pass", f.kurtosis_pass},
               {"ks_pass", f.ks_pass},
               {"char_pass", f.char_pass},
               {"char_function", cf},
               {"samples", f.samples}};
    if (f.wigner_variance_raw) fj["wigner_variance_raw_kappa4"] = *f.wigner_variance_raw;
    fns.push_back(std::move(fj));
  }
  j["functions"] = fns;

  json ks = json::array();
  for (const auto& k : r.kernels) {
    ks.push_back({{"z1", kernel_arg_json(k.z1)},
                  {"z2", kernel_arg_json(k.z2)},
                  {"empirical", complex_json(k.check.empirical)},
                  {"predicted", complex_json(k.check.predicted)},
                  {"ratio", complex_json(k.check.ratio)},
                  {"gated", k.gated},
                  {"pass", k.pass}});
  }
  j["kernels"] = ks;
  j["semicircle_ks"] = optional_json(r.semicircle_ks);

  json crit = json::array();
  for (const auto& c : r.criteria) crit.push_back({{"name", c.name}, {"pass", c.pass}});
  j["criteria"] = crit;

  json reps = json::array();
  for (const auto& rr : r.replica_results)
    reps.push_back({{"index", rr.index},
                    {"spectrum_min", rr.spectrum_min},
                    {"spectrum_max", rr.spectrum_max},
                    {"semicircle_ks", rr.semicircle_ks}});
  j["replica_summary"] = reps;
  return j;
}

std::string samples_csv(const CltReport& report, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "replica";
  for (const auto& f : cfg.test_functions) {
    std::string name = f.name;
    for (char& c : name)
      if (c == ',' || c == '\n' || c == '"') c = '_';
    out << ',' << name;
  }
  for (std::size_t j = 0; j < cfg.resolvent_points.size(); ++j)
    out << ",re_gamma_" << j << ",im_gamma_" << j;
  out << '\n';
  for (const auto& r : report.replica_results) {
    out << r.index;
    for (double s : r.statistics) out << ',' << format_double(s);
    for (const auto& t : r.traces) out << ',' << format_double(t.real()) << ',' << format_double(t.imag());
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "n,p,rescaled_variance,kernel_prediction,ratio\n";
  for (const auto& row : result.rows)
    out << row.n << ',' << format_double(row.p) << ',' << format_double(row.rescaled_variance) << ','
        << format_double(row.kernel_prediction) << ',' << format_double(row.ratio) << '\n';
  return out.str();
}

json manifest_to_json(const RunManifest& m) {
  json crit = json::array();
  for (const auto& c : m.criteria) crit.push_back({{"name", c.name}, {"pass", c.pass}});
  json j = {{"schema", kManifestSchema},
            {"tool_version", m.tool_version},
            {"config", m.config},
            {"master_seed", m.seed},
            {"wall_clock_seconds", m.wall_seconds},
            {"workers", m.workers},
            {"criteria", crit},
            {"exit_code", m.exit_code}};
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace dilute
