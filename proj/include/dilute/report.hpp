#pragma once

#include <string>

#include "json.hpp"

#include "dilute/config.hpp"
#include "dilute/harness.hpp"

namespace dilute {

inline constexpr std::string_view kReportSchema = "dilute-clt/report/1";
inline constexpr std::string_view kManifestSchema = "dilute-clt/manifest/1";
inline constexpr std::string_view kToolVersion = "1.0.0";

/// %.17g.
std::string format_double(double x);

/// Full report. Contains nothing that depends on worker count or timing.
nlohmann::json report_to_json(const CltReport& report);

/// Header "replica,<function names...>,re_gamma_<j>,im_gamma_<j>,..." then one row per
/// replica with the raw linear statistics and traces. LF line endings, 17 digits.
std::string samples_csv(const CltReport& report, const ExperimentConfig& cfg);

/// Columns n,p,rescaled_variance,kernel_prediction,ratio.
std::string sweep_csv(const SweepResult& result);

struct RunManifest {
  nlohmann::json config;
  std::string tool_version{kToolVersion};
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  unsigned workers = 1;
  std::vector<Criterion> criteria;
  int exit_code = 0;
  std::string error;
};

nlohmann::json manifest_to_json(const RunManifest& m);

/// Dumps with two-space indentation and a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace dilute
