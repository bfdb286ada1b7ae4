#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "dilute/harness.hpp"
#include "dilute/testfn.hpp"

namespace dilute {

inline constexpr std::string_view kExperimentSchema = "dilute-clt/experiment/1";
inline constexpr std::string_view kSweepSchema = "dilute-clt/sweep/1";

/// Parses the command-line mini-grammar
///
///   spec := term (('+' | '-') term)*
///   term := [number '*'] atom
///   atom := family ':' number (',' number)* ['(' spec ')']
///
/// with families chebyshev:k, monomial:k, gauss:center,width, cosh:rate(base),
/// poisson:eta(base), resolvent_re:x,y and resolvent_im:x,y.
/// Example: "0.5*chebyshev:2+1.0*monomial:4". Throws ConfigError.
TestFunction parse_function_spec(std::string_view spec);

/// Term records [{family, parameters, weight, base?}, ...].
nlohmann::json function_to_record(const TestFunction& f);
/// Accepts a spec string, a single term record or an array of term records.
TestFunction function_from_record(const nlohmann::json& j);

ExperimentConfig experiment_from_json(const nlohmann::json& j);
/// Canonical snapshot; experiment_from_json(experiment_to_json(c)) reproduces c.
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

SweepConfig sweep_from_json(const nlohmann::json& j);
nlohmann::json sweep_to_json(const SweepConfig& cfg);

/// Reads and parses a JSON file; ConfigError when unreadable or malformed.
nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace dilute
