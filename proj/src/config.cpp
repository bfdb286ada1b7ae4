#include "dilute/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dilute/errors.hpp"

namespace dilute {

using nlohmann::json;

namespace {

class SpecParser {
public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  TestFunction parse() {
    TestFunction f = spec();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return f;
  }

private:
  TestFunction spec() {
    TestFunction f = term();
    for (;;) {
      skip_ws();
      if (eat('+')) {
        f = f + term();
      } else if (eat('-')) {
        f = f - term();
      } else {
        return f;
      }
    }
  }

  TestFunction term() {
    skip_ws();
    double weight = 1.0;
    if (pos_ + 1 < text_.size() && text_[pos_] == '-' &&
        std::isalpha(static_cast<unsigned char>(text_[pos_ + 1]))) {
      ++pos_;
      return -1.0 * atom();
    }
    if (pos_ < text_.size() && !std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      weight = number();
      skip_ws();
      if (!eat('*')) fail("expected '*' after weight");
    }
    return weight * atom();
  }

  TestFunction atom() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name.empty()) fail("expected a family name");
    skip_ws();
    if (!eat(':')) fail("expected ':' after '" + name + "'");
    std::vector<double> params{number()};
    skip_ws();
    while (eat(',')) {
      params.push_back(number());
      skip_ws();
    }
    std::optional<TestFunction> base;
    if (eat('(')) {
      base = spec();
      skip_ws();
      if (!eat(')')) fail("expected ')'");
    }
    return build(name, params, base);
  }

  TestFunction build(const std::string& name, const std::vector<double>& params,
                     const std::optional<TestFunction>& base) {
    try {
      return build_atom(name, params, base);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  double number() {
    skip_ws();
    double v = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    if (pos_ < text_.size() && text_[pos_] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || !std::isfinite(v)) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("function spec '" + std::string(text_) + "' at offset " +
                      std::to_string(pos_) + ": " + what);
  }

public:
  static TestFunction build_atom(const std::string& name, const std::vector<double>& params,
                                 const std::optional<TestFunction>& base) {
    auto want = [&](std::size_t count) {
      if (params.size() != count)
        throw ConfigError("family '" + name + "' takes " + std::to_string(count) +
                          " parameter(s), got " + std::to_string(params.size()));
    };
    auto degree = [&]() {
      const double d = params[0];
      if (d < 0.0 || d != std::floor(d) || d > 1e6)
        throw ConfigError("family '" + name + "' needs a non-negative integer degree");
      return static_cast<int>(d);
    };
    auto no_base = [&]() {
      if (base) throw ConfigError("family '" + name + "' takes no base function");
    };
    auto need_base = [&]() -> const TestFunction& {
      if (!base) throw ConfigError("family '" + name + "' needs a base function in parentheses");
      return *base;
    };
    if (name == "chebyshev") {
      want(1), no_base();
      return TestFunction::chebyshev(degree());
    }
    if (name == "monomial") {
      want(1), no_base();
      return TestFunction::monomial(degree());
    }
    if (name == "gauss") {
      want(2), no_base();
      return TestFunction::gaussian(params[0], params[1]);
    }
    if (name == "cosh") {
      want(1);
      return TestFunction::cosh_weighted(params[0], need_base());
    }
    if (name == "poisson") {
      want(1);
      return poisson_smooth(need_base(), params[0]);
    }
    if (name == "resolvent_re") {
      want(2), no_base();
      return TestFunction::resolvent_re(ComplexPoint(params[0], params[1]));
    }
    if (name == "resolvent_im") {
      want(2), no_base();
      return TestFunction::resolvent_im(ComplexPoint(params[0], params[1]));
    }
    throw ConfigError("unknown function family '" + name + "'");
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
  return get_or<T>(j, key, T{});
}

void check_schema(const json& j, std::string_view expected) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto schema = require<std::string>(j, "schema");
  if (schema != expected)
    throw ConfigError("unsupported schema '" + schema + "' (expected '" + std::string(expected) + "')");
}

ComplexPoint point_from_json(const json& j) {
  try {
    if (j.is_array() && j.size() == 2) return ComplexPoint(j[0].get<double>(), j[1].get<double>());
    if (j.is_object()) return ComplexPoint(j.at("re").get<double>(), j.at("im").get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("resolvent point: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("resolvent point must be [re, im] or {re, im}");
}

std::vector<NamedFunction> functions_from_json(const json& arr) {
  if (!arr.is_array()) throw ConfigError("test_functions must be an array");
  std::vector<NamedFunction> out;
  for (const json& item : arr) {
    NamedFunction nf;
    if (item.is_string()) {
      nf.function = parse_function_spec(item.get<std::string>());
      nf.name = item.get<std::string>();
    } else if (item.is_object()) {
      if (item.contains("spec"))
        nf.function = parse_function_spec(require<std::string>(item, "spec"));
      else if (item.contains("terms"))
        nf.function = function_from_record(item.at("terms"));
      else
        throw ConfigError("test function needs 'spec' or 'terms'");
      nf.name = get_or<std::string>(item, "name", nf.function.to_spec());
      if (item.contains("variance_rel_tol")) nf.variance_rel_tol = item.at("variance_rel_tol").get<double>();
    } else {
      throw ConfigError("test function must be a spec string or an object");
    }
    out.push_back(std::move(nf));
  }
  return out;
}

json functions_to_json(const std::vector<NamedFunction>& fs) {
  json arr = json::array();
  for (const auto& f : fs) {
    json item = {{"name", f.name}, {"terms", function_to_record(f.function)}};
    if (f.variance_rel_tol) item["variance_rel_tol"] = *f.variance_rel_tol;
    arr.push_back(std::move(item));
  }
  return arr;
}

}  // namespace

TestFunction parse_function_spec(std::string_view spec) { return SpecParser(spec).parse(); }

json function_to_record(const TestFunction& f) {
  json arr = json::array();
  for (const Term& t : f.terms()) {
    json rec;
    rec["weight"] = t.weight;
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, family::Chebyshev>) {
            rec["family"] = "chebyshev";
            rec["parameters"] = {a.degree};
          } else if constexpr (std::is_same_v<A, family::Monomial>) {
            rec["family"] = "monomial";
            rec["parameters"] = {a.degree};
          } else if constexpr (std::is_same_v<A, family::GaussianBump>) {
            rec["family"] = "gauss";
            rec["parameters"] = {a.center, a.width};
          } else if constexpr (std::is_same_v<A, family::CoshWeighted>) {
            rec["family"] = "cosh";
            rec["parameters"] = {a.rate};
            rec["base"] = function_to_record(*a.base);
          } else if constexpr (std::is_same_v<A, family::PoissonSmoothed>) {
            rec["family"] = "poisson";
            rec["parameters"] = {a.eta};
            rec["base"] = function_to_record(*a.base);
          } else if constexpr (std::is_same_v<A, family::ResolventRe>) {
            rec["family"] = "resolvent_re";
            rec["parameters"] = {a.z.re(), a.z.im()};
          } else {
            rec["family"] = "resolvent_im";
            rec["parameters"] = {a.z.re(), a.z.im()};
          }
        },
        t.atom);
    arr.push_back(std::move(rec));
  }
  return arr;
}

TestFunction function_from_record(const json& j) {
  if (j.is_string()) return parse_function_spec(j.get<std::string>());
  if (j.is_object()) return function_from_record(json::array({j}));
  if (!j.is_array()) throw ConfigError("function record must be a string, object or array");
  TestFunction f;
  for (const json& rec : j) {
    if (!rec.is_object()) throw ConfigError("function term must be an object");
    const auto name = require<std::string>(rec, "family");
    const auto params = get_or<std::vector<double>>(rec, "parameters", {});
    const double weight = get_or<double>(rec, "weight", 1.0);
    std::optional<TestFunction> base;
    if (rec.contains("base")) base = function_from_record(rec.at("base"));
    try {
      f = f + weight * SpecParser::build_atom(name, params, base);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("function term '" + name + "': " + e.what());
    }
  }
  return f;
}

ExperimentConfig experiment_from_json(const json& j) {
  check_schema(j, kExperimentSchema);
  ExperimentConfig cfg;
  try {
    const json& e = j.at("ensemble");
    cfg.ensemble.n = require<std::size_t>(e, "n");
    cfg.ensemble.p = require<double>(e, "p");
    cfg.ensemble.kind = parse_ensemble_kind(get_or<std::string>(e, "kind", "diluted"));
    cfg.ensemble.seed = require<std::uint64_t>(e, "seed");
    cfg.replicas = require<std::size_t>(j, "replicas");
    const auto scaling = get_or<std::string>(j, "scaling", "dilute");
    if (scaling == "dilute")
      cfg.scaling = FluctuationScaling::Dilute;
    else if (scaling == "unscaled")
      cfg.scaling = FluctuationScaling::Unscaled;
    else
      throw ConfigError("scaling must be 'dilute' or 'unscaled'");
    if (j.contains("test_functions")) cfg.test_functions = functions_from_json(j.at("test_functions"));
    if (j.contains("resolvent_points"))
      for (const json& p : j.at("resolvent_points")) cfg.resolvent_points.push_back(point_from_json(p));
    if (j.contains("statistics")) {
      const json& s = j.at("statistics");
      cfg.statistics.clt = get_or<bool>(s, "clt", cfg.statistics.clt);
      cfg.statistics.kernel = get_or<bool>(s, "kernel", cfg.statistics.kernel);
      cfg.statistics.semicircle = get_or<bool>(s, "semicircle", cfg.statistics.semicircle);
      cfg.statistics.variance_bound = get_or<bool>(s, "variance_bound", cfg.statistics.variance_bound);
      cfg.statistics.char_function = get_or<bool>(s, "char_function", cfg.statistics.char_function);
    }
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      Tolerances& tol = cfg.tolerances;
      tol.variance_rel_tol = get_or<double>(t, "variance_rel_tol", tol.variance_rel_tol);
      if (t.contains("skew_max")) tol.skew_max = t.at("skew_max").get<double>();
      if (t.contains("kurtosis_max")) tol.kurtosis_max = t.at("kurtosis_max").get<double>();
      tol.ks_alpha = get_or<double>(t, "ks_alpha", tol.ks_alpha);
      if (t.contains("char_tol")) tol.char_tol = t.at("char_tol").get<double>();
      tol.kernel_ratio_lo = get_or<double>(t, "kernel_ratio_lo", tol.kernel_ratio_lo);
      tol.kernel_ratio_hi = get_or<double>(t, "kernel_ratio_hi", tol.kernel_ratio_hi);
      tol.semicircle_ks_max = get_or<double>(t, "semicircle_ks_max", tol.semicircle_ks_max);
      tol.degeneracy_threshold = get_or<double>(t, "degeneracy_threshold", tol.degeneracy_threshold);
    }
    if (j.contains("char_grid")) cfg.char_grid = j.at("char_grid").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

json experiment_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema"] = kExperimentSchema;
  j["ensemble"] = {{"n", cfg.ensemble.n},
                   {"p", cfg.ensemble.p},
                   {"kind", std::string(to_string(cfg.ensemble.kind))},
                   {"seed", cfg.ensemble.seed}};
  j["replicas"] = cfg.replicas;
  j["scaling"] = cfg.scaling == FluctuationScaling::Dilute ? "dilute" : "unscaled";
  j["test_functions"] = functions_to_json(cfg.test_functions);
  json pts = json::array();
  for (const auto& z : cfg.resolvent_points) pts.push_back({z.re(), z.im()});
  j["resolvent_points"] = pts;
  j["statistics"] = {{"clt", cfg.statistics.clt},
                     {"kernel", cfg.statistics.kernel},
                     {"semicircle", cfg.statistics.semicircle},
                     {"variance_bound", cfg.statistics.variance_bound},
                     {"char_function", cfg.statistics.char_function}};
  const Tolerances& t = cfg.tolerances;
  json tol = {{"variance_rel_tol", t.variance_rel_tol},
              {"ks_alpha", t.ks_alpha},
              {"kernel_ratio_lo", t.kernel_ratio_lo},
              {"kernel_ratio_hi", t.kernel_ratio_hi},
              {"semicircle_ks_max", t.semicircle_ks_max},
              {"degeneracy_threshold", t.degeneracy_threshold}};
  if (t.skew_max) tol["skew_max"] = *t.skew_max;
  if (t.kurtosis_max) tol["kurtosis_max"] = *t.kurtosis_max;
  if (t.char_tol) tol["char_tol"] = *t.char_tol;
  j["tolerances"] = tol;
  j["char_grid"] = cfg.char_grid;
  return j;
}

SweepConfig sweep_from_json(const json& j) {
  check_schema(j, kSweepSchema);
  SweepConfig cfg;
  try {
    cfg.n_grid = require<std::vector<std::size_t>>(j, "n_grid");
    cfg.theta = require<double>(j, "theta");
    if (j.contains("z")) cfg.z = point_from_json(j.at("z"));
    cfg.replicas = get_or<std::size_t>(j, "replicas", cfg.replicas);
    cfg.seed = require<std::uint64_t>(j, "seed");
    cfg.envelope = get_or<double>(j, "envelope", cfg.envelope);
    if (j.contains("sobolev_functions")) cfg.sobolev_functions = functions_from_json(j.at("sobolev_functions"));
    cfg.sobolev_s = get_or<double>(j, "sobolev_s", cfg.sobolev_s);
    cfg.sobolev_envelope = get_or<double>(j, "sobolev_envelope", cfg.sobolev_envelope);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json sweep_to_json(const SweepConfig& cfg) {
  return {{"schema", kSweepSchema},
          {"n_grid", cfg.n_grid},
          {"theta", cfg.theta},
          {"z", {cfg.z.re(), cfg.z.im()}},
          {"replicas", cfg.replicas},
          {"seed", cfg.seed},
          {"envelope", cfg.envelope},
          {"sobolev_functions", functions_to_json(cfg.sobolev_functions)},
          {"sobolev_s", cfg.sobolev_s},
          {"sobolev_envelope", cfg.sobolev_envelope}};
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace dilute
