#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBinary = DILUTE_CLT_BINARY;
const fs::path kConfigs = DILUTE_CONFIG_DIR;

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = kBinary + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) o.out.append(buf, n);
  const int status = ::pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("dilute_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(path / file) << text;
    return path / file;
  }
};

}  // namespace

TEST_CASE("help and version") {
  CHECK(run("--help").code == 0);
  const Outcome v = run("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find("1.0.0") != std::string::npos);
  CHECK(run("").code == 64);
  CHECK(run("no-such-command").code == 64);
}

TEST_CASE("variance subcommand") {
  const Outcome ok = run("variance --fn monomial:2");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("variance            1.99999999999999") != std::string::npos);
  CHECK(ok.out.find("degenerate          false") != std::string::npos);
  CHECK(run("variance --fn chebyshev:3").code == 0);
  CHECK(run("variance --fn chebyshev:3 --strict").code == 2);
  CHECK(run("variance --fn monomial:1 --strict").code == 2);
  CHECK(run("variance --fn 'chebyshev:2(' ").code == 64);
  CHECK(run("variance --fn 'cosh:1(monomial:2)' --s 1").code == 64);

  TempDir dir("variance");
  CHECK(run("variance --fn chebyshev:2 --json " + (dir.path / "v.json").string()).code == 0);
  const json j = json::parse(slurp(dir.path / "v.json"));
  CHECK(j["variance"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j["degenerate"] == false);
}

TEST_CASE("clt-run writes a reproducible run directory") {
  TempDir a("clt_a"), b("clt_b");
  const std::string cfg = (kConfigs / "minimal.json").string();
  REQUIRE(run("clt-run " + cfg + " --out " + a.path.string() + " --workers 1").code == 0);
  REQUIRE(run("clt-run " + cfg + " --out " + b.path.string() + " --workers 8").code == 0);
  for (const char* f : {"report.json", "samples.csv", "manifest.json"}) CHECK(fs::exists(a.path / f));
  CHECK(slurp(a.path / "report.json") == slurp(b.path / "report.json"));
  CHECK(slurp(a.path / "samples.csv") == slurp(b.path / "samples.csv"));

  const std::string csv = slurp(a.path / "samples.csv");
  std::size_t rows = 0;
  for (char c : csv) rows += c == '\n';
  CHECK(rows == 31);
  CHECK(csv.find('\r') == std::string::npos);

  const json m = json::parse(slurp(a.path / "manifest.json"));
  CHECK(m["workers"] == 1);
  CHECK(m["exit_code"] == 0);
  CHECK(m["master_seed"] == 1);
  CHECK(json::parse(slurp(b.path / "manifest.json"))["workers"] == 8);
}

TEST_CASE("configuration errors exit 64") {
  TempDir dir("bad");
  const auto malformed = dir.write("malformed.json", "{");
  const auto few = dir.write("few.json", R"({"schema": "dilute-clt/experiment/1",
    "ensemble": {"n": 100, "p": 10, "seed": 1}, "replicas": 5, "test_functions": ["monomial:2"]})");
  CHECK(run("clt-run " + malformed.string() + " --out " + (dir.path / "o").string()).code == 64);
  CHECK(run("clt-run " + few.string() + " --out " + (dir.path / "o").string()).code == 64);
  CHECK(run("clt-run " + (dir.path / "absent.json").string() + " --out " + (dir.path / "o").string()).code == 64);

  const auto empty_grid = dir.write("sweep0.json", R"({"schema": "dilute-clt/sweep/1", "n_grid": [], "theta": 0.5, "seed": 1})");
  const auto dense = dir.write("sweep1.json", R"({"schema": "dilute-clt/sweep/1", "n_grid": [200], "theta": 1.0, "seed": 1})");
  CHECK(run("sweep " + empty_grid.string()).code == 64);
  CHECK(run("sweep " + dense.string()).code == 64);
}

TEST_CASE("sweep and kernel-check output") {
  TempDir dir("sweep");
  const auto cfg = dir.write("s.json", R"({"schema": "dilute-clt/sweep/1", "n_grid": [100, 144], "theta": 0.5,
    "z": [0, 2], "replicas": 20, "seed": 3})");
  const Outcome s = run("sweep " + cfg.string() + " --workers 2");
  CHECK((s.code == 0 || s.code == 65));
  CHECK(s.out.rfind("n,p,rescaled_variance,kernel_prediction,ratio\n100,10,", 0) == 0);
  CHECK(s.out.find("\n144,12,") != std::string::npos);

  const auto kc = dir.write("k.json", R"({"schema": "dilute-clt/experiment/1",
    "ensemble": {"n": 100, "p": 10, "seed": 2}, "replicas": 100, "resolvent_points": [[0, 2]],
    "statistics": {"clt": false, "kernel": true}})");
  const Outcome k = run("kernel-check " + kc.string() + " --workers 2");
  CHECK((k.code == 0 || k.code == 65));
  CHECK(k.out.find(",0.0073593128807") != std::string::npos);
}

TEST_CASE("semicircle subcommand on the zero ensemble") {
  TempDir dir("semi");
  const auto zero = dir.write("zero.json", R"({"schema": "dilute-clt/experiment/1",
    "ensemble": {"n": 2, "p": 2, "seed": 0}, "replicas": 3, "statistics": {"clt": false}})");
  const Outcome o = run("semicircle " + zero.string());
  CHECK(o.code == 65);
  CHECK(o.out.rfind("ks_distance 0.5\n", 0) == 0);
}
