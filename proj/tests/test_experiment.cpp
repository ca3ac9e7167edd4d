#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "anderson/error.hpp"
#include "anderson/experiment.hpp"

using namespace anderson;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("anderson_lab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

RunResult run(const std::string& cmd, const std::string& cfg, const fs::path& out,
              unsigned workers = 1) {
  RunOptions o;
  o.out_dir = out.string();
  o.workers = workers;
  return run_command(cmd, ExperimentConfig::parse(cfg, out.string()), o);
}

const char* kSquare = R"(
seed = 3
[domain]
type = rectangle
width = 1
height = 1
)";

}  // namespace

TEST_CASE("config parsing") {
  const auto c = ExperimentConfig::parse(
      "seed = 9\n# comment\n[trace]\nt = 0.01, 0.02 0.04\nkappa = 1\nflag = yes\n; other\n"
      "[domain]\ntype = disk\nradius = 2\n");
  CHECK(c.integer_or("run", "seed", 0) == 9);
  CHECK(c.numbers("trace", "t") == std::vector<double>{0.01, 0.02, 0.04});
  CHECK(c.flag_or("trace", "flag", false));
  CHECK(c.number_or("trace", "missing", 4.5) == 4.5);
  CHECK(c.domain().area() == doctest::Approx(4 * 3.141592653589793));
  CHECK(c.canonical("trace") == "flag=yes;kappa=1;t=0.01, 0.02 0.04;");
  CHECK_THROWS_AS(c.get("trace", "nope"), Error);
  const auto bad = ExperimentConfig::parse("[trace]\nt = 0.01x\nn = 1.5\n");
  CHECK_THROWS_AS(bad.numbers("trace", "t"), Error);
  CHECK_THROWS_AS(bad.integer_or("trace", "n", 1), Error);
  CHECK_THROWS_AS(ExperimentConfig::parse("[a]\nb = 1\n[a]\nc = 2\n"), Error);
  CHECK_THROWS_AS(ExperimentConfig::parse("[domain]\ntype = hexagon\n").domain(), Error);
}

TEST_CASE("silt-validate") {
  const auto out = scratch("silt");
  SUBCASE("passing run writes the documented columns") {
    const auto r = run("silt-validate",
                       "[silt-validate]\nt = 0.05\neps = 0.001\nkinds = motion\n"
                       "n_paths = 400\nn_steps = 512\n",
                       out);
    CHECK(r.exit_code == 0);
    const auto csv = read_csv((out / "silt_validate.csv").string());
    CHECK(csv.header.at("schema") == kCsvSchema);
    CHECK(csv.columns == std::vector<std::string>{"t", "eps", "kind", "region", "n_paths", "n_steps",
                                                  "mc_mean", "mc_se", "exact_mean", "discrete_mean",
                                                  "asymptotic_mean", "pass"});
    REQUIRE(csv.rows.size() == 1);
    CHECK(std::stod(csv.rows[0][csv.column("exact_mean")]) == doctest::Approx(0.0239566).epsilon(1e-6));
  }
  SUBCASE("empty region is rejected at parse") {
    const auto r = run("silt-validate",
                       "[silt-validate]\nt = 0.05\neps = 0.001\nregions = diag:0.01:0.01\n", out);
    CHECK(r.exit_code == 1);
    CHECK_FALSE(fs::exists(out / "silt_validate.csv"));
  }
}

TEST_CASE("trace and mass") {
  const auto out = scratch("trace");
  const std::string cfg = std::string(kSquare) +
                          "[trace]\nt = 0.01 0.02\nkappa = 0 1\nn_outer = 3000\nn_steps = 128\n"
                          "control_variate = false\n"
                          "[mass]\nt = 0.001\nkappa = 0\nn_outer = 2000\nn_steps = 64\n";
  const auto r = run("trace", cfg, out);
  CHECK(r.exit_code == 0);
  const auto csv = read_csv((out / "trace.csv").string());
  CHECK(csv.columns == std::vector<std::string>{"t", "kappa", "estimate", "std_error", "prefactor",
                                                "n_outer", "n_steps", "eps", "overflow_count",
                                                "reference", "ref_gap"});
  REQUIRE(csv.rows.size() == 4);
  for (const auto& row : csv.rows) {
    CHECK_FALSE(row[csv.column("reference")].empty());
    if (std::stod(row[csv.column("kappa")]) == 0.0)
      CHECK(std::abs(std::stod(row[csv.column("ref_gap")])) < 0.02);
    else
      CHECK(row[csv.column("ref_gap")].empty());
  }

  SUBCASE("byte-identical reruns for any worker count") {
    const std::string first = slurp(out / "trace.csv");
    const auto out2 = scratch("trace_w4");
    CHECK(run("trace", cfg, out2, 4).exit_code == 0);
    CHECK(slurp(out2 / "trace.csv") == first);
  }
  SUBCASE("recover refuses inputs from a different domain") {
    const auto other = scratch("trace_rect");
    std::string rect = cfg;
    rect.replace(rect.find("width = 1"), 9, "width = 2");
    CHECK(run("mass", rect, other).exit_code == 0);
    fs::copy_file(other / "mass.csv", out / "mass.csv");
    const std::string rc = std::string(kSquare) +
                           "[recover]\ntrace_csv = trace.csv\nmass_csv = mass.csv\n"
                           "estimators = area\n";
    CHECK(run("recover", rc, out).exit_code == 1);
    CHECK(run("recover", rc + "force = true\n", out).exit_code == 0);
  }
  SUBCASE("recover rejects files without the schema line") {
    std::ofstream(out / "junk.csv") << "t,kappa\n1,2\n";
    const auto r2 = run("recover", "[recover]\ntrace_csv = junk.csv\narea = 1\n", out);
    CHECK(r2.exit_code == 1);
  }
  SUBCASE("recover writes all estimators") {
    CHECK(run("mass", cfg, out).exit_code == 0);
    const auto r2 = run("recover", std::string(kSquare) +
                                       "[recover]\ntrace_csv = trace.csv\nmass_csv = mass.csv\n",
                        out);
    CHECK(r2.exit_code == 0);
    const auto rec = read_csv((out / "recover.csv").string());
    CHECK(rec.columns == std::vector<std::string>{"estimator", "kappa", "t", "estimate", "std_error",
                                                  "rate_condition"});
    bool saw_kappa2 = false;
    for (const auto& row : rec.rows) saw_kappa2 |= row[0] == "kappa2";
    CHECK(saw_kappa2);
  }
}

TEST_CASE("domains without a spectral model leave the reference empty") {
  const auto out = scratch("koch");
  const auto r = run("trace",
                     "[domain]\ntype = koch\nlevel = 2\nside = 1\n"
                     "[trace]\nt = 0.01\nkappa = 0\nn_outer = 200\nn_steps = 32\n",
                     out);
  CHECK(r.exit_code == 0);
  const auto csv = read_csv((out / "trace.csv").string());
  CHECK(csv.rows.at(0)[csv.column("reference")].empty());
  CHECK(csv.rows.at(0)[csv.column("ref_gap")].empty());
}

TEST_CASE("overflow breach exits 2") {
  const auto out = scratch("overflow");
  const auto r = run("trace", std::string(kSquare) +
                                  "[trace]\nt = 0.01\nkappa = 1\nn_outer = 100\nn_steps = 64\n"
                                  "exponent_cap = 1e-12\n",
                     out);
  CHECK(r.exit_code == 2);
  CHECK(fs::exists(out / "trace.csv"));
}

TEST_CASE("minkowski") {
  const auto out = scratch("mink");
  SUBCASE("square tube dimension") {
    const auto r = run("minkowski", std::string(kSquare) + "[minkowski]\nn_samples = 400000\n", out);
    CHECK(r.exit_code == 0);
    const auto fit = read_csv((out / "minkowski_fit.csv").string());
    CHECK(std::stod(fit.rows.at(0)[fit.column("dimension")]) == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("zero hits exit 2") {
    const auto r = run("minkowski",
                       std::string(kSquare) + "[minkowski]\nr = 1e-9 2e-9 4e-9\nn_samples = 1000\n", out);
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("command line") {
  const char* cli = std::getenv("ANDERSON_LAB_CLI");
  if (!cli) return;
  const auto dir = scratch("cli");
  std::ofstream(dir / "c.ini") << kSquare
                               << "[minkowski]\nn_samples = 20000\n"
                                  "[silt-validate]\nt = 0.05\neps = 0.001\nregions = rect:0:0:0:0\n";
  auto status = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const std::string cfg = (dir / "c.ini").string(), out = (dir / "o").string();
  CHECK(status("minkowski --config " + cfg + " --out " + out) == 0);
  CHECK(status("minkowski --config " + cfg + " --out " + out + " --workers 2 --seed 5") == 0);
  CHECK(status("silt-validate --config " + cfg + " --out " + out) == 1);
  CHECK(status("bogus --config " + cfg) == 1);
  CHECK(status("trace") == 1);
  CHECK(status("trace --config " + (dir / "missing.ini").string()) == 1);
}
