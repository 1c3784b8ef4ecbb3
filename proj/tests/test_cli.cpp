#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = PULSEQST_CLI_PATH;
const std::string kConfigs = PULSEQST_CONFIG_DIR;

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("pulseqst_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// 1-qubit toy scenario: converges in a handful of iterations
fs::path write_tiny_config(const fs::path& dir) {
  const fs::path p = dir / "tiny.cfg";
  std::ofstream os(p);
  os << R"({
    "hamiltonian": {"kind": "custom", "n": 1,
                    "terms": [{"pauli_a": 3, "site_a": 1, "coefficient_hz": 100.0}]},
    "control": {"mode": "global"},
    "target": {"kind": "random", "depth": 1, "seed": 5},
    "measurement": {"kind": "exact"},
    "pulse": {"slices": 8, "tau_s": 1e-3, "init_scale": 300.0, "seed": 2},
    "optimizer": {"method": "method2", "delta": 10.0, "step_rule": "backtracking",
                  "beta0": 1e5, "max_iterations": 150, "fitness_goal": 0.99, "seed": 2}
  })";
  return p;
}

}  // namespace

TEST_CASE("reconstruct on a tiny scenario") {
  const fs::path dir = fresh_dir("tiny");
  const fs::path cfg = write_tiny_config(dir);
  const fs::path out = dir / "out";
  REQUIRE(run_cli("reconstruct --config " + cfg.string() + " --out " + out.string()) == 0);

  for (const char* name : {"record.jsonl", "pulse.txt", "rho.txt", "summary.json"})
    CHECK(fs::exists(out / name));

  json summary = json::parse(slurp(out / "summary.json"));
  CHECK(summary.at("status") == "goal_reached");
  CHECK(summary.at("best_fitness").get<double>() >= 0.99);
  CHECK(summary.at("reconstruction_fidelity").get<double>() >= 0.99);
  CHECK(summary.at("total_experiments").get<std::uint64_t>() > 0);
}

TEST_CASE("same seed reproduces output files byte for byte") {
  const fs::path dir = fresh_dir("repro");
  const fs::path cfg = write_tiny_config(dir);
  const fs::path out_a = dir / "a", out_b = dir / "b";
  REQUIRE(run_cli("reconstruct --config " + cfg.string() + " --seed 9 --out " +
                  out_a.string()) == 0);
  REQUIRE(run_cli("reconstruct --config " + cfg.string() + " --seed 9 --out " +
                  out_b.string()) == 0);
  for (const char* name : {"record.jsonl", "pulse.txt", "rho.txt", "summary.json"})
    CHECK(slurp(out_a / name) == slurp(out_b / name));
}

TEST_CASE("seed override changes the run") {
  const fs::path dir = fresh_dir("seeds");
  const fs::path cfg = write_tiny_config(dir);
  const fs::path out_a = dir / "a", out_b = dir / "b";
  REQUIRE(run_cli("reconstruct --config " + cfg.string() + " --seed 1 --out " +
                  out_a.string()) == 0);
  REQUIRE(run_cli("reconstruct --config " + cfg.string() + " --seed 2 --out " +
                  out_b.string()) == 0);
  CHECK(slurp(out_a / "pulse.txt") != slurp(out_b / "pulse.txt"));
}

TEST_CASE("config errors exit with code 2") {
  const fs::path dir = fresh_dir("bad");
  SUBCASE("missing file") {
    CHECK(run_cli("reconstruct --config " + (dir / "nope.cfg").string()) == 2);
  }
  SUBCASE("unparseable JSON") {
    const fs::path p = dir / "broken.cfg";
    std::ofstream(p) << "{ not json";
    CHECK(run_cli("reconstruct --config " + p.string()) == 2);
  }
  SUBCASE("zero slices rejected") {
    const fs::path p = dir / "zero.cfg";
    std::string text = slurp(write_tiny_config(dir));
    text.replace(text.find("\"slices\": 8"), 11, "\"slices\": 0");
    std::ofstream(p) << text;
    CHECK(run_cli("reconstruct --config " + p.string()) == 2);
  }
  SUBCASE("unknown hamiltonian kind") {
    const fs::path p = dir / "kind.cfg";
    std::string text = slurp(write_tiny_config(dir));
    text.replace(text.find("\"kind\": \"custom\""), 16, "\"kind\": \"banana\"");
    std::ofstream(p) << text;
    CHECK(run_cli("reconstruct --config " + p.string()) == 2);
  }
}

TEST_CASE("missing required flag is a usage error") {
  CHECK(run_cli("reconstruct") != 0);
}

TEST_CASE("gradcheck writes the cross-check table") {
  const fs::path dir = fresh_dir("gradcheck");
  const fs::path cfg = fs::path(kConfigs) / "gradcheck2.cfg";
  REQUIRE(fs::exists(cfg));
  REQUIRE(run_cli("gradcheck --config " + cfg.string() + " --out " + dir.string()) == 0);

  std::ifstream is(dir / "gradcheck.csv");
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);  // provenance
  CHECK(line.rfind("# config_hash=", 0) == 0);
  std::getline(is, line);  // header
  CHECK(line == "check,parameter,error");

  double commutator = -1.0;
  std::vector<double> m1_errors, m2_errors;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string check, param, err;
    std::getline(ss, check, ',');
    std::getline(ss, param, ',');
    std::getline(ss, err, ',');
    if (check == "commutator_identity") commutator = std::stod(err);
    if (check == "method1_vs_oracle") m1_errors.push_back(std::stod(err));
    if (check == "method2_vs_oracle") m2_errors.push_back(std::stod(err));
  }
  CHECK(commutator >= 0.0);
  CHECK(commutator < 1e-12);
  REQUIRE(m1_errors.size() == 3);
  CHECK(m1_errors.back() < m1_errors.front());  // shrinking tau helps
  REQUIRE(m2_errors.size() == 3);
  CHECK(m2_errors[1] < m2_errors[0]);  // shrinking delta helps
  CHECK(m2_errors[2] < m2_errors[1]);
}

TEST_CASE("cost table covers the configured range") {
  const fs::path dir = fresh_dir("cost");
  const fs::path cfg = fs::path(kConfigs) / "cost.cfg";
  REQUIRE(fs::exists(cfg));
  REQUIRE(run_cli("cost --config " + cfg.string() + " --out " + dir.string()) == 0);

  std::ifstream is(dir / "cost.csv");
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);  // provenance
  std::getline(is, line);  // header
  int rows = 0;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string n, full, m1, m2, verified;
    std::getline(ss, n, ',');
    std::getline(ss, full, ',');
    std::getline(ss, m1, ',');
    std::getline(ss, m2, ',');
    std::getline(ss, verified, ',');
    CHECK(std::stoull(full) == (1ull << (2 * std::stoi(n))) - 1);
    if (std::stoi(n) <= 4) CHECK(verified == "yes");
    ++rows;
  }
  CHECK(rows >= 2);
}

TEST_CASE("scaling on a minimal grid") {
  const fs::path dir = fresh_dir("scaling");
  const fs::path p = dir / "scal.cfg";
  std::ofstream(p) << R"({
    "scaling": {
      "n_min": 2, "n_max": 2, "time_s": 1.0, "threshold": 0.95,
      "tau_s": 0.1, "m_cap": 32, "restarts": 2, "init_scale": 0.5, "cap": 50.0,
      "seed": 3,
      "optimizer": {"method": "method2", "delta": 1e-3, "step_rule": "backtracking",
                    "beta0": 10.0, "max_iterations": 200, "fitness_goal": 0.95, "seed": 3}
    }
  })";
  REQUIRE(run_cli("scaling --config " + p.string() + " --out " + dir.string()) == 0);
  std::ifstream is(dir / "scaling.csv");
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line == "n,m_min,fitness,wall_s");
  REQUIRE(std::getline(is, line));
  std::stringstream ss(line);
  std::string n, m_min, fitness;
  std::getline(ss, n, ',');
  std::getline(ss, m_min, ',');
  std::getline(ss, fitness, ',');
  CHECK(n == "2");
  CHECK(m_min != "unreachable");
  CHECK(std::stod(fitness) >= 0.95);
}
