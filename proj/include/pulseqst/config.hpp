#ifndef PULSEQST_CONFIG_HPP
#define PULSEQST_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pulseqst/device.hpp"
#include "pulseqst/hamiltonians.hpp"
#include "pulseqst/optimizer.hpp"
#include "pulseqst/stateprep.hpp"

namespace pulseqst {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline HamiltonianSpec hamiltonian_from_json(const json& j) {
  HamiltonianSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  spec.n = j.at("n").get<int>();
  if (kind == "ising") {
    spec.kind = HamiltonianKind::Ising;
  } else if (kind == "nmr") {
    spec.kind = HamiltonianKind::NMR;
    spec.nu_hz = j.at("nu_hz").get<std::vector<double>>();
    const auto rows = j.at("j_hz");
    spec.j_hz = RMat::Zero(spec.n, spec.n);
    for (int r = 0; r < spec.n; ++r)
      for (int c = 0; c < spec.n; ++c) spec.j_hz(r, c) = rows.at(r).at(c).get<double>();
  } else if (kind == "custom") {
    spec.kind = HamiltonianKind::CustomTwoBody;
    for (const auto& t : j.at("terms")) {
      CustomTwoBodyTerm term;
      term.pauli_a = t.at("pauli_a").get<int>();
      term.site_a = t.at("site_a").get<int>();
      term.pauli_b = t.value("pauli_b", 0);
      term.site_b = t.value("site_b", 0);
      term.coefficient_hz = t.at("coefficient_hz").get<double>();
      spec.terms.push_back(term);
    }
  } else {
    throw ConfigError("hamiltonian.kind must be ising, nmr, or custom");
  }
  return spec;
}

inline json hamiltonian_to_json(const HamiltonianSpec& spec) {
  json j;
  j["n"] = spec.n;
  switch (spec.kind) {
    case HamiltonianKind::Ising:
      j["kind"] = "ising";
      break;
    case HamiltonianKind::NMR: {
      j["kind"] = "nmr";
      j["nu_hz"] = spec.nu_hz;
      json rows = json::array();
      for (int r = 0; r < spec.n; ++r) {
        json row = json::array();
        for (int c = 0; c < spec.n; ++c) row.push_back(spec.j_hz(r, c));
        rows.push_back(row);
      }
      j["j_hz"] = rows;
      break;
    }
    case HamiltonianKind::CustomTwoBody: {
      j["kind"] = "custom";
      json terms = json::array();
      for (const auto& t : spec.terms)
        terms.push_back({{"pauli_a", t.pauli_a},
                         {"site_a", t.site_a},
                         {"pauli_b", t.pauli_b},
                         {"site_b", t.site_b},
                         {"coefficient_hz", t.coefficient_hz}});
      j["terms"] = terms;
      break;
    }
  }
  return j;
}

struct TargetRecipe {
  enum class Kind { Dynamical, Bell, Random };
  Kind kind = Kind::Bell;
  int control_site = 1, target_site = 2;       // bell
  double time_s = 0.0;                          // dynamical
  std::unique_ptr<HamiltonianSpec> hamiltonian; // dynamical; defaults to device drift
  int depth = 1;                                // random
  std::uint64_t seed = 0;                       // random
};

struct Scenario {
  HamiltonianSpec hamiltonian;
  ControlMode mode = ControlMode::Global;
  TargetRecipe target;
  MeasurementModel model;
  int slices = 0;
  double tau_s = 0.0;
  double init_scale = 0.0;   // rad/s
  std::uint64_t init_seed = 0;
  double amplitude_cap = kDefaultAmplitudeCap;
  OptimizerOptions optimizer;
};

inline MeasurementModel measurement_from_json(const json& j) {
  MeasurementModel model;
  const std::string kind = j.value("kind", "exact");
  if (kind == "exact") {
    model.base = MeasurementModel::Base::Exact;
  } else if (kind == "shots") {
    model.base = MeasurementModel::Base::Shots;
    model.shots = j.at("shots").get<int>();
    model.seed = j.value("seed", std::uint64_t{0});
  } else {
    throw ConfigError("measurement.kind must be exact or shots");
  }
  model.depolarizing = j.value("depolarizing", 0.0);
  model.validate();
  return model;
}

inline OptimizerOptions optimizer_from_json(const json& j) {
  OptimizerOptions o;
  const std::string method = j.value("method", "method2");
  if (method == "method1")
    o.method = GradientMethod::Method1;
  else if (method == "method2")
    o.method = GradientMethod::Method2;
  else
    throw ConfigError("optimizer.method must be method1 or method2");
  o.method2_delta = j.value("delta", o.method2_delta);
  const std::string rule = j.value("step_rule", "backtracking");
  if (rule == "fixed")
    o.step_rule = StepRule::Fixed;
  else if (rule == "backtracking")
    o.step_rule = StepRule::Backtracking;
  else
    throw ConfigError("optimizer.step_rule must be fixed or backtracking");
  o.beta0 = j.value("beta0", o.beta0);
  o.shrink = j.value("shrink", o.shrink);
  o.sufficient_increase = j.value("sufficient_increase", o.sufficient_increase);
  o.max_probes = j.value("max_probes", o.max_probes);
  o.max_iterations = j.value("max_iterations", o.max_iterations);
  o.fitness_goal = j.value("fitness_goal", o.fitness_goal);
  o.gradient_norm_floor = j.value("gradient_norm_floor", o.gradient_norm_floor);
  o.rng_seed = j.value("seed", std::uint64_t{0});
  o.validate();
  return o;
}

inline Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    s.hamiltonian = hamiltonian_from_json(j.at("hamiltonian"));

    const std::string mode = j.value("control", json::object()).value("mode", "global");
    if (mode == "global")
      s.mode = ControlMode::Global;
    else if (mode == "persite")
      s.mode = ControlMode::PerSite;
    else
      throw ConfigError("control.mode must be global or persite");

    const json& t = j.at("target");
    const std::string kind = t.at("kind").get<std::string>();
    if (kind == "bell") {
      s.target.kind = TargetRecipe::Kind::Bell;
      s.target.control_site = t.at("control_site").get<int>();
      s.target.target_site = t.at("target_site").get<int>();
    } else if (kind == "dynamical") {
      s.target.kind = TargetRecipe::Kind::Dynamical;
      s.target.time_s = t.at("time_s").get<double>();
      if (t.contains("hamiltonian"))
        s.target.hamiltonian =
            std::make_unique<HamiltonianSpec>(hamiltonian_from_json(t.at("hamiltonian")));
    } else if (kind == "random") {
      s.target.kind = TargetRecipe::Kind::Random;
      s.target.depth = t.at("depth").get<int>();
      s.target.seed = t.value("seed", std::uint64_t{0});
    } else {
      throw ConfigError("target.kind must be bell, dynamical, or random");
    }

    s.model = measurement_from_json(j.value("measurement", json::object()));

    const json& p = j.at("pulse");
    s.slices = p.at("slices").get<int>();
    s.tau_s = p.at("tau_s").get<double>();
    s.init_scale = p.value("init_scale", 0.0);
    s.init_seed = p.value("seed", std::uint64_t{0});
    s.amplitude_cap = p.value("cap", kDefaultAmplitudeCap);
    if (s.slices < 1) throw ConfigError("pulse.slices must be >= 1");
    if (s.tau_s <= 0.0) throw ConfigError("pulse.tau_s must be > 0");

    s.optimizer = optimizer_from_json(j.value("optimizer", json::object()));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  return s;
}

inline json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(is, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  return scenario_from_json(load_json_file(path));
}

inline PureState make_target_state(const Scenario& s) {
  switch (s.target.kind) {
    case TargetRecipe::Kind::Bell:
      return bell_state(s.hamiltonian.n, s.target.control_site, s.target.target_site);
    case TargetRecipe::Kind::Dynamical: {
      const HamiltonianSpec& h =
          s.target.hamiltonian ? *s.target.hamiltonian : s.hamiltonian;
      return dynamical_state(h.build(), s.target.time_s, h.n);
    }
    case TargetRecipe::Kind::Random:
      return random_lowdepth_state(s.hamiltonian.n, s.target.depth, s.target.seed);
  }
  throw ConfigError("unknown target kind");
}

inline std::unique_ptr<Device> make_device(const Scenario& s) {
  return std::make_unique<Device>(DensityMatrix::from_pure(make_target_state(s)),
                                  s.hamiltonian.build(),
                                  make_control_operators(s.mode, s.hamiltonian.n), s.model);
}

/// FNV-1a over the raw config bytes; stamped on every emitted table.
inline std::string file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (is.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

inline json run_record_summary(const RunRecord& rec) {
  json j;
  switch (rec.status) {
    case RunStatus::GoalReached: j["status"] = "goal_reached"; break;
    case RunStatus::GradientVanished: j["status"] = "gradient_vanished"; break;
    case RunStatus::IterationCap: j["status"] = "iteration_cap"; break;
  }
  j["iterations"] = rec.entries.size();
  j["best_fitness"] = rec.best_fitness;
  if (!rec.entries.empty()) {
    j["final_fitness"] = rec.entries.back().fitness;
    j["total_experiments"] = rec.entries.back().experiments;
  }
  return j;
}

inline void save_run_record(const RunRecord& rec, std::ostream& os) {
  for (const auto& e : rec.entries) {
    json line = {{"iteration", e.iteration},
                 {"fitness", e.fitness},
                 {"gradient_norm", e.gradient_norm},
                 {"step_size", e.step_size},
                 {"experiments", e.experiments}};
    os << line.dump() << "\n";
  }
}

}  // namespace pulseqst

#endif  // PULSEQST_CONFIG_HPP
