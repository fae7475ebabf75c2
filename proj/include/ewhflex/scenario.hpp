#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewhflex/analytics.hpp"
#include "ewhflex/droop.hpp"
#include "ewhflex/errors.hpp"
#include "ewhflex/io.hpp"
#include "ewhflex/population.hpp"

namespace ewhflex {

// A commitment level: absolute kW, a fraction of the expected initial power
// (written "75%"), or the closed-form optimum.
struct CommitmentLevel {
  enum class Kind { absolute_kw, fraction_of_initial, optimal };
  Kind kind = Kind::optimal;
  double value = 0.0;  // kW or fraction, depending on kind
};

// One self-contained experiment description, loaded from a JSON document.
// Time is in minutes, power in kW, frequency in Hz, temperature in degF.
struct Scenario {
  int schema_version = 1;
  PopulationSpec population;
  ControlWindow window;
  std::optional<std::filesystem::path> draw_profile_path;  // nullopt = zero draw
  int replications = 1;
  std::uint64_t seed = 0;
  double output_dt_min = 0.1;
  std::optional<DroopBand> band;
  std::optional<FrequencyEvent> event;
  std::optional<std::filesystem::path> event_path;  // alternative to inline event
  std::optional<double> alpha_on_per_min;
  std::optional<double> alpha_off_per_min;
  std::optional<CommitmentLevel> commitment;
  std::vector<CommitmentLevel> commitment_grid;
  std::string moments_source = "analytic";  // or "empirical"

  void validate() const {
    population.validate();
    window.validate();
    if (replications < 1) throw ValidationError("replications must be >= 1");
    if (!(output_dt_min > 0.0)) throw ValidationError("output_dt_min must be > 0");
    if (band) band->validate();
    if (event && event_path)
      throw ValidationError("give the event inline or as a file, not both");
    if (moments_source != "analytic" && moments_source != "empirical")
      throw ValidationError("moments must be 'analytic' or 'empirical'");
  }
};

namespace detail {

inline ParamRange parse_range(const nlohmann::json& j, const char* name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(std::string("population.") + name + " must be a [lo, hi] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline CommitmentLevel parse_commitment(const nlohmann::json& j) {
  if (j.is_number()) {
    const double kw = j.get<double>();
    if (!(kw > 0.0)) throw ValidationError("commitment in kW must be > 0");
    return {CommitmentLevel::Kind::absolute_kw, kw};
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "optimal") return {CommitmentLevel::Kind::optimal, 0.0};
    if (!s.empty() && s.back() == '%') {
      double pct = 0.0;
      try {
        pct = std::stod(s.substr(0, s.size() - 1));
      } catch (const std::exception&) {
        throw ValidationError("cannot parse commitment percentage '" + s + "'");
      }
      if (!(pct > 0.0)) throw ValidationError("commitment percentage must be > 0");
      return {CommitmentLevel::Kind::fraction_of_initial, pct / 100.0};
    }
  }
  throw ValidationError("commitment must be a kW number, 'NN%', or 'optimal'");
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  Scenario sc;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw ValidationError("scenario requires an integer schema_version");
  sc.schema_version = j["schema_version"].get<int>();
  if (sc.schema_version != 1)
    throw ValidationError("unsupported schema_version " + std::to_string(sc.schema_version));

  if (!j.contains("population") || !j["population"].is_object())
    throw ValidationError("scenario requires a population object");
  const auto& pop = j["population"];
  if (!pop.contains("count")) throw ValidationError("population.count is required");
  sc.population.count = pop["count"].get<int>();
  if (pop.contains("init_on_fraction"))
    sc.population.init_on_fraction = pop["init_on_fraction"].get<double>();
  auto maybe_range = [&pop](const char* name, ParamRange& target) {
    if (pop.contains(name)) target = detail::parse_range(pop[name], name);
  };
  maybe_range("ambient_f", sc.population.ambient_f);
  maybe_range("inlet_f", sc.population.inlet_f);
  maybe_range("setpoint_f", sc.population.setpoint_f);
  maybe_range("deadband_f", sc.population.deadband_f);
  maybe_range("tank_btu_per_f", sc.population.tank_btu_per_f);
  maybe_range("water_btu_per_lb_f", sc.population.water_btu_per_lb_f);
  maybe_range("shell_btu_per_f_hr", sc.population.shell_btu_per_f_hr);
  maybe_range("heater_btu_per_hr", sc.population.heater_btu_per_hr);
  maybe_range("power_kw", sc.population.power_kw);
  maybe_range("init_band_position", sc.population.init_band_position);

  if (!j.contains("window") || !j["window"].is_object())
    throw ValidationError("scenario requires a window object");
  sc.window.t0_min = j["window"].value("t0_min", 0.0);
  if (!j["window"].contains("tf_min")) throw ValidationError("window.tf_min is required");
  sc.window.tf_min = j["window"]["tf_min"].get<double>();

  if (j.contains("draw")) {
    const auto& d = j["draw"];
    if (!d.is_string()) throw ValidationError("draw must be 'zero' or a profile path");
    if (const auto s = d.get<std::string>(); s != "zero")
      sc.draw_profile_path = base_dir / s;
  }
  sc.replications = j.value("replications", 1);
  if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();
  sc.output_dt_min = j.value("output_dt_min", 0.1);

  if (j.contains("band")) {
    DroopBand band;
    band.omega_u_hz = j["band"].value("omega_u_hz", band.omega_u_hz);
    band.omega_l_hz = j["band"].value("omega_l_hz", band.omega_l_hz);
    band.omega_0_hz = j["band"].value("omega_0_hz", band.omega_0_hz);
    sc.band = band;
  }
  if (j.contains("event")) {
    const auto& e = j["event"];
    if (e.is_string()) {
      sc.event_path = base_dir / e.get<std::string>();
    } else if (e.is_object()) {
      if (!e.contains("t_min") || !e.contains("omega_hz"))
        throw ValidationError("inline event requires t_min and omega_hz");
      sc.event = FrequencyEvent{e["t_min"].get<double>(), e["omega_hz"].get<double>()};
    } else {
      throw ValidationError("event must be an object or a file path");
    }
  }
  if (j.contains("alphas")) {
    const auto& a = j["alphas"];
    if (!a.is_object() || !a.contains("on_per_min") || !a.contains("off_per_min"))
      throw ValidationError("alphas requires on_per_min and off_per_min");
    sc.alpha_on_per_min = a["on_per_min"].get<double>();
    sc.alpha_off_per_min = a["off_per_min"].get<double>();
  }
  if (j.contains("commitment")) sc.commitment = detail::parse_commitment(j["commitment"]);
  if (j.contains("commitment_grid")) {
    if (!j["commitment_grid"].is_array() || j["commitment_grid"].empty())
      throw ValidationError("commitment_grid must be a nonempty array");
    for (const auto& c : j["commitment_grid"])
      sc.commitment_grid.push_back(detail::parse_commitment(c));
  }
  sc.moments_source = j.value("moments", std::string("analytic"));
  sc.validate();
  return sc;
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("cannot parse scenario " + path.string() + ": " + e.what());
  }
  try {
    return parse_scenario(j, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid scenario " + path.string() + ": " + e.what());
  }
}

// ---- shared runner plumbing -------------------------------------------------

// Profiles referenced by a scenario: empty span = zero draw for everyone.
inline std::vector<DrawProfile> load_scenario_profiles(const Scenario& sc) {
  std::vector<DrawProfile> profiles;
  if (sc.draw_profile_path) profiles.push_back(load_draw_profile_file(*sc.draw_profile_path));
  return profiles;
}

inline PowerMoments scenario_moments(const Scenario& sc) {
  if (sc.moments_source == "empirical") {
    const auto devices = sample_population(sc.population, sc.seed);
    return PowerMoments::from_devices(devices);
  }
  return PowerMoments::from_uniform(sc.population.power_kw.lo, sc.population.power_kw.hi,
                                    sc.population.count);
}

inline OnProbabilityModel scenario_model(const Scenario& sc) {
  if (!sc.alpha_on_per_min || !sc.alpha_off_per_min)
    throw ValidationError(
        "scenario needs alphas {on_per_min, off_per_min}; supply them in the file or via "
        "--alpha-on/--alpha-off");
  OnProbabilityModel model{sc.population.init_on_fraction, *sc.alpha_on_per_min,
                           *sc.alpha_off_per_min, sc.window};
  model.validate();
  return model;
}

// Expected aggregate power at the window start, the reference for percentage
// commitment levels.
inline double expected_initial_power_kw(const Scenario& sc, const PowerMoments& moments) {
  return static_cast<double>(sc.population.count) * sc.population.init_on_fraction *
         moments.mean_kw;
}

inline double resolve_commitment_kw(const CommitmentLevel& level, const Scenario& sc,
                                    const PowerMoments& moments,
                                    const OnProbabilityModel* model) {
  switch (level.kind) {
    case CommitmentLevel::Kind::absolute_kw:
      return level.value;
    case CommitmentLevel::Kind::fraction_of_initial:
      return level.value * expected_initial_power_kw(sc, moments);
    case CommitmentLevel::Kind::optimal: {
      if (model == nullptr)
        throw ValidationError("'optimal' commitment needs an on-probability model (alphas)");
      return optimal_flexibility(moments, *model).optimal_commitment_kw;
    }
  }
  throw ValidationError("unreachable commitment kind");
}

// ---- command runners ----------------------------------------------------------

struct SimulateResult {
  EnsembleTrajectory trajectory;
  double mean_initial_kw = 0.0;
  double mean_final_kw = 0.0;
};

inline SimulateResult run_simulate(const Scenario& sc) {
  const auto profiles = load_scenario_profiles(sc);
  SimulateResult res;
  res.trajectory =
      monte_carlo(sc.population, profiles, sc.window, sc.replications, sc.seed, sc.output_dt_min);
  const auto reps = static_cast<double>(res.trajectory.replications.size());
  for (const Replication& rep : res.trajectory.replications) {
    res.mean_initial_kw += rep.power_kw.front() / reps;
    res.mean_final_kw += rep.power_kw.back() / reps;
  }
  return res;
}

struct EstimateResult {
  AlphaEstimate estimate;
  std::vector<LabeledCurve> curves;
};

// Runs every scenario's Monte Carlo, reduces to mean fraction-on curves, and
// solves for the alphas. All scenarios must share one control window.
inline EstimateResult run_estimate_alphas(std::span<const Scenario> scenarios) {
  if (scenarios.empty()) throw ValidationError("estimate-alphas needs at least one scenario");
  for (const Scenario& sc : scenarios)
    if (sc.window.t0_min != scenarios[0].window.t0_min ||
        sc.window.tf_min != scenarios[0].window.tf_min)
      throw ValidationError("estimate-alphas scenarios must share one control window");
  EstimateResult res;
  for (const Scenario& sc : scenarios) {
    const auto profiles = load_scenario_profiles(sc);
    const auto traj =
        monte_carlo(sc.population, profiles, sc.window, sc.replications, sc.seed, sc.output_dt_min);
    res.curves.push_back({sc.population.init_on_fraction, mean_fraction_on(traj)});
  }
  res.estimate = estimate_alphas(res.curves);
  return res;
}

struct AssessResult {
  FlexibilityAssessment assessment;
  OnProbabilityModel model;
  PowerMoments moments;
  double p_on_t0 = 0.0;
  double p_on_tf = 0.0;
  // Grid-search oracle cross-check, populated when the commitment is optimal.
  std::optional<double> grid_p_star_kw;
  std::optional<double> grid_delta_kw;
  // Explicit commitment level, when the scenario fixes one.
  std::optional<double> commitment_kw;
  std::optional<double> commitment_sup_error;
};

inline AssessResult run_assess(const Scenario& sc, int grid_steps = 10000) {
  AssessResult res;
  res.moments = scenario_moments(sc);
  res.model = scenario_model(sc);
  res.assessment = optimal_flexibility(res.moments, res.model);
  res.assessment.moments_source = sc.moments_source;
  res.p_on_t0 = p_on(res.model, sc.window.t0_min);
  res.p_on_tf = p_on(res.model, sc.window.tf_min);

  const bool optimal = !sc.commitment || sc.commitment->kind == CommitmentLevel::Kind::optimal;
  if (optimal) {
    const double p_star = res.assessment.optimal_commitment_kw;
    res.grid_p_star_kw =
        grid_search_flexibility(res.moments, res.model, 0.5 * p_star, 1.5 * p_star, grid_steps);
    res.grid_delta_kw = std::abs(*res.grid_p_star_kw - p_star);
    res.assessment.sweep =
        sup_error_sweep(res.moments, res.model, 0.5 * p_star, 1.5 * p_star, 201);
  } else {
    res.commitment_kw = resolve_commitment_kw(*sc.commitment, sc, res.moments, &res.model);
    res.commitment_sup_error = sup_error(res.moments, res.model, *res.commitment_kw).value;
  }
  return res;
}

struct SweepResult {
  std::vector<SweepCurves> curves;
};

// For each commitment level: the model/moments error curve over the window
// next to the Monte Carlo estimate from simulated trajectories.
inline SweepResult run_sweep(const Scenario& sc) {
  if (sc.commitment_grid.empty())
    throw ValidationError("sweep needs a nonempty commitment_grid");
  const auto moments = scenario_moments(sc);
  const auto model = scenario_model(sc);
  const auto profiles = load_scenario_profiles(sc);
  const auto traj =
      monte_carlo(sc.population, profiles, sc.window, sc.replications, sc.seed, sc.output_dt_min);

  SweepResult res;
  for (const CommitmentLevel& level : sc.commitment_grid) {
    const double c = resolve_commitment_kw(level, sc, moments, &model);
    SweepCurves curves;
    curves.commitment_kw = c;
    curves.empirical = empirical_sq_error(traj, c);
    curves.analytic.t_min = traj.time_min;
    curves.analytic.value.reserve(traj.time_min.size());
    for (const double t : traj.time_min)
      curves.analytic.value.push_back(
          expected_sq_error(moments, p_on(model, sc.window.t0_min + t), c));
    res.curves.push_back(std::move(curves));
  }
  return res;
}

struct EventResult {
  FrequencyEvent event;
  DroopBand band;
  double baseline_kw = 0.0;   // on-power at the event instant
  double target_kw = 0.0;     // smooth droop curve value
  double actual_kw = 0.0;     // staircase value after the response
  double shed_kw = 0.0;
  double gap_kw = 0.0;        // |actual - target|
  double max_device_kw = 0.0;
  int responders = 0;
  int on_devices = 0;
};

// Simulate one replication to the event time, assign thresholds across the
// devices then on, apply the response policy, and compare the staircase with
// the smooth droop target.
inline EventResult run_event(const Scenario& sc) {
  if (!sc.band) throw ValidationError("event run needs a droop band");
  FrequencyEvent ev;
  if (sc.event) ev = *sc.event;
  else if (sc.event_path) ev = load_event_file(*sc.event_path);
  else throw ValidationError("event run needs an event (inline or file)");
  if (ev.t_min < sc.window.t0_min || ev.t_min > sc.window.tf_min)
    throw ValidationError("event time must fall inside the control window");

  const auto profiles = load_scenario_profiles(sc);
  auto devices = sample_population(sc.population, replication_seed(sc.seed, 0));
  advance_devices(devices, profiles, sc.window.t0_min, ev.t_min);

  std::vector<OnDevice> on_set;
  for (std::size_t i = 0; i < devices.size(); ++i)
    if (devices[i].state.on)
      on_set.push_back({static_cast<int>(i), devices[i].params.power_kw});

  EventResult res;
  res.event = ev;
  res.band = *sc.band;
  res.on_devices = static_cast<int>(on_set.size());
  if (on_set.empty())
    throw ValidationError("no devices are on at the event time; nothing to commit");

  const auto assignment = assign_thresholds(on_set, *sc.band);
  res.baseline_kw = assignment.total_on_power_kw;
  res.actual_kw = post_event_power(assignment, ev.omega_hz);
  res.shed_kw = res.baseline_kw - res.actual_kw;
  res.responders = static_cast<int>(respond_to_frequency(assignment, ev.omega_hz).size());
  res.target_kw =
      target_droop_power(*sc.band, ev.omega_hz, res.baseline_kw, res.baseline_kw);
  res.gap_kw = std::abs(res.actual_kw - res.target_kw);
  for (const OnDevice& d : on_set) res.max_device_kw = std::max(res.max_device_kw, d.power_kw);
  return res;
}

}  // namespace ewhflex
