// Scenario-driven front end: load a JSON scenario, run one of the analysis
// commands, and emit plot-ready CSV. Exit status: 0 success, 2 validation
// error, 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ewhflex/analytics.hpp"
#include "ewhflex/errors.hpp"
#include "ewhflex/io.hpp"
#include "ewhflex/scenario.hpp"

namespace fs = std::filesystem;
using namespace ewhflex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct CommonOptions {
  std::vector<std::string> scenario_paths;
  std::string out_dir = ".";
  std::string format = "csv";
  std::optional<std::uint64_t> seed_override;
  std::optional<int> replications_override;
  std::optional<double> alpha_on_override;
  std::optional<double> alpha_off_override;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool many_scenarios) {
  auto* sc = cmd->add_option("--scenario", opt.scenario_paths, "scenario JSON file")->required();
  if (!many_scenarios) sc->expected(1);
  cmd->add_option("--out", opt.out_dir, "output directory (created if missing)");
  cmd->add_option("--format", opt.format, "output format (only csv)");
  cmd->add_option("--seed", opt.seed_override, "override the scenario seed");
  cmd->add_option("--replications", opt.replications_override,
                  "override the scenario replication count");
}

std::vector<Scenario> load_scenarios(const CommonOptions& opt) {
  if (opt.format != "csv") throw ValidationError("unsupported format '" + opt.format + "'");
  std::vector<Scenario> scenarios;
  for (const std::string& p : opt.scenario_paths) {
    if (!fs::exists(p)) throw IoError("scenario file not found: " + p);
    Scenario sc = load_scenario_file(p);
    if (opt.seed_override) sc.seed = *opt.seed_override;
    if (opt.replications_override) sc.replications = *opt.replications_override;
    if (opt.alpha_on_override) sc.alpha_on_per_min = *opt.alpha_on_override;
    if (opt.alpha_off_override) sc.alpha_off_per_min = *opt.alpha_off_override;
    if (sc.draw_profile_path && !fs::exists(*sc.draw_profile_path))
      throw IoError("draw profile not found: " + sc.draw_profile_path->string());
    if (sc.event_path && !fs::exists(*sc.event_path))
      throw IoError("event file not found: " + sc.event_path->string());
    scenarios.push_back(std::move(sc));
  }
  return scenarios;
}

fs::path prepare_out(const CommonOptions& opt, const char* filename) {
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + opt.out_dir + ": " + ec.message());
  return fs::path(opt.out_dir) / filename;
}

std::string fmt(double v) { return detail::format_double(v); }

int cmd_simulate(const CommonOptions& opt) {
  const auto sc = load_scenarios(opt).front();
  const SimulateResult res = run_simulate(sc);
  const fs::path path = prepare_out(opt, "trajectory.csv");
  auto out = detail::open_output(path);
  write_trajectory_csv(out, res.trajectory);
  std::cout << "wrote " << path.string() << "\n"
            << "replications=" << res.trajectory.replications.size()
            << " grid_points=" << res.trajectory.time_min.size() << "\n"
            << "mean initial P_sigma = " << fmt(res.mean_initial_kw) << " kW\n"
            << "mean final   P_sigma = " << fmt(res.mean_final_kw) << " kW\n";
  return kExitOk;
}

int cmd_estimate_alphas(const CommonOptions& opt) {
  const auto scenarios = load_scenarios(opt);
  const EstimateResult res = run_estimate_alphas(scenarios);

  std::vector<ReportRow> rows;
  rows.push_back({"alpha_on", fmt(res.estimate.alpha_on_per_min)});
  rows.push_back({"alpha_off", res.estimate.alpha_off_per_min
                                   ? fmt(*res.estimate.alpha_off_per_min)
                                   : std::string("indeterminate")});
  rows.push_back({"negative_alpha_warning",
                  res.estimate.negative_alpha_warning ? std::string("1") : std::string("0")});
  for (std::size_t i = 0; i < res.estimate.diagnostics.size(); ++i) {
    const CurveDiagnostics& d = res.estimate.diagnostics[i];
    const std::string prefix = "curve_" + std::to_string(i + 1) + "_";
    rows.push_back({prefix + "p0", fmt(d.p0)});
    rows.push_back({prefix + "slope_per_min", fmt(d.fit.slope)});
    rows.push_back({prefix + "intercept", fmt(d.fit.intercept)});
    rows.push_back({prefix + "r_squared", fmt(d.fit.r_squared)});
  }
  const fs::path path = prepare_out(opt, "alphas.csv");
  auto out = detail::open_output(path);
  write_report_csv(out, rows);
  std::cout << "wrote " << path.string() << "\n"
            << "alpha_on = " << fmt(res.estimate.alpha_on_per_min) << " 1/min, alpha_off = "
            << (res.estimate.alpha_off_per_min ? fmt(*res.estimate.alpha_off_per_min)
                                               : std::string("indeterminate"))
            << " 1/min\n";
  if (!res.estimate.alpha_off_per_min)
    std::cout << "note: alpha_off needs a curve with p0 < 1\n";
  if (res.estimate.negative_alpha_warning)
    std::cout << "warning: a fitted alpha is negative; treat the estimate with care\n";
  return kExitOk;
}

int cmd_assess(const CommonOptions& opt) {
  const auto sc = load_scenarios(opt).front();
  const AssessResult res = run_assess(sc);

  std::vector<ReportRow> rows;
  rows.push_back({"p_on_t0", fmt(res.p_on_t0)});
  rows.push_back({"p_on_tf", fmt(res.p_on_tf)});
  rows.push_back({"alpha_on", fmt(res.model.alpha_on_per_min)});
  rows.push_back({"alpha_off", fmt(res.model.alpha_off_per_min)});
  rows.push_back({"mean_p", fmt(res.moments.mean_kw)});
  rows.push_back({"mean_p2", fmt(res.moments.mean_sq_kw2)});
  rows.push_back({"n", std::to_string(res.moments.count)});
  rows.push_back({"p_star_kW", fmt(res.assessment.optimal_commitment_kw)});
  rows.push_back({"err_t0", fmt(res.assessment.error_at_start)});
  rows.push_back({"err_tf", fmt(res.assessment.error_at_end)});
  rows.push_back({"moments_source", res.assessment.moments_source});
  if (res.grid_p_star_kw) {
    rows.push_back({"grid_p_star_kW", fmt(*res.grid_p_star_kw)});
    rows.push_back({"grid_delta_kW", fmt(*res.grid_delta_kw)});
  }
  if (res.commitment_kw) {
    rows.push_back({"commitment_kW", fmt(*res.commitment_kw)});
    rows.push_back({"commitment_sup_error", fmt(*res.commitment_sup_error)});
  }
  const fs::path path = prepare_out(opt, "assessment.csv");
  auto out = detail::open_output(path);
  write_report_csv(out, rows);
  std::cout << "wrote " << path.string() << "\n"
            << "optimal commitment P* = " << fmt(res.assessment.optimal_commitment_kw)
            << " kW (endpoint errors " << fmt(res.assessment.error_at_start) << " / "
            << fmt(res.assessment.error_at_end) << ")\n";
  if (res.grid_delta_kw)
    std::cout << "grid-search cross-check delta = " << fmt(*res.grid_delta_kw) << " kW\n";
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opt) {
  const auto sc = load_scenarios(opt).front();
  const SweepResult res = run_sweep(sc);
  const fs::path path = prepare_out(opt, "sweep.csv");
  auto out = detail::open_output(path);
  write_sweep_csv(out, res.curves);
  std::cout << "wrote " << path.string() << "\n";
  for (const SweepCurves& c : res.curves)
    std::cout << "commitment " << fmt(c.commitment_kw) << " kW: analytic error "
              << fmt(c.analytic.value.front()) << " -> " << fmt(c.analytic.value.back()) << "\n";
  return kExitOk;
}

int cmd_event(const CommonOptions& opt) {
  const auto sc = load_scenarios(opt).front();
  const EventResult res = run_event(sc);

  std::vector<ReportRow> rows;
  rows.push_back({"event_t_min", fmt(res.event.t_min)});
  rows.push_back({"omega_hz", fmt(res.event.omega_hz)});
  rows.push_back({"omega_u_hz", fmt(res.band.omega_u_hz)});
  rows.push_back({"omega_l_hz", fmt(res.band.omega_l_hz)});
  rows.push_back({"on_devices", std::to_string(res.on_devices)});
  rows.push_back({"responders", std::to_string(res.responders)});
  rows.push_back({"baseline_kW", fmt(res.baseline_kw)});
  rows.push_back({"target_kW", fmt(res.target_kw)});
  rows.push_back({"actual_kW", fmt(res.actual_kw)});
  rows.push_back({"shed_kW", fmt(res.shed_kw)});
  rows.push_back({"gap_kW", fmt(res.gap_kw)});
  rows.push_back({"max_device_kW", fmt(res.max_device_kw)});
  const fs::path path = prepare_out(opt, "event.csv");
  auto out = detail::open_output(path);
  write_report_csv(out, rows);
  std::cout << "wrote " << path.string() << "\n"
            << "omega " << fmt(res.event.omega_hz) << " Hz: " << res.responders << " of "
            << res.on_devices << " devices shed " << fmt(res.shed_kw) << " kW; actual "
            << fmt(res.actual_kw) << " kW vs target " << fmt(res.target_kw) << " kW (gap "
            << fmt(res.gap_kw) << " kW)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble flexibility analysis for frequency-responsive water heaters"};
  app.require_subcommand(1);

  CommonOptions sim_opt, est_opt, ass_opt, swp_opt, evt_opt;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo ensemble trajectories");
  add_common(sim, sim_opt, false);
  auto* est = app.add_subcommand("estimate-alphas",
                                 "fit the on-probability slopes from simulated curves");
  add_common(est, est_opt, true);
  auto* ass = app.add_subcommand("assess", "optimal flexibility commitment report");
  add_common(ass, ass_opt, false);
  ass->add_option("--alpha-on", ass_opt.alpha_on_override, "override alpha_on (1/min)");
  ass->add_option("--alpha-off", ass_opt.alpha_off_override, "override alpha_off (1/min)");
  auto* swp = app.add_subcommand("sweep", "error-vs-time curves per commitment level");
  add_common(swp, swp_opt, false);
  swp->add_option("--alpha-on", swp_opt.alpha_on_override, "override alpha_on (1/min)");
  swp->add_option("--alpha-off", swp_opt.alpha_off_override, "override alpha_off (1/min)");
  auto* evt = app.add_subcommand("event", "apply a frequency event and report the response");
  add_common(evt, evt_opt, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opt);
    if (est->parsed()) return cmd_estimate_alphas(est_opt);
    if (ass->parsed()) return cmd_assess(ass_opt);
    if (swp->parsed()) return cmd_sweep(swp_opt);
    if (evt->parsed()) return cmd_event(evt_opt);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
