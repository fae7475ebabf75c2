#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ewhflex/device.hpp"
#include "ewhflex/errors.hpp"
#include "ewhflex/rng.hpp"

namespace ewhflex {

struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;

  double midpoint() const { return (lo + hi) / 2.0; }
  void validate(const char* name) const {
    if (!(lo <= hi)) throw ValidationError(std::string(name) + ": range lo must be <= hi");
  }
};

// Heterogeneous ensemble description: per-parameter uniform ranges plus the
// initial fraction of 'on' devices. Defaults are the typical residential
// stock values (midpoint +/- halfwidth).
struct PopulationSpec {
  int count = 50;
  ParamRange ambient_f{72.5, 77.5};
  ParamRange inlet_f{57.5, 62.5};
  ParamRange setpoint_f{125.0, 135.0};
  ParamRange deadband_f{20.0, 20.0};
  ParamRange tank_btu_per_f{417.11, 417.11};
  ParamRange water_btu_per_lb_f{1.0, 1.0};
  ParamRange shell_btu_per_f_hr{2.75, 3.25};
  ParamRange heater_btu_per_hr{13654.0, 17066.0};
  ParamRange power_kw{4.0, 5.0};
  double init_on_fraction = 1.0;
  // Initial temperature position inside the deadband, as a fraction of the
  // band width (0 = lower edge, 1 = upper edge). Uniform over [lo, hi].
  ParamRange init_band_position{0.0, 1.0};

  int initial_on_count() const {
    return static_cast<int>(std::lround(init_on_fraction * count));
  }

  void validate() const {
    if (count < 1) throw ValidationError("population count must be >= 1");
    ambient_f.validate("ambient_f");
    inlet_f.validate("inlet_f");
    setpoint_f.validate("setpoint_f");
    deadband_f.validate("deadband_f");
    tank_btu_per_f.validate("tank_btu_per_f");
    water_btu_per_lb_f.validate("water_btu_per_lb_f");
    shell_btu_per_f_hr.validate("shell_btu_per_f_hr");
    heater_btu_per_hr.validate("heater_btu_per_hr");
    power_kw.validate("power_kw");
    init_band_position.validate("init_band_position");
    if (!(init_on_fraction >= 0.0 && init_on_fraction <= 1.0))
      throw ValidationError("init_on_fraction must lie in [0, 1]");
    if (!(init_band_position.lo >= 0.0 && init_band_position.hi <= 1.0))
      throw ValidationError("init_band_position must lie within [0, 1]");
    const int on = initial_on_count();
    if (on < 0 || on > count)
      throw ValidationError("init_on_fraction * count must round into [0, count]");
    // Extreme corners of the ranges must themselves be physical.
    EwhParams corner{.ambient_f = ambient_f.hi,
                     .inlet_f = inlet_f.hi,
                     .setpoint_f = setpoint_f.lo,
                     .deadband_f = deadband_f.hi,
                     .tank_btu_per_f = tank_btu_per_f.lo,
                     .water_btu_per_lb_f = water_btu_per_lb_f.lo,
                     .shell_btu_per_f_hr = shell_btu_per_f_hr.lo,
                     .heater_btu_per_hr = heater_btu_per_hr.lo,
                     .power_kw = power_kw.lo};
    corner.validate();
  }

  // FNV-1a over the canonical field values; identifies which spec produced a
  // trajectory without embedding the whole document.
  std::uint64_t digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](double v) {
      std::uint64_t bits;
      static_assert(sizeof bits == sizeof v);
      std::memcpy(&bits, &v, sizeof bits);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    };
    feed(static_cast<double>(count));
    for (const ParamRange* r :
         {&ambient_f, &inlet_f, &setpoint_f, &deadband_f, &tank_btu_per_f, &water_btu_per_lb_f,
          &shell_btu_per_f_hr, &heater_btu_per_hr, &power_kw, &init_band_position}) {
      feed(r->lo);
      feed(r->hi);
    }
    feed(init_on_fraction);
    return h;
  }
};

struct DrawSample {
  double time_hr = 0.0;
  double flow_lb_per_hr = 0.0;
};

// Daily hot-water usage series, zero-order held between samples.
struct DrawProfile {
  std::vector<DrawSample> samples;
  std::string label;  // e.g. "high" / "low" usage

  // Flow at an hour-of-day: value of the latest sample at or before t; zero
  // before the first sample; last value held after the final sample.
  double flow_at_hr(double t_hr) const {
    if (samples.empty() || t_hr < samples.front().time_hr) return 0.0;
    auto it = std::upper_bound(samples.begin(), samples.end(), t_hr,
                               [](double t, const DrawSample& s) { return t < s.time_hr; });
    return std::prev(it)->flow_lb_per_hr;
  }

  double zero_fraction() const {
    if (samples.empty()) return 1.0;
    const auto zeros = std::count_if(samples.begin(), samples.end(),
                                     [](const DrawSample& s) { return s.flow_lb_per_hr == 0.0; });
    return static_cast<double>(zeros) / static_cast<double>(samples.size());
  }
};

// Commitment interval [t0, tf): state telemetry refreshes at t0 and the
// committed flexibility holds until tf.
struct ControlWindow {
  double t0_min = 0.0;
  double tf_min = 15.0;

  double duration_min() const { return tf_min - t0_min; }
  void validate() const {
    if (!(tf_min > t0_min)) throw ValidationError("control window must have tf > t0");
  }
};

struct Device {
  EwhParams params;
  EwhState state;
};

// One Monte Carlo replication sampled on the output grid.
struct Replication {
  std::vector<double> power_kw;     // aggregate P over 'on' devices
  std::vector<double> fraction_on;  // |on| / N
};

struct EnsembleTrajectory {
  std::vector<double> time_min;  // offsets from window start, t0 = 0
  std::vector<Replication> replications;
  std::uint64_t seed = 0;         // master seed of the run
  std::uint64_t spec_digest = 0;  // PopulationSpec::digest() of the generator
};

// A time series (used for mean fraction-on curves and error curves).
struct Series {
  std::vector<double> t_min;
  std::vector<double> value;
};

// Independent, identically distributed devices; exactly
// round(init_on_fraction * N) of them start 'on', chosen uniformly at random.
// Initial temperatures sit inside each device's own deadband. Deterministic
// in (spec, seed).
inline std::vector<Device> sample_population(const PopulationSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<Device> devices;
  devices.reserve(static_cast<std::size_t>(spec.count));
  // Draw order per device: ambient, inlet, setpoint, deadband, tank,
  // water specific heat, shell, heater, power, band position.
  for (int i = 0; i < spec.count; ++i) {
    EwhParams p{.ambient_f = uniform_in(rng, spec.ambient_f.lo, spec.ambient_f.hi),
                .inlet_f = uniform_in(rng, spec.inlet_f.lo, spec.inlet_f.hi),
                .setpoint_f = uniform_in(rng, spec.setpoint_f.lo, spec.setpoint_f.hi),
                .deadband_f = uniform_in(rng, spec.deadband_f.lo, spec.deadband_f.hi),
                .tank_btu_per_f = uniform_in(rng, spec.tank_btu_per_f.lo, spec.tank_btu_per_f.hi),
                .water_btu_per_lb_f =
                    uniform_in(rng, spec.water_btu_per_lb_f.lo, spec.water_btu_per_lb_f.hi),
                .shell_btu_per_f_hr =
                    uniform_in(rng, spec.shell_btu_per_f_hr.lo, spec.shell_btu_per_f_hr.hi),
                .heater_btu_per_hr =
                    uniform_in(rng, spec.heater_btu_per_hr.lo, spec.heater_btu_per_hr.hi),
                .power_kw = uniform_in(rng, spec.power_kw.lo, spec.power_kw.hi)};
    p.validate();
    const double pos = uniform_in(rng, spec.init_band_position.lo, spec.init_band_position.hi);
    devices.push_back({p, {p.band_low_f() + pos * p.deadband_f, false}});
  }
  // Partial Fisher-Yates: pick the 'on' subset uniformly.
  std::vector<int> order(static_cast<std::size_t>(spec.count));
  std::iota(order.begin(), order.end(), 0);
  const int on_count = spec.initial_on_count();
  for (int i = 0; i < on_count; ++i) {
    const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(spec.count - i));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    devices[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].state.on = true;
  }
  return devices;
}

// Output grid: n = round(duration / dt) evenly spaced intervals, endpoints
// exact. A zero-length window degenerates to the initial snapshot alone.
inline std::vector<double> make_time_grid(double duration_min, double output_dt_min) {
  if (!(output_dt_min > 0.0)) throw ValidationError("output_dt must be > 0");
  if (duration_min < 0.0) throw ValidationError("window duration must be >= 0");
  if (duration_min == 0.0) return {0.0};
  const auto n = std::max<long>(1, std::lround(duration_min / output_dt_min));
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k)
    grid[static_cast<std::size_t>(k)] = duration_min * static_cast<double>(k) / static_cast<double>(n);
  return grid;
}

namespace detail {

// Advance one device across [from_min, to_min] of absolute clock time,
// cutting the interval at draw-profile breakpoints so each step_device call
// sees a constant draw.
inline EwhState step_over(EwhState state, const EwhParams& params, const DrawProfile* profile,
                          double from_min, double to_min) {
  if (profile == nullptr || profile->samples.empty()) {
    return step_device(state, params, 0.0, (to_min - from_min) / 60.0);
  }
  double t = from_min;
  while (t < to_min) {
    const double t_hr = t / 60.0;
    // Next profile breakpoint strictly after t.
    auto it = std::upper_bound(
        profile->samples.begin(), profile->samples.end(), t_hr,
        [](double v, const DrawSample& s) { return v < s.time_hr; });
    double cut_min = to_min;
    if (it != profile->samples.end()) cut_min = std::min(cut_min, it->time_hr * 60.0);
    // A breakpoint can round onto t itself; fall through to the interval end
    // rather than dropping the remainder.
    if (cut_min <= t) cut_min = to_min;
    state = step_device(state, params, profile->flow_at_hr(t_hr), (cut_min - t) / 60.0);
    t = cut_min;
  }
  return state;
}

}  // namespace detail

// Step every device in place from one absolute time to another, honoring the
// shared/per-device draw-profile convention of simulate_ensemble.
inline void advance_devices(std::vector<Device>& devices, std::span<const DrawProfile> profiles,
                            double from_min, double to_min) {
  if (!(to_min >= from_min)) throw ValidationError("cannot step devices backwards");
  if (!profiles.empty() && profiles.size() != 1 && profiles.size() != devices.size())
    throw ValidationError("draw profiles must be absent, shared, or one per device");
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const DrawProfile* profile = nullptr;
    if (profiles.size() == 1) profile = &profiles[0];
    else if (!profiles.empty()) profile = &profiles[i];
    devices[i].state = apply_hysteresis(devices[i].state, devices[i].params);
    devices[i].state = detail::step_over(devices[i].state, devices[i].params, profile, from_min, to_min);
  }
}

// One replication: every device stepped event-exactly across the window,
// aggregate power and fraction-on recorded on the output grid. `profiles`
// may be empty (zero draw everywhere), hold a single shared profile, or give
// one profile per device.
inline Replication simulate_ensemble(std::span<const Device> devices,
                                     std::span<const DrawProfile> profiles,
                                     const ControlWindow& window, double output_dt_min) {
  if (!(window.duration_min() >= 0.0)) throw ValidationError("control window must have tf >= t0");
  if (!profiles.empty() && profiles.size() != 1 && profiles.size() != devices.size())
    throw ValidationError("draw profiles must be absent, shared, or one per device");

  const std::vector<double> grid = make_time_grid(window.duration_min(), output_dt_min);
  Replication rep;
  rep.power_kw.assign(grid.size(), 0.0);
  rep.fraction_on.assign(grid.size(), 0.0);

  for (std::size_t i = 0; i < devices.size(); ++i) {
    const DrawProfile* profile = nullptr;
    if (profiles.size() == 1) profile = &profiles[0];
    else if (!profiles.empty()) profile = &profiles[i];

    EwhState st = apply_hysteresis(devices[i].state, devices[i].params);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (g > 0)
        st = detail::step_over(st, devices[i].params, profile, window.t0_min + grid[g - 1],
                               window.t0_min + grid[g]);
      if (st.on) {
        rep.power_kw[g] += devices[i].params.power_kw;
        rep.fraction_on[g] += 1.0;
      }
    }
  }
  const double n = static_cast<double>(devices.size());
  if (n > 0)
    for (double& f : rep.fraction_on) f /= n;
  return rep;
}

// Seeded Monte Carlo: `replications` independent populations and runs, with
// per-replication seeds derived from the master seed (see replication_seed).
// Bit-for-bit reproducible.
inline EnsembleTrajectory monte_carlo(const PopulationSpec& spec,
                                      std::span<const DrawProfile> profiles,
                                      const ControlWindow& window, int replications,
                                      std::uint64_t master_seed, double output_dt_min = 0.1) {
  if (replications < 1) throw ValidationError("replications must be >= 1");
  spec.validate();
  EnsembleTrajectory traj;
  traj.time_min = make_time_grid(window.duration_min(), output_dt_min);
  traj.seed = master_seed;
  traj.spec_digest = spec.digest();
  traj.replications.reserve(static_cast<std::size_t>(replications));
  for (int r = 0; r < replications; ++r) {
    const auto devices =
        sample_population(spec, replication_seed(master_seed, static_cast<std::uint64_t>(r)));
    traj.replications.push_back(simulate_ensemble(devices, profiles, window, output_dt_min));
  }
  return traj;
}

// Pointwise mean of fraction-on across replications.
inline Series mean_fraction_on(const EnsembleTrajectory& traj) {
  if (traj.replications.empty()) throw ValidationError("trajectory has no replications");
  Series out;
  out.t_min = traj.time_min;
  out.value.assign(traj.time_min.size(), 0.0);
  for (const Replication& rep : traj.replications)
    for (std::size_t g = 0; g < out.value.size(); ++g) out.value[g] += rep.fraction_on[g];
  for (double& v : out.value) v /= static_cast<double>(traj.replications.size());
  return out;
}

}  // namespace ewhflex
