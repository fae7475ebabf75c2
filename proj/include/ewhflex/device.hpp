#pragma once

#include <cmath>
#include <optional>

#include "ewhflex/errors.hpp"

namespace ewhflex {

// Physical parameters of one electric water heater. Units follow the usual
// residential-stock conventions: temperatures in degF, thermal quantities in
// BTU, flow in lb/hr, electric power in kW.
struct EwhParams {
  double ambient_f = 75.0;             // room temperature around the tank
  double inlet_f = 60.0;               // temperature of replacement water
  double setpoint_f = 130.0;           // thermostat set-point
  double deadband_f = 20.0;            // full hysteresis width
  double tank_btu_per_f = 417.11;      // thermal capacitance of tank water
  double water_btu_per_lb_f = 1.0;     // specific heat of water
  double shell_btu_per_f_hr = 3.0;     // conductance of the tank shell
  double heater_btu_per_hr = 15360.0;  // resistor heating capacity
  double power_kw = 4.5;               // electric draw while 'on'

  double band_low_f() const { return setpoint_f - deadband_f / 2.0; }
  double band_high_f() const { return setpoint_f + deadband_f / 2.0; }

  void validate() const {
    if (!(tank_btu_per_f > 0.0)) throw ValidationError("tank capacitance must be > 0");
    if (!(water_btu_per_lb_f > 0.0)) throw ValidationError("water specific heat must be > 0");
    if (!(shell_btu_per_f_hr > 0.0)) throw ValidationError("shell conductance must be > 0");
    if (!(heater_btu_per_hr > 0.0)) throw ValidationError("heater capacity must be > 0");
    if (!(power_kw > 0.0)) throw ValidationError("on-state power must be > 0");
    if (!(deadband_f > 0.0)) throw ValidationError("deadband width must be > 0");
    if (!(inlet_f < band_low_f()))
      throw ValidationError("inlet temperature must lie below the hysteresis band");
  }
};

// Hybrid state: continuous tank temperature plus the thermostat relay.
struct EwhState {
  double temp_f = 130.0;
  bool on = false;
};

// dT/dt = -decay * T + forcing, valid while the draw rate and relay state
// are constant.
struct ThermalCoefficients {
  double decay_per_hr = 0.0;    // (draw*C_p + W) / C_w
  double forcing_f_per_hr = 0.0;

  // Asymptote of the segment: the temperature the tank relaxes toward.
  double equilibrium_f() const { return forcing_f_per_hr / decay_per_hr; }
};

inline ThermalCoefficients thermal_coefficients(const EwhParams& p, double draw_lb_per_hr,
                                                bool on) {
  if (draw_lb_per_hr < 0.0) throw ValidationError("draw rate must be >= 0");
  const double mdot_cp = draw_lb_per_hr * p.water_btu_per_lb_f;
  return {
      .decay_per_hr = (mdot_cp + p.shell_btu_per_f_hr) / p.tank_btu_per_f,
      .forcing_f_per_hr = ((on ? p.heater_btu_per_hr : 0.0) + mdot_cp * p.inlet_f +
                           p.shell_btu_per_f_hr * p.ambient_f) /
                          p.tank_btu_per_f,
  };
}

// Closed-form solution of the segment ODE; exact for piecewise-constant
// coefficients, no truncation error.
inline double advance_temperature(double temp_f, const ThermalCoefficients& c, double dt_hr) {
  if (dt_hr < 0.0) throw ValidationError("dt must be >= 0");
  if (!(c.decay_per_hr > 0.0)) throw ValidationError("decay rate must be > 0");
  const double eq = c.equilibrium_f();
  return eq + (temp_f - eq) * std::exp(-c.decay_per_hr * dt_hr);
}

// Smallest t >= 0 at which the trajectory from temp_f reaches threshold_f.
// nullopt when the threshold sits on the far side of the equilibrium (the
// exponential approach never gets there).
inline std::optional<double> time_to_threshold(double temp_f, const ThermalCoefficients& c,
                                               double threshold_f) {
  if (!(c.decay_per_hr > 0.0)) throw ValidationError("decay rate must be > 0");
  if (temp_f == threshold_f) return 0.0;
  const double eq = c.equilibrium_f();
  const double num = temp_f - eq;
  const double den = threshold_f - eq;
  if (num == 0.0) return std::nullopt;  // sitting at equilibrium, never moves
  const double ratio = num / den;
  if (!(ratio >= 1.0)) return std::nullopt;  // threshold behind us or unreachable
  return std::log(ratio) / c.decay_per_hr;
}

// Thermostat relay of the hysteresis controller. Idempotent; temperature
// untouched. Boundary comparisons are non-strict.
inline EwhState apply_hysteresis(EwhState s, const EwhParams& p) {
  if (s.temp_f >= p.band_high_f()) {
    s.on = false;
  } else if (s.temp_f <= p.band_low_f()) {
    s.on = true;
  }
  return s;
}

// Advance one device over dt_hr of constant draw, resolving every hysteresis
// crossing inside the interval analytically. Each segment uses the exact
// exponential solution; a crossing detected at t* switches the relay at t*+
// with the temperature pinned to the threshold.
inline EwhState step_device(EwhState state, const EwhParams& p, double draw_lb_per_hr,
                            double dt_hr) {
  if (dt_hr < 0.0) throw ValidationError("dt must be >= 0");
  if (draw_lb_per_hr < 0.0) throw ValidationError("draw rate must be >= 0");

  state = apply_hysteresis(state, p);
  double remaining = dt_hr;
  while (remaining > 0.0) {
    const ThermalCoefficients c = thermal_coefficients(p, draw_lb_per_hr, state.on);
    // The only threshold that can flip the relay mid-segment: an 'on' device
    // heating to the top of the band, or an 'off' device cooling to the
    // bottom. An 'on' device dragged below the band by heavy draw stays on.
    const double threshold = state.on ? p.band_high_f() : p.band_low_f();
    const bool approaching = state.on ? (state.temp_f < threshold && c.equilibrium_f() > threshold)
                                      : (state.temp_f > threshold && c.equilibrium_f() < threshold);
    std::optional<double> hit;
    if (approaching) hit = time_to_threshold(state.temp_f, c, threshold);
    if (hit && *hit <= remaining) {
      state.temp_f = threshold;
      state.on = !state.on;
      remaining -= *hit;
    } else {
      state.temp_f = advance_temperature(state.temp_f, c, remaining);
      remaining = 0.0;
    }
  }
  return state;
}

}  // namespace ewhflex
