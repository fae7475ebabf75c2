// Test-only reference implementations, kept independent of the library's
// computation paths: a fine-step explicit integrator for the device dynamics,
// exhaustive on/off enumeration and Monte Carlo sampling for the expected
// squared relative error.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "ewhflex/device.hpp"
#include "ewhflex/rng.hpp"

namespace oracles {

// Explicit Euler with within-step linear event localization. Step size 1e-4 hr
// keeps the discretization error far below the comparison tolerances.
inline ewhflex::EwhState integrate_fine(ewhflex::EwhState state, const ewhflex::EwhParams& p,
                                        double draw_lb_per_hr, double dt_hr,
                                        double step_hr = 1e-4) {
  state = ewhflex::apply_hysteresis(state, p);
  double t = 0.0;
  while (t < dt_hr) {
    const double h = std::min(step_hr, dt_hr - t);
    const auto c = ewhflex::thermal_coefficients(p, draw_lb_per_hr, state.on);
    const double deriv = -c.decay_per_hr * state.temp_f + c.forcing_f_per_hr;
    const double next = state.temp_f + h * deriv;
    const double threshold = state.on ? p.band_high_f() : p.band_low_f();
    const bool crossed = state.on ? (state.temp_f < threshold && next >= threshold)
                                  : (state.temp_f > threshold && next <= threshold);
    if (crossed) {
      const double frac = (threshold - state.temp_f) / (next - state.temp_f);
      t += h * frac;
      state.temp_f = threshold;
      state.on = !state.on;
    } else {
      state.temp_f = next;
      t += h;
    }
  }
  return state;
}

// E[((sum s_i P - commitment) / commitment)^2] by summing all 2^N on/off
// outcomes, equal powers P, independent Bernoulli(p) states.
inline double enumerate_sq_error(int n, double p, double power_kw, double commitment_kw) {
  long double total = 0.0L;  // extended accumulator keeps the 2^N sum well under tolerance
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    const int k = std::popcount(mask);
    const double weight = std::pow(p, k) * std::pow(1.0 - p, n - k);
    const double xi = (static_cast<double>(k) * power_kw - commitment_kw) / commitment_kw;
    total += static_cast<long double>(weight * xi * xi);
  }
  return static_cast<double>(total);
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Sample mean of the squared relative error with powers ~ U(lo, hi) i.i.d.
// and states ~ Bernoulli(p) i.i.d.
inline McEstimate sample_sq_error(int n, double p, double power_lo, double power_hi,
                                  double commitment_kw, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double acc = 0.0, acc2 = 0.0;
  for (int s = 0; s < samples; ++s) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double power = ewhflex::uniform_in(rng, power_lo, power_hi);
      if (ewhflex::uniform01(rng) < p) total += power;
    }
    const double xi = (total - commitment_kw) / commitment_kw;
    acc += xi * xi;
    acc2 += xi * xi * xi * xi;
  }
  const double m = acc / samples;
  const double var = std::max(0.0, acc2 / samples - m * m);
  return {m, std::sqrt(var / samples)};
}

}  // namespace oracles
