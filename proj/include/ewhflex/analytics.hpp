#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ewhflex/errors.hpp"
#include "ewhflex/population.hpp"

namespace ewhflex {

// Affine model of the probability that a randomly selected device is 'on':
//   p_on(t) = p0 - (t - t0) * [alpha_on * p0 - alpha_off * (1 - p0)].
// alpha_on / alpha_off weigh how likely an on/off period is short enough to
// end inside the window; they are estimated from ensemble trajectories.
struct OnProbabilityModel {
  double p0 = 1.0;
  double alpha_on_per_min = 0.0;
  double alpha_off_per_min = 0.0;
  ControlWindow window;

  double slope_per_min() const {
    return -(alpha_on_per_min * p0 - alpha_off_per_min * (1.0 - p0));
  }

  void validate() const {
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw ValidationError("p0 must lie in [0, 1]");
    if (alpha_on_per_min < 0.0) throw ValidationError("alpha_on must be >= 0");
    if (alpha_off_per_min < 0.0) throw ValidationError("alpha_off must be >= 0");
    window.validate();
  }
};

// Evaluate the affine on-probability at absolute time t (minutes). Values
// escaping [0, 1] are clamped and flagged: a clamp means the window is too
// long for the at-most-one-switch assumption behind the model.
inline double p_on(const OnProbabilityModel& model, double t_min, bool* clamped = nullptr) {
  constexpr double kTimeTol = 1e-9;
  if (t_min < model.window.t0_min - kTimeTol || t_min > model.window.tf_min + kTimeTol)
    throw ValidationError("p_on evaluated outside the control window");
  const double raw = model.p0 + (t_min - model.window.t0_min) * model.slope_per_min();
  const double out = std::clamp(raw, 0.0, 1.0);
  if (clamped != nullptr) *clamped = (out != raw);
  return out;
}

// First and second moments of the per-device power rating.
struct PowerMoments {
  double mean_kw = 0.0;
  double mean_sq_kw2 = 0.0;
  int count = 0;

  void validate() const {
    if (!(mean_kw > 0.0)) throw ValidationError("mean power must be > 0");
    if (!(mean_sq_kw2 >= mean_kw * mean_kw))
      throw ValidationError("second moment below mean^2 violates Jensen");
    if (count < 2) throw ValidationError("ensemble size must be >= 2");
  }

  // Analytic moments of a uniform power distribution on [lo, hi].
  static PowerMoments from_uniform(double lo, double hi, int n) {
    return {(lo + hi) / 2.0, (lo * lo + lo * hi + hi * hi) / 3.0, n};
  }

  // Empirical moments of a sampled population.
  static PowerMoments from_devices(std::span<const Device> devices) {
    double m1 = 0.0, m2 = 0.0;
    for (const Device& d : devices) {
      m1 += d.params.power_kw;
      m2 += d.params.power_kw * d.params.power_kw;
    }
    const double n = static_cast<double>(devices.size());
    return {m1 / n, m2 / n, static_cast<int>(devices.size())};
  }
};

// Expected squared relative error between actual ensemble power and the
// committed level, for independent on/off states at probability p:
//   N/(N-1) * [1 - <P^2>/(2 PB <P>) - p (N-1) <P>/PB]^2
//   - N/(N-1) * [1 - <P^2>/(2 PB <P>)]^2 + 1.
inline double expected_sq_error(const PowerMoments& m, double p, double commitment_kw) {
  m.validate();
  if (!(commitment_kw > 0.0)) throw ValidationError("commitment must be > 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probability must lie in [0, 1]");
  const double n = static_cast<double>(m.count);
  const double ratio = n / (n - 1.0);
  const double u = 1.0 - m.mean_sq_kw2 / (2.0 * commitment_kw * m.mean_kw);
  const double q = p * (n - 1.0) * m.mean_kw / commitment_kw;
  return ratio * (u - q) * (u - q) - ratio * u * u + 1.0;
}

// The error curve is quadratic in t with nonnegative leading coefficient, so
// its supremum over the window sits at an endpoint. Ties report the start.
struct SupError {
  double value = 0.0;
  double argmax_t_min = 0.0;
};

inline SupError sup_error(const PowerMoments& m, const OnProbabilityModel& model,
                          double commitment_kw) {
  model.validate();
  const double e0 = expected_sq_error(m, p_on(model, model.window.t0_min), commitment_kw);
  const double ef = expected_sq_error(m, p_on(model, model.window.tf_min), commitment_kw);
  if (e0 >= ef) return {e0, model.window.t0_min};
  return {ef, model.window.tf_min};
}

struct SweepPoint {
  double commitment_kw = 0.0;
  double sup_sq_error = 0.0;
};

struct FlexibilityAssessment {
  double optimal_commitment_kw = 0.0;
  double error_at_start = 0.0;
  double error_at_end = 0.0;
  std::vector<SweepPoint> sweep;      // optional commitment sweep
  std::string moments_source = "analytic";
};

// Closed-form optimal commitment: the level equalizing the expected squared
// error at the two window endpoints,
//   PB* = <P^2>/(2<P>) + (N-1) (p_on(t0) + p_on(tf)) / 2 * <P>.
inline FlexibilityAssessment optimal_flexibility(const PowerMoments& m,
                                                 const OnProbabilityModel& model) {
  m.validate();
  model.validate();
  const double p0 = p_on(model, model.window.t0_min);
  const double pf = p_on(model, model.window.tf_min);
  const double n = static_cast<double>(m.count);
  FlexibilityAssessment out;
  out.optimal_commitment_kw =
      m.mean_sq_kw2 / (2.0 * m.mean_kw) + (n - 1.0) * (p0 + pf) / 2.0 * m.mean_kw;
  out.error_at_start = expected_sq_error(m, p0, out.optimal_commitment_kw);
  out.error_at_end = expected_sq_error(m, pf, out.optimal_commitment_kw);
  return out;
}

// Evaluate the endpoint supremum over an even commitment grid; `steps` is the
// number of grid points, endpoints included.
inline std::vector<SweepPoint> sup_error_sweep(const PowerMoments& m,
                                               const OnProbabilityModel& model, double lo_kw,
                                               double hi_kw, int steps) {
  if (!(lo_kw > 0.0 && lo_kw < hi_kw)) throw ValidationError("sweep requires 0 < lo < hi");
  if (steps < 2) throw ValidationError("sweep requires at least 2 grid points");
  std::vector<SweepPoint> sweep;
  sweep.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    const double c = lo_kw + (hi_kw - lo_kw) * static_cast<double>(k) / (steps - 1.0);
    sweep.push_back({c, sup_error(m, model, c).value});
  }
  return sweep;
}

// Brute-force minimizer of the endpoint supremum over a commitment grid.
// Validation oracle for the closed form, not a production path.
inline double grid_search_flexibility(const PowerMoments& m, const OnProbabilityModel& model,
                                      double lo_kw, double hi_kw, int steps) {
  const auto sweep = sup_error_sweep(m, model, lo_kw, hi_kw, steps);
  const auto best = std::min_element(
      sweep.begin(), sweep.end(),
      [](const SweepPoint& a, const SweepPoint& b) { return a.sup_sq_error < b.sup_sq_error; });
  return best->commitment_kw;
}

// Pointwise mean over replications of ((P(t) - PB) / PB)^2.
inline Series empirical_sq_error(const EnsembleTrajectory& traj, double commitment_kw) {
  if (!(commitment_kw > 0.0)) throw ValidationError("commitment must be > 0");
  if (traj.replications.empty()) throw ValidationError("trajectory has no replications");
  Series out;
  out.t_min = traj.time_min;
  out.value.assign(traj.time_min.size(), 0.0);
  for (const Replication& rep : traj.replications) {
    for (std::size_t g = 0; g < out.value.size(); ++g) {
      const double xi = (rep.power_kw[g] - commitment_kw) / commitment_kw;
      out.value[g] += xi * xi;
    }
  }
  for (double& v : out.value) v /= static_cast<double>(traj.replications.size());
  return out;
}

// ---- alpha estimation -----------------------------------------------------

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

// Ordinary least squares line through a series. A constant series fits its
// own mean with R^2 = 1.
inline LinearFit linear_fit(const Series& s) {
  const std::size_t n = s.t_min.size();
  if (n < 2 || s.value.size() != n)
    throw ValidationError("linear fit needs >= 2 aligned samples");
  double st = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    st += s.t_min[i];
    sv += s.value[i];
  }
  const double tm = st / static_cast<double>(n);
  const double vm = sv / static_cast<double>(n);
  double stt = 0.0, stv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (s.t_min[i] - tm) * (s.t_min[i] - tm);
    stv += (s.t_min[i] - tm) * (s.value[i] - vm);
  }
  if (!(stt > 0.0)) throw ValidationError("linear fit needs distinct sample times");
  LinearFit fit;
  fit.slope = stv / stt;
  fit.intercept = vm - fit.slope * tm;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = s.value[i] - (fit.intercept + fit.slope * s.t_min[i]);
    ss_res += e * e;
    ss_tot += (s.value[i] - vm) * (s.value[i] - vm);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

// One mean fraction-on curve together with the initial on-fraction that
// produced it.
struct LabeledCurve {
  double p0 = 1.0;
  Series curve;
};

struct CurveDiagnostics {
  double p0 = 0.0;
  LinearFit fit;
};

struct AlphaEstimate {
  double alpha_on_per_min = 0.0;
  // Unset when every input curve has p0 = 1 (the alpha_off coefficient then
  // vanishes from the slope relation).
  std::optional<double> alpha_off_per_min;
  std::vector<CurveDiagnostics> diagnostics;
  bool negative_alpha_warning = false;
};

// Recover (alpha_on, alpha_off) from measured mean fraction-on curves via the
// slope relation  slope_j = -[alpha_on * p0_j - alpha_off * (1 - p0_j)].
// With more curves than unknowns the relation is solved in the least-squares
// sense. Negative estimates are flagged, never clamped.
inline AlphaEstimate estimate_alphas(std::span<const LabeledCurve> curves) {
  if (curves.empty()) throw ValidationError("alpha estimation needs at least one curve");
  AlphaEstimate out;
  bool all_p0_one = true;
  bool all_p0_equal = true;
  for (const LabeledCurve& c : curves) {
    if (!(c.p0 >= 0.0 && c.p0 <= 1.0)) throw ValidationError("curve p0 must lie in [0, 1]");
    out.diagnostics.push_back({c.p0, linear_fit(c.curve)});
    if (c.p0 != 1.0) all_p0_one = false;
    if (c.p0 != curves[0].p0) all_p0_equal = false;
  }

  if (all_p0_one) {
    // slope_j = -alpha_on; alpha_off never enters.
    double acc = 0.0;
    for (const CurveDiagnostics& d : out.diagnostics) acc += -d.fit.slope;
    out.alpha_on_per_min = acc / static_cast<double>(out.diagnostics.size());
    out.alpha_off_per_min = std::nullopt;
  } else if (all_p0_equal) {
    throw ValidationError(
        "alpha estimation underdetermined: curves share a single p0 != 1; "
        "provide a second curve with a different initial on-fraction");
  } else {
    // Normal equations of slope_j = -p0_j * a_on + (1 - p0_j) * a_off.
    double axx = 0.0, axy = 0.0, ayy = 0.0, bx = 0.0, by = 0.0;
    for (const CurveDiagnostics& d : out.diagnostics) {
      const double x = -d.p0;
      const double y = 1.0 - d.p0;
      axx += x * x;
      axy += x * y;
      ayy += y * y;
      bx += x * d.fit.slope;
      by += y * d.fit.slope;
    }
    const double det = axx * ayy - axy * axy;
    if (!(std::abs(det) > 1e-300))
      throw ValidationError("alpha estimation underdetermined: degenerate curve set");
    out.alpha_on_per_min = (bx * ayy - by * axy) / det;
    out.alpha_off_per_min = (axx * by - axy * bx) / det;
  }

  if (out.alpha_on_per_min < 0.0 ||
      (out.alpha_off_per_min.has_value() && *out.alpha_off_per_min < 0.0))
    out.negative_alpha_warning = true;
  return out;
}

}  // namespace ewhflex
