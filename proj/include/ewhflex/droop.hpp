#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ewhflex/errors.hpp"

namespace ewhflex {

// Frequency range assigned to the ensemble for under-frequency response.
struct DroopBand {
  double omega_u_hz = 59.98;
  double omega_l_hz = 59.90;
  double omega_0_hz = 60.0;

  double width_hz() const { return omega_u_hz - omega_l_hz; }
  void validate() const {
    if (!(omega_l_hz < omega_u_hz && omega_u_hz <= omega_0_hz))
      throw ValidationError("droop band requires omega_l < omega_u <= omega_0");
  }
};

struct OnDevice {
  int id = 0;
  double power_kw = 0.0;
};

// Per-device turn-off thresholds spread across the band so the staircase of
// responding devices tracks the linear droop target. thresholds[i] pairs with
// ordered_devices[i]; thresholds are strictly decreasing.
struct ThresholdAssignment {
  std::vector<OnDevice> ordered_devices;
  std::vector<double> thresholds_hz;
  double total_on_power_kw = 0.0;
  DroopBand band;
};

// Threshold for device i at cumulative power C_i:
//   omega_c_i = omega_u - (omega_u - omega_l) * C_i / P_total.
// Devices are ordered by ascending id; positive powers make the cumulative
// sums strict, so thresholds are strictly decreasing and no tie-break is
// needed at response time.
inline ThresholdAssignment assign_thresholds(std::vector<OnDevice> on_devices,
                                             const DroopBand& band) {
  band.validate();
  if (on_devices.empty()) throw ValidationError("cannot assign thresholds to an empty on-set");
  for (const OnDevice& d : on_devices)
    if (!(d.power_kw > 0.0)) throw ValidationError("on-device power must be > 0");

  std::sort(on_devices.begin(), on_devices.end(),
            [](const OnDevice& a, const OnDevice& b) { return a.id < b.id; });

  ThresholdAssignment out;
  out.band = band;
  out.total_on_power_kw = 0.0;
  for (const OnDevice& d : on_devices) out.total_on_power_kw += d.power_kw;

  out.thresholds_hz.reserve(on_devices.size());
  double cumulative = 0.0;
  for (const OnDevice& d : on_devices) {
    cumulative += d.power_kw;
    out.thresholds_hz.push_back(band.omega_u_hz -
                                band.width_hz() * cumulative / out.total_on_power_kw);
  }
  out.ordered_devices = std::move(on_devices);
  return out;
}

// Response policy: device i turns off iff omega <= its threshold (inclusive).
// Because thresholds decrease along the ordering, responders form a prefix.
inline std::vector<int> respond_to_frequency(const ThresholdAssignment& assign, double omega_hz) {
  std::vector<int> off_ids;
  for (std::size_t i = 0; i < assign.thresholds_hz.size(); ++i) {
    if (omega_hz <= assign.thresholds_hz[i])
      off_ids.push_back(assign.ordered_devices[i].id);
    else
      break;
  }
  return off_ids;
}

// Ensemble power immediately after the event: total on-power minus every
// responding device.
inline double post_event_power(const ThresholdAssignment& assign, double omega_hz) {
  double shed = 0.0;
  for (std::size_t i = 0; i < assign.thresholds_hz.size(); ++i) {
    if (omega_hz <= assign.thresholds_hz[i])
      shed += assign.ordered_devices[i].power_kw;
    else
      break;
  }
  return assign.total_on_power_kw - shed;
}

// The smooth droop target the staircase approximates: full committed
// reduction at omega_l, none at omega_u, linear in between.
inline double target_droop_power(const DroopBand& band, double omega_hz, double committed_kw,
                                 double baseline_kw) {
  band.validate();
  if (!(committed_kw <= baseline_kw))
    throw ValidationError("committed reduction cannot exceed the baseline");
  const double raw = (band.omega_u_hz - omega_hz) / band.width_hz();
  const double fraction = std::clamp(raw, 0.0, 1.0);
  return baseline_kw - committed_kw * fraction;
}

}  // namespace ewhflex
