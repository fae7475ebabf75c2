#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ewhflex/analytics.hpp"
#include "ewhflex/errors.hpp"
#include "ewhflex/population.hpp"

namespace ewhflex {

struct FrequencyEvent {
  double t_min = 0.0;
  double omega_hz = 60.0;
};

namespace detail {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

inline double parse_double(std::string_view field, int row, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw ValidationError("row " + std::to_string(row) + ": cannot parse " + what + " from '" +
                          std::string(field) + "'");
  return v;
}

// Reads the header line and checks it verbatim (modulo whitespace).
inline void expect_header(std::istream& in, std::string_view expected) {
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("empty input: expected header '" + std::string(expected) + "'");
  if (trim(line) != expected)
    throw ValidationError("row 1: expected header '" + std::string(expected) + "', got '" +
                          std::string(trim(line)) + "'");
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

}  // namespace detail

// ---- draw profiles ----------------------------------------------------------
// Format: header `time_hr,flow_lb_per_hr`, one sample per row. Row numbers in
// errors count the header as row 1.

inline DrawProfile load_draw_profile(std::istream& in, std::string label = {}) {
  detail::expect_header(in, "time_hr,flow_lb_per_hr");
  DrawProfile profile;
  profile.label = std::move(label);
  std::string line;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 2)
      throw ValidationError("row " + std::to_string(row) + ": expected 2 fields, got " +
                            std::to_string(fields.size()));
    DrawSample s{detail::parse_double(fields[0], row, "time_hr"),
                 detail::parse_double(fields[1], row, "flow_lb_per_hr")};
    if (s.flow_lb_per_hr < 0.0)
      throw ValidationError("row " + std::to_string(row) + ": negative flow rate");
    if (!profile.samples.empty() && !(s.time_hr > profile.samples.back().time_hr))
      throw ValidationError("row " + std::to_string(row) + ": sample times must be strictly increasing");
    profile.samples.push_back(s);
  }
  return profile;
}

inline DrawProfile load_draw_profile_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return load_draw_profile(in, path.stem().string());
}

// ---- trajectories -----------------------------------------------------------
// Format: header `replication,t_min,P_sigma_kW,fraction_on`; t_min counts
// minutes from the window start; replications are 0-based and contiguous.

inline void write_trajectory_csv(std::ostream& out, const EnsembleTrajectory& traj) {
  out << "replication,t_min,P_sigma_kW,fraction_on\n";
  for (std::size_t r = 0; r < traj.replications.size(); ++r) {
    const Replication& rep = traj.replications[r];
    for (std::size_t g = 0; g < traj.time_min.size(); ++g) {
      out << r << ',' << detail::format_double(traj.time_min[g]) << ','
          << detail::format_double(rep.power_kw[g]) << ','
          << detail::format_double(rep.fraction_on[g]) << '\n';
    }
  }
}

inline EnsembleTrajectory load_trajectory_csv(std::istream& in) {
  detail::expect_header(in, "replication,t_min,P_sigma_kW,fraction_on");
  EnsembleTrajectory traj;
  std::string line;
  int row = 1;
  long current_rep = -1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 4)
      throw ValidationError("row " + std::to_string(row) + ": expected 4 fields");
    const auto rep_idx = static_cast<long>(detail::parse_double(fields[0], row, "replication"));
    const double t = detail::parse_double(fields[1], row, "t_min");
    const double p = detail::parse_double(fields[2], row, "P_sigma_kW");
    const double f = detail::parse_double(fields[3], row, "fraction_on");
    if (rep_idx == current_rep + 1) {
      traj.replications.emplace_back();
      ++current_rep;
    } else if (rep_idx != current_rep) {
      throw ValidationError("row " + std::to_string(row) + ": replication indices must be contiguous");
    }
    if (current_rep == 0) traj.time_min.push_back(t);
    traj.replications.back().power_kw.push_back(p);
    traj.replications.back().fraction_on.push_back(f);
  }
  if (traj.replications.empty()) throw ValidationError("trajectory file has no data rows");
  for (const Replication& rep : traj.replications)
    if (rep.power_kw.size() != traj.time_min.size())
      throw ValidationError("trajectory file has ragged replications");
  return traj;
}

// ---- frequency events -------------------------------------------------------
// Format: header `t_min,omega_hz`, exactly one data row. Scenarios with more
// than one event per window are rejected here.

inline FrequencyEvent load_event_csv(std::istream& in) {
  detail::expect_header(in, "t_min,omega_hz");
  std::string line;
  int row = 1;
  std::vector<FrequencyEvent> events;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 2)
      throw ValidationError("row " + std::to_string(row) + ": expected 2 fields");
    events.push_back({detail::parse_double(fields[0], row, "t_min"),
                      detail::parse_double(fields[1], row, "omega_hz")});
  }
  if (events.empty()) throw ValidationError("event file has no event row");
  if (events.size() > 1)
    throw ValidationError("at most one frequency event per control window; got " +
                          std::to_string(events.size()));
  return events.front();
}

inline FrequencyEvent load_event_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return load_event_csv(in);
}

// ---- quantity/value reports -------------------------------------------------

struct ReportRow {
  std::string quantity;
  std::string value;  // formatted; numeric rows use format_double
};

inline void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "quantity,value\n";
  for (const ReportRow& r : rows) out << r.quantity << ',' << r.value << '\n';
}

inline std::vector<ReportRow> load_report_csv(std::istream& in) {
  detail::expect_header(in, "quantity,value");
  std::vector<ReportRow> rows;
  std::string line;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 2)
      throw ValidationError("row " + std::to_string(row) + ": expected 2 fields");
    rows.push_back({std::string(fields[0]), std::string(fields[1])});
  }
  return rows;
}

// ---- error sweeps -----------------------------------------------------------
// One analytic and one empirical error-vs-time curve per commitment level.

struct SweepCurves {
  double commitment_kw = 0.0;
  Series analytic;
  Series empirical;
};

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepCurves>& curves) {
  out << "commitment_kW,t_min,analytic_err,empirical_err\n";
  for (const SweepCurves& c : curves) {
    for (std::size_t g = 0; g < c.analytic.t_min.size(); ++g) {
      out << detail::format_double(c.commitment_kw) << ','
          << detail::format_double(c.analytic.t_min[g]) << ','
          << detail::format_double(c.analytic.value[g]) << ','
          << detail::format_double(c.empirical.value[g]) << '\n';
    }
  }
}

inline std::vector<SweepCurves> load_sweep_csv(std::istream& in) {
  detail::expect_header(in, "commitment_kW,t_min,analytic_err,empirical_err");
  std::vector<SweepCurves> curves;
  std::string line;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 4)
      throw ValidationError("row " + std::to_string(row) + ": expected 4 fields");
    const double c = detail::parse_double(fields[0], row, "commitment_kW");
    if (curves.empty() || curves.back().commitment_kw != c) curves.push_back({c, {}, {}});
    SweepCurves& cur = curves.back();
    cur.analytic.t_min.push_back(detail::parse_double(fields[1], row, "t_min"));
    cur.analytic.value.push_back(detail::parse_double(fields[2], row, "analytic_err"));
    cur.empirical.t_min.push_back(cur.analytic.t_min.back());
    cur.empirical.value.push_back(detail::parse_double(fields[3], row, "empirical_err"));
  }
  return curves;
}

}  // namespace ewhflex
