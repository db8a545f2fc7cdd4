#pragma once

// Tabular formats. Doubles are written in shortest round-trip form so every
// table reads back bit-exactly.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "trackscan/control.hpp"
#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"
#include "trackscan/grr.hpp"
#include "trackscan/step_report.hpp"

namespace trackscan::io {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed-point with `digits` decimals, for human-facing report tables.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Format, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Format, "not an integer: '" + std::string(s) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view s) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw Error(ErrorCode::Format, "not a boolean: '" + std::string(s) + "'");
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

/// Reads a CSV stream and checks the header matches `expected` exactly.
inline std::vector<std::vector<std::string>> read_csv_records(std::istream& in, std::string_view expected_header) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Format, "empty CSV, expected header " + std::string(expected_header));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw Error(ErrorCode::Format, "CSV header '" + line + "' does not match '" + std::string(expected_header) + "'");
  }
  const auto columns = csv_split(expected_header).size();
  std::vector<std::vector<std::string>> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = csv_split(line);
    if (fields.size() != columns) {
      throw Error(ErrorCode::Format, "CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                         " fields, expected " + std::to_string(columns));
    }
    records.push_back(std::move(fields));
  }
  return records;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

// ---------------------------------------------------------------------------
// Laser profile: column,row_subpixel,valid

inline constexpr std::string_view profile_header = "column,row_subpixel,valid";

inline void write_profile_csv(std::ostream& out, const LaserProfile& profile) {
  out << profile_header << '\n';
  for (int c = 0; c < profile.columns(); ++c) {
    out << c << ',' << format_double(profile.row(c)) << ',' << (profile.is_valid(c) ? 1 : 0) << '\n';
  }
}

inline LaserProfile read_profile_csv(std::istream& in, int frame_height = 0) {
  const auto records = read_csv_records(in, profile_header);
  LaserProfile profile(static_cast<int>(records.size()), frame_height);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (parse_int(records[i][0]) != static_cast<long long>(i)) {
      throw Error(ErrorCode::Format, "profile columns must be consecutive from 0");
    }
    profile.row_subpixel[i] = parse_double(records[i][1]);
    profile.valid[i] = parse_bool(records[i][2]) ? 1 : 0;
  }
  return profile;
}

// ---------------------------------------------------------------------------
// R&R grid: part,operator,trial,value

inline constexpr std::string_view grr_header = "part,operator,trial,value";

inline void write_grr_csv(std::ostream& out, const GrrMeasurementSet& set) {
  out << grr_header << '\n';
  for (int i = 0; i < set.parts; ++i)
    for (int j = 0; j < set.operators; ++j)
      for (int k = 0; k < set.trials; ++k)
        out << i + 1 << ',' << j + 1 << ',' << k + 1 << ',' << format_double(set.at(i, j, k)) << '\n';
}

/// Labels may be any text; parts, operators and trials are indexed in order of
/// first appearance. Missing or duplicated cells are rejected.
inline GrrMeasurementSet read_grr_csv(std::istream& in, std::string unit = "um") {
  const auto records = read_csv_records(in, grr_header);
  std::map<std::string, int> parts, ops, trials;
  std::vector<std::string> part_order, op_order, trial_order;
  auto intern = [](std::map<std::string, int>& m, std::vector<std::string>& order, const std::string& key) {
    auto [it, inserted] = m.emplace(key, static_cast<int>(order.size()));
    if (inserted) order.push_back(key);
    return it->second;
  };
  struct Cell {
    int p, o, t;
    double v;
  };
  std::vector<Cell> cells;
  cells.reserve(records.size());
  for (const auto& rec : records) {
    cells.push_back({intern(parts, part_order, rec[0]), intern(ops, op_order, rec[1]),
                     intern(trials, trial_order, rec[2]), parse_double(rec[3])});
  }
  GrrMeasurementSet set(static_cast<int>(part_order.size()), static_cast<int>(op_order.size()),
                        static_cast<int>(trial_order.size()), std::move(unit));
  std::vector<std::uint8_t> seen(set.values.size(), 0);
  for (const auto& c : cells) {
    const auto idx = set.index(c.p, c.o, c.t);
    if (seen[idx]) {
      throw Error(ErrorCode::Format, "duplicate R&R cell part=" + part_order[static_cast<std::size_t>(c.p)] +
                                         " operator=" + op_order[static_cast<std::size_t>(c.o)] +
                                         " trial=" + trial_order[static_cast<std::size_t>(c.t)]);
    }
    seen[idx] = 1;
    set.values[idx] = c.v;
  }
  for (auto s : seen) {
    if (!s) throw Error(ErrorCode::Format, "R&R grid is incomplete");
  }
  return set;
}

// ---------------------------------------------------------------------------
// Per-frame measurements: frame_id,width_um,height_um,diffusion_um,found

inline constexpr std::string_view measurement_header = "frame_id,width_um,height_um,diffusion_um,found";

struct MeasurementRow {
  std::string frame_id;
  double width_um = 0.0;
  double height_um = 0.0;
  double diffusion_um = 0.0;
  bool found = false;
};

inline void write_measurement_row(std::ostream& out, const MeasurementRow& row) {
  out << csv_escape(row.frame_id) << ',' << format_double(row.width_um) << ',' << format_double(row.height_um) << ','
      << format_double(row.diffusion_um) << ',' << (row.found ? "true" : "false") << '\n';
}

inline std::vector<MeasurementRow> read_measurement_csv(std::istream& in) {
  std::vector<MeasurementRow> rows;
  for (const auto& rec : read_csv_records(in, measurement_header)) {
    rows.push_back({rec[0], parse_double(rec[1]), parse_double(rec[2]), parse_double(rec[3]), parse_bool(rec[4])});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Control trace: layer,commanded_um,actual_um,measured_z_um,z_error_um,action

inline constexpr std::string_view trace_header = "layer,commanded_um,actual_um,measured_z_um,z_error_um,action";

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << trace_header << '\n';
  for (const auto& r : trace) {
    out << r.layer << ',' << format_double(r.commanded_um) << ',' << format_double(r.actual_um) << ','
        << format_double(r.measured_z_um) << ',' << format_double(r.z_error_um) << ',' << r.action << '\n';
  }
}

inline std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::vector<TraceRow> trace;
  for (const auto& rec : read_csv_records(in, trace_header)) {
    trace.push_back({static_cast<int>(parse_int(rec[0])), parse_double(rec[1]), parse_double(rec[2]),
                     parse_double(rec[3]), parse_double(rec[4]), rec[5]});
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Step report, laid out like a caliper-vs-triangulation comparison table.

inline constexpr std::string_view step_report_header = "profile,reference_mm,measured_mm,deviation_mm";

inline void write_step_report_csv(std::ostream& out, const StepReport& report, const std::vector<std::string>& labels = {}) {
  out << step_report_header << '\n';
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    const std::string label = i < labels.size() ? labels[i] : "Profile " + std::to_string(i + 1);
    out << csv_escape(label) << ',' << format_double(r.reference_mm) << ',' << format_double(r.measured_mm) << ','
        << format_double(r.deviation_mm) << '\n';
  }
}

inline StepReport read_step_report_csv(std::istream& in) {
  std::vector<double> measured, reference;
  for (const auto& rec : read_csv_records(in, step_report_header)) {
    reference.push_back(parse_double(rec[1]));
    measured.push_back(parse_double(rec[2]));
  }
  return step_height_report(measured, reference);
}

}  // namespace trackscan::io
