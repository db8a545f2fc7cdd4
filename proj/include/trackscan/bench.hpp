#pragma once

// Synthetic reproduction protocols for the published validation numbers:
// material diffusion errors, the staircase step sample, the R&R band and the
// accuracy sweep. Each protocol is deterministic given its seed.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "trackscan/calibration.hpp"
#include "trackscan/grr.hpp"
#include "trackscan/measure.hpp"
#include "trackscan/step_report.hpp"
#include "trackscan/synth.hpp"

namespace trackscan::bench {

// ---------------------------------------------------------------------------
// Gauge scan helpers

struct GaugeScanRows {
  std::vector<double> platform_rows;
  std::vector<double> gauge_rows;
};

/// Platform rows from the two outer bands and gauge-top rows from the detected
/// feature. Gauge rows are shifted by the platform tilt so that both sets share
/// the mid-frame platform reference.
inline GaugeScanRows gauge_scan_rows(const Frame& frame, const MeasureOptions& options = {}) {
  const auto profile = extract_laser_line(frame, options.intensity_floor);
  const auto baseline = detect_platform(profile);
  const auto det = detect_track(profile, baseline, options.threshold_px, options.run_length);
  if (!det.found) {
    throw Error(ErrorCode::NoPlatformSignal, "no gauge feature found in the calibration scan");
  }
  const int band = platform_band_width(profile.columns());
  GaugeScanRows rows;
  rows.platform_rows = valid_rows(profile, 0, band);
  const auto right = valid_rows(profile, profile.columns() - band, profile.columns());
  rows.platform_rows.insert(rows.platform_rows.end(), right.begin(), right.end());
  const double mid = baseline.at(0.5 * static_cast<double>(profile.columns() - 1));
  for (int c = det.left_edge; c <= det.right_edge; ++c) {
    if (profile.is_valid(c)) rows.gauge_rows.push_back(profile.row(c) + (mid - baseline.at(static_cast<double>(c))));
  }
  return rows;
}

inline CalibrationMap calibrate_from_frame(const Frame& frame, double gauge_mm = default_gauge_mm,
                                           const MeasureOptions& options = {}) {
  const auto rows = gauge_scan_rows(frame, options);
  return calibrate_from_gauge(rows.platform_rows, rows.gauge_rows, gauge_mm);
}

// ---------------------------------------------------------------------------
// Material diffusion (per-material mean absolute ellipse residual)

struct DiffusionBenchOptions {
  int frames_per_material = 200;
  std::uint64_t seed = 1;
  double track_width_um = 3000.0;
  double track_height_um = 300.0;
  double sensor_noise_sigma = 0.005;
  double center_jitter_px = 0.5;
  double tolerance = 0.15;       // per material, relative
  double mean_tolerance = 0.10;  // seven-material mean vs the published mean
};

struct DiffusionRow {
  std::string material;
  double injected_um = 0.0;
  double recovered_um = 0.0;
  double relative_error = 0.0;
  int frames = 0;
  bool pass = false;
};

struct DiffusionBenchResult {
  std::vector<DiffusionRow> rows;
  double recovered_mean_um = 0.0;
  double mean_relative_error = 0.0;
  bool mean_pass = false;
  bool pass = false;
};

inline SceneSpec diffusion_scene(const DiffusionBenchOptions& opt, double diffusion_um, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-opt.center_jitter_px, opt.center_jitter_px);
  SceneSpec s;
  s.name = "diffusion";
  s.track = TrackSpec{319.5 + jitter(rng), opt.track_width_um, opt.track_height_um, TrackShape::Elliptic};
  s.diffusion_mean_abs_um = diffusion_um;
  s.sensor_noise_sigma = opt.sensor_noise_sigma;
  s.rng_seed = seed;
  return s;
}

/// Mean recovered diffusion over `frames` rendered frames of one material.
inline double recover_diffusion(const DiffusionBenchOptions& opt, double diffusion_um, std::uint64_t seed, int* used = nullptr) {
  const auto cal = CalibrationMap::from_pixel_pitch(10.0);
  double sum = 0.0;
  int n = 0;
  for (int f = 0; f < opt.frames_per_material; ++f) {
    const auto scene = diffusion_scene(opt, diffusion_um, seed * 100003ULL + static_cast<std::uint64_t>(f));
    const auto m = measure_track(render_frame(scene), cal);
    if (!m.found) continue;
    sum += m.diffusion_um;
    ++n;
  }
  if (used) *used = n;
  return n > 0 ? sum / n : 0.0;
}

inline DiffusionBenchResult run_diffusion_bench(const DiffusionBenchOptions& opt = {}) {
  DiffusionBenchResult out;
  double sum = 0.0;
  std::uint64_t k = 0;
  for (const auto& mat : material_table()) {
    DiffusionRow row;
    row.material = mat.name;
    row.injected_um = mat.diffusion_mean_abs_um;
    row.recovered_um = recover_diffusion(opt, mat.diffusion_mean_abs_um, opt.seed * 31ULL + k++, &row.frames);
    row.relative_error = (row.recovered_um - row.injected_um) / row.injected_um;
    row.pass = row.frames == opt.frames_per_material && std::abs(row.relative_error) <= opt.tolerance;
    sum += row.recovered_um;
    out.rows.push_back(row);
  }
  out.recovered_mean_um = sum / static_cast<double>(out.rows.size());
  out.mean_relative_error = (out.recovered_mean_um - published_material_mean_um) / published_material_mean_um;
  out.mean_pass = std::abs(out.mean_relative_error) <= opt.mean_tolerance;
  out.pass = out.mean_pass;
  for (const auto& r : out.rows) out.pass = out.pass && r.pass;
  return out;
}

// ---------------------------------------------------------------------------
// Staircase steps

struct StaircaseBenchOptions {
  std::vector<double> steps_mm = default_staircase_heights_mm();
  double gauge_mm = default_gauge_mm;
  std::uint64_t seed = 1;
  double sensor_noise_sigma = 0.005;
};

struct StaircaseBenchResult {
  StepReport report;  // last row is the calibration gauge
  std::vector<std::string> labels;
  CalibrationMap calibration;
  double tolerance_mm = 0.0;  // one pixel-equivalent
  std::vector<bool> row_pass;
  bool pass = false;
};

inline StaircaseBenchResult run_staircase_bench(const StaircaseBenchOptions& opt = {}) {
  StaircaseBenchResult out;
  SceneSpec base = staircase_base_scene();
  base.sensor_noise_sigma = opt.sensor_noise_sigma;

  MeasureOptions measure;
  measure.fit_ellipse = false;

  auto gauge_scene = make_staircase_scenes({opt.gauge_mm}, base).front();
  gauge_scene.name = "gauge";
  gauge_scene.rng_seed = opt.seed * 1000ULL;
  out.calibration = calibrate_from_frame(render_frame(gauge_scene), opt.gauge_mm, measure);

  auto scenes = make_staircase_scenes(opt.steps_mm, base);
  std::vector<double> measured, reference;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    scenes[i].rng_seed = opt.seed * 1000ULL + i + 1;
    const auto m = measure_track(render_frame(scenes[i]), out.calibration, measure);
    measured.push_back(m.found ? m.height_um / 1000.0 : 0.0);
    reference.push_back(opt.steps_mm[i]);
    out.labels.push_back("Profile " + std::to_string(i + 1));
  }
  // The gauge row is the calibration endpoint itself.
  measured.push_back(apply_calibration(out.calibration, out.calibration.span_px));
  reference.push_back(opt.gauge_mm);
  out.labels.push_back("Calibration");

  out.report = step_height_report(measured, reference);
  out.tolerance_mm = base.pixel_pitch_um / 1000.0;
  out.pass = true;
  for (std::size_t i = 0; i < out.report.rows.size(); ++i) {
    const bool is_gauge = i + 1 == out.report.rows.size();
    const double dev = std::abs(out.report.rows[i].deviation_mm);
    const bool ok = is_gauge ? dev == 0.0 : dev <= out.tolerance_mm;
    out.row_pass.push_back(ok);
    out.pass = out.pass && ok;
  }
  return out;
}

// ---------------------------------------------------------------------------
// R&R band

struct GrrBenchOptions {
  int seeds = 100;
  std::uint64_t seed = 1;
  GrrDatasetOptions dataset = [] {
    GrrDatasetOptions d;
    d.parts = 10;
    d.operators = 3;
    d.trials = 3;
    return d;
  }();
  double band_low_um = 40.0;
  double band_high_um = 60.0;
  double required_fraction = 0.90;
  double identity_tolerance = 1e-9;
};

struct GrrBenchResult {
  std::vector<GrrResult> runs;
  double in_band_fraction = 0.0;
  double mean_total_rr = 0.0;
  bool identities_hold = true;
  bool pass = false;
};

inline bool grr_identities_hold(const GrrResult& r, double tol) {
  const auto rel = [](double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
  };
  const double rr2 = r.total_rr * r.total_rr;
  const double ev2 = r.repeatability_ev * r.repeatability_ev;
  const double av2 = r.reproducibility_av * r.reproducibility_av;
  const double tv2 = r.total_variation * r.total_variation;
  const double pv2 = r.part_variation_pv * r.part_variation_pv;
  const bool rr_ok = (rr2 == 0.0 && ev2 + av2 == 0.0) || rel(rr2, ev2 + av2) <= tol;
  const bool tv_ok = (tv2 == 0.0 && rr2 + pv2 == 0.0) || rel(tv2, rr2 + pv2) <= tol;
  return rr_ok && tv_ok;
}

inline GrrBenchResult run_grr_bench(const GrrBenchOptions& opt = {}) {
  GrrBenchResult out;
  int in_band = 0;
  double sum = 0.0;
  for (int s = 0; s < opt.seeds; ++s) {
    auto d = opt.dataset;
    d.seed = opt.seed * 1000003ULL + static_cast<std::uint64_t>(s);
    const auto r = grr_study(grr_dataset(d));
    out.identities_hold = out.identities_hold && grr_identities_hold(r, opt.identity_tolerance);
    if (r.total_rr >= opt.band_low_um && r.total_rr <= opt.band_high_um) ++in_band;
    sum += r.total_rr;
    out.runs.push_back(r);
  }
  out.in_band_fraction = opt.seeds > 0 ? static_cast<double>(in_band) / opt.seeds : 0.0;
  out.mean_total_rr = opt.seeds > 0 ? sum / opt.seeds : 0.0;
  out.pass = out.identities_hold && out.in_band_fraction >= opt.required_fraction;
  return out;
}

// ---------------------------------------------------------------------------
// Accuracy sweep over noiseless tracks

struct AccuracyBenchOptions {
  int scenes = 500;
  std::uint64_t seed = 1;
  double min_width_um = 100.0, max_width_um = 300.0;
  double min_height_um = 50.0, max_height_um = 200.0;
  double height_tolerance_um = 10.0;
  // Edge threshold for the sweep. The 3 px default clips too much of a
  // 50 um-high bead to stay inside the width band, see README.
  double threshold_px = 1.5;
  int run_length = default_run_length;
};

struct AccuracySample {
  double width_um = 0.0, height_um = 0.0;
  double measured_width_um = 0.0, measured_height_um = 0.0;
  bool found = false;
  bool pass = false;
};

struct AccuracyBenchResult {
  std::vector<AccuracySample> samples;
  double max_height_error_um = 0.0;
  double max_width_error_px = 0.0;
  double width_tolerance_px = 0.0;
  int passed = 0;
  bool pass = false;
};

inline AccuracyBenchResult run_accuracy_bench(const AccuracyBenchOptions& opt = {}) {
  AccuracyBenchResult out;
  out.width_tolerance_px = 2.0 * opt.run_length;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> width(opt.min_width_um, opt.max_width_um);
  std::uniform_real_distribution<double> height(opt.min_height_um, opt.max_height_um);
  std::uniform_real_distribution<double> centre(300.0, 340.0);
  std::uniform_real_distribution<double> platform(380.0, 420.0);

  MeasureOptions measure;
  measure.threshold_px = opt.threshold_px;
  measure.run_length = opt.run_length;
  for (int i = 0; i < opt.scenes; ++i) {
    SceneSpec s;
    s.name = "accuracy";
    s.track = TrackSpec{centre(rng), width(rng), height(rng), TrackShape::Elliptic};
    s.platform_row = platform(rng);
    s.rng_seed = opt.seed + static_cast<std::uint64_t>(i);
    const auto cal = CalibrationMap::from_pixel_pitch(s.pixel_pitch_um);

    AccuracySample sample;
    sample.width_um = s.track->width_um;
    sample.height_um = s.track->height_um;
    const auto m = measure_track(render_frame(s), cal, measure);
    sample.found = m.found;
    if (m.found) {
      sample.measured_width_um = m.width_um;
      sample.measured_height_um = m.height_um;
      const double h_err = std::abs(m.height_um - sample.height_um);
      const double w_err_px = std::abs(m.width_um - sample.width_um) / s.pixel_pitch_um;
      out.max_height_error_um = std::max(out.max_height_error_um, h_err);
      out.max_width_error_px = std::max(out.max_width_error_px, w_err_px);
      sample.pass = h_err <= opt.height_tolerance_um && w_err_px <= out.width_tolerance_px;
    }
    if (sample.pass) ++out.passed;
    out.samples.push_back(sample);
  }
  out.pass = out.passed == opt.scenes;
  return out;
}

}  // namespace trackscan::bench
