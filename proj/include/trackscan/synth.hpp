#pragma once

// Ground-truth scene generator: analytic surfaces, rendered laser frames,
// the Table-style staircase sample, material diffusion presets and R&R data.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"
#include "trackscan/grr.hpp"

namespace trackscan {

enum class TrackShape { Elliptic, Plateau };

struct TrackSpec {
  double center_x_px = 319.5;
  double width_um = 300.0;
  double height_um = 150.0;
  TrackShape shape = TrackShape::Elliptic;
};

struct SceneSpec {
  std::string name = "scene";
  int width = 640;
  int height = 480;
  double pixel_pitch_um = 10.0;
  double platform_row = 400.0;
  double platform_roll_um = 0.0;  // height change across the full frame width
  std::optional<TrackSpec> track;
  double laser_psf_sigma = 1.2;
  double laser_peak = 0.9;
  double diffusion_mean_abs_um = 0.0;
  double sensor_noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;
};

/// Collects every violated constraint; empty when the scene is renderable.
inline std::vector<std::string> scene_problems(const SceneSpec& s) {
  std::vector<std::string> problems;
  if (s.width < Frame::min_dimension) problems.push_back("width must be >= 16");
  if (s.height < Frame::min_dimension) problems.push_back("height must be >= 16");
  if (!(s.pixel_pitch_um > 0.0)) problems.push_back("pixel_pitch_um must be > 0");
  if (!(s.platform_row >= 0.0 && s.platform_row <= s.height - 1)) problems.push_back("platform_row outside the frame");
  if (!std::isfinite(s.platform_roll_um)) problems.push_back("platform_roll_um must be finite");
  if (!(s.laser_psf_sigma > 0.0)) problems.push_back("laser_psf_sigma must be > 0");
  if (!(s.laser_peak > 0.0 && s.laser_peak <= 1.0)) problems.push_back("laser_peak must lie in (0, 1]");
  if (!(s.diffusion_mean_abs_um >= 0.0)) problems.push_back("diffusion_mean_abs_um must be >= 0");
  if (!(s.sensor_noise_sigma >= 0.0)) problems.push_back("sensor_noise_sigma must be >= 0");
  if (s.track) {
    if (!(s.track->width_um > 0.0)) problems.push_back("track.width_um must be > 0");
    if (!(s.track->height_um > 0.0)) problems.push_back("track.height_um must be > 0");
    if (!std::isfinite(s.track->center_x_px)) problems.push_back("track.center_x_px must be finite");
  }
  return problems;
}

inline void validate(const SceneSpec& s) {
  const auto problems = scene_problems(s);
  if (!problems.empty()) {
    std::string msg = "invalid scene '" + s.name + "':";
    for (const auto& p : problems) msg += " " + p + ";";
    throw Error(ErrorCode::InvalidArgument, msg);
  }
}

/// Surface height above the nominal platform at an integer column, in micrometres.
inline double surface_height(const SceneSpec& s, int column) {
  if (column < 0 || column >= s.width) {
    throw Error(ErrorCode::InvalidArgument, "column outside the frame");
  }
  double h = s.platform_roll_um * static_cast<double>(column) / static_cast<double>(s.width - 1);
  if (s.track) {
    const auto& t = *s.track;
    const double half_px = 0.5 * t.width_um / s.pixel_pitch_um;
    const double dx = static_cast<double>(column) - t.center_x_px;
    if (t.shape == TrackShape::Elliptic) {
      const double u = dx / half_px;
      if (std::abs(u) < 1.0) h += t.height_um * std::sqrt(1.0 - u * u);
    } else if (std::abs(dx) <= half_px) {
      h += t.height_um;
    }
  }
  return h;
}

/// Track elevation alone (no platform roll), micrometres.
inline double track_height(const SceneSpec& s, int column) {
  SceneSpec flat = s;
  flat.platform_roll_um = 0.0;
  return surface_height(flat, column);
}

struct RenderedFrame {
  Frame frame;
  std::vector<double> surface_rows;  // noiseless surface row per column
  std::vector<double> line_rows;     // rendered line centre, surface plus diffusion
};

/// Diffusion displacement is normal with sigma = mean_abs * sqrt(pi/2), so its
/// mean absolute value equals the configured magnitude.
inline double diffusion_sigma_px(const SceneSpec& s) {
  return s.diffusion_mean_abs_um * std::sqrt(std::numbers::pi / 2.0) / s.pixel_pitch_um;
}

inline RenderedFrame render_scene(const SceneSpec& s) {
  validate(s);
  RenderedFrame out;
  out.frame = Frame(s.width, s.height, s.pixel_pitch_um, s.name + "-" + std::to_string(s.rng_seed));
  out.surface_rows.resize(static_cast<std::size_t>(s.width));
  out.line_rows.resize(static_cast<std::size_t>(s.width));

  std::mt19937_64 rng(s.rng_seed);
  const double diff_sigma = diffusion_sigma_px(s);
  std::normal_distribution<double> diffusion(0.0, diff_sigma > 0.0 ? diff_sigma : 1.0);
  for (int c = 0; c < s.width; ++c) {
    const double surface = s.platform_row - surface_height(s, c) / s.pixel_pitch_um;
    out.surface_rows[static_cast<std::size_t>(c)] = surface;
    out.line_rows[static_cast<std::size_t>(c)] = surface + (diff_sigma > 0.0 ? diffusion(rng) : 0.0);
  }

  const double inv_two_var = 1.0 / (2.0 * s.laser_psf_sigma * s.laser_psf_sigma);
  const int reach = static_cast<int>(std::ceil(8.0 * s.laser_psf_sigma));
  for (int c = 0; c < s.width; ++c) {
    const double centre = out.line_rows[static_cast<std::size_t>(c)];
    const int lo = std::max(0, static_cast<int>(std::floor(centre)) - reach);
    const int hi = std::min(s.height - 1, static_cast<int>(std::ceil(centre)) + reach);
    for (int r = lo; r <= hi; ++r) {
      const double d = static_cast<double>(r) - centre;
      out.frame.at(r, c) = s.laser_peak * std::exp(-d * d * inv_two_var);
    }
  }

  if (s.sensor_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, s.sensor_noise_sigma);
    for (auto& v : out.frame.intensities) v += noise(rng);
  }
  for (auto& v : out.frame.intensities) v = std::clamp(v, 0.0, 1.0);
  return out;
}

inline Frame render_frame(const SceneSpec& s) { return render_scene(s).frame; }

// ---------------------------------------------------------------------------
// Material presets

struct MaterialModel {
  std::string name;
  double diffusion_mean_abs_um = 0.0;
};

inline const std::vector<MaterialModel>& material_table() {
  static const std::vector<MaterialModel> table = {
      {"PLA - red", 8.42},
      {"PLA - green - translucent", 7.11},
      {"PLA - dark brown - translucent", 4.43},
      {"ABS - red", 8.65},
      {"ABS - green", 11.20},
      {"ABS - gray", 6.15},
      {"ABS - white - translucent", 13.86},
  };
  return table;
}

inline constexpr double published_material_mean_um = 8.55;

namespace detail {

inline std::string material_key(std::string_view name) {
  std::string key;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  return key;
}

}  // namespace detail

/// Case-, space- and dash-insensitive lookup: "ABS - gray", "abs-gray" and "ABS gray" all match.
inline std::optional<MaterialModel> find_material(std::string_view name) {
  const auto key = detail::material_key(name);
  for (const auto& m : material_table()) {
    if (detail::material_key(m.name) == key) return m;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Staircase benchmark

inline const std::vector<double>& default_staircase_heights_mm() {
  static const std::vector<double> heights = {1.36, 2.28, 3.30, 4.28};
  return heights;
}

inline constexpr double default_plateau_width_um = 3000.0;

/// Frame tall enough for a 5 mm step at the default 10 um/px pitch.
inline SceneSpec staircase_base_scene() {
  SceneSpec s;
  s.name = "staircase";
  s.width = 640;
  s.height = 600;
  s.platform_row = 560.0;
  return s;
}

inline std::vector<SceneSpec> make_staircase_scenes(const std::vector<double>& step_heights_mm, const SceneSpec& base,
                                                    double plateau_width_um = default_plateau_width_um) {
  for (std::size_t i = 0; i < step_heights_mm.size(); ++i) {
    if (!(step_heights_mm[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "step heights must be positive");
    }
    if (i > 0 && !(step_heights_mm[i] > step_heights_mm[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "step heights must be strictly increasing");
    }
  }
  std::vector<SceneSpec> scenes;
  scenes.reserve(step_heights_mm.size());
  for (std::size_t i = 0; i < step_heights_mm.size(); ++i) {
    SceneSpec s = base;
    s.name = base.name + "-step" + std::to_string(i + 1);
    s.track = TrackSpec{0.5 * static_cast<double>(base.width - 1), plateau_width_um, step_heights_mm[i] * 1000.0,
                        TrackShape::Plateau};
    scenes.push_back(std::move(s));
  }
  return scenes;
}

// ---------------------------------------------------------------------------
// R&R data

struct GrrDatasetOptions {
  double pin_diameter_mm = 3.0;
  double carrier_roll_um = 20.0;      // full range of the per-mounting roll offset
  double trial_noise_sigma_um = 5.0;  // subpixel extraction noise per trial
  double pin_tolerance_um = 6.0;      // h6 on 3 mm: 0 / -6 um
  int parts = 2;
  int operators = 2;
  int trials = 3;
  std::uint64_t seed = 0;
};

/// Simulated repeated pin-height measurements in micrometres. Each part is a
/// pin with its own diameter inside the h6 band; every measurement is a fresh
/// mounting with a uniform roll offset spanning `carrier_roll_um`, plus normal
/// trial noise.
inline GrrMeasurementSet grr_dataset(const GrrDatasetOptions& opt) {
  if (opt.parts < 1 || opt.operators < 1) {
    throw Error(ErrorCode::InvalidArgument, "parts and operators must be >= 1");
  }
  if (opt.trials < 2) {
    throw Error(ErrorCode::InsufficientTrials, "trials must be >= 2");
  }
  if (!(opt.carrier_roll_um >= 0.0) || !(opt.trial_noise_sigma_um >= 0.0) || !(opt.pin_tolerance_um >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "spreads must be non-negative");
  }
  GrrMeasurementSet set(opt.parts, opt.operators, opt.trials, "um");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> pin_um(static_cast<std::size_t>(opt.parts));
  for (auto& d : pin_um) d = opt.pin_diameter_mm * 1000.0 - opt.pin_tolerance_um * unit(rng);

  for (int i = 0; i < opt.parts; ++i) {
    for (int j = 0; j < opt.operators; ++j) {
      for (int k = 0; k < opt.trials; ++k) {
        const double roll = opt.carrier_roll_um * (unit(rng) - 0.5);
        const double noise = opt.trial_noise_sigma_um * gauss(rng);
        set.at(i, j, k) = pin_um[static_cast<std::size_t>(i)] + roll + noise;
      }
    }
  }
  return set;
}

}  // namespace trackscan
