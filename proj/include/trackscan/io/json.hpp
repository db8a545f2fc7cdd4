#pragma once

// JSON documents: scenes, calibration maps, process/strategy configuration,
// ground-truth sidecars and run summaries. Readers reject unknown keys.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>

#include "trackscan/calibration.hpp"
#include "trackscan/control.hpp"
#include "trackscan/error.hpp"
#include "trackscan/grr.hpp"
#include "trackscan/synth.hpp"

namespace trackscan::io {

using Json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline void require_known_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::Config, std::string(where) + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || item.key() == a;
    if (!ok) throw Error(ErrorCode::Config, std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

namespace detail {

template <class T>
void read_optional(const Json& j, std::string_view key, T& out, std::string_view where) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Config, std::string(where) + ": key '" + std::string(key) + "' has the wrong type");
  }
}

template <class T>
T read_required(const Json& j, std::string_view key, std::string_view where) {
  if (!j.contains(std::string(key))) {
    throw Error(ErrorCode::Config, std::string(where) + ": missing key '" + std::string(key) + "'");
  }
  T out{};
  read_optional(j, key, out, where);
  return out;
}

inline void check_schema(const Json& j, std::string_view where) {
  if (!j.contains("schema_version")) return;
  int v = 0;
  read_optional(j, "schema_version", v, where);
  if (v != schema_version) {
    throw Error(ErrorCode::Config, std::string(where) + ": unsupported schema_version " + std::to_string(v));
  }
}

}  // namespace detail

inline Json parse_json_text(const std::string& text, std::string_view where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string(where) + ": " + e.what());
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_json_text(text, path.string());
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Scene

inline Json to_json(const SceneSpec& s) {
  Json j;
  j["schema_version"] = schema_version;
  j["name"] = s.name;
  j["width"] = s.width;
  j["height"] = s.height;
  j["pixel_pitch_um"] = s.pixel_pitch_um;
  j["platform_row"] = s.platform_row;
  j["platform_roll_um"] = s.platform_roll_um;
  if (s.track) {
    j["track"] = {{"center_x_px", s.track->center_x_px},
                  {"width_um", s.track->width_um},
                  {"height_um", s.track->height_um},
                  {"shape", s.track->shape == TrackShape::Elliptic ? "elliptic" : "plateau"}};
  } else {
    j["track"] = nullptr;
  }
  j["laser_psf_sigma"] = s.laser_psf_sigma;
  j["laser_peak"] = s.laser_peak;
  j["diffusion_mean_abs_um"] = s.diffusion_mean_abs_um;
  j["sensor_noise_sigma"] = s.sensor_noise_sigma;
  j["rng_seed"] = s.rng_seed;
  return j;
}

/// Missing keys take SceneSpec defaults; the result is validated.
inline SceneSpec scene_from_json(const Json& j) {
  constexpr std::string_view where = "scene";
  require_known_keys(j,
                     {"schema_version", "name", "width", "height", "pixel_pitch_um", "platform_row", "platform_roll_um",
                      "track", "laser_psf_sigma", "laser_peak", "diffusion_mean_abs_um", "sensor_noise_sigma",
                      "rng_seed"},
                     where);
  detail::check_schema(j, where);
  SceneSpec s;
  detail::read_optional(j, "name", s.name, where);
  detail::read_optional(j, "width", s.width, where);
  detail::read_optional(j, "height", s.height, where);
  detail::read_optional(j, "pixel_pitch_um", s.pixel_pitch_um, where);
  detail::read_optional(j, "platform_row", s.platform_row, where);
  detail::read_optional(j, "platform_roll_um", s.platform_roll_um, where);
  detail::read_optional(j, "laser_psf_sigma", s.laser_psf_sigma, where);
  detail::read_optional(j, "laser_peak", s.laser_peak, where);
  detail::read_optional(j, "diffusion_mean_abs_um", s.diffusion_mean_abs_um, where);
  detail::read_optional(j, "sensor_noise_sigma", s.sensor_noise_sigma, where);
  detail::read_optional(j, "rng_seed", s.rng_seed, where);
  if (const auto it = j.find("track"); it != j.end() && !it->is_null()) {
    constexpr std::string_view tw = "scene.track";
    require_known_keys(*it, {"center_x_px", "width_um", "height_um", "shape"}, tw);
    TrackSpec t;
    t.center_x_px = 0.5 * static_cast<double>(s.width - 1);
    detail::read_optional(*it, "center_x_px", t.center_x_px, tw);
    t.width_um = detail::read_required<double>(*it, "width_um", tw);
    t.height_um = detail::read_required<double>(*it, "height_um", tw);
    std::string shape = "elliptic";
    detail::read_optional(*it, "shape", shape, tw);
    if (shape == "elliptic") {
      t.shape = TrackShape::Elliptic;
    } else if (shape == "plateau") {
      t.shape = TrackShape::Plateau;
    } else {
      throw Error(ErrorCode::Config, "scene.track: shape must be 'elliptic' or 'plateau'");
    }
    s.track = t;
  }
  const auto problems = scene_problems(s);
  if (!problems.empty()) {
    std::string msg = "scene: ";
    for (const auto& p : problems) msg += p + "; ";
    throw Error(ErrorCode::Config, msg);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Calibration: {gain_mm_per_px, offset_mm, gauge_mm} plus the exact span

inline Json to_json(const CalibrationMap& m) {
  Json j;
  j["gain_mm_per_px"] = m.gain_mm_per_px();
  j["offset_mm"] = m.offset_mm;
  j["gauge_mm"] = m.gauge_mm;
  j["gauge_span_px"] = m.span_px;
  return j;
}

inline CalibrationMap calibration_from_json(const Json& j) {
  constexpr std::string_view where = "calibration";
  require_known_keys(j, {"schema_version", "gain_mm_per_px", "offset_mm", "gauge_mm", "gauge_span_px"}, where);
  detail::check_schema(j, where);
  const double gain = detail::read_required<double>(j, "gain_mm_per_px", where);
  const double offset = detail::read_required<double>(j, "offset_mm", where);
  const double gauge = detail::read_required<double>(j, "gauge_mm", where);
  if (!(gain > 0.0) || !(gauge > 0.0)) throw Error(ErrorCode::Config, "calibration: gain and gauge_mm must be > 0");
  if (j.contains("gauge_span_px")) {
    const double span = detail::read_required<double>(j, "gauge_span_px", where);
    if (!(span > 0.0)) throw Error(ErrorCode::Config, "calibration: gauge_span_px must be > 0");
    return {gauge, span, offset};
  }
  return CalibrationMap::from_gain(gain, gauge, offset);
}

// ---------------------------------------------------------------------------
// Process model and simulation settings

inline Json to_json(const ProcessModel& m) {
  return Json{{"thickness_gain", m.thickness_gain},
              {"thickness_bias_um", m.thickness_bias_um},
              {"process_noise_sigma_um", m.process_noise_sigma_um},
              {"measurement_noise_sigma_um", m.measurement_noise_sigma_um},
              {"seed", m.seed}};
}

inline ProcessModel process_model_from_json(const Json& j, ProcessModel m = {}) {
  constexpr std::string_view where = "model";
  require_known_keys(j,
                     {"schema_version", "thickness_gain", "thickness_bias_um", "process_noise_sigma_um",
                      "measurement_noise_sigma_um", "seed"},
                     where);
  detail::check_schema(j, where);
  detail::read_optional(j, "thickness_gain", m.thickness_gain, where);
  detail::read_optional(j, "thickness_bias_um", m.thickness_bias_um, where);
  detail::read_optional(j, "process_noise_sigma_um", m.process_noise_sigma_um, where);
  detail::read_optional(j, "measurement_noise_sigma_um", m.measurement_noise_sigma_um, where);
  detail::read_optional(j, "seed", m.seed, where);
  try {
    validate(m);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, std::string("model: ") + e.what());
  }
  return m;
}

inline Json summary_json(const SimulationResult& r, const SimulationConfig& cfg, std::uint64_t seed) {
  Json j;
  j["schema_version"] = schema_version;
  j["strategy"] = std::string(to_string(cfg.strategy.kind));
  if (cfg.strategy.kind == StrategyKind::Proportional) j["kp"] = cfg.strategy.kp;
  j["n_layers"] = cfg.n_layers;
  j["nominal_um"] = cfg.nominal_um;
  j["seed"] = seed;
  j["model"] = to_json(cfg.model);
  j["target_height_um"] = r.target_height_um;
  j["true_z_um"] = r.true_z_um;
  j["final_error_um"] = r.final_error_um;
  j["final_abs_error_um"] = r.final_abs_error_um;
  j["max_abs_error_um"] = r.max_abs_error_um;
  j["total_layers_deposited"] = r.total_layers_deposited;
  j["steps"] = r.trace.size();
  j["goal_met"] = r.goal_met;
  return j;
}

// ---------------------------------------------------------------------------
// R&R result

inline Json to_json(const GrrResult& r) {
  Json j;
  j["schema_version"] = schema_version;
  j["unit"] = r.unit;
  j["repeatability_ev"] = r.repeatability_ev;
  j["reproducibility_av"] = r.reproducibility_av;
  j["part_variation_pv"] = r.part_variation_pv;
  j["total_rr"] = r.total_rr;
  j["total_variation"] = r.total_variation;
  j["percent_rr"] = r.percent_rr;
  j["anova"] = {{"ss_part", r.anova.ss_part},
                {"ss_operator", r.anova.ss_operator},
                {"ss_interaction", r.anova.ss_interaction},
                {"ss_error", r.anova.ss_error},
                {"ss_total", r.anova.ss_total},
                {"df_part", r.anova.df_part},
                {"df_operator", r.anova.df_operator},
                {"df_interaction", r.anova.df_interaction},
                {"df_error", r.anova.df_error}};
  return j;
}

}  // namespace trackscan::io
