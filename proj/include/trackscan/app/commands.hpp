#pragma once

// Subcommand implementations behind the trackscan tool. Each returns a
// process exit code: 0 success, 1 configuration error, 2 data error,
// 3 controller divergence.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "trackscan/bench.hpp"
#include "trackscan/control.hpp"
#include "trackscan/error.hpp"
#include "trackscan/grr.hpp"
#include "trackscan/io/csv.hpp"
#include "trackscan/io/image.hpp"
#include "trackscan/io/json.hpp"
#include "trackscan/measure.hpp"
#include "trackscan/synth.hpp"

namespace trackscan::app {

namespace fs = std::filesystem;

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 1,
  exit_data = 2,
  exit_divergence = 3,
};

inline constexpr const char* version_string =
#ifdef TRACKSCAN_VERSION_STRING
    TRACKSCAN_VERSION_STRING;
#else
    "1.0.0";
#endif

namespace detail {

/// Writes to `path` when set, otherwise to `fallback`.
template <class Fn>
void emit(const std::optional<fs::path>& path, std::ostream& fallback, Fn&& fn) {
  if (path) {
    auto out = io::open_output(*path);
    fn(out);
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path->string());
  } else {
    fn(fallback);
  }
}

inline void require_parent_exists(const fs::path& path, const char* what) {
  const auto parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Error(ErrorCode::Config, std::string(what) + ": directory does not exist: " + parent.string());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// extract

struct ExtractOptions {
  std::vector<fs::path> inputs;
  double intensity_floor = default_intensity_floor;
  double threshold_px = default_threshold_px;
  int run_length = default_run_length;
  double pixel_pitch_um = 10.0;
  bool fit_ellipse = true;
  std::optional<fs::path> calibration;
  std::optional<fs::path> out;
  std::optional<fs::path> profiles_dir;
  std::optional<fs::path> json_out;
};

/// Expands directories to their PGM/PNG files (sorted by name); explicit files
/// are kept in the given order.
inline std::vector<fs::path> collect_frames(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && io::is_image_path(entry.path())) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw Error(ErrorCode::Config, "input does not exist: " + in.string());
    }
  }
  return files;
}

inline io::Json measurement_json(const std::string& id, const TrackMeasurement& m) {
  io::Json j;
  j["frame_id"] = id;
  j["found"] = m.found;
  j["left_edge"] = m.detection.left_edge;
  j["right_edge"] = m.detection.right_edge;
  j["center"] = m.detection.center;
  j["width_px"] = m.detection.width_px;
  j["height_px"] = m.detection.height_px;
  j["width_um"] = m.width_um;
  j["height_um"] = m.height_um;
  j["diffusion_um"] = m.diffusion_um;
  j["platform_left_median"] = m.baseline.left_median;
  j["platform_right_median"] = m.baseline.right_median;
  if (m.ellipse) {
    j["ellipse"] = {{"center_x", m.ellipse->center_x},
                    {"center_z", m.ellipse->center_z},
                    {"semi_axis_a", m.ellipse->semi_axis_a},
                    {"semi_axis_b", m.ellipse->semi_axis_b},
                    {"rotation", m.ellipse->rotation},
                    {"mean_abs_residual", m.ellipse->mean_abs_residual},
                    {"rms_residual", m.ellipse->rms_residual}};
  }
  return j;
}

inline int cmd_extract(const ExtractOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> files;
  CalibrationMap calibration;
  MeasureOptions measure;
  try {
    if (opt.inputs.empty()) throw Error(ErrorCode::Config, "no input frames given");
    if (!(opt.intensity_floor >= 0.0 && opt.intensity_floor < 1.0)) {
      throw Error(ErrorCode::Config, "--floor must lie in [0, 1)");
    }
    if (!(opt.threshold_px > 0.0)) throw Error(ErrorCode::Config, "--threshold must be > 0");
    if (opt.run_length < 1) throw Error(ErrorCode::Config, "--run-length must be >= 1");
    if (!(opt.pixel_pitch_um > 0.0)) throw Error(ErrorCode::Config, "--pitch must be > 0");
    if (opt.out) detail::require_parent_exists(*opt.out, "--out");
    if (opt.json_out) detail::require_parent_exists(*opt.json_out, "--json");
    if (opt.profiles_dir && !fs::is_directory(*opt.profiles_dir)) {
      throw Error(ErrorCode::Config, "--profiles directory does not exist: " + opt.profiles_dir->string());
    }
    calibration = opt.calibration ? io::calibration_from_json(io::read_json_file(*opt.calibration))
                                  : CalibrationMap::from_pixel_pitch(opt.pixel_pitch_um);
    files = collect_frames(opt.inputs);
  } catch (const Error& e) {
    err << "trackscan extract: " << e.what() << '\n';
    return exit_config;
  }
  measure.intensity_floor = opt.intensity_floor;
  measure.threshold_px = opt.threshold_px;
  measure.run_length = opt.run_length;
  measure.fit_ellipse = opt.fit_ellipse;

  bool data_error = false;
  io::Json details = io::Json::array();
  try {
    detail::emit(opt.out, out, [&](std::ostream& table) {
      table << io::measurement_header << '\n';
      for (const auto& file : files) {
        io::MeasurementRow row;
        row.frame_id = file.stem().string();
        try {
          const Frame frame = io::load_frame(file, opt.pixel_pitch_um);
          const auto m = measure_track(frame, calibration, measure);
          row.found = m.found;
          row.width_um = m.width_um;
          row.height_um = m.height_um;
          row.diffusion_um = m.diffusion_um;
          if (opt.profiles_dir) {
            auto pf = io::open_output(*opt.profiles_dir / (row.frame_id + ".csv"));
            io::write_profile_csv(pf, m.profile);
          }
          if (opt.json_out) details.push_back(measurement_json(row.frame_id, m));
        } catch (const Error& e) {
          data_error = true;
          err << file.string() << ": " << e.what() << '\n';
          if (opt.json_out) details.push_back({{"frame_id", row.frame_id}, {"found", false}, {"error", e.what()}});
        }
        io::write_measurement_row(table, row);
      }
    });
    if (opt.json_out) {
      io::Json doc;
      doc["schema_version"] = io::schema_version;
      doc["frames"] = std::move(details);
      io::write_json_file(*opt.json_out, doc);
    }
  } catch (const Error& e) {
    err << "trackscan extract: " << e.what() << '\n';
    return exit_data;
  }
  return data_error ? exit_data : exit_ok;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::optional<fs::path> scene;
  std::string preset = "track";
  std::optional<int> frames;
  std::optional<std::uint64_t> seed;
  fs::path out_dir = ".";
  int bits = 16;
};

inline std::vector<SceneSpec> preset_scenes(const std::string& name) {
  if (name == "track") {
    SceneSpec s;
    s.name = "track";
    s.track = TrackSpec{};
    return {s};
  }
  if (name == "staircase") {
    return make_staircase_scenes(default_staircase_heights_mm(), staircase_base_scene());
  }
  if (name == "gauge") {
    auto scenes = make_staircase_scenes({default_gauge_mm}, staircase_base_scene());
    scenes.front().name = "gauge";
    return scenes;
  }
  throw Error(ErrorCode::Config, "unknown preset '" + name + "' (track, staircase, gauge)");
}

inline io::Json ground_truth_json(const SceneSpec& scene, const RenderedFrame& rendered, const std::string& file) {
  io::Json j;
  j["schema_version"] = io::schema_version;
  j["frame_file"] = file;
  j["frame_id"] = rendered.frame.frame_id;
  j["scene"] = io::to_json(scene);
  io::Json truth;
  if (scene.track) {
    truth["track_width_um"] = scene.track->width_um;
    truth["track_height_um"] = scene.track->height_um;
    truth["track_center_x_px"] = scene.track->center_x_px;
  }
  truth["surface_rows"] = rendered.surface_rows;
  truth["line_rows"] = rendered.line_rows;
  j["ground_truth"] = std::move(truth);
  return j;
}

inline int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<SceneSpec> scenes;
  try {
    if (opt.bits != 8 && opt.bits != 16) throw Error(ErrorCode::Config, "--bits must be 8 or 16");
    if (opt.frames && *opt.frames < 0) throw Error(ErrorCode::Config, "--frames must be >= 0");
    scenes = opt.scene ? std::vector<SceneSpec>{io::scene_from_json(io::read_json_file(*opt.scene))}
                       : preset_scenes(opt.preset);
    if (!fs::is_directory(opt.out_dir)) {
      throw Error(ErrorCode::Config, "--out directory does not exist: " + opt.out_dir.string());
    }
  } catch (const Error& e) {
    err << "trackscan synth: " << e.what() << '\n';
    return exit_config;
  }

  const int count = opt.frames.value_or(static_cast<int>(scenes.size()));
  try {
    for (int i = 0; i < count; ++i) {
      SceneSpec scene = scenes[static_cast<std::size_t>(i) % scenes.size()];
      scene.rng_seed = opt.seed.value_or(scene.rng_seed) + static_cast<std::uint64_t>(i);
      const auto rendered = render_scene(scene);
      char stem[64];
      std::snprintf(stem, sizeof stem, "frame_%04d", i);
      const auto image = opt.out_dir / (std::string(stem) + ".pgm");
      io::write_pgm(image, rendered.frame, opt.bits);
      io::write_json_file(opt.out_dir / (std::string(stem) + ".json"),
                          ground_truth_json(scene, rendered, image.filename().string()));
    }
  } catch (const Error& e) {
    err << "trackscan synth: " << e.what() << '\n';
    return exit_data;
  }
  out << "wrote " << count << " frame(s) to " << opt.out_dir.string() << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------
// bench

enum class BenchKind { Table1, Table2, Grr, Accuracy };

struct BenchOptions {
  BenchKind kind = BenchKind::Table2;
  std::uint64_t seed = 1;
  int frames_per_material = 200;
  std::optional<fs::path> csv_out;
};

inline const char* pass_word(bool ok) { return ok ? "PASS" : "FAIL"; }

inline int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
  using io::format_double;
  using io::format_fixed;
  try {
    if (opt.csv_out) detail::require_parent_exists(*opt.csv_out, "--out");
    if (opt.frames_per_material < 1) throw Error(ErrorCode::Config, "--frames must be >= 1");
  } catch (const Error& e) {
    err << "trackscan bench: " << e.what() << '\n';
    return exit_config;
  }

  try {
    switch (opt.kind) {
      case BenchKind::Table2: {
        bench::DiffusionBenchOptions o;
        o.seed = opt.seed;
        o.frames_per_material = opt.frames_per_material;
        const auto r = bench::run_diffusion_bench(o);
        out << "Diffusion error per material (" << o.frames_per_material << " frames each, tolerance +/-"
            << format_fixed(100 * o.tolerance, 0) << "%)\n";
        out << "material                          injected_um  recovered_um  rel_err   result\n";
        for (const auto& row : r.rows) {
          std::string name = row.material;
          name.resize(32, ' ');
          out << name << "  " << format_fixed(row.injected_um, 2) << "        " << format_fixed(row.recovered_um, 3)
              << "         " << format_fixed(100 * row.relative_error, 2) << "%   " << pass_word(row.pass) << '\n';
        }
        out << "mean                              " << format_fixed(published_material_mean_um, 2) << "        "
            << format_fixed(r.recovered_mean_um, 3) << "         " << format_fixed(100 * r.mean_relative_error, 2)
            << "%   " << pass_word(r.mean_pass) << '\n';
        out << "overall: " << pass_word(r.pass) << '\n';
        detail::emit(opt.csv_out, out, [&](std::ostream& csv) {
          if (!opt.csv_out) return;
          csv << "material,injected_um,recovered_um,relative_error,frames,pass\n";
          for (const auto& row : r.rows) {
            csv << io::csv_escape(row.material) << ',' << format_double(row.injected_um) << ','
                << format_double(row.recovered_um) << ',' << format_double(row.relative_error) << ',' << row.frames
                << ',' << (row.pass ? "true" : "false") << '\n';
          }
          csv << "mean," << format_double(published_material_mean_um) << ',' << format_double(r.recovered_mean_um)
              << ',' << format_double(r.mean_relative_error) << ",," << (r.mean_pass ? "true" : "false") << '\n';
        });
        break;
      }
      case BenchKind::Table1: {
        bench::StaircaseBenchOptions o;
        o.seed = opt.seed;
        const auto r = bench::run_staircase_bench(o);
        out << "Step heights vs ground truth (tolerance " << format_fixed(1000 * r.tolerance_mm, 1) << " um)\n";
        out << "profile       reference_mm  measured_mm  deviation_mm  result\n";
        for (std::size_t i = 0; i < r.report.rows.size(); ++i) {
          const auto& row = r.report.rows[i];
          std::string label = r.labels[i];
          label.resize(12, ' ');
          out << label << "  " << format_fixed(row.reference_mm, 2) << "          " << format_fixed(row.measured_mm, 4)
              << "       " << format_fixed(row.deviation_mm, 4) << "       " << pass_word(r.row_pass[i]) << '\n';
        }
        out << "max |deviation|: " << format_fixed(r.report.max_abs_deviation_mm, 4) << " mm\n";
        out << "overall: " << pass_word(r.pass) << '\n';
        detail::emit(opt.csv_out, out, [&](std::ostream& csv) {
          if (opt.csv_out) io::write_step_report_csv(csv, r.report, r.labels);
        });
        break;
      }
      case BenchKind::Grr: {
        bench::GrrBenchOptions o;
        o.seed = opt.seed;
        const auto r = bench::run_grr_bench(o);
        out << "Gage R&R band: " << o.seeds << " seeds, " << o.dataset.parts << " parts x " << o.dataset.operators
            << " operators x " << o.dataset.trials << " trials, roll " << format_fixed(o.dataset.carrier_roll_um, 1)
            << " um\n";
        out << "mean total R&R: " << format_fixed(r.mean_total_rr, 2) << " um\n";
        out << "in band [" << format_fixed(o.band_low_um, 0) << ", " << format_fixed(o.band_high_um, 0)
            << "] um: " << format_fixed(100 * r.in_band_fraction, 1) << "% (required "
            << format_fixed(100 * o.required_fraction, 0) << "%)\n";
        out << "variance identities: " << (r.identities_hold ? "hold" : "violated") << '\n';
        out << "overall: " << pass_word(r.pass) << '\n';
        detail::emit(opt.csv_out, out, [&](std::ostream& csv) {
          if (!opt.csv_out) return;
          csv << "run,repeatability_ev,reproducibility_av,part_variation_pv,total_rr,total_variation,percent_rr\n";
          for (std::size_t i = 0; i < r.runs.size(); ++i) {
            const auto& g = r.runs[i];
            csv << i << ',' << format_double(g.repeatability_ev) << ',' << format_double(g.reproducibility_av) << ','
                << format_double(g.part_variation_pv) << ',' << format_double(g.total_rr) << ','
                << format_double(g.total_variation) << ',' << format_double(g.percent_rr) << '\n';
          }
        });
        break;
      }
      case BenchKind::Accuracy: {
        bench::AccuracyBenchOptions o;
        o.seed = opt.seed;
        const auto r = bench::run_accuracy_bench(o);
        out << "Accuracy sweep: " << o.scenes << " noiseless tracks, widths " << format_fixed(o.min_width_um, 0) << "-"
            << format_fixed(o.max_width_um, 0) << " um, heights " << format_fixed(o.min_height_um, 0) << "-"
            << format_fixed(o.max_height_um, 0) << " um\n";
        out << "max height error: " << format_fixed(r.max_height_error_um, 3) << " um (limit "
            << format_fixed(o.height_tolerance_um, 1) << ")\n";
        out << "max width error: " << format_fixed(r.max_width_error_px, 3) << " px (limit "
            << format_fixed(r.width_tolerance_px, 1) << ")\n";
        out << "passed: " << r.passed << "/" << o.scenes << '\n';
        out << "overall: " << pass_word(r.pass) << '\n';
        detail::emit(opt.csv_out, out, [&](std::ostream& csv) {
          if (!opt.csv_out) return;
          csv << "width_um,height_um,measured_width_um,measured_height_um,pass\n";
          for (const auto& s : r.samples) {
            csv << format_double(s.width_um) << ',' << format_double(s.height_um) << ','
                << format_double(s.measured_width_um) << ',' << format_double(s.measured_height_um) << ','
                << (s.pass ? "true" : "false") << '\n';
          }
        });
        break;
      }
    }
  } catch (const Error& e) {
    err << "trackscan bench: " << e.what() << '\n';
    return exit_data;
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// control

struct ControlOptions {
  SimulationConfig simulation = [] {
    SimulationConfig c;
    c.model = standard_disturbance();
    return c;
  }();
  std::uint64_t seed = 1;
  std::optional<fs::path> trace_out;
  std::optional<fs::path> summary_out;
};

inline int cmd_control(const ControlOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (opt.simulation.n_layers < 1) throw Error(ErrorCode::Config, "--layers must be >= 1");
    if (!(opt.simulation.nominal_um > 0.0)) throw Error(ErrorCode::Config, "--nominal must be > 0");
    if (!(opt.simulation.strategy.kp > 0.0 && opt.simulation.strategy.kp <= 2.0)) {
      throw Error(ErrorCode::Config, "--kp must lie in (0, 2]");
    }
    validate(opt.simulation.model);
    if (opt.trace_out) detail::require_parent_exists(*opt.trace_out, "--trace");
    if (opt.summary_out) detail::require_parent_exists(*opt.summary_out, "--summary");
  } catch (const Error& e) {
    err << "trackscan control: " << e.what() << '\n';
    return exit_config;
  }

  SimulationResult result;
  int code = exit_ok;
  try {
    result = run_simulation(opt.simulation, opt.seed);
  } catch (const LayerBudgetExhausted& e) {
    result = e.partial();
    code = exit_divergence;
    err << "trackscan control: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "trackscan control: " << e.what() << '\n';
    return exit_data;
  }

  try {
    if (opt.trace_out) {
      auto f = io::open_output(*opt.trace_out);
      io::write_trace_csv(f, result.trace);
    }
    auto summary = io::summary_json(result, opt.simulation, opt.seed);
    summary["diverged"] = code == exit_divergence;
    detail::emit(opt.summary_out, out, [&](std::ostream& s) { s << summary.dump(2) << '\n'; });
  } catch (const Error& e) {
    err << "trackscan control: " << e.what() << '\n';
    return exit_data;
  }
  return code;
}

/// Applies a control config document; only keys present override `opt`.
inline void apply_control_config(const io::Json& j, ControlOptions& opt) {
  io::require_known_keys(j, {"schema_version", "strategy", "kp", "layers", "nominal_um", "seed", "model"}, "config");
  io::detail::check_schema(j, "config");
  if (j.contains("strategy")) {
    opt.simulation.strategy.kind = parse_strategy(io::detail::read_required<std::string>(j, "strategy", "config"));
  }
  io::detail::read_optional(j, "kp", opt.simulation.strategy.kp, "config");
  io::detail::read_optional(j, "layers", opt.simulation.n_layers, "config");
  io::detail::read_optional(j, "nominal_um", opt.simulation.nominal_um, "config");
  io::detail::read_optional(j, "seed", opt.seed, "config");
  if (j.contains("model")) opt.simulation.model = io::process_model_from_json(j.at("model"), opt.simulation.model);
}

/// Extract config document; only keys present override `opt`.
inline void apply_extract_config(const io::Json& j, ExtractOptions& opt) {
  io::require_known_keys(j,
                         {"schema_version", "floor", "threshold", "run_length", "pitch_um", "fit_ellipse",
                          "calibration", "out", "profiles", "json"},
                         "config");
  io::detail::check_schema(j, "config");
  io::detail::read_optional(j, "floor", opt.intensity_floor, "config");
  io::detail::read_optional(j, "threshold", opt.threshold_px, "config");
  io::detail::read_optional(j, "run_length", opt.run_length, "config");
  io::detail::read_optional(j, "pitch_um", opt.pixel_pitch_um, "config");
  io::detail::read_optional(j, "fit_ellipse", opt.fit_ellipse, "config");
  auto path = [&](const char* key, std::optional<fs::path>& dst) {
    if (j.contains(key)) dst = fs::path(io::detail::read_required<std::string>(j, key, "config"));
  };
  path("calibration", opt.calibration);
  path("out", opt.out);
  path("profiles", opt.profiles_dir);
  path("json", opt.json_out);
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
  fs::path gauge_image;
  double gauge_mm = default_gauge_mm;
  double pixel_pitch_um = 10.0;
  double intensity_floor = default_intensity_floor;
  double threshold_px = default_threshold_px;
  std::optional<fs::path> out;
};

inline int cmd_calibrate(const CalibrateOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (!fs::exists(opt.gauge_image)) throw Error(ErrorCode::Config, "gauge scan does not exist: " + opt.gauge_image.string());
    if (!(opt.gauge_mm > 0.0)) throw Error(ErrorCode::Config, "--gauge-mm must be > 0");
    if (opt.out) detail::require_parent_exists(*opt.out, "--out");
  } catch (const Error& e) {
    err << "trackscan calibrate: " << e.what() << '\n';
    return exit_config;
  }
  try {
    MeasureOptions m;
    m.intensity_floor = opt.intensity_floor;
    m.threshold_px = opt.threshold_px;
    m.fit_ellipse = false;
    const auto map = bench::calibrate_from_frame(io::load_frame(opt.gauge_image, opt.pixel_pitch_um), opt.gauge_mm, m);
    detail::emit(opt.out, out, [&](std::ostream& s) { s << io::to_json(map).dump(2) << '\n'; });
  } catch (const Error& e) {
    err << "trackscan calibrate: " << e.what() << '\n';
    return exit_data;
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// grr

struct GrrOptions {
  fs::path input;
  std::string unit = "um";
  std::optional<fs::path> out;
};

inline int cmd_grr(const GrrOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (!fs::exists(opt.input)) throw Error(ErrorCode::Config, "input does not exist: " + opt.input.string());
    if (opt.out) detail::require_parent_exists(*opt.out, "--out");
  } catch (const Error& e) {
    err << "trackscan grr: " << e.what() << '\n';
    return exit_config;
  }
  try {
    auto in = io::open_input(opt.input);
    const auto result = grr_study(io::read_grr_csv(in, opt.unit));
    detail::emit(opt.out, out, [&](std::ostream& s) { s << io::to_json(result).dump(2) << '\n'; });
  } catch (const Error& e) {
    err << "trackscan grr: " << e.what() << '\n';
    return exit_data;
  }
  return exit_ok;
}

}  // namespace trackscan::app
