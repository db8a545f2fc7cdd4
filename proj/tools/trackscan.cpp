#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "trackscan/app/commands.hpp"

namespace ts = trackscan;
namespace app = trackscan::app;

namespace {

std::optional<std::filesystem::path> opt_path(const CLI::Option* o, const std::string& value) {
  if (o->count() == 0) return std::nullopt;
  return std::filesystem::path(value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Laser-line track metrology, synthetic benches and layer-height control"};
  cli.set_version_flag("--version", std::string("trackscan ") + app::version_string);
  cli.require_subcommand(1);

  // extract ---------------------------------------------------------------
  auto* extract = cli.add_subcommand("extract", "Measure tracks in PGM/PNG frames (files or directories)");
  std::vector<std::string> ex_inputs;
  app::ExtractOptions ex_defaults;
  double ex_floor = ex_defaults.intensity_floor, ex_threshold = ex_defaults.threshold_px, ex_pitch = 10.0;
  int ex_run = ex_defaults.run_length;
  bool ex_no_fit = false;
  std::string ex_calibration, ex_out, ex_profiles, ex_json, ex_config;
  extract->add_option("inputs", ex_inputs, "Image files or directories")->required();
  auto* o_floor = extract->add_option("--floor", ex_floor, "Minimum peak intensity in [0,1) for a valid column");
  auto* o_thr = extract->add_option("--threshold", ex_threshold, "Elevation threshold in px for the track run");
  auto* o_run = extract->add_option("--run-length", ex_run, "Consecutive columns required above threshold");
  auto* o_pitch = extract->add_option("--pitch", ex_pitch, "Pixel pitch in um");
  auto* o_nofit = extract->add_flag("--no-ellipse", ex_no_fit, "Skip the ellipse fit (diffusion reported as 0)");
  auto* o_cal = extract->add_option("--calibration", ex_calibration, "Calibration JSON");
  auto* o_out = extract->add_option("--out", ex_out, "Measurement CSV (default: standard output)");
  auto* o_prof = extract->add_option("--profiles", ex_profiles, "Directory for per-frame profile CSVs");
  auto* o_json = extract->add_option("--json", ex_json, "Per-frame measurement details as JSON");
  extract->add_option("--config", ex_config, "Config JSON (flags take precedence)");

  // synth -----------------------------------------------------------------
  auto* synth = cli.add_subcommand("synth", "Render synthetic frames with ground-truth sidecars");
  std::string sy_scene, sy_preset = "track", sy_out;
  int sy_frames = 0, sy_bits = 16;
  std::uint64_t sy_seed = 0;
  auto* o_scene = synth->add_option("--scene", sy_scene, "Scene JSON");
  synth->add_option("--preset", sy_preset, "Built-in scene set: track, staircase, gauge")->excludes(o_scene);
  auto* o_frames = synth->add_option("--frames", sy_frames, "Number of frames (default: one per scene)");
  auto* o_seed = synth->add_option("--seed", sy_seed, "Base seed; frame i uses seed + i");
  synth->add_option("--bits", sy_bits, "PGM bit depth, 8 or 16");
  synth->add_option("--out", sy_out, "Output directory")->required();

  // bench -----------------------------------------------------------------
  auto* bench = cli.add_subcommand("bench", "Run a synthetic reproduction protocol");
  bool b_t1 = false, b_t2 = false, b_grr = false, b_acc = false;
  app::BenchOptions bench_opt;
  std::string b_out;
  auto* f1 = bench->add_flag("--table1", b_t1, "Staircase step heights");
  auto* f2 = bench->add_flag("--table2", b_t2, "Diffusion error per material");
  auto* f3 = bench->add_flag("--grr", b_grr, "Gage R&R band over seeds");
  auto* f4 = bench->add_flag("--accuracy", b_acc, "Randomized width/height accuracy sweep");
  f1->excludes(f2, f3, f4);
  f2->excludes(f3, f4);
  f3->excludes(f4);
  bench->add_option("--seed", bench_opt.seed, "Seed");
  bench->add_option("--frames", bench_opt.frames_per_material, "Frames per material for --table2");
  auto* o_bout = bench->add_option("--out", b_out, "CSV of the per-row results");

  // control ---------------------------------------------------------------
  auto* control = cli.add_subcommand("control", "Simulate layer-height feedback control");
  std::string c_strategy, c_model, c_out, c_summary, c_config;
  double c_kp = 1.0, c_nominal = 200.0;
  int c_layers = 100;
  std::uint64_t c_seed = 1;
  auto* o_strat = control->add_option("--strategy", c_strategy, "proportional, addskip, reslice or none");
  auto* o_model = control->add_option("--model", c_model, "Process model JSON (default: standard disturbance)");
  auto* o_layers = control->add_option("--layers", c_layers, "Planned layers");
  auto* o_nom = control->add_option("--nominal", c_nominal, "Nominal layer thickness in um");
  auto* o_kp = control->add_option("--kp", c_kp, "Proportional gain in (0, 2]");
  auto* o_cseed = control->add_option("--seed", c_seed, "Seed");
  auto* o_trace = control->add_option("--out", c_out, "Trace CSV");
  auto* o_sum = control->add_option("--summary", c_summary, "Summary JSON (default: standard output)");
  control->add_option("--config", c_config, "Config JSON (flags take precedence)");

  // calibrate -------------------------------------------------------------
  auto* calibrate = cli.add_subcommand("calibrate", "Derive a calibration map from a gauge-block scan");
  app::CalibrateOptions cal_opt;
  std::string cal_image, cal_out;
  calibrate->add_option("image", cal_image, "Gauge-block frame")->required();
  calibrate->add_option("--gauge-mm", cal_opt.gauge_mm, "Gauge thickness in mm");
  calibrate->add_option("--pitch", cal_opt.pixel_pitch_um, "Pixel pitch in um");
  calibrate->add_option("--floor", cal_opt.intensity_floor, "Minimum peak intensity");
  calibrate->add_option("--threshold", cal_opt.threshold_px, "Elevation threshold in px");
  auto* o_calout = calibrate->add_option("--out", cal_out, "Calibration JSON (default: standard output)");

  // grr -------------------------------------------------------------------
  auto* grr = cli.add_subcommand("grr", "Crossed gage R&R study from a part,operator,trial,value CSV");
  app::GrrOptions grr_opt;
  std::string grr_in, grr_out;
  grr->add_option("input", grr_in, "Measurement CSV")->required();
  grr->add_option("--unit", grr_opt.unit, "Unit label for the report");
  auto* o_grrout = grr->add_option("--out", grr_out, "Result JSON (default: standard output)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::exit_config;
  }

  try {
    if (*extract) {
      app::ExtractOptions opt;
      if (!ex_config.empty()) app::apply_extract_config(ts::io::read_json_file(ex_config), opt);
      for (const auto& s : ex_inputs) opt.inputs.emplace_back(s);
      if (o_floor->count()) opt.intensity_floor = ex_floor;
      if (o_thr->count()) opt.threshold_px = ex_threshold;
      if (o_run->count()) opt.run_length = ex_run;
      if (o_pitch->count()) opt.pixel_pitch_um = ex_pitch;
      if (o_nofit->count()) opt.fit_ellipse = !ex_no_fit;
      if (auto p = opt_path(o_cal, ex_calibration)) opt.calibration = p;
      if (auto p = opt_path(o_out, ex_out)) opt.out = p;
      if (auto p = opt_path(o_prof, ex_profiles)) opt.profiles_dir = p;
      if (auto p = opt_path(o_json, ex_json)) opt.json_out = p;
      return app::cmd_extract(opt, std::cout, std::cerr);
    }
    if (*synth) {
      app::SynthOptions opt;
      if (o_scene->count()) opt.scene = sy_scene;
      opt.preset = sy_preset;
      if (o_frames->count()) opt.frames = sy_frames;
      if (o_seed->count()) opt.seed = sy_seed;
      opt.bits = sy_bits;
      opt.out_dir = sy_out;
      return app::cmd_synth(opt, std::cout, std::cerr);
    }
    if (*bench) {
      if (b_t1) bench_opt.kind = app::BenchKind::Table1;
      else if (b_t2) bench_opt.kind = app::BenchKind::Table2;
      else if (b_grr) bench_opt.kind = app::BenchKind::Grr;
      else if (b_acc) bench_opt.kind = app::BenchKind::Accuracy;
      else throw ts::Error(ts::ErrorCode::Config, "choose one of --table1, --table2, --grr, --accuracy");
      bench_opt.csv_out = opt_path(o_bout, b_out);
      return app::cmd_bench(bench_opt, std::cout, std::cerr);
    }
    if (*control) {
      app::ControlOptions opt;
      if (!c_config.empty()) app::apply_control_config(ts::io::read_json_file(c_config), opt);
      if (o_model->count()) {
        opt.simulation.model = ts::io::process_model_from_json(ts::io::read_json_file(c_model), ts::ProcessModel{});
      }
      if (o_strat->count()) opt.simulation.strategy.kind = ts::parse_strategy(c_strategy);
      if (o_kp->count()) opt.simulation.strategy.kp = c_kp;
      if (o_layers->count()) opt.simulation.n_layers = c_layers;
      if (o_nom->count()) opt.simulation.nominal_um = c_nominal;
      if (o_cseed->count()) opt.seed = c_seed;
      opt.trace_out = opt_path(o_trace, c_out);
      opt.summary_out = opt_path(o_sum, c_summary);
      return app::cmd_control(opt, std::cout, std::cerr);
    }
    if (*calibrate) {
      cal_opt.gauge_image = cal_image;
      cal_opt.out = opt_path(o_calout, cal_out);
      return app::cmd_calibrate(cal_opt, std::cout, std::cerr);
    }
    if (*grr) {
      grr_opt.input = grr_in;
      grr_opt.out = opt_path(o_grrout, grr_out);
      return app::cmd_grr(grr_opt, std::cout, std::cerr);
    }
  } catch (const ts::Error& e) {
    // Anything thrown before a command starts is a configuration problem.
    std::cerr << "trackscan: " << e.what() << '\n';
    return app::exit_config;
  }
  return app::exit_config;
}
