#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <unistd.h>

#include "trackscan/io/csv.hpp"
#include "trackscan/io/image.hpp"
#include "trackscan/io/json.hpp"
#include "trackscan/laser_line.hpp"
#include "trackscan/synth.hpp"

using namespace trackscan;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("trackscan_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

Frame quantized_frame(int levels) {
  Frame f(20, 17, 10.0, "q");
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(0, levels);
  for (auto& v : f.intensities) v = static_cast<double>(u(rng)) / levels;
  return f;
}

}  // namespace

TEST(Pgm, SixteenBitRoundTripIsExact) {
  const Frame f = quantized_frame(65535);
  std::stringstream ss;
  io::write_pgm(ss, f, 16);
  const Frame g = io::read_pgm(ss);
  EXPECT_EQ(g.width, f.width);
  EXPECT_EQ(g.height, f.height);
  EXPECT_EQ(g.intensities, f.intensities);
}

TEST(Pgm, EightBitRoundTripIsExact) {
  const Frame f = quantized_frame(255);
  std::stringstream ss;
  io::write_pgm(ss, f, 8);
  EXPECT_EQ(io::read_pgm(ss).intensities, f.intensities);
}

TEST(Pgm, HeaderCommentsAreSkipped) {
  std::stringstream ss;
  ss << "P5\n# made by hand\n16 16\n# max\n255\n" << std::string(256, static_cast<char>(128));
  const Frame f = io::read_pgm(ss);
  EXPECT_EQ(f.width, 16);
  EXPECT_DOUBLE_EQ(f.at(3, 3), 128.0 / 255.0);
}

TEST(Pgm, MalformedInputs) {
  auto code_of = [](const std::string& text) {
    std::stringstream ss(text);
    try {
      io::read_pgm(ss);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code_of("P2\n16 16\n255\n"), ErrorCode::Format);
  EXPECT_EQ(code_of("P5\n16 16\n255\n" + std::string(10, 'x')), ErrorCode::Format);
  EXPECT_EQ(code_of("P5\n16 x\n255\n"), ErrorCode::Format);
  EXPECT_EQ(code_of("P5\n16 16\n0\n"), ErrorCode::Format);
}

TEST(Png, RoundTripAndDispatch) {
  const auto dir = scratch_dir();
  const Frame f = quantized_frame(65535);
  io::write_png(dir / "f.png", f);
  const Frame g = io::load_frame(dir / "f.png");
  EXPECT_EQ(g.intensities, f.intensities);
  EXPECT_EQ(g.frame_id, "f");

  io::write_pgm(dir / "f.pgm", f, 16);
  EXPECT_EQ(io::load_frame(dir / "f.pgm").intensities, f.intensities);

  std::ofstream(dir / "junk.pgm") << "not an image";
  EXPECT_THROW(io::load_frame(dir / "junk.pgm"), Error);
  EXPECT_THROW(io::load_frame(dir / "missing.pgm"), Error);
  EXPECT_TRUE(io::is_image_path("a/b.PNG"));
  EXPECT_FALSE(io::is_image_path("a/b.json"));
  fs::remove_all(dir);
}

TEST(Csv, SplitAndEscape) {
  EXPECT_EQ(io::csv_escape("plain"), "plain");
  EXPECT_EQ(io::csv_escape("a,b"), "\"a,b\"");
  const auto f = io::csv_split("\"a,b\",\"say \"\"hi\"\"\",3");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0], "a,b");
  EXPECT_EQ(f[1], "say \"hi\"");
}

TEST(Csv, ProfileRoundTrip) {
  SceneSpec s;
  s.track = TrackSpec{};
  s.sensor_noise_sigma = 0.05;
  s.rng_seed = 4;
  const auto p = extract_laser_line(render_frame(s), 0.2);
  std::stringstream ss;
  io::write_profile_csv(ss, p);
  const auto q = io::read_profile_csv(ss, p.frame_height);
  EXPECT_EQ(q.row_subpixel, p.row_subpixel);
  EXPECT_EQ(q.valid, p.valid);
}

TEST(Csv, MeasurementRoundTrip) {
  std::stringstream ss;
  ss << io::measurement_header << '\n';
  const io::MeasurementRow a{"frame,1", 290.0, 149.123456789012, 0.1 + 0.2, true};
  const io::MeasurementRow b{"zeros", 0.0, 0.0, 0.0, false};
  io::write_measurement_row(ss, a);
  io::write_measurement_row(ss, b);
  const auto rows = io::read_measurement_csv(ss);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].frame_id, a.frame_id);
  EXPECT_EQ(rows[0].height_um, a.height_um);
  EXPECT_EQ(rows[0].diffusion_um, a.diffusion_um);
  EXPECT_TRUE(rows[0].found);
  EXPECT_FALSE(rows[1].found);
}

TEST(Csv, TraceRoundTrip) {
  SimulationConfig cfg;
  cfg.strategy.kind = StrategyKind::AddSkip;
  cfg.model = standard_disturbance();
  const auto r = run_simulation(cfg, 5);
  std::stringstream ss;
  io::write_trace_csv(ss, r.trace);
  const auto back = io::read_trace_csv(ss);
  ASSERT_EQ(back.size(), r.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].layer, r.trace[i].layer);
    EXPECT_EQ(back[i].commanded_um, r.trace[i].commanded_um);
    EXPECT_EQ(back[i].actual_um, r.trace[i].actual_um);
    EXPECT_EQ(back[i].measured_z_um, r.trace[i].measured_z_um);
    EXPECT_EQ(back[i].z_error_um, r.trace[i].z_error_um);
    EXPECT_EQ(back[i].action, r.trace[i].action);
  }
}

TEST(Csv, GrrRoundTripAndValidation) {
  GrrDatasetOptions o;
  o.parts = 4;
  o.operators = 3;
  o.trials = 2;
  const auto d = grr_dataset(o);
  std::stringstream ss;
  io::write_grr_csv(ss, d);
  const auto back = io::read_grr_csv(ss);
  EXPECT_EQ(back.parts, 4);
  EXPECT_EQ(back.operators, 3);
  EXPECT_EQ(back.values, d.values);

  std::stringstream dup("part,operator,trial,value\nA,x,1,1\nA,x,1,2\n");
  EXPECT_THROW(io::read_grr_csv(dup), Error);
  std::stringstream gap("part,operator,trial,value\nA,x,1,1\nA,x,2,2\nB,x,1,3\n");
  EXPECT_THROW(io::read_grr_csv(gap), Error);
  std::stringstream header("p,o,t,v\n");
  EXPECT_THROW(io::read_grr_csv(header), Error);
}

TEST(Csv, StepReportRoundTrip) {
  const std::vector<double> m{1.36, 2.28}, ref{1.38, 2.38};
  const auto r = step_height_report(m, ref);
  std::stringstream ss;
  io::write_step_report_csv(ss, r, {"Profile 1", "Profile 2"});
  const auto back = io::read_step_report_csv(ss);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[1].deviation_mm, r.rows[1].deviation_mm);
  EXPECT_EQ(back.max_abs_deviation_mm, r.max_abs_deviation_mm);
}

TEST(Json, SceneRoundTrip) {
  SceneSpec s;
  s.name = "bead";
  s.platform_roll_um = 20.0;
  s.track = TrackSpec{300.25, 280.0, 140.0, TrackShape::Plateau};
  s.diffusion_mean_abs_um = 8.42;
  s.rng_seed = 123456789012345ULL;
  const auto back = io::scene_from_json(io::parse_json_text(io::to_json(s).dump(), "t"));
  EXPECT_EQ(io::to_json(back).dump(), io::to_json(s).dump());
  EXPECT_EQ(back.rng_seed, s.rng_seed);
}

TEST(Json, SceneRejectsUnknownKeysAndBadValues) {
  auto code_of = [](const std::string& text) {
    try {
      io::scene_from_json(io::parse_json_text(text, "t"));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code_of(R"({"widht": 640})"), ErrorCode::Config);
  EXPECT_EQ(code_of(R"({"width": "wide"})"), ErrorCode::Config);
  EXPECT_EQ(code_of(R"({"width": 4})"), ErrorCode::Config);
  EXPECT_EQ(code_of(R"({"schema_version": 2})"), ErrorCode::Config);
  EXPECT_EQ(code_of(R"({"track": {"width_um": 100}})"), ErrorCode::Config);
  EXPECT_EQ(code_of("{"), ErrorCode::Config);
}

TEST(Json, CalibrationRoundTrip) {
  const std::vector<double> a{400.0}, b{100.3};
  const auto map = calibrate_from_gauge(a, b, 5.0);
  const auto back = io::calibration_from_json(io::parse_json_text(io::to_json(map).dump(), "t"));
  EXPECT_EQ(back.span_px, map.span_px);
  EXPECT_EQ(apply_calibration(back, map.span_px), 5.0);
  const auto bare = io::calibration_from_json(
      io::parse_json_text(R"({"gain_mm_per_px": 0.01, "offset_mm": 0, "gauge_mm": 5})", "t"));
  EXPECT_NEAR(bare.gain_mm_per_px(), 0.01, 1e-15);
  EXPECT_THROW(io::calibration_from_json(io::parse_json_text(R"({"gain_mm_per_px": 0.01})", "t")), Error);
}

TEST(Json, ProcessModelRoundTrip) {
  const ProcessModel m{0.95, 5.0, 5.0, 5.0, 17};
  const auto back = io::process_model_from_json(io::to_json(m));
  EXPECT_EQ(io::to_json(back).dump(), io::to_json(m).dump());
  EXPECT_THROW(io::process_model_from_json(io::parse_json_text(R"({"thickness_gain": -1})", "t")), Error);
  EXPECT_THROW(io::process_model_from_json(io::parse_json_text(R"({"gain": 1})", "t")), Error);
}

TEST(Json, GrrResultHasIdentities) {
  GrrDatasetOptions o;
  const auto r = grr_study(grr_dataset(o));
  const auto j = io::to_json(r);
  EXPECT_EQ(j.at("total_rr").get<double>(), r.total_rr);
  EXPECT_EQ(j.at("anova").at("df_error").get<int>(), r.anova.df_error);
}
