#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "oracles.hpp"
#include "trackscan/measure.hpp"
#include "trackscan/synth.hpp"

using namespace trackscan;

namespace {

LaserProfile flat_profile(int columns, double row) {
  LaserProfile p(columns, 480);
  for (int c = 0; c < columns; ++c) {
    p.row_subpixel[static_cast<std::size_t>(c)] = row;
    p.valid[static_cast<std::size_t>(c)] = 1;
  }
  return p;
}

constexpr double missing = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST(DetectPlatform, FlatProfile) {
  const auto b = detect_platform(flat_profile(640, 100.0));
  EXPECT_EQ(b.left_median, 100.0);
  EXPECT_EQ(b.right_median, 100.0);
  for (int c = 0; c < 640; c += 37) EXPECT_EQ(b.at(c), 100.0);
}

TEST(DetectPlatform, MedianRejectsMinoritySpike) {
  LaserProfile p = flat_profile(24, 100.0);  // band width 3
  p.row_subpixel[2] = 140.0;
  const auto b = detect_platform(p);
  EXPECT_EQ(b.left_median, 100.0);
  EXPECT_EQ(b.right_median, 100.0);
}

TEST(DetectPlatform, EmptyBandThrows) {
  LaserProfile p = flat_profile(64, 100.0);
  for (int c = 0; c < 8; ++c) p.valid[static_cast<std::size_t>(c)] = 0;
  try {
    detect_platform(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoPlatformSignal);
  }
}

TEST(DetectPlatform, RecoversRenderedCarrierRoll) {
  SceneSpec s;
  s.platform_roll_um = 20.0;
  const auto b = detect_platform(extract_laser_line(render_frame(s), 0.2));
  // Rows grow downward: a 2 px rise across the field appears as -2 rows.
  EXPECT_NEAR(b.at(0.0) - b.at(s.width - 1.0), 2.0, 0.1);
  EXPECT_LT(b.right_median, b.left_median);
}

TEST(DetectPlatformProperty, MediansMatchSortAndPick) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> width(16, 400);
  std::uniform_real_distribution<double> row(0.0, 480.0), u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = width(rng);
    const int band = w / 8;
    LaserProfile p(w, 480);
    for (int c = 0; c < w; ++c) {
      p.row_subpixel[static_cast<std::size_t>(c)] = row(rng);
      p.valid[static_cast<std::size_t>(c)] = u(rng) < 0.8 ? 1 : 0;
    }
    p.valid[0] = 1;
    p.valid[static_cast<std::size_t>(w - 1)] = 1;
    std::vector<double> left, right;
    for (int c = 0; c < band; ++c)
      if (p.is_valid(c)) left.push_back(p.row(c));
    for (int c = w - band; c < w; ++c)
      if (p.is_valid(c)) right.push_back(p.row(c));
    const auto b = detect_platform(p);
    ASSERT_EQ(b.left_median, oracle::median_sort_pick(left));
    ASSERT_EQ(b.right_median, oracle::median_sort_pick(right));
  }
}

TEST(DetectTrack, FlatProfileHasNoTrack) {
  const auto p = flat_profile(640, 100.0);
  EXPECT_FALSE(detect_track(p, detect_platform(p)).found);
}

TEST(DetectTrack, LeftEdgeStartsTheFullRun) {
  const double t = 3.0, hi = t + 0.5;
  std::vector<double> e = {0, 0, hi, hi, 0, hi, hi, hi, hi, hi, hi, 0, 0};
  const auto d = detect_track(e, t, 3);
  ASSERT_TRUE(d.found);
  EXPECT_EQ(d.left_edge, 5);
  EXPECT_EQ(d.right_edge, 10);
  EXPECT_EQ(d.width_px, 5);
  EXPECT_EQ(d.center, 8);
  EXPECT_EQ(d.height_px, hi);
}

TEST(DetectTrack, RejectsBadArguments) {
  std::vector<double> e(10, 0.0);
  EXPECT_THROW(detect_track(e, 0.0, 3), Error);
  EXPECT_THROW(detect_track(e, 1.0, 0), Error);
}

TEST(DetectTrackProperty, EdgesMatchBruteForceScan) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> len(1, 80), run(1, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0), elev(-2.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng), r = run(rng);
    const double t = 0.5 + 4.0 * u(rng);
    const double p_high = u(rng);
    std::vector<double> e(static_cast<std::size_t>(n));
    for (auto& v : e) {
      const double x = u(rng);
      v = x < 0.05 ? missing : (x < p_high ? t + 5.0 * u(rng) : elev(rng));
    }
    const auto got = detect_track(e, t, r);
    const auto want = oracle::edge_scan(e, t, r);
    ASSERT_EQ(got.found, want.found) << "trial " << trial;
    if (want.found) {
      ASSERT_EQ(got.left_edge, want.left);
      ASSERT_EQ(got.right_edge, want.right);
    }
  }
}

TEST(DetectTrack, RenderedSemiEllipticTrack) {
  SceneSpec s;
  s.track = TrackSpec{319.5, 300.0, 150.0, TrackShape::Elliptic};
  const auto p = extract_laser_line(render_frame(s), 0.2);
  const auto d = detect_track(p, detect_platform(p));
  ASSERT_TRUE(d.found);
  EXPECT_NEAR(d.width_px, 30, 2 * default_run_length);
  EXPECT_NEAR(d.height_px, 15.0, 0.5);
}

TEST(MeasureTrack, NoiselessHeightWithinTenMicrometres) {
  SceneSpec s;
  s.track = TrackSpec{};
  const auto m = measure_track(render_frame(s), CalibrationMap::from_pixel_pitch(10.0));
  ASSERT_TRUE(m.found);
  EXPECT_NEAR(m.height_um, 150.0, 10.0);
  ASSERT_TRUE(m.ellipse.has_value());
  EXPECT_LT(m.diffusion_um, 1.0);
}

TEST(MeasureTrack, ZeroFrameHasNoPlatform) {
  try {
    measure_track(Frame(640, 480), CalibrationMap{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoPlatformSignal);
  }
}

TEST(MeasureTrack, StaircaseStepWithinOnePixelEquivalent) {
  const auto scenes = make_staircase_scenes(default_staircase_heights_mm(), staircase_base_scene());
  MeasureOptions opt;
  opt.fit_ellipse = false;
  for (const auto& s : scenes) {
    const auto m = measure_track(render_frame(s), CalibrationMap::from_pixel_pitch(s.pixel_pitch_um), opt);
    ASSERT_TRUE(m.found) << s.name;
    EXPECT_NEAR(m.height_um, s.track->height_um, s.pixel_pitch_um) << s.name;
  }
}

TEST(MeasureTrack, NoTrackIsNotFound) {
  const auto m = measure_track(render_frame(SceneSpec{}), CalibrationMap{});
  EXPECT_FALSE(m.found);
  EXPECT_EQ(m.width_um, 0.0);
  EXPECT_FALSE(m.ellipse.has_value());
}
