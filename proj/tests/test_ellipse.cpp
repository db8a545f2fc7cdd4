#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "trackscan/ellipse.hpp"

using namespace trackscan;

namespace {

constexpr double pi = std::numbers::pi;

double rotation_gap(double a, double b) {
  // Angles of an undirected axis agree modulo pi.
  double d = std::fmod(std::abs(a - b), pi);
  return std::min(d, pi - d);
}

std::vector<Point2> sample(const Ellipse& e, int n, double t0 = 0.0, double t1 = 2 * pi) {
  std::vector<Point2> pts;
  for (int i = 0; i < n; ++i) pts.push_back(e.point_at(t0 + (t1 - t0) * (i + 0.5) / n));
  return pts;
}

Ellipse random_ellipse(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(-100.0, 100.0), axis(2.0, 60.0), ratio(0.2, 0.9), rot(-pi, pi);
  Ellipse e;
  e.center_x = centre(rng);
  e.center_z = centre(rng);
  e.semi_axis_a = axis(rng);
  e.semi_axis_b = e.semi_axis_a * ratio(rng);
  e.rotation = rot(rng);
  return e;
}

/// Points pushed along the outward normal by normal noise of mean |.| = eps.
std::vector<Point2> noisy_sample(const Ellipse& e, int n, double eps, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, eps * std::sqrt(pi / 2.0));
  std::vector<Point2> pts;
  const double ct = std::cos(e.rotation), st = std::sin(e.rotation);
  for (int i = 0; i < n; ++i) {
    const double t = 2 * pi * (i + 0.5) / n;
    const auto p = e.point_at(t);
    const double nx = e.semi_axis_b * std::cos(t), nz = e.semi_axis_a * std::sin(t);
    const double len = std::hypot(nx, nz);
    const double d = g(rng);
    pts.push_back({p.x + d * (ct * nx - st * nz) / len, p.z + d * (st * nx + ct * nz) / len});
  }
  return pts;
}

}  // namespace

TEST(FitEllipse, ExactTwelvePoints) {
  const Ellipse truth{50.0, 80.0, 15.0, 6.0, 0.0};
  const auto pts = sample(truth, 12);
  const auto fit = fit_ellipse(pts);
  EXPECT_LT(oracle::relative_error(fit.center_x, 50.0), 1e-6);
  EXPECT_LT(oracle::relative_error(fit.center_z, 80.0), 1e-6);
  EXPECT_LT(oracle::relative_error(fit.semi_axis_a, 15.0), 1e-6);
  EXPECT_LT(oracle::relative_error(fit.semi_axis_b, 6.0), 1e-6);
  EXPECT_LT(rotation_gap(fit.rotation, 0.0), 1e-6);
  EXPECT_LT(fit.mean_abs_residual, 1e-9);
}

TEST(FitEllipse, AlgebraicFitAloneIsExactOnExactData) {
  const Ellipse truth{50.0, 80.0, 15.0, 6.0, 0.3};
  EllipseFitOptions opt;
  opt.geometric_refinement = false;
  const auto fit = fit_ellipse(sample(truth, 12), opt);
  EXPECT_LT(oracle::relative_error(fit.semi_axis_a, 15.0), 1e-6);
  EXPECT_LT(fit.mean_abs_residual, 1e-9);
}

TEST(FitEllipse, DegenerateInputs) {
  const auto five = sample(Ellipse{0, 0, 3, 2, 0}, 5);
  EXPECT_THROW(fit_ellipse(five), Error);
  std::vector<Point2> line;
  for (int i = 0; i < 20; ++i) line.push_back({1.0 * i, 2.0 * i + 1.0});
  try {
    fit_ellipse(line);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateFit);
  }
}

TEST(FitEllipse, NormalNoiseOfPointEightFivePixels) {
  const Ellipse truth{50.0, 80.0, 15.0, 6.0, 0.0};
  std::mt19937_64 rng(99);
  double sum = 0.0;
  const int reps = 200;
  for (int i = 0; i < reps; ++i) sum += fit_ellipse(noisy_sample(truth, 200, 0.85, rng)).mean_abs_residual;
  EXPECT_NEAR(sum / reps, 0.85, 0.15 * 0.85);
}

TEST(EllipseProperty, ConicRoundTripOnRandomEllipses) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 1000; ++i) {
    const Ellipse e = canonical(random_ellipse(rng));
    const Ellipse back = conic_to_ellipse(ellipse_to_conic(e));
    const double scale = e.semi_axis_a;
    ASSERT_LT(std::abs(back.center_x - e.center_x) / scale, 1e-9);
    ASSERT_LT(std::abs(back.center_z - e.center_z) / scale, 1e-9);
    ASSERT_LT(oracle::relative_error(back.semi_axis_a, e.semi_axis_a), 1e-9);
    ASSERT_LT(oracle::relative_error(back.semi_axis_b, e.semi_axis_b), 1e-9);
    ASSERT_LT(rotation_gap(back.rotation, e.rotation), 1e-9);
  }
}

TEST(EllipseProperty, SampleThenFitRoundTrip) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<int> count(8, 60);
  for (int i = 0; i < 1000; ++i) {
    const Ellipse e = random_ellipse(rng);
    const auto fit = fit_ellipse(sample(e, count(rng)));
    const double scale = std::max({e.semi_axis_a, std::abs(e.center_x), std::abs(e.center_z)});
    ASSERT_LT(std::abs(fit.center_x - e.center_x) / scale, 1e-6) << i;
    ASSERT_LT(std::abs(fit.center_z - e.center_z) / scale, 1e-6) << i;
    ASSERT_LT(oracle::relative_error(fit.semi_axis_a, e.semi_axis_a), 1e-6) << i;
    ASSERT_LT(oracle::relative_error(fit.semi_axis_b, e.semi_axis_b), 1e-6) << i;
    ASSERT_LT(rotation_gap(fit.rotation, e.rotation), 1e-6) << i;
    ASSERT_LT(fit.mean_abs_residual, 1e-9) << i;
  }
}

TEST(EllipseProperty, ResidualUnbiasedAcrossDiffusionRange) {
  std::mt19937_64 rng(33);
  const Ellipse truth{320.0, 10.0, 150.0, 20.0, 0.0};
  for (double eps : {0.3, 0.6, 0.9, 1.2, 1.5}) {
    double sum = 0.0;
    const int reps = 200;
    for (int i = 0; i < reps; ++i) sum += fit_ellipse(noisy_sample(truth, 150, eps, rng)).mean_abs_residual;
    EXPECT_NEAR(sum / reps, eps, 0.15 * eps) << "eps " << eps;
  }
}

TEST(EllipseProjection, AgreesWithDenseSampling) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> off(-80.0, 80.0);
  for (int i = 0; i < 200; ++i) {
    const Ellipse e = random_ellipse(rng);
    const Point2 p{e.center_x + off(rng), e.center_z + off(rng)};
    const auto proj = project_to_ellipse(e, p);
    const auto foot = e.point_at(proj.parameter);
    ASSERT_NEAR(foot.x, proj.foot.x, 1e-9);
    ASSERT_NEAR(foot.z, proj.foot.z, 1e-9);
    const double d = std::hypot(p.x - proj.foot.x, p.z - proj.foot.z);
    ASSERT_NEAR(d, std::abs(proj.signed_distance), 1e-9);
    // The dense oracle can only overestimate the true distance.
    const double dense = oracle::ellipse_distance(e, p, 20000);
    ASSERT_LE(d, dense + 1e-9);
    ASSERT_GT(d, dense - 1e-2 * e.semi_axis_a);
    const bool inside = ellipse_to_conic(e).evaluate(p) < 0.0;
    if (d > 1e-9) {
      ASSERT_EQ(inside, proj.signed_distance < 0.0);
    }
  }
}

TEST(EllipseProjection, PointOnCurveAndCentre) {
  const Ellipse e{0.0, 0.0, 5.0, 3.0, 0.4};
  EXPECT_NEAR(project_to_ellipse(e, e.point_at(1.1)).signed_distance, 0.0, 1e-9);
  EXPECT_NEAR(project_to_ellipse(e, {0.0, 0.0}).signed_distance, -3.0, 1e-9);
  const Ellipse circle{1.0, 2.0, 4.0, 4.0, 0.0};
  EXPECT_NEAR(project_to_ellipse(circle, {1.0, 9.0}).signed_distance, 3.0, 1e-9);
}

TEST(EllipseForm, CanonicalOrdersAxes) {
  const Ellipse c = canonical(Ellipse{0, 0, 2.0, 5.0, 0.3});
  EXPECT_EQ(c.semi_axis_a, 5.0);
  EXPECT_EQ(c.semi_axis_b, 2.0);
  EXPECT_NEAR(c.rotation, 0.3 + pi / 2 - pi, 1e-12);
  EXPECT_GT(c.rotation, -pi / 2);
  EXPECT_LE(c.rotation, pi / 2);
}

TEST(EllipseForm, ChordWidth) {
  const Ellipse e{0.0, 0.0, 10.0, 5.0, 0.0};
  EXPECT_NEAR(e.chord_width_at(0.0), 20.0, 1e-12);
  EXPECT_NEAR(e.chord_width_at(4.0), 2.0 * 10.0 * std::sqrt(1.0 - 16.0 / 25.0), 1e-9);
  EXPECT_EQ(e.chord_width_at(6.0), 0.0);
}

TEST(EllipseForm, ConicOfNonEllipseThrows) {
  EXPECT_THROW(conic_to_ellipse(ConicCoefficients{1.0, 0.0, -1.0, 0.0, 0.0, -1.0}), Error);
  EXPECT_THROW(conic_to_ellipse(ConicCoefficients{1.0, 0.0, 1.0, 0.0, 0.0, 1.0}), Error);
}
