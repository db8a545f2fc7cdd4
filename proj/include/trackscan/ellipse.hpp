#pragma once

// Ellipse fitting for track cross-sections.
//
// The fit is a direct ellipse-specific algebraic least-squares solve (the
// numerically stable block formulation of the 4ac - b^2 = 1 constrained
// generalized eigenproblem) on centred and scaled points, followed by an
// orthogonal-distance refinement. Residuals are true point-to-ellipse
// distances from a per-point Newton projection.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "trackscan/error.hpp"
#include "trackscan/stats.hpp"

namespace trackscan {

/// Point in the profile plane: x along the scan line, z elevation (both in pixels).
struct Point2 {
  double x = 0.0;
  double z = 0.0;
};

/// Conic a x^2 + b x z + c z^2 + d x + e z + f = 0.
struct ConicCoefficients {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0, f = 0.0;

  double evaluate(Point2 p) const noexcept {
    return a * p.x * p.x + b * p.x * p.z + c * p.z * p.z + d * p.x + e * p.z + f;
  }
};

/// Centre/axes/rotation form. Canonical ellipses have semi_axis_a >= semi_axis_b
/// and rotation in (-pi/2, pi/2]; `rotation` is the angle of the a-axis.
struct Ellipse {
  double center_x = 0.0;
  double center_z = 0.0;
  double semi_axis_a = 1.0;
  double semi_axis_b = 1.0;
  double rotation = 0.0;

  Point2 point_at(double t) const noexcept {
    const double ct = std::cos(rotation), st = std::sin(rotation);
    const double lx = semi_axis_a * std::cos(t), lz = semi_axis_b * std::sin(t);
    return {center_x + ct * lx - st * lz, center_z + st * lx + ct * lz};
  }

  /// Footprint chord where the ellipse crosses z = level; zero when it does not.
  double chord_width_at(double level) const noexcept;
};

inline double normalize_half_turn(double angle) noexcept {
  constexpr double pi = std::numbers::pi;
  angle = std::fmod(angle, pi);
  if (angle <= -pi / 2) angle += pi;
  if (angle > pi / 2) angle -= pi;
  return angle;
}

inline Ellipse canonical(Ellipse e) noexcept {
  e.semi_axis_a = std::abs(e.semi_axis_a);
  e.semi_axis_b = std::abs(e.semi_axis_b);
  if (e.semi_axis_a < e.semi_axis_b) {
    std::swap(e.semi_axis_a, e.semi_axis_b);
    e.rotation += std::numbers::pi / 2;
  }
  e.rotation = normalize_half_turn(e.rotation);
  return e;
}

inline double Ellipse::chord_width_at(double level) const noexcept {
  // Substitute z = level into the implicit form and solve the quadratic in x.
  const double ct = std::cos(rotation), st = std::sin(rotation);
  const double ia = 1.0 / (semi_axis_a * semi_axis_a), ib = 1.0 / (semi_axis_b * semi_axis_b);
  const double dz = level - center_z;
  // local u = ct dx + st dz, v = -st dx + ct dz
  const double qa = ct * ct * ia + st * st * ib;
  const double qb = 2.0 * dz * (ct * st * ia - st * ct * ib);
  const double qc = dz * dz * (st * st * ia + ct * ct * ib) - 1.0;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc <= 0.0) return 0.0;
  return std::sqrt(disc) / qa;
}

/// Converts a conic to centre form. Throws DegenerateFit unless the conic is a
/// real, non-degenerate ellipse.
inline Ellipse conic_to_ellipse(const ConicCoefficients& q) {
  const double det = 4.0 * q.a * q.c - q.b * q.b;
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw Error(ErrorCode::DegenerateFit, "conic is not an ellipse");
  }
  const double cx = (q.b * q.e - 2.0 * q.c * q.d) / det;
  const double cz = (q.b * q.d - 2.0 * q.a * q.e) / det;
  const double f0 = q.evaluate({cx, cz});

  Eigen::Matrix2d quad;
  quad << q.a, 0.5 * q.b, 0.5 * q.b, q.c;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(quad);
  const auto& lambda = eig.eigenvalues();
  const double s0 = -f0 / lambda(0);
  const double s1 = -f0 / lambda(1);
  if (!(s0 > 0.0) || !(s1 > 0.0) || !std::isfinite(s0) || !std::isfinite(s1)) {
    throw Error(ErrorCode::DegenerateFit, "imaginary or degenerate ellipse");
  }
  const Eigen::Vector2d axis0 = eig.eigenvectors().col(0);
  Ellipse e;
  e.center_x = cx;
  e.center_z = cz;
  e.semi_axis_a = std::sqrt(s0);
  e.semi_axis_b = std::sqrt(s1);
  e.rotation = std::atan2(axis0(1), axis0(0));
  return canonical(e);
}

inline ConicCoefficients ellipse_to_conic(const Ellipse& e) noexcept {
  const double ct = std::cos(e.rotation), st = std::sin(e.rotation);
  const double ia = 1.0 / (e.semi_axis_a * e.semi_axis_a), ib = 1.0 / (e.semi_axis_b * e.semi_axis_b);
  ConicCoefficients q;
  q.a = ct * ct * ia + st * st * ib;
  q.b = 2.0 * ct * st * (ia - ib);
  q.c = st * st * ia + ct * ct * ib;
  q.d = -2.0 * q.a * e.center_x - q.b * e.center_z;
  q.e = -q.b * e.center_x - 2.0 * q.c * e.center_z;
  q.f = q.a * e.center_x * e.center_x + q.b * e.center_x * e.center_z + q.c * e.center_z * e.center_z - 1.0;
  return q;
}

// ---------------------------------------------------------------------------
// Point projection

inline constexpr double projection_tolerance_px = 1e-10;
inline constexpr int projection_max_iterations = 50;
inline constexpr double projection_fallback_step_rad = 1e-3;

struct EllipseProjection {
  Point2 foot;
  double parameter = 0.0;        // angle t with foot = point_at(t)
  double signed_distance = 0.0;  // positive outside the ellipse
  int iterations = 0;
  bool used_fallback = false;
};

namespace detail {

// Squared distance from (u, v) to (a cos t, b sin t).
inline double dist2_at(double a, double b, double u, double v, double t) noexcept {
  const double dx = a * std::cos(t) - u;
  const double dz = b * std::sin(t) - v;
  return dx * dx + dz * dz;
}

}  // namespace detail

/// Closest point on the ellipse. Works in the first quadrant of the ellipse
/// frame; Newton on the stationarity condition is seeded from a coarse
/// angular scan and falls back to a dense scan if it stalls.
inline EllipseProjection project_to_ellipse(const Ellipse& e, Point2 p) noexcept {
  constexpr double half_pi = std::numbers::pi / 2;
  const double ct = std::cos(e.rotation), st = std::sin(e.rotation);
  const double dx = p.x - e.center_x, dz = p.z - e.center_z;
  const double u_signed = ct * dx + st * dz;
  const double v_signed = -st * dx + ct * dz;
  const double u = std::abs(u_signed), v = std::abs(v_signed);
  const double a = e.semi_axis_a, b = e.semi_axis_b;
  const double ab_diff = b * b - a * a;

  EllipseProjection out;

  double t = std::atan2(a * v, b * u);
  double best = detail::dist2_at(a, b, u, v, t);
  constexpr int coarse = 16;
  for (int i = 0; i <= coarse; ++i) {
    const double ti = half_pi * static_cast<double>(i) / coarse;
    const double di = detail::dist2_at(a, b, u, v, ti);
    if (di < best) {
      best = di;
      t = ti;
    }
  }

  bool converged = false;
  const double scale = std::max(a, b);
  int it = 0;
  for (; it < projection_max_iterations; ++it) {
    const double s = std::sin(t), c = std::cos(t);
    const double g1 = ab_diff * s * c + u * a * s - v * b * c;
    const double g2 = ab_diff * (c * c - s * s) + u * a * c + v * b * s;
    if (!(g2 > 0.0)) {
      if (g1 == 0.0) converged = true;
      break;
    }
    const double step = g1 / g2;
    const double next = std::clamp(t - step, 0.0, half_pi);
    const double moved = std::abs(next - t);
    t = next;
    if (moved * scale < projection_tolerance_px) {
      converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;

  if (!converged) {
    out.used_fallback = true;
    double best_t = 0.0;
    double best_d = std::numeric_limits<double>::infinity();
    const int samples = static_cast<int>(std::ceil(half_pi / projection_fallback_step_rad));
    for (int i = 0; i <= samples; ++i) {
      const double ti = std::min(half_pi, projection_fallback_step_rad * static_cast<double>(i));
      const double di = detail::dist2_at(a, b, u, v, ti);
      if (di < best_d) {
        best_d = di;
        best_t = ti;
      }
    }
    t = best_t;
  }

  // Back to the full ellipse: reflect into the quadrant of the query point.
  double t_full = t;
  if (u_signed < 0.0) t_full = std::numbers::pi - t_full;
  if (v_signed < 0.0) t_full = -t_full;

  out.parameter = t_full;
  out.foot = e.point_at(t_full);
  const double dist = std::sqrt(detail::dist2_at(a, b, u, v, t));
  const double implicit = (u * u) / (a * a) + (v * v) / (b * b);
  out.signed_distance = implicit < 1.0 ? -dist : dist;
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

inline constexpr int min_fit_points = 6;

/// Direct ellipse-specific algebraic fit. Throws DegenerateFit for fewer than
/// six points, collinear points, or when no eigenvector satisfies the ellipse
/// constraint.
inline Ellipse fit_ellipse_direct(std::span<const Point2> points) {
  const auto n = points.size();
  if (n < static_cast<std::size_t>(min_fit_points)) {
    throw Error(ErrorCode::DegenerateFit, "at least 6 points are required, got " + std::to_string(n));
  }

  double mx = 0.0, mz = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    mz += p.z;
  }
  mx /= static_cast<double>(n);
  mz /= static_cast<double>(n);

  double sxx = 0.0, sxz = 0.0, szz = 0.0;
  for (const auto& p : points) {
    const double x = p.x - mx, z = p.z - mz;
    sxx += x * x;
    sxz += x * z;
    szz += z * z;
  }
  const double scale = std::sqrt((sxx + szz) / (2.0 * static_cast<double>(n)));
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::DegenerateFit, "all points coincide");
  }
  // Smallest/largest eigenvalue of the scatter matrix measures collinearity.
  {
    const double tr = sxx + szz;
    const double det = sxx * szz - sxz * sxz;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const double lmax = tr / 2.0 + disc;
    const double lmin = tr / 2.0 - disc;
    if (lmin <= 1e-12 * lmax) {
      throw Error(ErrorCode::DegenerateFit, "points are collinear");
    }
  }

  Eigen::MatrixX3d quadratic(static_cast<Eigen::Index>(n), 3);
  Eigen::MatrixX3d linear(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (points[i].x - mx) / scale;
    const double z = (points[i].z - mz) / scale;
    const auto r = static_cast<Eigen::Index>(i);
    quadratic.row(r) << x * x, x * z, z * z;
    linear.row(r) << x, z, 1.0;
  }
  const Eigen::Matrix3d s1 = quadratic.transpose() * quadratic;
  const Eigen::Matrix3d s2 = quadratic.transpose() * linear;
  const Eigen::Matrix3d s3 = linear.transpose() * linear;

  Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
  if (!s3_lu.isInvertible()) {
    throw Error(ErrorCode::DegenerateFit, "singular linear scatter matrix");
  }
  const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
  const Eigen::Matrix3d m = s1 + s2 * t;

  // Premultiply by the inverse of the 3x3 constraint block.
  Eigen::Matrix3d reduced;
  reduced.row(0) = m.row(2) / 2.0;
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / 2.0;

  Eigen::EigenSolver<Eigen::Matrix3d> solver(reduced);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateFit, "eigen decomposition failed");
  }
  int chosen = -1;
  double chosen_abs_lambda = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3cd vc = solver.eigenvectors().col(k);
    if (vc.imag().norm() > 1e-9 * vc.real().norm()) continue;
    const Eigen::Vector3d v = vc.real();
    const double constraint = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (constraint <= 0.0) continue;
    const double abs_lambda = std::abs(solver.eigenvalues()(k).real());
    if (abs_lambda < chosen_abs_lambda) {
      chosen = k;
      chosen_abs_lambda = abs_lambda;
    }
  }
  if (chosen < 0) {
    throw Error(ErrorCode::DegenerateFit, "no eigenvector satisfies the ellipse constraint");
  }
  const Eigen::Vector3d a1 = solver.eigenvectors().col(chosen).real();
  const Eigen::Vector3d a2 = t * a1;

  Ellipse normalized = conic_to_ellipse({a1(0), a1(1), a1(2), a2(0), a2(1), a2(2)});
  normalized.center_x = normalized.center_x * scale + mx;
  normalized.center_z = normalized.center_z * scale + mz;
  normalized.semi_axis_a *= scale;
  normalized.semi_axis_b *= scale;
  return normalized;
}

inline std::vector<double> geometric_residuals(const Ellipse& e, std::span<const Point2> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project_to_ellipse(e, p).signed_distance);
  return out;
}

/// Levenberg-Marquardt on the sum of squared orthogonal distances over
/// (center_x, center_z, a, b, rotation). Foot-point parameters are eliminated
/// by re-projecting every iteration; the Jacobian uses the foot-point normal.
inline Ellipse refine_ellipse_geometric(const Ellipse& start, std::span<const Point2> points,
                                        int max_iterations = 100) {
  using Vec5 = Eigen::Matrix<double, 5, 1>;
  using Mat5 = Eigen::Matrix<double, 5, 5>;

  auto assemble = [&](const Ellipse& e, Mat5& jtj, Vec5& jtr) {
    jtj.setZero();
    jtr.setZero();
    double cost = 0.0;
    const double ct = std::cos(e.rotation), st = std::sin(e.rotation);
    for (const auto& p : points) {
      const auto proj = project_to_ellipse(e, p);
      const double c = std::cos(proj.parameter), s = std::sin(proj.parameter);
      // Outward normal in the ellipse frame, then rotated.
      double nlx = e.semi_axis_b * c, nlz = e.semi_axis_a * s;
      const double nn = std::hypot(nlx, nlz);
      nlx /= nn;
      nlz /= nn;
      const double nx = ct * nlx - st * nlz;
      const double nz = st * nlx + ct * nlz;
      Vec5 row;
      row(0) = -nx;
      row(1) = -nz;
      row(2) = -nlx * c;
      row(3) = -nlz * s;
      row(4) = -(nlx * (-e.semi_axis_b * s) + nlz * (e.semi_axis_a * c));
      const double r = proj.signed_distance;
      jtj.noalias() += row * row.transpose();
      jtr.noalias() += row * r;
      cost += r * r;
    }
    return cost;
  };

  auto cost_of = [&](const Ellipse& e) {
    double cost = 0.0;
    for (const auto& p : points) {
      const double r = project_to_ellipse(e, p).signed_distance;
      cost += r * r;
    }
    return cost;
  };

  Ellipse current = start;
  Mat5 jtj;
  Vec5 jtr;
  double cost = assemble(current, jtj, jtr);
  double lambda = 1e-3;
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (cost == 0.0) break;
    bool accepted = false;
    Vec5 step = Vec5::Zero();
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Mat5 damped = jtj;
      for (int k = 0; k < 5; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      step = damped.ldlt().solve(-jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      Ellipse trial = current;
      trial.center_x += step(0);
      trial.center_z += step(1);
      trial.semi_axis_a += step(2);
      trial.semi_axis_b += step(3);
      trial.rotation += step(4);
      if (!(trial.semi_axis_a > 0.0) || !(trial.semi_axis_b > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double trial_cost = cost_of(trial);
      if (trial_cost <= cost) {
        const double decrease = cost - trial_cost;
        current = trial;
        cost = assemble(current, jtj, jtr);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (decrease <= 1e-15 * std::max(cost, 1e-300)) {
          return canonical(current);
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
    const double scale = std::max(current.semi_axis_a, 1.0);
    if (step.head<4>().cwiseAbs().maxCoeff() < 1e-13 * scale && std::abs(step(4)) < 1e-13) break;
  }
  return canonical(current);
}

struct EllipseFitOptions {
  bool geometric_refinement = true;
  int max_refinement_iterations = 100;
};

struct EllipseFit : Ellipse {
  std::vector<double> residuals;  // signed orthogonal distances, px
  double mean_abs_residual = 0.0;
  double rms_residual = 0.0;
};

inline EllipseFit fit_ellipse(std::span<const Point2> points, const EllipseFitOptions& options = {}) {
  Ellipse e = fit_ellipse_direct(points);
  if (options.geometric_refinement) {
    e = refine_ellipse_geometric(e, points, options.max_refinement_iterations);
  }
  EllipseFit fit;
  static_cast<Ellipse&>(fit) = e;
  fit.residuals = geometric_residuals(e, points);
  fit.mean_abs_residual = mean_abs(fit.residuals);
  fit.rms_residual = rms(fit.residuals);
  return fit;
}

}  // namespace trackscan
