#pragma once

// Brute-force reference implementations. Deliberately naive: they share no
// code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "trackscan/control.hpp"
#include "trackscan/ellipse.hpp"
#include "trackscan/grr.hpp"

namespace oracle {

/// Vertex of the Lagrange parabola through (-1, a), (0, b), (1, c): a dense
/// scan over [-1, 1] followed by ternary refinement on the bracketing cell.
inline double parabola_vertex(double a, double b, double c) {
  auto poly = [&](double x) { return a * x * (x - 1.0) / 2.0 - b * (x + 1.0) * (x - 1.0) + c * x * (x + 1.0) / 2.0; };
  const int n = 20000;
  double best_x = -1.0, best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double x = -1.0 + 2.0 * i / n;
    const double v = poly(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  // Bisect on the sign of the slope; value comparisons go flat near the top.
  auto slope = [&](double x) { return a * (2.0 * x - 1.0) / 2.0 - 2.0 * b * x + c * (2.0 * x + 1.0) / 2.0; };
  double lo = std::max(-1.0, best_x - 2.0 / n), hi = std::min(1.0, best_x + 2.0 / n);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double median_sort_pick(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Edges {
  int left = -1;
  int right = -1;
  bool found = false;
};

/// Tests every window of `run` columns. NaN counts as below threshold.
inline Edges edge_scan(const std::vector<double>& e, double t, int run) {
  const int n = static_cast<int>(e.size());
  auto window_above = [&](int first) {
    for (int k = first; k < first + run; ++k) {
      if (!(e[static_cast<std::size_t>(k)] > t)) return false;
    }
    return true;
  };
  Edges out;
  for (int c = 0; c + run <= n; ++c) {
    if (window_above(c)) {
      out.left = c;
      break;
    }
  }
  for (int c = n - run; c >= 0; --c) {
    if (window_above(c)) {
      out.right = c + run - 1;
      break;
    }
  }
  if (out.left < 0 || out.right <= out.left) return {};
  const int center = static_cast<int>(std::lround((out.left + out.right) / 2.0));
  std::vector<double> mid;
  for (int c = center - 1; c <= center + 1; ++c) {
    if (c >= 0 && c < n && !std::isnan(e[static_cast<std::size_t>(c)])) mid.push_back(e[static_cast<std::size_t>(c)]);
  }
  if (mid.empty() || !(median_sort_pick(mid) > t)) return {};
  out.found = true;
  return out;
}

/// Explicit sums of squares; the interaction is obtained by subtraction from
/// the between-cells sum.
struct Anova {
  double ss_total = 0, ss_part = 0, ss_op = 0, ss_cells = 0, ss_int = 0, ss_err = 0;
  double ev = 0, av = 0, pv = 0, rr = 0, tv = 0;
};

inline Anova anova(const trackscan::GrrMeasurementSet& d) {
  const int p = d.parts, o = d.operators, r = d.trials;
  double grand = 0;
  for (double v : d.values) grand += v;
  grand /= static_cast<double>(d.values.size());

  Anova a;
  for (double v : d.values) a.ss_total += (v - grand) * (v - grand);
  for (int i = 0; i < p; ++i) {
    double m = 0;
    for (int j = 0; j < o; ++j)
      for (int k = 0; k < r; ++k) m += d.at(i, j, k);
    m /= o * r;
    a.ss_part += o * r * (m - grand) * (m - grand);
  }
  for (int j = 0; j < o; ++j) {
    double m = 0;
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < r; ++k) m += d.at(i, j, k);
    m /= p * r;
    a.ss_op += p * r * (m - grand) * (m - grand);
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < o; ++j) {
      double m = 0;
      for (int k = 0; k < r; ++k) m += d.at(i, j, k);
      m /= r;
      a.ss_cells += r * (m - grand) * (m - grand);
    }
  a.ss_int = a.ss_cells - a.ss_part - a.ss_op;
  a.ss_err = a.ss_total - a.ss_cells;

  const double ms_err = a.ss_err / (p * o * (r - 1));
  const bool inter = p > 1 && o > 1;
  const double ms_int = inter ? a.ss_int / ((p - 1) * (o - 1)) : 0.0;
  const double ref = inter ? ms_int : ms_err;
  const double var_int = inter ? std::max(0.0, (ms_int - ms_err) / r) : 0.0;
  const double var_op = o > 1 ? std::max(0.0, (a.ss_op / (o - 1) - ref) / (p * r)) : 0.0;
  const double var_part = p > 1 ? std::max(0.0, (a.ss_part / (p - 1) - ref) / (o * r)) : 0.0;
  a.ev = 6 * std::sqrt(ms_err);
  a.av = 6 * std::sqrt(var_op + var_int);
  a.pv = 6 * std::sqrt(var_part);
  a.rr = std::hypot(a.ev, a.av);
  a.tv = std::hypot(a.rr, a.pv);
  return a;
}

/// Layer count in [1, 20] minimizing |remaining / n - nominal|, ties to the smaller n.
inline int best_layer_count(double remaining, double nominal) {
  int best = 1;
  for (int n = 2; n <= 20; ++n) {
    if (std::abs(remaining / n - nominal) < std::abs(remaining / best - nominal)) best = n;
  }
  return best;
}

/// z-error after k proportional layers with constant bias and no noise.
inline double proportional_error(double e0, double bias, double kp, int k) {
  const double q = std::pow(1.0 - kp, k);
  return q * e0 + bias * (1.0 - q) / kp;
}

/// Dense-sampled minimum distance from p to the ellipse boundary.
inline double ellipse_distance(const trackscan::Ellipse& e, trackscan::Point2 p, int samples = 200000) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const auto q = e.point_at(2.0 * M_PI * i / samples);
    best = std::min(best, std::hypot(q.x - p.x, q.z - p.z));
  }
  return best;
}

inline double relative_error(double got, double want, double floor = 1.0) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace oracle
