#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "trackscan/error.hpp"

namespace trackscan {

/// Complete parts x operators x trials grid. values[(part * operators + op) * trials + trial].
struct GrrMeasurementSet {
  int parts = 0;
  int operators = 0;
  int trials = 0;
  std::vector<double> values;
  std::string unit = "um";

  GrrMeasurementSet() = default;
  GrrMeasurementSet(int p, int o, int r, std::string u = "um")
      : parts(p), operators(o), trials(r),
        values(static_cast<std::size_t>(p) * static_cast<std::size_t>(o) * static_cast<std::size_t>(r), 0.0),
        unit(std::move(u)) {}

  std::size_t index(int part, int op, int trial) const noexcept {
    return (static_cast<std::size_t>(part) * static_cast<std::size_t>(operators) + static_cast<std::size_t>(op)) *
               static_cast<std::size_t>(trials) +
           static_cast<std::size_t>(trial);
  }
  double at(int part, int op, int trial) const { return values[index(part, op, trial)]; }
  double& at(int part, int op, int trial) { return values[index(part, op, trial)]; }
};

/// ANOVA table entries, kept for reporting and for the oracle tests.
struct GrrAnova {
  double ss_part = 0.0, ss_operator = 0.0, ss_interaction = 0.0, ss_error = 0.0, ss_total = 0.0;
  int df_part = 0, df_operator = 0, df_interaction = 0, df_error = 0;
  double var_repeatability = 0.0;
  double var_operator = 0.0;
  double var_interaction = 0.0;
  double var_part = 0.0;
};

/// Spreads are 6-sigma equivalents in the unit of the input.
struct GrrResult {
  double repeatability_ev = 0.0;
  double reproducibility_av = 0.0;
  double part_variation_pv = 0.0;
  double total_rr = 0.0;
  double total_variation = 0.0;
  double percent_rr = 0.0;
  GrrAnova anova;
  std::string unit;
};

inline constexpr double grr_sigma_multiplier = 6.0;

/// Two-way crossed ANOVA gage R&R. The interaction term is included whenever
/// both parts and operators exceed one; negative variance components clamp to zero.
inline GrrResult grr_study(const GrrMeasurementSet& data) {
  const int p = data.parts, o = data.operators, r = data.trials;
  if (p < 1 || o < 1) {
    throw Error(ErrorCode::InvalidArgument, "R&R needs at least one part and one operator");
  }
  if (r < 2) {
    throw Error(ErrorCode::InsufficientTrials, "R&R needs at least two trials, got " + std::to_string(r));
  }
  if (data.values.size() != static_cast<std::size_t>(p) * static_cast<std::size_t>(o) * static_cast<std::size_t>(r)) {
    throw Error(ErrorCode::InvalidArgument, "measurement grid is incomplete");
  }

  const double n_total = static_cast<double>(p) * o * r;
  double grand = 0.0;
  std::vector<double> part_mean(static_cast<std::size_t>(p), 0.0);
  std::vector<double> op_mean(static_cast<std::size_t>(o), 0.0);
  std::vector<double> cell_mean(static_cast<std::size_t>(p) * static_cast<std::size_t>(o), 0.0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < o; ++j) {
      double cell = 0.0;
      for (int k = 0; k < r; ++k) cell += data.at(i, j, k);
      grand += cell;
      part_mean[static_cast<std::size_t>(i)] += cell;
      op_mean[static_cast<std::size_t>(j)] += cell;
      cell_mean[static_cast<std::size_t>(i) * static_cast<std::size_t>(o) + static_cast<std::size_t>(j)] = cell / r;
    }
  }
  grand /= n_total;
  for (auto& m : part_mean) m /= static_cast<double>(o) * r;
  for (auto& m : op_mean) m /= static_cast<double>(p) * r;

  GrrAnova a;
  for (int i = 0; i < p; ++i) {
    const double d = part_mean[static_cast<std::size_t>(i)] - grand;
    a.ss_part += d * d;
  }
  a.ss_part *= static_cast<double>(o) * r;
  for (int j = 0; j < o; ++j) {
    const double d = op_mean[static_cast<std::size_t>(j)] - grand;
    a.ss_operator += d * d;
  }
  a.ss_operator *= static_cast<double>(p) * r;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < o; ++j) {
      const double cm = cell_mean[static_cast<std::size_t>(i) * static_cast<std::size_t>(o) + static_cast<std::size_t>(j)];
      const double d = cm - part_mean[static_cast<std::size_t>(i)] - op_mean[static_cast<std::size_t>(j)] + grand;
      a.ss_interaction += d * d;
      for (int k = 0; k < r; ++k) {
        const double e = data.at(i, j, k) - cm;
        a.ss_error += e * e;
        const double t = data.at(i, j, k) - grand;
        a.ss_total += t * t;
      }
    }
  }
  a.ss_interaction *= r;

  a.df_part = p - 1;
  a.df_operator = o - 1;
  a.df_interaction = (p - 1) * (o - 1);
  a.df_error = p * o * (r - 1);

  const double ms_error = a.ss_error / a.df_error;
  const bool with_interaction = p > 1 && o > 1;
  const double ms_interaction = with_interaction ? a.ss_interaction / a.df_interaction : 0.0;
  // Without an interaction term, operator and part effects are tested against pure error.
  const double ms_reference = with_interaction ? ms_interaction : ms_error;

  a.var_repeatability = ms_error;
  if (with_interaction) {
    a.var_interaction = std::max(0.0, (ms_interaction - ms_error) / r);
  }
  if (o > 1) {
    const double ms_operator = a.ss_operator / a.df_operator;
    a.var_operator = std::max(0.0, (ms_operator - ms_reference) / (static_cast<double>(p) * r));
  }
  if (p > 1) {
    const double ms_part = a.ss_part / a.df_part;
    a.var_part = std::max(0.0, (ms_part - ms_reference) / (static_cast<double>(o) * r));
  }

  GrrResult res;
  res.anova = a;
  res.unit = data.unit;
  res.repeatability_ev = grr_sigma_multiplier * std::sqrt(a.var_repeatability);
  res.reproducibility_av = grr_sigma_multiplier * std::sqrt(a.var_operator + a.var_interaction);
  res.part_variation_pv = grr_sigma_multiplier * std::sqrt(a.var_part);
  res.total_rr = std::sqrt(res.repeatability_ev * res.repeatability_ev + res.reproducibility_av * res.reproducibility_av);
  res.total_variation = std::sqrt(res.total_rr * res.total_rr + res.part_variation_pv * res.part_variation_pv);
  res.percent_rr = res.total_variation > 0.0 ? 100.0 * res.total_rr / res.total_variation : 0.0;
  return res;
}

}  // namespace trackscan
