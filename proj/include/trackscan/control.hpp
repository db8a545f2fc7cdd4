#pragma once

// Layer-by-layer deposition with height feedback. Three compensation
// strategies act on the measured z-error (measured minus planned height,
// positive when over-deposited): proportional thickness adjustment,
// add-copy / skip-layer at half a layer, and uniform re-planning of the
// remaining layers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trackscan/error.hpp"

namespace trackscan {

struct ProcessModel {
  double thickness_gain = 1.0;
  double thickness_bias_um = 0.0;
  double process_noise_sigma_um = 0.0;
  double measurement_noise_sigma_um = 0.0;
  std::uint64_t seed = 0;
};

inline void validate(const ProcessModel& m) {
  if (!(m.thickness_gain > 0.0)) throw Error(ErrorCode::InvalidArgument, "thickness_gain must be > 0");
  if (!std::isfinite(m.thickness_bias_um)) throw Error(ErrorCode::InvalidArgument, "thickness_bias_um must be finite");
  if (!(m.process_noise_sigma_um >= 0.0) || !(m.measurement_noise_sigma_um >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise sigmas must be >= 0");
  }
}

/// Disturbance preset used for the one-layer goal: 5% under-extrusion, +5 um
/// bias, 5 um process and measurement noise.
inline ProcessModel standard_disturbance() { return {0.95, 5.0, 5.0, 5.0, 0}; }

struct LayerState {
  int layer_index = 0;        // physical layers deposited so far
  int planned_layers = 0;     // layers of the current plan consumed
  double true_z_um = 0.0;
  double measured_z_um = 0.0;
  double target_z_um = 0.0;   // height the plan expects right now
  double last_commanded_um = 0.0;

  double z_error_um() const noexcept { return measured_z_um - target_z_um; }
};

struct Deposit {
  double commanded_um = 0.0;
};
struct AddCopyOfLastLayer {};
struct SkipNextLayer {};
struct Reslice {
  double new_layer_thickness_um = 0.0;
  int remaining_layers = 0;
};

using ControlDecision = std::variant<Deposit, AddCopyOfLastLayer, SkipNextLayer, Reslice>;

inline std::string_view action_name(const ControlDecision& d) {
  struct Visitor {
    std::string_view operator()(const Deposit&) const { return "deposit"; }
    std::string_view operator()(const AddCopyOfLastLayer&) const { return "add_copy"; }
    std::string_view operator()(const SkipNextLayer&) const { return "skip"; }
    std::string_view operator()(const Reslice&) const { return "reslice"; }
  };
  return std::visit(Visitor{}, d);
}

inline double max_commanded_um(double nominal_um) noexcept { return 2.0 * nominal_um; }

// ---------------------------------------------------------------------------
// Controllers

inline ControlDecision control_open_loop(const LayerState&, double nominal_um) { return Deposit{nominal_um}; }

inline ControlDecision control_proportional(const LayerState& state, double nominal_um, double kp = 1.0) {
  if (!(nominal_um > 0.0)) throw Error(ErrorCode::InvalidArgument, "nominal thickness must be > 0");
  if (!(kp > 0.0 && kp <= 2.0)) throw Error(ErrorCode::InvalidArgument, "kp must lie in (0, 2]");
  return Deposit{std::clamp(nominal_um - kp * state.z_error_um(), 0.0, max_commanded_um(nominal_um))};
}

/// Closed half-layer threshold: an error of exactly half a layer triggers.
inline ControlDecision control_add_skip(const LayerState& state, double nominal_um) {
  if (!(nominal_um > 0.0)) throw Error(ErrorCode::InvalidArgument, "nominal thickness must be > 0");
  const double error = state.z_error_um();
  const double half = 0.5 * nominal_um;
  if (error <= -half) {
    if (state.layer_index < 1) {
      throw Error(ErrorCode::NoPreviousLayer, "cannot copy the last layer before any layer exists");
    }
    return AddCopyOfLastLayer{};
  }
  if (error >= half) return SkipNextLayer{};
  return Deposit{nominal_um};
}

/// Uniform re-plan of the remaining height with the layer count whose
/// thickness is closest to nominal.
inline ControlDecision control_reslice(const LayerState& state, double target_height_um, double nominal_um) {
  if (!(nominal_um > 0.0)) throw Error(ErrorCode::InvalidArgument, "nominal thickness must be > 0");
  if (state.measured_z_um >= target_height_um) {
    throw Error(ErrorCode::TargetReached, "measured height already at or above the target");
  }
  const double remaining = target_height_um - state.measured_z_um;
  // |remaining / n - nominal| falls then rises in n, so the best count is a
  // neighbour of remaining / nominal. Ties go to fewer layers.
  const double x = remaining / nominal_um;
  const int lo = std::max(1, static_cast<int>(std::floor(x)));
  const int hi = std::max(1, static_cast<int>(std::ceil(x)));
  const int n = std::abs(remaining / hi - nominal_um) < std::abs(remaining / lo - nominal_um) ? hi : lo;
  return Reslice{remaining / n, n};
}

// ---------------------------------------------------------------------------
// Plant

/// Applies a decision to the plant. Deposit and AddCopy add material; Skip
/// advances the plan by one nominal layer without material and without a new
/// scan; Reslice deposits one layer of the re-planned thickness and moves the
/// target to the re-planned boundary.
template <class Rng>
LayerState deposit_layer(const LayerState& state, const ControlDecision& decision, const ProcessModel& model,
                         double nominal_um, Rng& rng, double* actual_out = nullptr,
                         double* commanded_out = nullptr) {
  LayerState next = state;
  double commanded = 0.0;
  bool adds_material = true;

  if (const auto* d = std::get_if<Deposit>(&decision)) {
    commanded = std::clamp(d->commanded_um, 0.0, max_commanded_um(nominal_um));
    next.planned_layers += 1;
    next.target_z_um = state.target_z_um + nominal_um;
  } else if (std::holds_alternative<AddCopyOfLastLayer>(decision)) {
    if (state.layer_index < 1) {
      throw Error(ErrorCode::NoPreviousLayer, "cannot copy the last layer before any layer exists");
    }
    commanded = state.last_commanded_um;
  } else if (std::holds_alternative<SkipNextLayer>(decision)) {
    adds_material = false;
    next.planned_layers += 1;
    next.target_z_um = state.target_z_um + nominal_um;
  } else {
    const auto& r = std::get<Reslice>(decision);
    commanded = std::clamp(r.new_layer_thickness_um, 0.0, max_commanded_um(nominal_um));
    next.planned_layers += 1;
    next.target_z_um = state.measured_z_um + r.new_layer_thickness_um;
  }

  double actual = 0.0;
  if (adds_material) {
    std::normal_distribution<double> unit(0.0, 1.0);
    const double process_noise = model.process_noise_sigma_um > 0.0 ? model.process_noise_sigma_um * unit(rng) : 0.0;
    actual = commanded * model.thickness_gain + model.thickness_bias_um + process_noise;
    next.true_z_um = state.true_z_um + actual;
    const double meas_noise =
        model.measurement_noise_sigma_um > 0.0 ? model.measurement_noise_sigma_um * unit(rng) : 0.0;
    next.measured_z_um = next.true_z_um + meas_noise;
    next.layer_index = state.layer_index + 1;
    next.last_commanded_um = commanded;
  }
  if (actual_out) *actual_out = actual;
  if (commanded_out) *commanded_out = commanded;
  return next;
}

// ---------------------------------------------------------------------------
// Closed-loop simulation

enum class StrategyKind { None, Proportional, AddSkip, Reslice };

inline std::string_view to_string(StrategyKind k) noexcept {
  switch (k) {
    case StrategyKind::None: return "none";
    case StrategyKind::Proportional: return "proportional";
    case StrategyKind::AddSkip: return "addskip";
    case StrategyKind::Reslice: return "reslice";
  }
  return "none";
}

inline StrategyKind parse_strategy(std::string_view name) {
  if (name == "none") return StrategyKind::None;
  if (name == "proportional") return StrategyKind::Proportional;
  if (name == "addskip") return StrategyKind::AddSkip;
  if (name == "reslice") return StrategyKind::Reslice;
  throw Error(ErrorCode::Config, "unknown strategy '" + std::string(name) + "'");
}

struct Strategy {
  StrategyKind kind = StrategyKind::Proportional;
  double kp = 1.0;
};

struct SimulationConfig {
  int n_layers = 100;
  double nominal_um = 200.0;
  Strategy strategy;
  ProcessModel model;
  double initial_offset_um = 0.0;  // starting height error, for recurrence checks
};

struct TraceRow {
  int layer = 0;  // 1-based controller step
  double commanded_um = 0.0;
  double actual_um = 0.0;
  double measured_z_um = 0.0;
  double z_error_um = 0.0;
  std::string action;
};

struct SimulationResult {
  std::vector<TraceRow> trace;
  double final_error_um = 0.0;  // measured minus planned final height
  double final_abs_error_um = 0.0;
  double max_abs_error_um = 0.0;
  int total_layers_deposited = 0;
  double true_z_um = 0.0;
  double target_height_um = 0.0;
  bool goal_met = false;  // max |z-error| within one nominal layer
};

class LayerBudgetExhausted : public Error {
 public:
  explicit LayerBudgetExhausted(SimulationResult partial)
      : Error(ErrorCode::LayerBudgetExhausted, "layer budget exhausted after " +
                                                   std::to_string(partial.trace.size()) + " steps"),
        partial_(std::move(partial)) {}

  const SimulationResult& partial() const noexcept { return partial_; }

 private:
  SimulationResult partial_;
};

namespace detail {

inline void summarize(SimulationResult& r, const LayerState& state, double nominal_um) {
  r.true_z_um = state.true_z_um;
  r.final_error_um = state.measured_z_um - r.target_height_um;
  r.final_abs_error_um = std::abs(r.final_error_um);
  r.max_abs_error_um = 0.0;
  r.total_layers_deposited = 0;
  for (const auto& row : r.trace) {
    r.max_abs_error_um = std::max(r.max_abs_error_um, std::abs(row.z_error_um));
    if (row.action != "skip") ++r.total_layers_deposited;
  }
  r.goal_met = r.max_abs_error_um <= nominal_um;
}

}  // namespace detail

/// Measure, decide, deposit until the plan is consumed (or, for re-slicing,
/// until less than half a layer of height remains). Throws LayerBudgetExhausted
/// carrying the partial trace after 3 * n_layers controller steps.
inline SimulationResult run_simulation(const SimulationConfig& cfg, std::uint64_t seed) {
  if (cfg.n_layers < 1) throw Error(ErrorCode::InvalidArgument, "n_layers must be >= 1");
  if (!(cfg.nominal_um > 0.0)) throw Error(ErrorCode::InvalidArgument, "nominal thickness must be > 0");
  validate(cfg.model);

  std::mt19937_64 rng(seed);
  SimulationResult result;
  result.target_height_um = cfg.n_layers * cfg.nominal_um;

  LayerState state;
  state.true_z_um = cfg.initial_offset_um;
  state.measured_z_um = cfg.initial_offset_um;

  const auto plan_done = [&] {
    if (cfg.strategy.kind == StrategyKind::Reslice) {
      return result.target_height_um - state.measured_z_um < 0.5 * cfg.nominal_um;
    }
    return state.planned_layers >= cfg.n_layers;
  };

  const int budget = 3 * cfg.n_layers;
  while (!plan_done()) {
    if (static_cast<int>(result.trace.size()) >= budget) {
      detail::summarize(result, state, cfg.nominal_um);
      throw LayerBudgetExhausted(std::move(result));
    }
    ControlDecision decision;
    switch (cfg.strategy.kind) {
      case StrategyKind::None: decision = control_open_loop(state, cfg.nominal_um); break;
      case StrategyKind::Proportional: decision = control_proportional(state, cfg.nominal_um, cfg.strategy.kp); break;
      case StrategyKind::AddSkip: decision = control_add_skip(state, cfg.nominal_um); break;
      case StrategyKind::Reslice: decision = control_reslice(state, result.target_height_um, cfg.nominal_um); break;
    }
    double actual = 0.0, commanded = 0.0;
    state = deposit_layer(state, decision, cfg.model, cfg.nominal_um, rng, &actual, &commanded);
    result.trace.push_back({static_cast<int>(result.trace.size()) + 1, commanded, actual, state.measured_z_um,
                            state.z_error_um(), std::string(action_name(decision))});
  }
  detail::summarize(result, state, cfg.nominal_um);
  return result;
}

}  // namespace trackscan
