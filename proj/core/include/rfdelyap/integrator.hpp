#pragma once

#include <iosfwd>
#include <optional>

#include <nlohmann/json.hpp>

#include "rfdelyap/history.hpp"
#include "rfdelyap/signals.hpp"
#include "rfdelyap/system.hpp"

namespace rfdelyap {

struct IntegratorOptions {
  /// 0 selects default_grid_step(sys).
  double grid_step = 0.0;
  /// Integration stops with blow-up status once |x| exceeds this value.
  double overflow = 1e8;
};

enum class TrajectoryStatus { completed, blow_up };

/// Solution of an RFDE on [t0 - r, t_last] sampled on a uniform grid.
///
/// Node k sits at t0 + (k - N) grid_step with N = r / grid_step. Each node
/// stores the state and its left and right derivatives, so dense values come
/// from the same cubic Hermite cells the integrator used for delayed lookups.
class Trajectory {
 public:
  Trajectory(double t0, double grid_step, double delay_span, std::size_t dim,
             std::vector<double> samples, std::vector<double> dleft, std::vector<double> dright,
             TrajectoryStatus status, nlohmann::json signal);

  double t0() const { return t0_; }
  double grid_step() const { return grid_step_; }
  double delay_span() const { return delay_span_; }
  std::size_t dim() const { return dim_; }
  std::size_t history_intervals() const { return hist_; }
  std::size_t node_count() const { return samples_.size() / dim_; }
  TrajectoryStatus status() const { return status_; }
  bool completed() const { return status_ == TrajectoryStatus::completed; }
  /// Last node time; for a blow-up this is the escape time estimate.
  double t_last() const { return time(node_count() - 1); }
  double t_first() const { return time(0); }

  double time(std::size_t k) const;
  /// Node index of grid time t; throws when t is off-grid or outside.
  std::size_t index_of(double t) const;
  std::span<const double> node(std::size_t k) const;
  std::span<const double> left_derivative(std::size_t k) const;
  std::span<const double> right_derivative(std::size_t k) const;

  /// x(t) from the dense interpolant, t in [t_first, t_last].
  State at(double t) const;

  /// The segment theta -> x(t + theta), theta in [-span, 0], for a grid time t.
  /// With `extend`, times before t_first repeat the first node.
  HistorySegment window(double t, double span, bool extend = false) const;

  /// sup norm of window(t, span).
  double window_norm(double t, double span) const;
  /// window_norm at every node k >= span / grid_step, indexed by node.
  std::vector<double> window_norms(double span) const;
  /// Largest cell maximum over [t_first, t].
  double running_sup(double t) const;

  const nlohmann::json& signal() const { return signal_; }
  nlohmann::json metadata() const;
  /// Columns t, x1..xn, dx1..dxn (right derivatives).
  void write_csv(std::ostream& os) const;

 private:
  const std::vector<double>& cell_maxima() const;

  double t0_;
  double grid_step_;
  double delay_span_;
  std::size_t dim_;
  std::size_t hist_;
  std::vector<double> samples_, dleft_, dright_;
  TrajectoryStatus status_;
  nlohmann::json signal_;
  mutable std::vector<double> cell_max_;
};

/// Classical RK4 on the uniform grid with Hermite lookups for delayed values.
/// Discontinuities of the system and of the signal in (t0, t_end) must fall on
/// grid nodes.
Trajectory integrate(const RfdeSystem& sys, double t0, const HistorySegment& x0,
                     const DisturbanceSignal& d, double t_end, IntegratorOptions opts = {});

struct ContinuityGap {
  std::vector<double> times;
  std::vector<double> measured;
  std::vector<double> bound;
};

/// Distance between the solutions from x0 and y0 under the same signal next
/// to the Gronwall bound ||x0 - y0|| exp(L(t, sup||x|| + sup||y||)(t - t0)).
ContinuityGap continuity_gap(const RfdeSystem& sys, double t0, const HistorySegment& x0,
                             const HistorySegment& y0, const DisturbanceSignal& d, double t_end,
                             IntegratorOptions opts = {});

}  // namespace rfdelyap
