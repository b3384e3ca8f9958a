#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfdelyap/types.hpp"

namespace rfdelyap {

/// Axis-aligned box D in R^l. Coordinates may be declared unbounded (+-inf)
/// for user signals; the built-in generators require finite bounds.
struct DisturbanceBox {
  std::vector<double> lower;
  std::vector<double> upper;

  DisturbanceBox() = default;
  DisturbanceBox(std::vector<double> lo, std::vector<double> hi);
  static DisturbanceBox interval(double lo, double hi) { return {{lo}, {hi}}; }

  std::size_t dim() const { return lower.size(); }
  bool bounded() const;
  bool contains(std::span<const double> d, double tol = 1e-12) const;
  /// All 2^l vertices, ordered by the binary index of upper coordinates.
  std::vector<State> vertices() const;
  State center() const;

  nlohmann::json to_json() const;
  static DisturbanceBox from_json(const nlohmann::json& j);
};

/// A right-continuous, piecewise-continuous map t -> d(t) in D.
///
/// The signal is a sequence of pieces; piece k is active on
/// [start_k, start_{k+1}) and the first piece extends to -infinity. Values
/// are evaluated as right limits. Lookups treat times within 1e-9 (relative)
/// of a piece start as lying on it, so switch times that were snapped to an
/// integration grid resolve consistently after shifts and concatenations.
class DisturbanceSignal {
 public:
  using Evaluator = std::function<State(double)>;
  struct Piece {
    double start;
    Evaluator eval;  // continuous on the piece, takes absolute time
  };

  DisturbanceSignal(DisturbanceBox box, std::vector<Piece> pieces, nlohmann::json description);

  const DisturbanceBox& box() const { return box_; }
  std::size_t dim() const { return box_.dim(); }

  /// d(t), the right limit at t.
  State operator()(double t) const;
  /// d(t-), the left limit at t.
  State left_limit(double t) const;

  /// Switch times, strictly increasing.
  std::vector<double> discontinuity_times() const;
  std::vector<double> discontinuities_in(double from, double to) const;

  /// JSON description sufficient to rebuild the signal (see signal_from_json).
  const nlohmann::json& description() const { return description_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  std::size_t piece_index(double t, bool left) const;

  DisturbanceBox box_;
  std::vector<Piece> pieces_;
  nlohmann::json description_;
};

enum class SignalKind { constant, piecewise_constant, bang_bang, smooth };

DisturbanceSignal make_constant(const DisturbanceBox& box, State value);

/// values.size() == switch_times.size() + 1; values[0] is active before the
/// first switch.
DisturbanceSignal make_piecewise_constant(const DisturbanceBox& box,
                                          std::vector<double> switch_times,
                                          std::vector<State> values);

/// Alternates between two opposite box vertices, starting with the lower
/// corner (or the upper one when `start_upper`).
DisturbanceSignal make_bang_bang(const DisturbanceBox& box, std::vector<double> switch_times,
                                 bool start_upper = false);

/// center + amplitude * sin(omega t + phase) per coordinate, amplitude
/// clipped to the half-width of the box.
DisturbanceSignal make_sinusoid(const DisturbanceBox& box, double amplitude, double omega,
                                double phase);

/// (shift d)(t) = d(t + offset).
DisturbanceSignal shift(const DisturbanceSignal& d, double offset);

/// head on (-inf, t_split), tail(t - t_split) on [t_split, inf).
DisturbanceSignal concat(const DisturbanceSignal& head, double t_split,
                         const DisturbanceSignal& tail);

/// Rebuilds a signal from `description()` output or a scenario entry:
/// {kind, box, switch_times, values} for piecewise kinds, {kind: "smooth",
/// family: "sinusoid", ...}, {kind: "shift", base, offset} and
/// {kind: "concat", head, t_split, tail}.
DisturbanceSignal signal_from_json(const nlohmann::json& j);

/// Rounds each time to the nearest multiple of `step` measured from `origin`,
/// dropping duplicates.
std::vector<double> snap_to_grid(std::vector<double> times, double step, double origin = 0.0);

}  // namespace rfdelyap
