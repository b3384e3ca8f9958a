#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfdelyap/history.hpp"
#include "rfdelyap/random.hpp"
#include "rfdelyap/signals.hpp"
#include "rfdelyap/types.hpp"

namespace rfdelyap {

/// Evaluation time of a right-hand side. `from_left` asks for the left limit
/// at a discontinuity time; it only matters for systems with a non-empty
/// discontinuity set.
struct Instant {
  double t = 0.0;
  bool from_left = false;
};

using RhsFn = std::function<State(Instant, const HistoryView&, std::span<const double>)>;
using LipschitzFn = std::function<double(double t, double s)>;

/// Times where the right-hand side may jump in t. When `period` > 0 the
/// points are repeated with that period over the whole real line.
struct DiscontinuitySet {
  std::vector<double> points;
  double period = 0.0;

  bool empty() const { return points.empty(); }
  std::vector<double> in(double from, double to) const;
  bool contains(double t, double tol = 1e-9) const;
};

/// |f(t, x, d)| <= zeta(gamma(t) ||x||).
struct GrowthEnvelope {
  ScalarFn zeta;
  ScalarFn gamma;
};

struct RfdeSystem {
  std::string name;
  double delay_span = 0.0;
  std::size_t state_dim = 1;
  DisturbanceBox box;
  RhsFn rhs;
  DiscontinuitySet discontinuities;
  std::optional<LipschitzFn> lipschitz;
  std::optional<GrowthEnvelope> growth;
  std::optional<double> period;
  /// True when the right-hand side does not depend on t.
  bool autonomous = false;
  nlohmann::json params = nlohmann::json::object();
};

/// f(t, x, d) with shape and finiteness checks.
State eval_rhs(const RfdeSystem& sys, Instant t, const HistoryView& x, std::span<const double> d);
inline State eval_rhs(const RfdeSystem& sys, double t, const HistoryView& x,
                      std::span<const double> d) {
  return eval_rhs(sys, Instant{t, false}, x, d);
}

/// x'(t) = -d(t) x(t - r), D = [a, b].
RfdeSystem builtin_example212(double a, double b, double r);

/// Time-varying planar system with finite-time extinction of the first
/// component: x' = -a(t) x(t - 1), y' = -y + d e^t x^2, D = [-1, 1].
RfdeSystem builtin_example213();

/// Gain a(t) of builtin_example213.
double example213_gain(double t);

using PlantFn = std::function<State(double t, std::span<const double> x, std::span<const double> u)>;
using FeedbackFn =
    std::function<State(double t, std::span<const double> x, std::span<const double> x_past)>;

/// Closed loop x' = f(t, x, k(t, x, x(t_i))) with t_i = floor(t / r) r, written
/// as an RFDE of delay span r. The disturbance is unused (box [0, 0]).
RfdeSystem build_sampled_data(PlantFn f, FeedbackFn k, double r, std::size_t state_dim,
                              bool time_invariant);

/// Sample index floor(t / r) with the left-limit convention at multiples of r.
long sample_index(double t, double r, bool from_left);

/// x' = -a x(t) - b x(t - r) (scalar, disturbance unused).
RfdeSystem builtin_linear_delay(double a, double b, double r);

/// One-sided Lipschitz probe: lhs = (x(0) - y(0)).(f(t,x,d) - f(t,y,d)),
/// bound = L(t, ||x|| + ||y||) ||x - y||^2.
struct LipschitzProbe {
  double lhs = 0.0;
  double bound = 0.0;
  bool holds(double tol = 1e-12) const { return lhs <= bound + tol * (1.0 + std::abs(bound)); }
};
LipschitzProbe probe_one_sided_lipschitz(const RfdeSystem& sys, double t, const HistorySegment& x,
                                         const HistorySegment& y, std::span<const double> d);

/// Largest |f(t, 0, d)| over random (t, d), t in [0, t_max].
double probe_equilibrium(const RfdeSystem& sys, std::size_t samples, std::uint64_t seed,
                         double t_max = 10.0);

/// Largest |f(t + T, x, d) - f(t, x, d)| over random triples; requires a period.
double probe_periodicity(const RfdeSystem& sys, std::size_t samples, std::uint64_t seed,
                         double t_max = 10.0);

/// Bounds of |f| over random (t, x, d) with t <= R and ||x|| <= radius, for a
/// decreasing list of radii. The H2 probe reads the first entry (finite), the
/// H4 probe the trend towards 0.
std::vector<double> probe_growth(const RfdeSystem& sys, double R, const std::vector<double>& radii,
                                 std::size_t samples, std::uint64_t seed);

/// Grid step used when none is given: r / 100, or 1e-2 for r = 0.
double default_grid_step(const RfdeSystem& sys);

}  // namespace rfdelyap
