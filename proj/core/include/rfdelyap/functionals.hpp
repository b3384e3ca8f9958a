#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rfdelyap/history.hpp"
#include "rfdelyap/types.hpp"

namespace rfdelyap {

using ValueFn = std::function<double(double t, const HistorySegment& x)>;
using DirectionalFn =
    std::function<double(double t, const HistorySegment& x, std::span<const double> v)>;

/// A Lyapunov functional V(t, x) on histories of span r + tau, with the
/// bounding functions its certification form needs. Unset members are simply
/// not available to the checks.
struct Functional {
  std::string name;
  double delay_span = 0.0;  // r
  double tau = 0.0;
  std::size_t dim = 1;
  ValueFn value;
  /// Closed-form directional derivative V0(t, x; v), when known.
  DirectionalFn derivative;

  ScalarFn a1, a2;
  /// beta(t) of the sandwich bound (beta_1 for the lower-semicontinuous form).
  ScalarFn beta;
  ScalarFn beta2, beta3, beta4;
  double R_const = 0.0;
  ScalarFn rho;
  ScalarFn mu;
  /// Constant growth rate of the uniform forward-completeness inequality.
  std::optional<double> growth_rate;
  /// M(R) in |V(t, y) - V(t, x)| <= M(R) ||y - x|| for t <= R, ||x||, ||y|| <= R.
  ScalarFn lipschitz_M;
  nlohmann::json params = nlohmann::json::object();

  double window_span() const { return delay_span + tau; }
};

/// V(t, x) after checking the window span.
double eval(const Functional& V, double t, const HistorySegment& x);

/// int_{from}^{0} g(theta, x(theta)) dtheta from node values: composite Simpson,
/// with a 3/8 panel for an odd interval count and the trapezoid rule for a
/// single interval. `from` must be a grid node.
double node_quadrature(const HistorySegment& x, double from,
                       const std::function<double(double, std::span<const double>)>& g);

/// Feasibility margin (a - c)(1 - 2cr) - 2 b^3 r^2.
double margin212(double a, double b, double r, double c);

/// c in (0, a) maximizing c * margin212, or nothing when 2 b^3 r^2 >= a.
std::optional<double> find_c(double a, double b, double r);

/// Quadratic functional for x' = -d x(t - r) on windows of span 2r. Throws
/// when c is infeasible unless `unchecked`.
Functional builtin_V212(double a, double b, double r, double c, bool unchecked = false);

/// Quartic time-varying functional for builtin_example213 on windows of span 6.
Functional builtin_V213();

/// V(t, x) = |x(0)|^2 / 2 on windows of the given span.
Functional half_square(double span, std::size_t dim);

}  // namespace rfdelyap
