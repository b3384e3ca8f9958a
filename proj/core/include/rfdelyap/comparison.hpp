#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfdelyap/types.hpp"

namespace rfdelyap {

using ScalarField = std::function<double(double t, double w)>;

/// Scalar solution sampled on a uniform grid; linear between nodes.
struct ScalarTrajectory {
  std::vector<double> t;
  std::vector<double> w;

  double at(double time) const;
};

/// eta' = -rho(eta) + mu(t), eta(t0) = eta0.
struct ComparisonProblem {
  ScalarFn rho;
  ScalarFn mu = [](double) { return 0.0; };
  double eta0 = 0.0;
};

/// RK4 with the state clipped at 0 after every step.
ScalarTrajectory solve_eta(const ComparisonProblem& p, double t0, double t_end, double step = 1e-3);

/// RK4 for w' = f(t, w); throws DomainError when w leaves [lo, hi].
ScalarTrajectory solve_scalar(const ScalarField& f, double w0, double t0, double t_end,
                              double step = 1e-3,
                              double lo = -std::numeric_limits<double>::infinity(),
                              double hi = std::numeric_limits<double>::infinity());

/// Solution of the shifted equation z' = f(t, z) + lambda.
ScalarTrajectory solve_perturbed(const ScalarField& f, double w0, double lambda, double t0,
                                 double t_end, double step = 1e-3);

enum class DominationMode {
  /// f(t, .) non-decreasing on J.
  monotone,
  /// f(t, w) bounded above by a function of t.
  bounded,
};

struct DominationReport {
  bool holds = true;
  DominationMode mode = DominationMode::bounded;
  /// max over the grid of (v - w) / (1 + |w|).
  double worst_gap = -std::numeric_limits<double>::infinity();
  std::optional<double> first_violation;
  std::size_t checked = 0;
  /// Set in monotone mode when sampled f(t, .) decreased somewhere on J.
  bool monotonicity_warning = false;

  nlohmann::json to_json() const;
};

/// Integrates w' = f(t, w) from w0 over the grid `times` (uniform or not,
/// each interval split into substeps no longer than `max_step`) and checks
/// v(t_i) <= w(t_i) + tol (1 + |w(t_i)|) at every grid time, including t0.
DominationReport check_dominated(const std::vector<double>& times, const std::vector<double>& v,
                                 const ScalarField& f, double w0, DominationMode mode,
                                 double J_lo = -std::numeric_limits<double>::infinity(),
                                 double J_hi = std::numeric_limits<double>::infinity(),
                                 double tol = 1e-6, double max_step = 1e-3);

}  // namespace rfdelyap
