#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfdelyap/functionals.hpp"
#include "rfdelyap/integrator.hpp"

namespace rfdelyap {

enum class DiniRule {
  /// Maximum of the last three quotients.
  tail_max,
  /// Two-pass Richardson extrapolation of the finest three quotients.
  richardson,
  /// Richardson when the quotients converge linearly in h, else tail_max.
  automatic,
};

struct DiniOptions {
  /// Quotients at h = grid_step * 2^-k for k = 0 .. levels - 1.
  int levels = 6;
  DiniRule rule = DiniRule::automatic;
};

struct DiniEstimate {
  double value = 0.0;
  std::vector<double> h;
  std::vector<double> quotients;
  bool extrapolated = false;
  double tail_max = 0.0;
  double richardson = 0.0;

  nlohmann::json to_json() const;
};

/// Upper directional derivative of V at (t, x) in direction v from the
/// quotients [V(t + h, E_h(x; v)) - V(t, x)] / h on locally refined grids.
DiniEstimate estimate_V0(const Functional& V, double t, const HistorySegment& x,
                         std::span<const double> v, DiniOptions opts = {});

/// Upper right Dini derivative of s -> V(s, window(s)) along a stored
/// trajectory at grid time t, using the dense Hermite output between nodes.
DiniEstimate dplus_along(const Functional& V, const Trajectory& traj, double t,
                         DiniOptions opts = {});

/// Applies the aggregation rule to a quotient sequence (finest last).
DiniEstimate aggregate_quotients(std::vector<double> h, std::vector<double> q, DiniRule rule);

DiniRule dini_rule_from_string(const std::string& s);

}  // namespace rfdelyap
