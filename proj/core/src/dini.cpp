#include "rfdelyap/dini.hpp"

#include <algorithm>
#include <cmath>

namespace rfdelyap {

nlohmann::json DiniEstimate::to_json() const {
  return {{"value", value},           {"h", h},
          {"quotients", quotients},   {"extrapolated", extrapolated},
          {"tail_max", tail_max},     {"richardson", richardson}};
}

DiniEstimate aggregate_quotients(std::vector<double> h, std::vector<double> q, DiniRule rule) {
  if (q.empty()) throw ConfigError("dini: empty quotient sequence");
  for (double v : q)
    if (!std::isfinite(v)) throw ModelError("dini: non-finite difference quotient");
  DiniEstimate e;
  const std::size_t L = q.size();
  e.tail_max = *std::max_element(q.end() - static_cast<std::ptrdiff_t>(std::min<std::size_t>(3, L)), q.end());
  // Two Richardson passes remove the O(h) and O(h^2) terms.
  if (L >= 3) {
    const double r1 = 2.0 * q[L - 1] - q[L - 2];
    const double r0 = 2.0 * q[L - 2] - q[L - 3];
    e.richardson = (4.0 * r1 - r0) / 3.0;
  } else {
    e.richardson = L == 2 ? 2.0 * q[1] - q[0] : q[0];
  }
  bool linear = false;
  if (L >= 3) {
    const double d1 = q[L - 2] - q[L - 3];
    const double d2 = q[L - 1] - q[L - 2];
    const double scale = 1.0 + std::abs(q[L - 1]);
    if (std::abs(d2) <= 1e-12 * scale && std::abs(d1) <= 1e-10 * scale) {
      linear = true;
    } else if (d2 != 0.0) {
      const double ratio = d1 / d2;
      linear = ratio >= 1.5 && ratio <= 2.5;
    }
  }
  switch (rule) {
    case DiniRule::tail_max:
      e.value = e.tail_max;
      break;
    case DiniRule::richardson:
      e.value = e.richardson;
      e.extrapolated = true;
      break;
    case DiniRule::automatic:
      e.extrapolated = linear;
      e.value = linear ? e.richardson : e.tail_max;
      break;
  }
  e.h = std::move(h);
  e.quotients = std::move(q);
  return e;
}

DiniEstimate estimate_V0(const Functional& V, double t, const HistorySegment& x,
                         std::span<const double> v, DiniOptions opts) {
  if (opts.levels < 1) throw ConfigError("dini: at least one level is required");
  if (v.size() != x.dim()) throw ConfigError("dini: direction has the wrong dimension");
  std::vector<double> hs, qs;
  for (int k = 0; k < opts.levels; ++k) {
    const std::size_t factor = std::size_t{1} << k;
    const HistorySegment fine = x.refine(factor);
    const double h = fine.grid_step();
    const double base = eval(V, t, fine);
    const double moved = eval(V, t + h, apply_Eh(fine, v, h));
    hs.push_back(h);
    qs.push_back((moved - base) / h);
  }
  return aggregate_quotients(std::move(hs), std::move(qs), opts.rule);
}

DiniEstimate dplus_along(const Functional& V, const Trajectory& traj, double t, DiniOptions opts) {
  if (opts.levels < 1) throw ConfigError("dini: at least one level is required");
  const double step = traj.grid_step();
  const double span = V.window_span();
  if (t + step > traj.t_last() + 1e-9 * step)
    throw ConfigError("dini: t is too close to the end of the trajectory");
  const HistorySegment wide = traj.window(t + step, span + step);
  const auto m = static_cast<std::size_t>(span > 0.0 ? grid_count(span, step) : 0);
  std::vector<double> hs, qs;
  for (int k = 0; k < opts.levels; ++k) {
    const std::size_t factor = std::size_t{1} << k;
    const HistorySegment fine = wide.refine(factor);
    const std::size_t len = m * factor;
    const HistorySegment at_t = fine.slice(0, len);
    const HistorySegment at_th = fine.slice(1, len);
    const double h = fine.grid_step();
    hs.push_back(h);
    qs.push_back((eval(V, t + h, at_th) - eval(V, t, at_t)) / h);
  }
  return aggregate_quotients(std::move(hs), std::move(qs), opts.rule);
}

DiniRule dini_rule_from_string(const std::string& s) {
  if (s == "tail_max") return DiniRule::tail_max;
  if (s == "richardson") return DiniRule::richardson;
  if (s == "auto" || s == "automatic") return DiniRule::automatic;
  throw ConfigError("dini: unknown rule '" + s + "'");
}

}  // namespace rfdelyap
