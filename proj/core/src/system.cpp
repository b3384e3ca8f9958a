#include "rfdelyap/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rfdelyap {

std::vector<double> DiscontinuitySet::in(double from, double to) const {
  std::vector<double> out;
  if (points.empty() || to < from) return out;
  if (period <= 0.0) {
    for (double p : points)
      if (p >= from && p <= to) out.push_back(p);
    return out;
  }
  const double k0 = std::floor((from - points.back()) / period) - 1;
  for (double k = k0;; k += 1.0) {
    bool past = true;
    for (double p : points) {
      const double v = p + k * period;
      if (v <= to) past = false;
      if (v >= from && v <= to) out.push_back(v);
    }
    if (past) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool DiscontinuitySet::contains(double t, double tol) const {
  const double slack = tol * std::max(1.0, std::abs(t));
  for (double p : in(t - slack, t + slack)) {
    if (std::abs(p - t) <= slack) return true;
  }
  return false;
}

State eval_rhs(const RfdeSystem& sys, Instant t, const HistoryView& x, std::span<const double> d) {
  if (x.dim() != sys.state_dim) throw ConfigError("rhs: history dimension mismatch");
  if (x.span() + 1e-12 < sys.delay_span) throw ConfigError("rhs: history shorter than the delay span");
  if (d.size() != sys.box.dim()) throw ConfigError("rhs: disturbance dimension mismatch");
  State out = sys.rhs(t, x, d);
  if (out.size() != sys.state_dim) throw ModelError("rhs: output dimension mismatch");
  if (!all_finite(out)) throw ModelError("rhs: non-finite output at t = " + std::to_string(t.t));
  return out;
}

RfdeSystem builtin_example212(double a, double b, double r) {
  if (!(a > 0.0)) throw ConfigError("example212: a must be positive");
  if (!(b >= a)) throw ConfigError("example212: b must satisfy b >= a");
  if (!(r >= 0.0)) throw ConfigError("example212: r must be nonnegative");
  RfdeSystem s;
  s.name = "example212";
  s.delay_span = r;
  s.state_dim = 1;
  s.box = DisturbanceBox::interval(a, b);
  s.rhs = [r](Instant, const HistoryView& x, std::span<const double> d) {
    return State{-d[0] * x.at(-r)[0]};
  };
  s.lipschitz = [b](double, double) { return b; };
  s.growth = GrowthEnvelope{[](double v) { return v; }, [b](double) { return b; }};
  s.autonomous = true;
  s.params = {{"a", a}, {"b", b}, {"r", r}};
  return s;
}

double example213_gain(double t) {
  const double phase = t - 2.0 * std::floor(t / 2.0);
  if (phase <= 1.0) {
    const double s = std::sin(std::numbers::pi * t);
    return 2.0 * s * s;
  }
  return 0.0;
}

RfdeSystem builtin_example213() {
  RfdeSystem s;
  s.name = "example213";
  s.delay_span = 1.0;
  s.state_dim = 2;
  s.box = DisturbanceBox::interval(-1.0, 1.0);
  s.rhs = [](Instant t, const HistoryView& x, std::span<const double> d) {
    const State now = x.at(0.0);
    const double past = x.at(-1.0)[0];
    return State{-example213_gain(t.t) * past, -now[1] + d[0] * std::exp(t.t) * now[0] * now[0]};
  };
  s.growth = GrowthEnvelope{[](double v) { return 3.0 * v + v * v; },
                            [](double t) { return std::exp(t); }};
  s.params = nlohmann::json::object();
  return s;
}

long sample_index(double t, double r, bool from_left) {
  const double q = t / r;
  if (from_left) return static_cast<long>(std::ceil(q - 1e-9)) - 1;
  return static_cast<long>(std::floor(q + 1e-9));
}

RfdeSystem build_sampled_data(PlantFn f, FeedbackFn k, double r, std::size_t state_dim,
                              bool time_invariant) {
  if (!(r > 0.0)) throw ConfigError("sampled-data: period must be positive");
  RfdeSystem s;
  s.name = "sampled_data";
  s.delay_span = r;
  s.state_dim = state_dim;
  s.box = DisturbanceBox::interval(0.0, 0.0);
  s.rhs = [f = std::move(f), k = std::move(k), r](Instant t, const HistoryView& x,
                                                  std::span<const double>) {
    const long i = sample_index(t.t, r, t.from_left);
    const double theta = std::clamp(static_cast<double>(i) * r - t.t, -r, 0.0);
    const State now = x.at(0.0);
    const State past = x.at(theta);
    const State u = k(t.t, now, past);
    return f(t.t, now, u);
  };
  s.discontinuities = DiscontinuitySet{{0.0}, r};
  if (time_invariant) s.period = r;
  s.autonomous = false;
  s.params = {{"r", r}};
  return s;
}

RfdeSystem builtin_linear_delay(double a, double b, double r) {
  if (!(r >= 0.0)) throw ConfigError("linear_delay: r must be nonnegative");
  RfdeSystem s;
  s.name = "linear_delay";
  s.delay_span = r;
  s.state_dim = 1;
  s.box = DisturbanceBox::interval(0.0, 0.0);
  s.rhs = [a, b, r](Instant, const HistoryView& x, std::span<const double>) {
    return State{-a * x.at(0.0)[0] - b * x.at(-r)[0]};
  };
  const double L = std::max(-a, 0.0) + std::abs(b);
  s.lipschitz = [L](double, double) { return L; };
  const double g = std::abs(a) + std::abs(b);
  s.growth = GrowthEnvelope{[](double v) { return v; }, [g](double) { return g; }};
  s.autonomous = true;
  s.params = {{"a", a}, {"b", b}, {"r", r}};
  return s;
}

LipschitzProbe probe_one_sided_lipschitz(const RfdeSystem& sys, double t, const HistorySegment& x,
                                         const HistorySegment& y, std::span<const double> d) {
  if (!sys.lipschitz) throw ConfigError("probe: system has no one-sided Lipschitz modulus");
  const State fx = eval_rhs(sys, t, x, d);
  const State fy = eval_rhs(sys, t, y, d);
  LipschitzProbe p;
  const auto x0 = x.head();
  const auto y0 = y.head();
  for (std::size_t i = 0; i < fx.size(); ++i) p.lhs += (x0[i] - y0[i]) * (fx[i] - fy[i]);
  const double diff = (x - y).sup_norm();
  p.bound = (*sys.lipschitz)(t, x.sup_norm() + y.sup_norm()) * diff * diff;
  return p;
}

namespace {

State random_disturbance(Rng& rng, const DisturbanceBox& box) {
  State d(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const double lo = std::isfinite(box.lower[i]) ? box.lower[i] : -1.0;
    const double hi = std::isfinite(box.upper[i]) ? box.upper[i] : 1.0;
    d[i] = rng.uniform(lo, hi);
  }
  return d;
}

double probe_step(const RfdeSystem& sys) {
  return sys.delay_span > 0.0 ? sys.delay_span / 20.0 : 1e-2;
}

}  // namespace

double probe_equilibrium(const RfdeSystem& sys, std::size_t samples, std::uint64_t seed,
                         double t_max) {
  Rng rng(seed);
  const auto zero = HistorySegment::zero(sys.delay_span, probe_step(sys), sys.state_dim);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double t = rng.uniform(0.0, t_max);
    const State d = random_disturbance(rng, sys.box);
    worst = std::max(worst, euclidean_norm(eval_rhs(sys, t, zero, d)));
  }
  return worst;
}

double probe_periodicity(const RfdeSystem& sys, std::size_t samples, std::uint64_t seed,
                         double t_max) {
  if (!sys.period) throw ConfigError("probe: system declares no period");
  const double T = *sys.period;
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    // Integer multiples of the probe step keep sample-index lookups exact.
    const double step = probe_step(sys);
    const double t = step * std::floor(rng.uniform(0.0, t_max) / step);
    const auto x = random_fourier_history(rng, sys.delay_span, step, sys.state_dim, 1.0);
    const State d = random_disturbance(rng, sys.box);
    const State a = eval_rhs(sys, t, x, d);
    const State b = eval_rhs(sys, t + T, x, d);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

std::vector<double> probe_growth(const RfdeSystem& sys, double R, const std::vector<double>& radii,
                                 std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  for (double radius : radii) {
    double worst = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const double t = rng.uniform(0.0, R);
      auto x = random_fourier_history(rng, sys.delay_span, probe_step(sys), sys.state_dim, 1.0);
      const double n = x.sup_norm();
      if (n > 0.0) x = x.scaled(radius * rng.uniform() / n);
      const State d = random_disturbance(rng, sys.box);
      worst = std::max(worst, euclidean_norm(eval_rhs(sys, t, x, d)));
    }
    out.push_back(worst);
  }
  return out;
}

double default_grid_step(const RfdeSystem& sys) {
  return sys.delay_span > 0.0 ? sys.delay_span / 100.0 : 1e-2;
}

}  // namespace rfdelyap
