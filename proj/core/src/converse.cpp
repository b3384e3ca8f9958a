#include "rfdelyap/converse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rfdelyap/parallel.hpp"
#include "rfdelyap/random.hpp"

namespace rfdelyap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double step_of(const RfdeSystem& sys, const ConverseConfig& cfg) {
  const double step = cfg.grid_step > 0.0 ? cfg.grid_step : default_grid_step(sys);
  if (sys.delay_span > 0.0 && !is_grid_multiple(sys.delay_span, step))
    throw ConfigError("converse: grid_step must divide the delay span");
  return step;
}

std::size_t steps_for(double horizon, double step) {
  if (horizon <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
}

bool degenerate(const DisturbanceBox& box) {
  for (std::size_t i = 0; i < box.dim(); ++i)
    if (box.upper[i] > box.lower[i]) return false;
  return true;
}

void require_a2(const ConverseConfig& cfg) {
  if (!cfg.a2_tilde) throw ConfigError("converse: a2~ is not set (fit or supply it)");
  if (!cfg.beta) throw ConfigError("converse: beta is not set");
  if (cfg.q_max < 1) throw ConfigError("converse: q_max must be at least 1");
}

// Per-signal trajectories from (t, x); the best value per q is reduced in
// signal order so ties resolve to the lowest index.
std::vector<UqSample> sample_levels(const RfdeSystem& sys, const ConverseConfig& cfg, double t,
                                    const HistorySegment& x,
                                    const std::vector<DisturbanceSignal>& family,
                                    const std::vector<double>& horizons) {
  const double step = step_of(sys, cfg);
  const double r = sys.delay_span;
  std::size_t K = 0;
  for (double H : horizons) K = std::max(K, steps_for(H, step));
  const double t_end = t + static_cast<double>(std::max<std::size_t>(K, 1)) * step;
  IntegratorOptions opts;
  opts.grid_step = step;

  const std::size_t Q = horizons.size();
  std::vector<std::vector<UqSample>> per(family.size(), std::vector<UqSample>(Q));
  parallel_for(family.size(), [&](std::size_t i) {
    const Trajectory traj = integrate(sys, t, x, family[i], t_end, opts);
    if (!traj.completed())
      throw ConstructionInvalid("converse: trajectory escaped at t = " +
                                std::to_string(traj.t_last()) + " (signal " + std::to_string(i) +
                                ")");
    const auto norms = traj.window_norms(r);
    const std::size_t N = traj.history_intervals();
    for (std::size_t q = 0; q < Q; ++q) {
      const std::size_t Kq = steps_for(horizons[q], step);
      const double inv_q = 1.0 / static_cast<double>(q + 1);
      UqSample best;
      best.signal = i;
      best.tau = t;
      for (std::size_t k = 0; k <= Kq; ++k) {
        const double tau = traj.time(N + k);
        const double v = std::max(0.0, cfg.a1_tilde(norms[N + k]) - inv_q) * std::exp(tau - t);
        if (v > best.value) {
          best.value = v;
          best.tau = tau;
        }
      }
      per[i][q] = best;
    }
  });

  std::vector<UqSample> out(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (i == 0 || per[i][q].value > out[q].value) out[q] = per[i][q];
    }
  }
  return out;
}

// Horizons of levels 1..q_max and the family horizon (that of q_max).
std::vector<double> level_horizons(const ConverseConfig& cfg, double R) {
  std::vector<double> H(static_cast<std::size_t>(cfg.q_max));
  for (int q = 1; q <= cfg.q_max; ++q) H[static_cast<std::size_t>(q - 1)] = horizon_T(R, q, cfg);
  return H;
}

std::vector<double> all_levels(const RfdeSystem& sys, const ConverseConfig& cfg, double t,
                               const HistorySegment& x) {
  require_a2(cfg);
  const double step = step_of(sys, cfg);
  const auto H = level_horizons(cfg, std::max(t, x.sup_norm()));
  const auto family = make_family(cfg.family, sys.box, t, H.back(), step);
  const auto s = sample_levels(sys, cfg, t, x, family, H);
  std::vector<double> out;
  for (const auto& e : s) out.push_back(e.value);
  return out;
}

}  // namespace

nlohmann::json FamilySpec::to_json() const {
  return {{"vertices", vertices},
          {"bang_bang_count", bang_bang_count},
          {"bang_bang_max_switches", bang_bang_max_switches},
          {"random_count", random_count},
          {"random_max_switches", random_max_switches},
          {"seed", seed}};
}

FamilySpec FamilySpec::from_json(const nlohmann::json& j) {
  FamilySpec s;
  s.vertices = j.value("vertices", s.vertices);
  s.bang_bang_count = j.value("bang_bang_count", s.bang_bang_count);
  s.bang_bang_max_switches = j.value("bang_bang_max_switches", s.bang_bang_max_switches);
  s.random_count = j.value("random_count", s.random_count);
  s.random_max_switches = j.value("random_max_switches", s.random_max_switches);
  s.seed = j.value("seed", s.seed);
  if (s.bang_bang_count < 0 || s.random_count < 0 || s.bang_bang_max_switches < 0 ||
      s.random_max_switches < 0)
    throw ConfigError("family: counts must be nonnegative");
  return s;
}

std::vector<DisturbanceSignal> make_family(const FamilySpec& spec, const DisturbanceBox& box,
                                           double t0, double horizon, double grid_step) {
  if (!box.bounded()) throw ConfigError("family: the disturbance box must be bounded");
  std::vector<DisturbanceSignal> out;
  if (degenerate(box)) {
    out.push_back(make_constant(box, box.lower));
    return out;
  }
  if (spec.vertices)
    for (auto& v : box.vertices()) out.push_back(make_constant(box, v));
  for (int i = 0; i < spec.bang_bang_count; ++i) {
    Rng rng(child_seed(spec.seed, static_cast<std::uint64_t>(i)));
    out.push_back(random_bang_bang(rng, box, t0, horizon, grid_step, spec.bang_bang_max_switches));
  }
  for (int i = 0; i < spec.random_count; ++i) {
    Rng rng(child_seed(spec.seed, 1000000u + static_cast<std::uint64_t>(i)));
    out.push_back(
        random_piecewise_constant(rng, box, t0, horizon, grid_step, spec.random_max_switches));
  }
  if (out.empty()) throw ConfigError("family: empty sample family");
  return out;
}

nlohmann::json ConverseConfig::to_json() const {
  return {{"q_max", q_max},
          {"family", family.to_json()},
          {"grid_step", grid_step},
          {"plain_weights", plain_weights}};
}

void use_huber_a1(ConverseConfig& cfg) {
  cfg.a1_tilde = [](double s) { return s <= 1.0 ? 0.5 * s * s : s - 0.5; };
  cfg.a1_tilde_inv = [](double v) { return v <= 0.5 ? std::sqrt(2.0 * std::max(v, 0.0)) : v + 0.5; };
}

double horizon_T(double R, int q, const ConverseConfig& cfg) {
  require_a2(cfg);
  const double v = static_cast<double>(q) * cfg.a2_tilde(cfg.beta(R) * R);
  if (!(v > 1.0)) return 0.0;
  return 0.5 * std::log(v);
}

UqSample sample_Uq(const RfdeSystem& sys, const ConverseConfig& cfg, int q, double t,
                   const HistorySegment& x, const std::vector<DisturbanceSignal>& family,
                   double horizon) {
  if (q < 1) throw ConfigError("converse: q must be at least 1");
  if (std::abs(x.span() - sys.delay_span) > 1e-12)
    throw ConfigError("converse: history span must equal the delay span");
  std::vector<double> H(static_cast<std::size_t>(q), 0.0);
  H.back() = horizon;
  return sample_levels(sys, cfg, t, x, family, H).back();
}

double estimate_Uq(const RfdeSystem& sys, const ConverseConfig& cfg, int q, double t,
                   const HistorySegment& x) {
  if (q < 1 || q > cfg.q_max) throw ConfigError("converse: q out of range");
  if (std::abs(x.span() - sys.delay_span) > 1e-12)
    throw ConfigError("converse: history span must equal the delay span");
  return all_levels(sys, cfg, t, x)[static_cast<std::size_t>(q - 1)];
}

std::vector<double> estimate_Uq_levels(const RfdeSystem& sys, const ConverseConfig& cfg, double t,
                                       const HistorySegment& x) {
  if (std::abs(x.span() - sys.delay_span) > 1e-12)
    throw ConfigError("converse: history span must equal the delay span");
  return all_levels(sys, cfg, t, x);
}

double converse_L(const RfdeSystem& sys, const ConverseConfig& cfg, double t, double s) {
  if (!sys.lipschitz) throw ConfigError("converse: the system carries no Lipschitz modulus");
  require_a2(cfg);
  return (*sys.lipschitz)(t, 2.0 * cfg.a1_tilde_inv(cfg.a2_tilde(cfg.beta(t) * s)));
}

double converse_G1(const RfdeSystem& sys, const ConverseConfig& cfg, double t, double s) {
  if (!sys.growth) throw ConfigError("converse: the system carries no growth envelope");
  require_a2(cfg);
  return sys.growth->zeta(sys.growth->gamma(t) * cfg.a1_tilde_inv(cfg.a2_tilde(cfg.beta(t) * s)));
}

double converse_G3(const RfdeSystem& sys, const ConverseConfig& cfg, double R, int q) {
  const double T = horizon_T(R, q, cfg);
  return std::exp(T * (1.0 + converse_L(sys, cfg, R + T, 2.0 * R)));
}

double default_weight(const RfdeSystem& sys, const ConverseConfig& cfg, int q) {
  const double Q = static_cast<double>(q);
  const double den = 1.0 + converse_G3(sys, cfg, Q, q) +
                     (2.0 + converse_G3(sys, cfg, Q + 1.0, q)) * (1.0 + converse_G1(sys, cfg, Q, Q));
  if (!std::isfinite(den)) return 0.0;
  return std::ldexp(1.0, -q) / den;
}

double converse_M(const RfdeSystem& sys, const ConverseConfig& cfg, double R) {
  double M = 1.0;
  const int top = std::min(cfg.q_max, static_cast<int>(std::floor(R)));
  for (int q = 1; q <= top; ++q) {
    const double num = converse_G3(sys, cfg, R, q);
    const double den = 1.0 + converse_G3(sys, cfg, static_cast<double>(q), q);
    const double term = std::ldexp(1.0, -q) * num / den;
    if (!std::isfinite(term)) return kInf;
    M += term;
  }
  return M;
}

nlohmann::json ConverseFunctional::to_json() const {
  return {{"name", V.name}, {"weights", weights}, {"params", V.params}};
}

ConverseFunctional assemble_V(const RfdeSystem& sys, const ConverseConfig& cfg,
                              std::optional<std::vector<double>> weights) {
  require_a2(cfg);
  const auto Q = static_cast<std::size_t>(cfg.q_max);
  std::vector<double> w(Q);
  bool defaults = false;
  if (weights) {
    if (weights->size() != Q) throw ConfigError("converse: need one weight per level");
    double sum = 0.0;
    for (double e : *weights) {
      if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("converse: weights must be finite and nonnegative");
      sum += e;
    }
    w = *weights;
    if (sum > 1.0)
      for (double& e : w) e /= sum;
  } else if (cfg.plain_weights) {
    for (std::size_t q = 0; q < Q; ++q) w[q] = std::ldexp(1.0, -static_cast<int>(q + 1));
  } else {
    if (!sys.lipschitz || !sys.growth)
      throw ConfigError(
          "converse: default weights need a Lipschitz modulus and a growth envelope; "
          "set plain_weights or pass weights");
    for (std::size_t q = 0; q < Q; ++q) w[q] = default_weight(sys, cfg, static_cast<int>(q + 1));
    defaults = true;
  }

  ConverseFunctional out;
  out.weights = w;
  const ScalarFn a1t = cfg.a1_tilde;
  out.lower_bound = [w, a1t](double s) {
    double v = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q)
      v += w[q] * std::max(0.0, a1t(s) - 1.0 / static_cast<double>(q + 1));
    return v;
  };

  Functional& V = out.V;
  V.name = "converse";
  V.delay_span = sys.delay_span;
  V.tau = 0.0;
  V.dim = sys.state_dim;
  V.value = [sys, cfg, w](double t, const HistorySegment& x) {
    const auto U = all_levels(sys, cfg, t, x);
    double v = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q) v += w[q] * U[q];
    return v;
  };
  V.a1 = out.lower_bound;
  V.a2 = cfg.a2_tilde;
  V.beta = cfg.beta;
  V.rho = [](double s) { return s; };
  if (defaults) V.lipschitz_M = [sys, cfg](double R) { return converse_M(sys, cfg, R); };
  V.params = {{"weights", w}, {"config", cfg.to_json()}};
  return out;
}

nlohmann::json DecreaseReport::to_json() const {
  return {{"lhs", lhs}, {"rhs", rhs}, {"bound", bound}, {"slack", slack}, {"holds", holds}};
}

DecreaseReport check_decrease(const RfdeSystem& sys, const ConverseConfig& cfg, int q, double t,
                              const HistorySegment& x, const DisturbanceSignal& d_head, double h,
                              double tol) {
  require_a2(cfg);
  if (q < 1) throw ConfigError("converse: q must be at least 1");
  const double step = step_of(sys, cfg);
  if (!(h > 0.0) || !is_grid_multiple(h, step))
    throw ConfigError("check_decrease: h must be a positive grid multiple");
  const double r = sys.delay_span;
  IntegratorOptions opts;
  opts.grid_step = step;

  const Trajectory head = integrate(sys, t, x, d_head, t + h, opts);
  if (!head.completed()) throw ConstructionInvalid("check_decrease: head trajectory escaped");
  const double th = head.time(head.node_count() - 1);
  const HistorySegment y = head.window(th, r);

  const double Hl = horizon_T(std::max(th, y.sup_norm()), q, cfg);
  const double Hl_grid = static_cast<double>(steps_for(Hl, step)) * step;
  const auto tail_family = make_family(cfg.family, sys.box, th, Hl_grid, step);
  const UqSample lhs = sample_Uq(sys, cfg, q, th, y, tail_family, Hl);

  const double Hr = std::max(horizon_T(std::max(t, x.sup_norm()), q, cfg), h + Hl_grid);
  auto family = make_family(cfg.family, sys.box, t, Hr, step);
  for (const auto& dp : tail_family) family.push_back(concat(d_head, th, shift(dp, th)));
  const UqSample rhs = sample_Uq(sys, cfg, q, t, x, family, Hr);

  DecreaseReport rep;
  rep.lhs = lhs.value;
  rep.rhs = rhs.value;
  rep.bound = std::exp(-h) * rhs.value;
  rep.slack = (rep.lhs - rep.bound) / (1.0 + rep.rhs);
  rep.holds = rep.slack <= tol;
  return rep;
}

ScalarFn EnvelopeFit::a2() const {
  const double k = kappa, a = c1, b = c2;
  return [k, a, b](double s) { return k * (a * s + b * s * s); };
}

ScalarFn EnvelopeFit::beta() const {
  if (beta_times.empty()) return [](double) { return 1.0; };
  const auto ts = beta_times;
  const auto vs = beta_values;
  return [ts, vs](double t) {
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return vs.front();
    return vs[static_cast<std::size_t>(it - ts.begin()) - 1];
  };
}

nlohmann::json EnvelopeFit::to_json() const {
  return {{"c1", c1},
          {"c2", c2},
          {"kappa", kappa},
          {"beta_times", beta_times},
          {"beta_values", beta_values},
          {"horizon", horizon}};
}

namespace {

// max over t of e^{2t} a1~(m(s, t)) for one start time and one norm.
double envelope_need(const RfdeSystem& sys, const ConverseConfig& cfg, const EnvelopeFitSpec& spec,
                     double t0, double s, std::uint64_t seed, double& horizon_used) {
  const double step = step_of(sys, cfg);
  const double r = sys.delay_span;
  const double floor_norm = cfg.a1_tilde_inv(1.0 / static_cast<double>(cfg.q_max));
  const auto family = make_family(cfg.family, sys.box, t0, spec.max_horizon, step);
  const std::size_t H = static_cast<std::size_t>(spec.histories);
  std::vector<double> need(H * family.size(), 0.0);
  std::vector<double> used(need.size(), 0.0);
  IntegratorOptions opts;
  opts.grid_step = step;
  parallel_for(need.size(), [&](std::size_t idx) {
    const std::size_t k = idx / family.size();
    const std::size_t i = idx % family.size();
    Rng rng(child_seed(seed, k));
    HistorySegment x = random_fourier_history(rng, r, step, sys.state_dim, 1.0);
    const double n0 = x.sup_norm();
    x = n0 > 0.0 ? x.scaled(s / n0) : x;
    double t = t0, best = 0.0;
    const double chunk = std::max(1.0, 10.0 * step);
    while (t < t0 + spec.max_horizon - 1e-9) {
      const double t_end = std::min(t + chunk, t0 + spec.max_horizon);
      const Trajectory traj = integrate(sys, t, x, family[i], t_end, opts);
      if (!traj.completed())
        throw ConstructionInvalid("fit_envelope: trajectory escaped at t = " +
                                  std::to_string(traj.t_last()));
      const auto norms = traj.window_norms(r);
      const std::size_t N = traj.history_intervals();
      bool below = false;
      for (std::size_t j = N; j < traj.node_count(); ++j) {
        best = std::max(best, std::exp(2.0 * (traj.time(j) - t0)) * cfg.a1_tilde(norms[j]));
        if (norms[j] < floor_norm) below = true;
      }
      t = traj.time(traj.node_count() - 1);
      if (below) break;
      x = traj.window(t, r);
    }
    need[idx] = best;
    used[idx] = t - t0;
  });
  for (double u : used) horizon_used = std::max(horizon_used, u);
  return *std::max_element(need.begin(), need.end());
}

// Nonnegative least squares for c1 s + c2 s^2, then scaled to dominate the data.
void fit_quadratic(const std::vector<double>& s, const std::vector<double>& y, double& c1,
                   double& c2) {
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = s[i], p2 = s[i] * s[i];
    s11 += p * p;
    s12 += p * p2;
    s22 += p2 * p2;
    b1 += p * y[i];
    b2 += p2 * y[i];
  }
  const double det = s11 * s22 - s12 * s12;
  c1 = c2 = -1.0;
  if (std::abs(det) > 1e-14 * s11 * s22) {
    c1 = (b1 * s22 - b2 * s12) / det;
    c2 = (s11 * b2 - s12 * b1) / det;
  }
  if (!(c1 >= 0.0 && c2 >= 0.0)) {
    auto residual = [&](double a, double b) {
      double e = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = a * s[i] + b * s[i] * s[i] - y[i];
        e += d * d;
      }
      return e;
    };
    const double a_only = s11 > 0 ? std::max(0.0, b1 / s11) : 0.0;
    const double b_only = s22 > 0 ? std::max(0.0, b2 / s22) : 0.0;
    if (residual(a_only, 0.0) <= residual(0.0, b_only)) {
      c1 = a_only;
      c2 = 0.0;
    } else {
      c1 = 0.0;
      c2 = b_only;
    }
  }
  if (c1 == 0.0 && c2 == 0.0) c1 = 1.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double model = c1 * s[i] + c2 * s[i] * s[i];
    if (model > 0.0) scale = std::max(scale, y[i] / model);
  }
  c1 *= scale;
  c2 *= scale;
}

}  // namespace

EnvelopeFit fit_envelope(const RfdeSystem& sys, const ConverseConfig& cfg,
                         const EnvelopeFitSpec& spec, bool uniform) {
  if (spec.norms.empty() || spec.start_times.empty() || spec.histories < 1)
    throw ConfigError("fit_envelope: empty batch");
  if (!(spec.kappa >= 1.0)) throw ConfigError("fit_envelope: kappa must be at least 1");
  auto starts = spec.start_times;
  std::sort(starts.begin(), starts.end());

  EnvelopeFit fit;
  fit.kappa = spec.kappa;
  std::vector<std::vector<double>> need(starts.size(), std::vector<double>(spec.norms.size()));
  for (std::size_t j = 0; j < starts.size(); ++j)
    for (std::size_t i = 0; i < spec.norms.size(); ++i)
      need[j][i] = envelope_need(sys, cfg, spec, starts[j], spec.norms[i],
                                 child_seed(spec.seed, j * 1000 + i), fit.horizon);

  std::vector<double> base(spec.norms.size(), 0.0);
  for (std::size_t i = 0; i < spec.norms.size(); ++i)
    base[i] = uniform ? std::max_element(need.begin(), need.end(),
                                         [i](const auto& a, const auto& b) { return a[i] < b[i]; })
                            ->at(i)
                      : need[0][i];
  fit_quadratic(spec.norms, base, fit.c1, fit.c2);
  if (uniform) return fit;

  // Smallest beta >= 1 with kappa (c1 beta s + c2 beta^2 s^2) >= need, made monotone.
  double running = 1.0;
  for (std::size_t j = 0; j < starts.size(); ++j) {
    double b = 1.0;
    for (std::size_t i = 0; i < spec.norms.size(); ++i) {
      const double s = spec.norms[i], target = need[j][i] / fit.kappa;
      double x;  // beta * s
      if (fit.c2 > 0.0)
        x = (-fit.c1 + std::sqrt(fit.c1 * fit.c1 + 4.0 * fit.c2 * target)) / (2.0 * fit.c2);
      else
        x = target / fit.c1;
      b = std::max(b, x / s);
    }
    running = std::max(running, b);
    fit.beta_times.push_back(starts[j]);
    fit.beta_values.push_back(running);
  }
  return fit;
}

}  // namespace rfdelyap
