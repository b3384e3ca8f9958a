#include "rfdelyap/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "rfdelyap/comparison.hpp"
#include "rfdelyap/parallel.hpp"
#include "rfdelyap/random.hpp"

namespace rfdelyap {

namespace {

double step_for(const RfdeSystem& sys, double requested) {
  const double step = requested > 0.0 ? requested : default_grid_step(sys);
  if (sys.delay_span > 0.0 && !is_grid_multiple(sys.delay_span, step))
    throw ConfigError("certify: grid_step must divide the delay span");
  return step;
}

bool degenerate(const DisturbanceBox& box) {
  for (std::size_t i = 0; i < box.dim(); ++i)
    if (box.upper[i] > box.lower[i]) return false;
  return true;
}

HistorySegment scaled_to(HistorySegment x, double norm) {
  const double n = x.sup_norm();
  return n > 0.0 ? x.scaled(norm / n) : x;
}

// x(s + theta) read from a stored trajectory.
class TrajectoryView final : public HistoryView {
 public:
  TrajectoryView(const Trajectory& traj, double s, double span) : traj_(traj), s_(s), span_(span) {}
  double span() const override { return span_; }
  std::size_t dim() const override { return traj_.dim(); }
  State at(double theta) const override { return traj_.at(s_ + theta); }

 private:
  const Trajectory& traj_;
  double s_, span_;
};

double normalized(double lhs, double rhs) { return (lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs)); }

double integral_beta4(const Functional& V, double t) {
  if (t <= 0.0) return 0.0;
  const int n = 1000;
  const double h = t / n;
  double s = 0.5 * (V.beta4(0.0) + V.beta4(t));
  for (int i = 1; i < n; ++i) s += V.beta4(i * h);
  return s * h;
}

double directional(const Functional& V, double t, const HistorySegment& x, std::span<const double> v,
                   const DiniOptions& dini) {
  if (V.derivative) return V.derivative(t, x, v);
  return estimate_V0(V, t, x, v, dini).value;
}

enum class Kind {
  a1_norm_le_V,
  V_le_a2,
  a1_head_le_V,
  V0_le_minus_V,
  lipschitz,
  V0_le_beta2_V,
  V0_le_decay,
  V0_le_growth,
  V0_le_minus_rho,
};

const char* kind_id(Kind k) {
  switch (k) {
    case Kind::a1_norm_le_V: return "a1_norm_le_V";
    case Kind::V_le_a2: return "V_le_a2";
    case Kind::a1_head_le_V: return "a1_head_le_V";
    case Kind::V0_le_minus_V: return "V0_le_minus_V";
    case Kind::lipschitz: return "lipschitz";
    case Kind::V0_le_beta2_V: return "V0_le_beta2_V";
    case Kind::V0_le_decay: return "V0_le_decay";
    case Kind::V0_le_growth: return "V0_le_growth";
    case Kind::V0_le_minus_rho: return "V0_le_minus_rho";
  }
  return "";
}

Kind kind_from(const std::string& s) {
  for (Kind k : {Kind::a1_norm_le_V, Kind::V_le_a2, Kind::a1_head_le_V, Kind::V0_le_minus_V,
                 Kind::lipschitz, Kind::V0_le_beta2_V, Kind::V0_le_decay, Kind::V0_le_growth,
                 Kind::V0_le_minus_rho})
    if (s == kind_id(k)) return k;
  throw ConfigError("witness: unknown check kind '" + s + "'");
}

const char* kind_title(Kind k, bool unit_beta) {
  switch (k) {
    case Kind::a1_norm_le_V: return "lower bound a1(||x||) <= V";
    case Kind::V_le_a2: return unit_beta ? "upper bound V <= a2(||x||)" : "upper bound V <= a2(beta(t) ||x||)";
    case Kind::a1_head_le_V: return "lower bound a1(|x(0)|) <= V";
    case Kind::V0_le_minus_V: return "decrease V0 <= -V";
    case Kind::lipschitz: return "Lipschitz |V(y) - V(x)| <= M(R) ||y - x||";
    case Kind::V0_le_beta2_V: return "growth V0 <= beta2 V + R beta3";
    case Kind::V0_le_decay: return "decrease on S(t) V0 <= -beta4 rho(V) + beta4 mu";
    case Kind::V0_le_growth: return "growth V0 <= beta V";
    case Kind::V0_le_minus_rho: return "decrease on S(t) V0 <= -rho(V)";
  }
  return "";
}

struct Sample {
  double t = 0.0;
  HistorySegment x;
  HistorySegment y;  // lipschitz partner
  double R = 0.0;
  nlohmann::json origin;  // S-state provenance
};

// The single evaluation shared by the checks and witness replay.
double evaluate(Kind kind, bool unit_beta, const RfdeSystem& sys, const Functional& V,
                const Sample& s, std::span<const double> d, const DiniOptions& dini) {
  const double t = s.t;
  const HistorySegment& x = s.x;
  auto field = [&] {
    const HistorySegment recent = x.tail(sys.delay_span);
    return eval_rhs(sys, t, recent, d);
  };
  switch (kind) {
    case Kind::a1_norm_le_V:
      return normalized(V.a1(x.sup_norm()), eval(V, t, x));
    case Kind::V_le_a2: {
      const double b = unit_beta ? 1.0 : V.beta(t);
      return normalized(eval(V, t, x), V.a2(b * x.sup_norm()));
    }
    case Kind::a1_head_le_V:
      return normalized(V.a1(euclidean_norm(x.head())), eval(V, t, x));
    case Kind::V0_le_minus_V: {
      const State f = field();
      return normalized(directional(V, t, x, f, dini), -eval(V, t, x));
    }
    case Kind::lipschitz: {
      const double lhs = std::abs(eval(V, t, s.y) - eval(V, t, x));
      return normalized(lhs, V.lipschitz_M(s.R) * (s.y - x).sup_norm());
    }
    case Kind::V0_le_beta2_V: {
      const State f = field();
      const double v = eval(V, t, x);
      return normalized(directional(V, t, x, f, dini), V.beta2(t) * v + V.R_const * V.beta3(t));
    }
    case Kind::V0_le_decay: {
      const State f = field();
      const double v = eval(V, t, x);
      const double mu = V.mu ? V.mu(integral_beta4(V, t)) : 0.0;
      return normalized(directional(V, t, x, f, dini), -V.beta4(t) * V.rho(v) + V.beta4(t) * mu);
    }
    case Kind::V0_le_growth: {
      const State f = field();
      return normalized(directional(V, t, x, f, dini), *V.growth_rate * eval(V, t, x));
    }
    case Kind::V0_le_minus_rho: {
      const State f = field();
      return normalized(directional(V, t, x, f, dini), -V.rho(eval(V, t, x)));
    }
  }
  return 0.0;
}

bool needs_disturbance(Kind k) {
  return k != Kind::a1_norm_le_V && k != Kind::V_le_a2 && k != Kind::a1_head_le_V &&
         k != Kind::lipschitz;
}

struct KindPlan {
  Kind kind;
  bool on_S = false;
  bool lipschitz_samples = false;
};

std::vector<KindPlan> plan_for(TheoremForm form) {
  switch (form) {
    case TheoremForm::varying_lipschitz:
    case TheoremForm::uniform_lipschitz:
      return {{Kind::a1_norm_le_V}, {Kind::V_le_a2}, {Kind::V0_le_minus_V}, {Kind::lipschitz, false, true}};
    case TheoremForm::varying_restricted:
      return {{Kind::a1_head_le_V}, {Kind::V_le_a2}, {Kind::V0_le_beta2_V}, {Kind::V0_le_decay, true}};
    case TheoremForm::uniform_restricted:
      return {{Kind::a1_head_le_V}, {Kind::V_le_a2}, {Kind::V0_le_growth}, {Kind::V0_le_minus_rho, true}};
  }
  return {};
}

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("check_theorem_conditions: functional lacks ") + what);
}

void require_bounds(const Functional& V, TheoremForm form) {
  require(static_cast<bool>(V.value), "a value");
  require(static_cast<bool>(V.a1), "a1");
  require(static_cast<bool>(V.a2), "a2");
  switch (form) {
    case TheoremForm::varying_lipschitz:
      require(static_cast<bool>(V.beta), "beta");
      require(static_cast<bool>(V.lipschitz_M), "M(R)");
      break;
    case TheoremForm::uniform_lipschitz:
      require(static_cast<bool>(V.lipschitz_M), "M(R)");
      break;
    case TheoremForm::varying_restricted:
      require(static_cast<bool>(V.beta), "beta1");
      require(static_cast<bool>(V.beta2), "beta2");
      require(static_cast<bool>(V.beta3), "beta3");
      require(static_cast<bool>(V.beta4), "beta4");
      require(static_cast<bool>(V.rho), "rho");
      break;
    case TheoremForm::uniform_restricted:
      require(V.growth_rate.has_value(), "a growth rate");
      require(static_cast<bool>(V.rho), "rho");
      break;
  }
}

std::vector<State> disturbances(const DisturbanceBox& box, const SampleSpec& spec) {
  std::vector<State> out;
  if (spec.vertices || degenerate(box)) out = box.vertices();
  if (!degenerate(box) && spec.random_points > 0) {
    if (!box.bounded()) throw ConfigError("certify: random disturbance points need a bounded box");
    Rng rng(child_seed(spec.seed, 0xD15ull));
    for (std::size_t i = 0; i < spec.random_points; ++i) {
      State p(box.dim());
      for (std::size_t j = 0; j < box.dim(); ++j) p[j] = rng.uniform(box.lower[j], box.upper[j]);
      out.push_back(p);
    }
  }
  if (out.empty()) throw ConfigError("certify: no disturbance samples");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json CheckResult::to_json() const {
  return {{"name", name},       {"passed", passed},   {"worst_slack", worst_slack},
          {"tolerance", tolerance}, {"samples", samples}, {"witness", witness},
          {"details", details}};
}

bool CertReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

void CertReport::append(const CertReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
  for (auto it = other.coverage.begin(); it != other.coverage.end(); ++it) coverage[it.key()] = it.value();
}

nlohmann::json CertReport::to_json() const {
  nlohmann::json c = nlohmann::json::array();
  for (const auto& k : checks) c.push_back(k.to_json());
  return {{"schema_version", 1},
          {"title", title},
          {"passed", passed()},
          {"statement", "pass means no violation was found on the sampled coverage"},
          {"checks", c},
          {"coverage", coverage},
          {"warnings", warnings}};
}

double membership_residual(const RfdeSystem& sys, const Trajectory& traj, double from, double to) {
  const std::size_t k0 = traj.index_of(from);
  const std::size_t k1 = traj.index_of(to);
  const DisturbanceSignal d = signal_from_json(traj.signal());
  const double h = traj.grid_step();
  const std::size_t n = traj.dim();
  const auto x0 = traj.node(k0);
  State integral(n, 0.0);
  double worst = 0.0;
  for (std::size_t k = k0; k < k1; ++k) {
    const double tk = traj.time(k);
    const double tm = tk + 0.5 * h;
    const TrajectoryView view(traj, tm, sys.delay_span);
    const State fm = eval_rhs(sys, tm, view, d(tm));
    const auto fl = traj.right_derivative(k);
    const auto fr = traj.left_derivative(k + 1);
    const auto xn = traj.node(k + 1);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      integral[i] += h / 6.0 * (fl[i] + 4.0 * fm[i] + fr[i]);
      const double diff = xn[i] - x0[i] - integral[i];
      e += diff * diff;
    }
    worst = std::max(worst, std::sqrt(e));
  }
  return worst;
}

SStates generate_S_states(const RfdeSystem& sys, double t, double tau, const SBatch& batch) {
  if (t < tau - 1e-12) throw ConfigError("generate_S_states: t must be at least tau");
  if (tau < 0.0) throw ConfigError("generate_S_states: tau must be nonnegative");
  const double step = step_for(sys, batch.grid_step);
  if (tau > 0.0 && !is_grid_multiple(tau, step))
    throw ConfigError("generate_S_states: tau must be a grid multiple");
  const double r = sys.delay_span;
  const double start = t - tau;
  IntegratorOptions opts;
  opts.grid_step = step;

  std::vector<std::optional<SState>> slots(batch.count);
  parallel_for(batch.count, [&](std::size_t i) {
    Rng rng(child_seed(batch.seed, i));
    SState s;
    s.t0 = start;
    s.x0 = random_history(rng, r, step, sys.state_dim, batch.amplitude);
    const DisturbanceSignal d =
        sample_signal(rng, sys.box, i, start, std::max(tau, step), step, batch.max_switches);
    s.signal = d.description();
    if (tau == 0.0) {
      s.window = s.x0;
      slots[i] = std::move(s);
      return;
    }
    const Trajectory traj = integrate(sys, start, s.x0, d, t, opts);
    if (!traj.completed()) return;
    s.window = traj.window(traj.t_last(), r + tau);
    s.residual = membership_residual(sys, traj, start, traj.t_last());
    slots[i] = std::move(s);
  });

  SStates out;
  for (auto& s : slots) {
    if (!s) {
      ++out.discarded;
      continue;
    }
    out.worst_residual = std::max(out.worst_residual, s->residual);
    out.states.push_back(std::move(*s));
  }
  return out;
}

double KLEnvelope::sup_until(std::size_t row, double T) const {
  double best = 0.0;
  for (std::size_t c = 0; c < t.size() && t[c] <= T + 1e-12; ++c) best = std::max(best, m[row][c]);
  return best;
}

std::optional<double> KLEnvelope::decay_time(std::size_t row, double level) const {
  const auto& v = m[row];
  if (v.empty() || v.back() > level) return std::nullopt;
  std::size_t c = v.size();
  while (c > 0 && v[c - 1] <= level) --c;
  return t[c];
}

nlohmann::json KLEnvelope::to_json() const {
  nlohmann::json taus = nlohmann::json::array();
  nlohmann::json p2 = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    taus.push_back(tau[i] ? nlohmann::json(*tau[i]) : nlohmann::json());
    p2.push_back({{"s", s[i]}, {"sup", sup_until(i, t.empty() ? 0.0 : t.back())}});
  }
  return {{"s", s},
          {"bounded", bounded},
          {"blow_ups", blow_ups},
          {"epsilon", epsilon},
          {"tau", taus},
          {"sup_by_row", p2},
          {"batch", batch},
          {"witness", witness}};
}

void KLEnvelope::write_csv(std::ostream& os) const {
  os << "s";
  for (double c : t) os << ',' << fmt(c);
  os << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << fmt(s[i]);
    for (double v : m[i]) os << ',' << fmt(v);
    os << '\n';
  }
}

KLEnvelope empirical_envelope(const RfdeSystem& sys, const EnvelopeSpec& spec) {
  if (spec.norms.empty() || spec.start_times.empty() || spec.histories == 0)
    throw ConfigError("empirical_envelope: empty batch");
  if (!(spec.horizon > 0.0)) throw ConfigError("empirical_envelope: horizon must be positive");
  const double step = step_for(sys, spec.grid_step);
  const double r = sys.delay_span;
  const std::size_t stride =
      spec.output_step > 0.0 ? std::max<long>(1, grid_count(spec.output_step, step)) : 1;
  const std::size_t K = static_cast<std::size_t>(std::ceil(spec.horizon / step - 1e-9));
  const std::size_t cols = K / stride + 1;

  KLEnvelope env;
  env.s = spec.norms;
  std::sort(env.s.begin(), env.s.end());
  env.epsilon = spec.epsilon;
  for (std::size_t c = 0; c < cols; ++c) env.t.push_back(static_cast<double>(c * stride) * step);

  struct Job {
    std::size_t start, row, hist, signal;
  };
  std::vector<std::vector<DisturbanceSignal>> families;
  for (double t0 : spec.start_times) families.push_back(make_family(spec.family, sys.box, t0, spec.horizon, step));
  std::vector<Job> jobs;
  for (std::size_t j = 0; j < spec.start_times.size(); ++j)
    for (std::size_t i = 0; i < env.s.size(); ++i)
      for (std::size_t k = 0; k < spec.histories; ++k)
        for (std::size_t f = 0; f < families[j].size(); ++f) jobs.push_back({j, i, k, f});

  std::vector<std::vector<double>> rows(jobs.size());
  std::vector<char> escaped(jobs.size(), 0);
  IntegratorOptions opts;
  opts.grid_step = step;
  parallel_for(jobs.size(), [&](std::size_t n) {
    const Job& job = jobs[n];
    Rng rng(child_seed(spec.seed, job.start * 1000003u + job.hist));
    const HistorySegment x0 =
        scaled_to(random_fourier_history(rng, r, step, sys.state_dim, 1.0), env.s[job.row]);
    const double t0 = spec.start_times[job.start];
    const Trajectory traj = integrate(sys, t0, x0, families[job.start][job.signal], t0 + spec.horizon, opts);
    if (!traj.completed()) {
      escaped[n] = 1;
      return;
    }
    const auto norms = traj.window_norms(r);
    const std::size_t N = traj.history_intervals();
    std::vector<double> row(cols);
    for (std::size_t c = 0; c < cols; ++c) row[c] = norms[N + c * stride];
    rows[n] = std::move(row);
  });

  env.m.assign(env.s.size(), std::vector<double>(cols, 0.0));
  for (std::size_t n = 0; n < jobs.size(); ++n) {
    if (escaped[n]) {
      ++env.blow_ups;
      if (env.bounded) {
        env.bounded = false;
        const Job& job = jobs[n];
        env.witness = {{"t0", spec.start_times[job.start]},
                       {"norm", env.s[job.row]},
                       {"history_seed", child_seed(spec.seed, job.start * 1000003u + job.hist)},
                       {"signal", families[job.start][job.signal].description()}};
      }
      continue;
    }
    auto& dst = env.m[jobs[n].row];
    for (std::size_t c = 0; c < cols; ++c) dst[c] = std::max(dst[c], rows[n][c]);
  }
  // Rows cover all initial norms up to s.
  for (std::size_t i = 1; i < env.s.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c) env.m[i][c] = std::max(env.m[i][c], env.m[i - 1][c]);
  for (std::size_t i = 0; i < env.s.size(); ++i) env.tau.push_back(env.decay_time(i, spec.epsilon * env.s[i]));

  env.batch = {{"norms", env.s},
               {"start_times", spec.start_times},
               {"histories", spec.histories},
               {"family", spec.family.to_json()},
               {"horizon", spec.horizon},
               {"grid_step", step},
               {"seed", spec.seed},
               {"signals_per_start", families.front().size()}};
  return env;
}

TheoremForm theorem_form_from_string(const std::string& s) {
  if (s == "varying_lipschitz") return TheoremForm::varying_lipschitz;
  if (s == "varying_restricted") return TheoremForm::varying_restricted;
  if (s == "uniform_lipschitz") return TheoremForm::uniform_lipschitz;
  if (s == "uniform_restricted") return TheoremForm::uniform_restricted;
  throw ConfigError("unknown form '" + s +
                    "' (varying_lipschitz, varying_restricted, uniform_lipschitz, uniform_restricted)");
}

std::string to_string(TheoremForm f) {
  switch (f) {
    case TheoremForm::varying_lipschitz: return "varying_lipschitz";
    case TheoremForm::varying_restricted: return "varying_restricted";
    case TheoremForm::uniform_lipschitz: return "uniform_lipschitz";
    case TheoremForm::uniform_restricted: return "uniform_restricted";
  }
  return "";
}

CertReport check_theorem_conditions(const RfdeSystem& sys, const Functional& V, TheoremForm form,
                                    const SampleSpec& spec) {
  require_bounds(V, form);
  if (V.dim != sys.state_dim) throw ConfigError("check_theorem_conditions: dimension mismatch");
  if (std::abs(V.delay_span - sys.delay_span) > 1e-12)
    throw ConfigError("check_theorem_conditions: functional and system delay spans differ");
  if (spec.times.empty()) throw ConfigError("check_theorem_conditions: no evaluation times");
  const double step = step_for(sys, spec.grid_step);
  const double span = V.window_span();
  const double tau = V.tau;
  const bool unit_beta = form == TheoremForm::uniform_lipschitz || form == TheoremForm::uniform_restricted;
  const auto ds = disturbances(sys.box, spec);
  const auto plan = plan_for(form);

  CertReport rep;
  rep.title = V.name + " on " + sys.name + " (" + to_string(form) + ")";

  // Unrestricted samples.
  std::vector<Sample> free_states(spec.histories);
  for (std::size_t i = 0; i < spec.histories; ++i) {
    Rng rng(child_seed(spec.seed, i));
    free_states[i].t = spec.times[i % spec.times.size()];
    free_states[i].x = random_history(rng, span, step, sys.state_dim, spec.amplitude);
  }
  // Lipschitz pairs with t <= R and norms <= R.
  std::vector<Sample> pairs;
  for (std::size_t j = 0; j < spec.lipschitz_radii.size(); ++j) {
    const double R = spec.lipschitz_radii[j];
    for (std::size_t i = 0; i < spec.histories; ++i) {
      Rng rng(child_seed(spec.seed ^ 0x5A5Aull, j * 100003u + i));
      Sample s;
      s.R = R;
      s.t = rng.uniform(0.0, R);
      s.x = random_history(rng, span, step, sys.state_dim, R);
      s.y = random_history(rng, span, step, sys.state_dim, R);
      pairs.push_back(std::move(s));
    }
  }
  // S-states at the admissible times.
  std::vector<Sample> s_states;
  bool wants_S = std::any_of(plan.begin(), plan.end(), [](const KindPlan& p) { return p.on_S; });
  if (wants_S) {
    std::vector<double> times;
    for (double t : spec.times)
      if (t >= tau - 1e-12) times.push_back(t);
    if (times.empty()) times.push_back(tau);
    std::size_t discarded = 0, rejected = 0, filtered = 0;
    double worst_residual = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      SBatch b = spec.s_batch;
      b.grid_step = step;
      b.count = std::max<std::size_t>(1, spec.s_batch.count / times.size() +
                                             (j < spec.s_batch.count % times.size() ? 1 : 0));
      b.seed = child_seed(spec.s_batch.seed, j);
      const SStates got = generate_S_states(sys, times[j], tau, b);
      discarded += got.discarded;
      double eta = 0.0;
      if (spec.eta_level && form == TheoremForm::varying_restricted) {
        const double I = integral_beta4(V, times[j]);
        ComparisonProblem p{V.rho, V.mu ? V.mu : ScalarFn([](double) { return 0.0; }), *spec.eta_level};
        eta = I > 0.0 ? solve_eta(p, 0.0, I, std::min(1e-3, I)).w.back() : *spec.eta_level;
      }
      for (const auto& s : got.states) {
        if (s.residual > 1e-6 * (1.0 + s.x0.sup_norm())) {
          ++rejected;
          continue;
        }
        if (spec.eta_level && form == TheoremForm::varying_restricted &&
            V.a2(V.beta(times[j]) * s.window.sup_norm()) < eta) {
          ++filtered;
          continue;
        }
        worst_residual = std::max(worst_residual, s.residual);
        Sample e;
        e.t = times[j];
        e.x = s.window;
        e.origin = {{"t0", s.t0}, {"x0", s.x0.to_json()}, {"signal", s.signal}, {"residual", s.residual}};
        s_states.push_back(std::move(e));
      }
    }
    if (discarded > 0) rep.warnings.push_back(std::to_string(discarded) + " S-state trajectories escaped and were discarded");
    if (rejected > 0) rep.warnings.push_back(std::to_string(rejected) + " S-states failed the membership residual test and were discarded");
    rep.coverage["S_states"] = {{"times", times},
                                {"used", s_states.size()},
                                {"discarded", discarded},
                                {"residual_rejected", rejected},
                                {"eta_filtered", filtered},
                                {"worst_residual", worst_residual},
                                {"seed", spec.s_batch.seed}};
  }

  for (const KindPlan& p : plan) {
    const std::vector<Sample>& pool = p.lipschitz_samples ? pairs : (p.on_S ? s_states : free_states);
    const bool with_d = needs_disturbance(p.kind);
    const std::size_t nd = with_d ? ds.size() : 1;
    const std::size_t total = pool.size() * nd;
    std::vector<double> slack(total);
    parallel_for(total, [&](std::size_t n) {
      const Sample& s = pool[n / nd];
      const State& d = ds[with_d ? n % nd : 0];
      slack[n] = evaluate(p.kind, unit_beta, sys, V, s, d, spec.dini);
    });
    CheckResult c;
    c.name = kind_title(p.kind, unit_beta);
    c.tolerance = spec.tolerance;
    c.samples = total;
    std::size_t worst = 0;
    for (std::size_t n = 0; n < total; ++n) {
      if (!std::isfinite(slack[n])) slack[n] = std::numeric_limits<double>::infinity();
      if (n == 0 || slack[n] > c.worst_slack) {
        c.worst_slack = slack[n];
        worst = n;
      }
    }
    if (total == 0) c.worst_slack = 0.0;
    c.passed = total == 0 || c.worst_slack <= spec.tolerance;
    c.details = {{"kind", kind_id(p.kind)}, {"restricted_to_S", p.on_S}, {"disturbances", with_d ? nd : 0}};
    if (!c.passed) {
      const Sample& s = pool[worst / nd];
      nlohmann::json w = {{"kind", kind_id(p.kind)},
                          {"form", to_string(form)},
                          {"unit_beta", unit_beta},
                          {"t", s.t},
                          {"x", s.x.to_json()},
                          {"d", with_d ? ds[worst % nd] : State{}},
                          {"slack", c.worst_slack}};
      if (p.kind == Kind::lipschitz) {
        w["y"] = s.y.to_json();
        w["R"] = s.R;
      }
      if (!s.origin.is_null()) w["origin"] = s.origin;
      c.witness = w;
    }
    rep.checks.push_back(std::move(c));
  }

  rep.coverage["form"] = to_string(form);
  rep.coverage["histories"] = spec.histories;
  rep.coverage["times"] = spec.times;
  rep.coverage["disturbances"] = ds;
  rep.coverage["seed"] = spec.seed;
  rep.coverage["grid_step"] = step;
  rep.coverage["derivative"] = V.derivative ? "closed form" : "Dini estimate";
  return rep;
}

double replay_witness(const RfdeSystem& sys, const Functional& V, const nlohmann::json& witness,
                      const DiniOptions& dini) {
  const Kind kind = kind_from(witness.at("kind").get<std::string>());
  Sample s;
  s.t = witness.at("t").get<double>();
  s.x = HistorySegment::from_json(witness.at("x"));
  if (kind == Kind::lipschitz) {
    s.y = HistorySegment::from_json(witness.at("y"));
    s.R = witness.at("R").get<double>();
  }
  const State d = witness.value("d", State{});
  return evaluate(kind, witness.value("unit_beta", false), sys, V, s, d, dini);
}

CertReport periodic_reduction_check(const RfdeSystem& sys, const PeriodicBatch& batch) {
  if (!sys.period) throw ConfigError("periodic_reduction_check: the system declares no period");
  const double T = *sys.period;
  const double step = step_for(sys, batch.grid_step);
  if (!is_grid_multiple(T, step)) throw ConfigError("periodic_reduction_check: the period is not a grid multiple");
  for (double t0 : batch.start_times)
    if (!is_grid_multiple(t0, step) && t0 != 0.0)
      throw ConfigError("periodic_reduction_check: start time " + fmt(t0) + " is not a grid multiple");
  const double r = sys.delay_span;
  IntegratorOptions opts;
  opts.grid_step = step;

  const std::size_t total = batch.start_times.size() * batch.histories;
  std::vector<double> gap(total, 0.0), where(total, 0.0);
  parallel_for(total, [&](std::size_t n) {
    const double t0 = batch.start_times[n / batch.histories];
    Rng rng(child_seed(batch.seed, n));
    const HistorySegment x0 = random_history(rng, r, step, sys.state_dim, batch.amplitude);
    const DisturbanceSignal d = sample_signal(rng, sys.box, n, t0, batch.horizon, step, 3);
    const double kT = std::floor(t0 / T + 1e-9) * T;
    const Trajectory a = integrate(sys, t0, x0, d, t0 + batch.horizon, opts);
    const Trajectory b = integrate(sys, t0 - kT, x0, shift(d, kT), t0 - kT + batch.horizon, opts);
    const std::size_t nodes = std::min(a.node_count(), b.node_count());
    if (a.status() != b.status()) {
      gap[n] = std::numeric_limits<double>::infinity();
      return;
    }
    for (std::size_t k = 0; k < nodes; ++k) {
      const auto u = a.node(k), v = b.node(k);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = std::abs(u[i] - v[i]);
        if (e > gap[n]) {
          gap[n] = e;
          where[n] = a.time(k);
        }
      }
    }
  });

  CheckResult c;
  c.name = "periodic shift reproduces the trajectory";
  c.tolerance = batch.tolerance;
  c.samples = total;
  std::size_t worst = 0;
  c.worst_slack = total ? gap[0] : 0.0;
  for (std::size_t n = 1; n < total; ++n)
    if (gap[n] > c.worst_slack) {
      c.worst_slack = gap[n];
      worst = n;
    }
  c.passed = c.worst_slack <= batch.tolerance;
  if (!c.passed) {
    Rng rng(child_seed(batch.seed, worst));
    const double t0 = batch.start_times[worst / batch.histories];
    const HistorySegment x0 = random_history(rng, r, step, sys.state_dim, batch.amplitude);
    const DisturbanceSignal d = sample_signal(rng, sys.box, worst, t0, batch.horizon, step, 3);
    c.witness = {{"kind", "periodic"},   {"t0", t0},           {"x0", x0.to_json()},
                 {"signal", d.description()}, {"t", where[worst]}, {"horizon", batch.horizon},
                 {"grid_step", step},     {"slack", c.worst_slack}};
  }
  CertReport rep;
  rep.title = "periodic reduction on " + sys.name;
  rep.checks.push_back(std::move(c));
  rep.coverage["periodic"] = {{"period", T},
                              {"start_times", batch.start_times},
                              {"histories", batch.histories},
                              {"horizon", batch.horizon},
                              {"seed", batch.seed},
                              {"grid_step", step}};
  return rep;
}

CheckResult check_extinction(const RfdeSystem& sys, const ExtinctionSpec& spec) {
  if (spec.component >= sys.state_dim) throw ConfigError("check_extinction: component out of range");
  if (!(spec.horizon > spec.after)) throw ConfigError("check_extinction: horizon must exceed the extinction time");
  const double step = step_for(sys, spec.grid_step);
  for (double t0 : spec.start_times)
    if (t0 != 0.0 && !is_grid_multiple(t0, step))
      throw ConfigError("check_extinction: start time " + fmt(t0) + " is not a grid multiple");
  const double r = sys.delay_span;
  IntegratorOptions opts;
  opts.grid_step = step;

  const std::size_t per_start = spec.histories * spec.signals;
  const std::size_t total = spec.start_times.size() * per_start;
  std::vector<double> slack(total, 0.0), where(total, 0.0);
  auto build = [&](std::size_t n, HistorySegment& x0, std::optional<DisturbanceSignal>& d) {
    const double t0 = spec.start_times[n / per_start];
    const std::size_t h = (n % per_start) / spec.signals, s = n % spec.signals;
    Rng hr(child_seed(spec.seed, (n / per_start) * 1000003u + h));
    x0 = random_history(hr, r, step, sys.state_dim, spec.amplitude);
    Rng sr(child_seed(spec.seed ^ 0xE7ull, n));
    d.emplace(sample_signal(sr, sys.box, s, t0, spec.horizon, step, 3));
  };
  parallel_for(total, [&](std::size_t n) {
    const double t0 = spec.start_times[n / per_start];
    HistorySegment x0;
    std::optional<DisturbanceSignal> d;
    build(n, x0, d);
    const Trajectory traj = integrate(sys, t0, x0, *d, t0 + spec.horizon, opts);
    if (!traj.completed()) {
      slack[n] = std::numeric_limits<double>::infinity();
      where[n] = traj.t_last();
      return;
    }
    const double scale = 1.0 + x0.sup_norm();
    for (std::size_t k = traj.history_intervals(); k < traj.node_count(); ++k) {
      const double t = traj.time(k);
      if (t < t0 + spec.after + step - 1e-9 * step) continue;
      const double v = std::abs(traj.node(k)[spec.component]) / scale;
      if (v > slack[n]) {
        slack[n] = v;
        where[n] = t;
      }
    }
  });

  CheckResult c;
  c.name = "extinction of component " + std::to_string(spec.component + 1) + " after " + fmt(spec.after);
  c.tolerance = spec.tolerance;
  c.samples = total;
  std::size_t worst = 0;
  c.worst_slack = total ? slack[0] : 0.0;
  for (std::size_t n = 1; n < total; ++n)
    if (slack[n] > c.worst_slack) {
      c.worst_slack = slack[n];
      worst = n;
    }
  c.passed = c.worst_slack <= spec.tolerance;
  c.details = {{"start_times", spec.start_times},
               {"histories", spec.histories},
               {"signals", spec.signals},
               {"horizon", spec.horizon},
               {"seed", spec.seed},
               {"grid_step", step}};
  if (!c.passed) {
    HistorySegment x0;
    std::optional<DisturbanceSignal> d;
    build(worst, x0, d);
    c.witness = {{"kind", "extinction"},
                 {"t0", spec.start_times[worst / per_start]},
                 {"x0", x0.to_json()},
                 {"signal", d->description()},
                 {"t", where[worst]},
                 {"component", spec.component},
                 {"after", spec.after},
                 {"horizon", spec.horizon},
                 {"grid_step", step},
                 {"slack", c.worst_slack}};
  }
  return c;
}

double replay_trajectory_witness(const RfdeSystem& sys, const nlohmann::json& w) {
  const std::string kind = w.at("kind").get<std::string>();
  const double t0 = w.at("t0").get<double>();
  const HistorySegment x0 = HistorySegment::from_json(w.at("x0"));
  const DisturbanceSignal d = signal_from_json(w.at("signal"));
  const double horizon = w.at("horizon").get<double>();
  IntegratorOptions opts;
  opts.grid_step = w.at("grid_step").get<double>();
  if (kind == "periodic") {
    if (!sys.period) throw ConfigError("replay: the system declares no period");
    const double T = *sys.period;
    const double kT = std::floor(t0 / T + 1e-9) * T;
    const Trajectory a = integrate(sys, t0, x0, d, t0 + horizon, opts);
    const Trajectory b = integrate(sys, t0 - kT, x0, shift(d, kT), t0 - kT + horizon, opts);
    if (a.status() != b.status()) return std::numeric_limits<double>::infinity();
    double gap = 0.0;
    for (std::size_t k = 0; k < std::min(a.node_count(), b.node_count()); ++k) {
      const auto u = a.node(k), v = b.node(k);
      for (std::size_t i = 0; i < u.size(); ++i) gap = std::max(gap, std::abs(u[i] - v[i]));
    }
    return gap;
  }
  if (kind == "extinction") {
    const auto comp = w.at("component").get<std::size_t>();
    const double after = w.at("after").get<double>();
    const Trajectory traj = integrate(sys, t0, x0, d, t0 + horizon, opts);
    if (!traj.completed()) return std::numeric_limits<double>::infinity();
    const double scale = 1.0 + x0.sup_norm();
    double worst = 0.0;
    for (std::size_t k = traj.history_intervals(); k < traj.node_count(); ++k)
      if (traj.time(k) >= t0 + after + opts.grid_step - 1e-9 * opts.grid_step)
        worst = std::max(worst, std::abs(traj.node(k)[comp]) / scale);
    return worst;
  }
  throw ConfigError("replay: unsupported witness kind '" + kind + "'");
}

}  // namespace rfdelyap
