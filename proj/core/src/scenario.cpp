#include "rfdelyap/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfdelyap/comparison.hpp"
#include "rfdelyap/parallel.hpp"
#include "rfdelyap/random.hpp"
#include "rfdelyap/registry.hpp"
#include "rfdelyap/report.hpp"

namespace rfdelyap {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Ctx {
  const Scenario& sc;
  RfdeSystem sys;
  json fspec;
  std::optional<Functional> V;
  double step = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool write = true;

  const Functional& functional() {
    if (!V) {
      if (fspec.is_null()) throw ConfigError("scenario: this check needs a functional");
      V = make_functional(fspec.at("name").get<std::string>(), fspec.value("params", json::object()), sys);
    }
    return *V;
  }
  void emit(const std::string& file, const std::string& text) const {
    if (write) write_file(fs::path(out_dir) / file, text);
  }
};

Ctx make_ctx(const Scenario& sc, const RunOptions& opts) {
  const json& raw = sc.raw;
  Ctx c{sc, make_system(raw.at("system").at("name").get<std::string>(),
                        raw.at("system").value("params", json::object())),
        raw.value("functional", json()), std::nullopt, 0.0, 0, std::string(), true};
  c.seed = opts.seed ? *opts.seed : sc.seed;
  const json integ = raw.value("integrator", json::object());
  c.step = opts.grid_step ? *opts.grid_step : integ.value("grid_step", 0.0);
  if (c.step == 0.0) c.step = default_grid_step(c.sys);
  if (!(c.step > 0.0)) throw ConfigError("scenario: grid_step must be positive");
  if (c.sys.delay_span > 0.0 && !is_grid_multiple(c.sys.delay_span, c.step))
    throw ConfigError("scenario: grid_step " + std::to_string(c.step) + " does not divide the delay span " +
                      std::to_string(c.sys.delay_span));
  c.out_dir = opts.out ? *opts.out : raw.value("output", std::string("out/") + sc.name);
  c.write = opts.write;
  return c;
}

std::uint64_t check_seed(const Ctx& c, const json& cfg, std::size_t index) {
  return cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : child_seed(c.seed, index);
}

DiniOptions dini_from(const json& cfg) {
  DiniOptions d;
  d.levels = cfg.value("dini_levels", d.levels);
  d.rule = dini_rule_from_string(cfg.value("dini_rule", std::string("automatic")));
  return d;
}

json dini_json(const DiniOptions& d) {
  return {{"dini_levels", d.levels},
          {"dini_rule", d.rule == DiniRule::tail_max ? "tail_max"
                        : d.rule == DiniRule::richardson ? "richardson"
                                                         : "automatic"}};
}

CheckResult reduce(std::string name, double tol, const std::vector<double>& slack,
                   std::size_t& worst) {
  CheckResult c;
  c.name = std::move(name);
  c.tolerance = tol;
  c.samples = slack.size();
  c.worst_slack = slack.empty() ? 0.0 : -kInf;
  worst = 0;
  for (std::size_t i = 0; i < slack.size(); ++i) {
    const double s = std::isnan(slack[i]) ? kInf : slack[i];
    if (s > c.worst_slack) {
      c.worst_slack = s;
      worst = i;
    }
  }
  c.passed = c.worst_slack <= tol;
  return c;
}

// Random start (history and signal) of trajectory k of a batch.
struct Start {
  HistorySegment x0;
  std::optional<DisturbanceSignal> d;
};

Start batch_start(const Ctx& c, std::uint64_t seed, std::size_t k, double t0, double horizon,
                  double amplitude, bool bang_bang, int max_switches) {
  Rng rng(child_seed(seed, k));
  Start s;
  s.x0 = random_history(rng, c.sys.delay_span, c.step, c.sys.state_dim, amplitude);
  bool flat = true;
  for (std::size_t i = 0; i < c.sys.box.dim(); ++i)
    if (c.sys.box.upper[i] > c.sys.box.lower[i]) flat = false;
  if (bang_bang && !flat)
    s.d.emplace(random_bang_bang(rng, c.sys.box, t0, horizon, c.step, max_switches));
  else
    s.d.emplace(sample_signal(rng, c.sys.box, k, t0, horizon, c.step, max_switches));
  return s;
}

Trajectory run_start(const Ctx& c, double t0, const HistorySegment& x0, const DisturbanceSignal& d,
                     double horizon) {
  IntegratorOptions o;
  o.grid_step = c.step;
  return integrate(c.sys, t0, x0, d, t0 + horizon, o);
}

double dplus_slack(const Functional& V, const Trajectory& traj, double t, const DiniOptions& dini) {
  const double est = dplus_along(V, traj, t, dini).value;
  const double v = eval(V, t, traj.window(t, V.window_span()));
  return (est + V.rho(v)) / (1.0 + std::abs(v));
}

DominationReport comparison_from(const Functional& V, const Trajectory& traj, double t_start, double tol) {
  std::vector<double> times, values;
  for (std::size_t k = traj.index_of(t_start); k < traj.node_count(); ++k) {
    const double t = traj.time(k);
    times.push_back(t);
    values.push_back(eval(V, t, traj.window(t, V.window_span())));
  }
  const ScalarFn rho = V.rho;
  const ScalarField f = [rho](double, double w) { return -rho(std::max(w, 0.0)); };
  // -rho(w) <= 0 on [0, inf): the bounded form of the comparison lemma applies.
  return check_dominated(times, values, f, values.front(), DominationMode::bounded, 0.0, kInf, tol);
}

// ---- check runners ----

CertReport run_theorem(Ctx& c, const json& cfg, std::uint64_t seed) {
  SampleSpec s;
  s.histories = cfg.value("histories", s.histories);
  s.amplitude = cfg.value("amplitude", s.amplitude);
  s.times = cfg.value("times", s.times);
  s.s_batch.count = cfg.value("s_count", s.s_batch.count);
  s.s_batch.amplitude = cfg.value("s_amplitude", s.amplitude);
  s.s_batch.max_switches = cfg.value("max_switches", s.s_batch.max_switches);
  s.s_batch.seed = child_seed(seed, 1);
  s.vertices = cfg.value("vertices", s.vertices);
  s.random_points = cfg.value("random_points", s.random_points);
  s.tolerance = cfg.value("tolerance", s.tolerance);
  s.dini = dini_from(cfg);
  s.seed = seed;
  s.grid_step = c.step;
  s.lipschitz_radii = cfg.value("lipschitz_radii", s.lipschitz_radii);
  if (cfg.contains("eta_level")) s.eta_level = cfg.at("eta_level").get<double>();
  const TheoremForm form = theorem_form_from_string(cfg.at("form").get<std::string>());
  CertReport rep = check_theorem_conditions(c.sys, c.functional(), form, s);
  for (auto& k : rep.checks)
    if (!k.witness.is_null()) k.witness.update(dini_json(s.dini));
  return rep;
}

CertReport run_dplus(Ctx& c, const json& cfg, std::uint64_t seed) {
  const Functional& V = c.functional();
  if (!V.rho) throw ConfigError("dplus: the functional has no rho");
  const std::size_t n = cfg.value("trajectories", std::size_t{50});
  const double t0 = cfg.value("t0", 0.0);
  const double horizon = cfg.value("horizon", 5.0);
  const double amplitude = cfg.value("amplitude", 1.0);
  const double offset = cfg.value("offset", V.tau);
  const double tol = cfg.value("tolerance", 1e-3);
  const std::size_t stride = cfg.value("stride", std::size_t{1});
  const int max_switches = cfg.value("max_switches", 3);
  const DiniOptions dini = dini_from(cfg);
  if (V.window_span() - offset > c.sys.delay_span + 1e-12)
    throw ConfigError("dplus: offset too small for the functional's window");

  std::vector<double> worst(n, -kInf), where(n, t0);
  parallel_for(n, [&](std::size_t k) {
    const Start s = batch_start(c, seed, k, t0, horizon, amplitude, true, max_switches);
    const Trajectory traj = run_start(c, t0, s.x0, *s.d, horizon);
    if (!traj.completed()) {
      worst[k] = kInf;
      return;
    }
    for (std::size_t i = traj.index_of(t0 + offset); i + 1 < traj.node_count(); i += std::max<std::size_t>(stride, 1)) {
      const double t = traj.time(i);
      const double v = dplus_slack(V, traj, t, dini);
      if (v > worst[k]) {
        worst[k] = v;
        where[k] = t;
      }
    }
  });
  std::size_t w = 0;
  CheckResult r = reduce("D+V <= -rho(V) along trajectories", tol, worst, w);
  r.details = {{"trajectories", n}, {"horizon", horizon}, {"offset", offset}, {"stride", stride}};
  if (!r.passed) {
    const Start s = batch_start(c, seed, w, t0, horizon, amplitude, true, max_switches);
    r.witness = {{"kind", "dplus"},          {"t0", t0},        {"x0", s.x0.to_json()},
                 {"signal", s.d->description()}, {"t", where[w]}, {"horizon", horizon},
                 {"grid_step", c.step},      {"slack", r.worst_slack}};
    r.witness.update(dini_json(dini));
  }
  CertReport rep;
  rep.checks.push_back(std::move(r));
  return rep;
}

CertReport run_comparison(Ctx& c, const json& cfg, std::uint64_t seed) {
  const Functional& V = c.functional();
  if (!V.rho) throw ConfigError("comparison: the functional has no rho");
  const std::size_t n = cfg.value("trajectories", std::size_t{10});
  const double t0 = cfg.value("t0", 0.0);
  const double horizon = cfg.value("horizon", 5.0);
  const double amplitude = cfg.value("amplitude", 1.0);
  const double offset = cfg.value("offset", V.tau);
  const double every = cfg.value("restart_every", 1.0);
  const double tol = cfg.value("tolerance", 1e-6);
  const int max_switches = cfg.value("max_switches", 3);

  std::vector<double> worst(n, -kInf), restart(n, t0 + offset);
  parallel_for(n, [&](std::size_t k) {
    const Start s = batch_start(c, seed, k, t0, horizon, amplitude, true, max_switches);
    const Trajectory traj = run_start(c, t0, s.x0, *s.d, horizon);
    if (!traj.completed()) {
      worst[k] = kInf;
      return;
    }
    const long jumps = std::max(1L, grid_count(every, c.step));
    for (std::size_t i = traj.index_of(t0 + offset); i + 1 < traj.node_count(); i += static_cast<std::size_t>(jumps)) {
      const DominationReport d = comparison_from(V, traj, traj.time(i), tol);
      const double g = d.holds ? std::min(d.worst_gap, 0.0) : d.worst_gap;
      if (g > worst[k]) {
        worst[k] = g;
        restart[k] = traj.time(i);
      }
    }
  });
  // Slack is the largest gap (v - w) / (1 + |w|); tolerance as in check_dominated.
  std::size_t w = 0;
  CheckResult r = reduce("V along trajectories dominated by w' = -rho(w)", tol, worst, w);
  r.details = {{"trajectories", n}, {"horizon", horizon}, {"restart_every", every}};
  if (!r.passed) {
    const Start s = batch_start(c, seed, w, t0, horizon, amplitude, true, max_switches);
    r.witness = {{"kind", "comparison"},     {"t0", t0},             {"x0", s.x0.to_json()},
                 {"signal", s.d->description()}, {"restart", restart[w]}, {"horizon", horizon},
                 {"grid_step", c.step},      {"tolerance", tol},      {"slack", r.worst_slack}};
  }
  CertReport rep;
  rep.checks.push_back(std::move(r));
  return rep;
}

CertReport run_envelope(Ctx& c, const json& cfg, std::uint64_t seed, std::size_t index) {
  EnvelopeSpec e;
  e.norms = cfg.value("norms", e.norms);
  e.start_times = cfg.value("start_times", e.start_times);
  e.histories = cfg.value("histories", e.histories);
  if (cfg.contains("family")) e.family = FamilySpec::from_json(cfg.at("family"));
  e.family.seed = child_seed(seed, 7);
  e.horizon = cfg.value("horizon", e.horizon);
  e.output_step = cfg.value("output_step", e.output_step);
  e.epsilon = cfg.value("epsilon", e.epsilon);
  e.grid_step = c.step;
  e.seed = seed;
  const KLEnvelope env = empirical_envelope(c.sys, e);

  std::ostringstream csv;
  env.write_csv(csv);
  c.emit("envelope_" + std::to_string(index) + ".csv", csv.str());

  CertReport rep;
  CheckResult bounded;
  bounded.name = "envelope bounded (no escape)";
  bounded.samples = env.blow_ups;
  bounded.worst_slack = static_cast<double>(env.blow_ups);
  bounded.passed = env.bounded;
  if (!env.bounded) bounded.witness = env.witness;
  rep.checks.push_back(bounded);

  CheckResult decay;
  decay.name = "envelope decays below epsilon * s within the horizon";
  decay.tolerance = e.epsilon;
  decay.samples = env.s.size();
  decay.worst_slack = 0.0;
  for (std::size_t i = 0; i < env.s.size(); ++i)
    decay.worst_slack = std::max(decay.worst_slack, env.m[i].back() / env.s[i]);
  decay.passed = std::all_of(env.tau.begin(), env.tau.end(), [](const auto& t) { return t.has_value(); });
  decay.details = env.to_json();
  rep.checks.push_back(decay);
  return rep;
}

CertReport run_extinction(Ctx& c, const json& cfg, std::uint64_t seed) {
  ExtinctionSpec e;
  e.histories = cfg.value("histories", e.histories);
  e.signals = cfg.value("signals", e.signals);
  e.start_times = cfg.value("start_times", e.start_times);
  e.component = cfg.value("component", e.component);
  e.after = cfg.value("after", e.after);
  e.horizon = cfg.value("horizon", e.horizon);
  e.amplitude = cfg.value("amplitude", e.amplitude);
  e.tolerance = cfg.value("tolerance", e.tolerance);
  e.grid_step = c.step;
  e.seed = seed;
  CertReport rep;
  rep.checks.push_back(check_extinction(c.sys, e));
  return rep;
}

CertReport run_periodic(Ctx& c, const json& cfg, std::uint64_t seed) {
  PeriodicBatch b;
  b.histories = cfg.value("histories", b.histories);
  b.start_times = cfg.value("start_times", b.start_times);
  b.horizon = cfg.value("horizon", b.horizon);
  b.amplitude = cfg.value("amplitude", b.amplitude);
  b.tolerance = cfg.value("tolerance", b.tolerance);
  b.grid_step = c.step;
  b.seed = seed;
  return periodic_reduction_check(c.sys, b);
}

ConverseConfig converse_cfg(Ctx& c, const json& cfg, EnvelopeFit* fit) {
  json params = cfg.contains("converse") ? cfg.at("converse")
                : (!c.fspec.is_null() && c.fspec.value("name", std::string()) == "converse")
                    ? c.fspec.value("params", json::object())
                    : json::object();
  if (!params.contains("grid_step")) params["grid_step"] = c.step;
  return converse_config_from_json(params, c.sys, fit);
}

CertReport run_converse(Ctx& c, const json& cfg, std::uint64_t seed) {
  EnvelopeFit fit;
  const ConverseConfig cc = converse_cfg(c, cfg, &fit);
  const std::size_t n = cfg.value("states", std::size_t{8});
  const double amplitude = cfg.value("amplitude", 1.0);
  const std::vector<double> times = cfg.value("times", std::vector<double>{0.0});
  const double h = cfg.value("h", c.step);
  const double tol = cfg.value("tolerance", 1e-9);
  std::vector<int> qs = cfg.value("q", std::vector<int>{});
  if (qs.empty())
    for (int q = 1; q <= cc.q_max; ++q) qs.push_back(q);
  for (int q : qs)
    if (q < 1 || q > cc.q_max) throw ConfigError("converse: q out of range");

  CertReport rep;
  rep.coverage["converse"] = {{"config", cc.to_json()}, {"states", n}, {"times", times}, {"h", h}};
  if (!cfg.contains("converse") || !cfg.at("converse").contains("a2")) rep.coverage["converse"]["envelope_fit"] = fit.to_json();

  std::vector<HistorySegment> xs(n);
  std::vector<double> ts(n);
  std::vector<std::optional<DisturbanceSignal>> heads(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(child_seed(seed, i));
    ts[i] = times[i % times.size()];
    xs[i] = random_history(rng, c.sys.delay_span, c.step, c.sys.state_dim, amplitude);
    heads[i].emplace(sample_signal(rng, c.sys.box, i + 1, ts[i], h, c.step, 1));
  }

  try {
    // Lower bound per level and the advisory upper bound against the fit.
    std::vector<std::vector<double>> U(n);
    parallel_for(n, [&](std::size_t i) { U[i] = estimate_Uq_levels(c.sys, cc, ts[i], xs[i]); });
    std::vector<double> low, up;
    std::vector<std::pair<std::size_t, int>> who;
    for (std::size_t i = 0; i < n; ++i)
      for (int q : qs) {
        const double lb = std::max(0.0, cc.a1_tilde(xs[i].sup_norm()) - 1.0 / q);
        low.push_back(lb - U[i][static_cast<std::size_t>(q - 1)]);
        up.push_back(U[i][static_cast<std::size_t>(q - 1)] - cc.a2_tilde(cc.beta(ts[i]) * xs[i].sup_norm()));
        who.emplace_back(i, q);
      }
    std::size_t w = 0;
    CheckResult lower = reduce("U_q >= max{0, a1~(||x||) - 1/q}", 0.0, low, w);
    if (!lower.passed)
      lower.witness = {{"kind", "converse_lower"}, {"t", ts[who[w].first]}, {"x", xs[who[w].first].to_json()},
                       {"q", who[w].second}, {"slack", lower.worst_slack}};
    rep.checks.push_back(lower);
    const double worst_up = up.empty() ? 0.0 : *std::max_element(up.begin(), up.end());
    rep.coverage["converse"]["upper_fit_excess"] = worst_up;
    if (worst_up > 0.0)
      rep.warnings.push_back("sampled U_q exceeds a2~(beta ||x||): the fitted envelope is too small");

    // Decrease along one grid step, concatenation-consistent families.
    std::vector<std::pair<std::size_t, int>> jobs;
    for (std::size_t i = 0; i < n; ++i)
      for (int q : qs) jobs.emplace_back(i, q);
    std::vector<double> dec(jobs.size());
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const auto [i, q] = jobs[j];
      dec[j] = check_decrease(c.sys, cc, q, ts[i], xs[i], *heads[i], h, tol).slack;
    }
    CheckResult decrease = reduce("U_q(t + h, phi) <= e^{-h} U_q(t, x)", tol, dec, w);
    if (!decrease.passed) {
      const auto [i, q] = jobs[w];
      decrease.witness = {{"kind", "converse_decrease"}, {"t", ts[i]}, {"x", xs[i].to_json()},
                          {"q", q}, {"h", h}, {"head", heads[i]->description()},
                          {"slack", decrease.worst_slack}};
    }
    rep.checks.push_back(decrease);

    // Assembled V: zero at the equilibrium and above its companion lower bound.
    const bool plain = !c.sys.lipschitz || !c.sys.growth;
    ConverseConfig ac = cc;
    if (plain) ac.plain_weights = true;
    const ConverseFunctional cf = assemble_V(c.sys, ac);
    rep.coverage["converse"]["weights"] = cf.weights;
    std::vector<double> zero, comp;
    for (double t : times) {
      const HistorySegment z = HistorySegment::zero(c.sys.delay_span, c.step, c.sys.state_dim);
      zero.push_back(std::abs(eval(cf.V, t, z)));
    }
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t q = 0; q < cf.weights.size(); ++q) v += cf.weights[q] * U[i][q];
      comp.push_back((cf.lower_bound(xs[i].sup_norm()) - v) / (1.0 + v));
    }
    rep.checks.push_back(reduce("assembled V vanishes at the equilibrium", 0.0, zero, w));
    rep.checks.push_back(reduce("assembled V above its lower bound", 1e-12, comp, w));
  } catch (const ConstructionInvalid& e) {
    CheckResult bad;
    bad.name = "converse construction valid";
    bad.passed = false;
    bad.worst_slack = kInf;
    bad.details = {{"error", e.what()}};
    rep.checks.push_back(bad);
  }
  return rep;
}

CertReport run_hypotheses(Ctx& c, const json& cfg, std::uint64_t seed) {
  const std::size_t n = cfg.value("samples", std::size_t{1000});
  const double t_max = cfg.value("t_max", 10.0);
  const double amplitude = cfg.value("amplitude", 1.0);
  CertReport rep;
  CheckResult eq;
  eq.name = "equilibrium f(t, 0, d) = 0";
  eq.samples = n;
  eq.worst_slack = probe_equilibrium(c.sys, n, seed, t_max);
  eq.passed = eq.worst_slack == 0.0;
  rep.checks.push_back(eq);
  if (c.sys.lipschitz) {
    const auto verts = c.sys.box.vertices();
    std::vector<double> slack(n);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(child_seed(seed, i + 1));
      const double t = rng.uniform(0.0, t_max);
      const HistorySegment x = random_history(rng, c.sys.delay_span, c.step, c.sys.state_dim, amplitude);
      const HistorySegment y = random_history(rng, c.sys.delay_span, c.step, c.sys.state_dim, amplitude);
      const LipschitzProbe p = probe_one_sided_lipschitz(c.sys, t, x, y, verts[i % verts.size()]);
      slack[i] = (p.lhs - p.bound) / (1.0 + std::abs(p.lhs) + std::abs(p.bound));
    }
    std::size_t w = 0;
    rep.checks.push_back(reduce("one-sided Lipschitz bound", 1e-12, slack, w));
  }
  if (c.sys.period) {
    CheckResult per;
    per.name = "periodicity f(t + T, x, d) = f(t, x, d)";
    per.samples = n;
    per.tolerance = 1e-12;
    per.worst_slack = probe_periodicity(c.sys, n, seed, t_max);
    per.passed = per.worst_slack <= per.tolerance;
    rep.checks.push_back(per);
  }
  return rep;
}

void run_trajectories(Ctx& c, const json& cfg, std::uint64_t seed, std::size_t index) {
  const std::size_t n = cfg.value("count", std::size_t{3});
  const double t0 = cfg.value("t0", 0.0);
  const double horizon = cfg.value("horizon", 5.0);
  const double amplitude = cfg.value("amplitude", 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    const Start s = batch_start(c, seed, k, t0, horizon, amplitude, false, 3);
    const Trajectory traj = run_start(c, t0, s.x0, *s.d, horizon);
    std::ostringstream os;
    traj.write_csv(os);
    c.emit("trajectory_" + std::to_string(index) + "_" + std::to_string(k) + ".csv", os.str());
  }
}

std::string where_in(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Scenario sc;
  sc.path = origin;
  try {
    sc.raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ":" + where_in(text, e.byte) + ": " + e.what());
  }
  auto fail = [&](const std::string& what) { throw ConfigError(origin + ": " + what); };
  if (!sc.raw.is_object()) fail("top level must be an object");
  if (!sc.raw.contains("seed") || !sc.raw.at("seed").is_number_unsigned()) fail("'seed' (nonnegative integer) is required");
  if (!sc.raw.contains("system") || !sc.raw.at("system").contains("name")) fail("'system.name' is required");
  if (!sc.raw.contains("checks") || !sc.raw.at("checks").is_array()) fail("'checks' must be an array");
  for (std::size_t i = 0; i < sc.raw.at("checks").size(); ++i)
    if (!sc.raw.at("checks")[i].contains("type")) fail("checks[" + std::to_string(i) + "]: 'type' is required");
  if (sc.raw.contains("functional") && !sc.raw.at("functional").contains("name")) fail("'functional.name' is required");
  sc.seed = sc.raw.at("seed").get<std::uint64_t>();
  sc.name = sc.raw.value("name", fs::path(origin).stem().string());
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str(), path);
}

RunResult run_scenario(const Scenario& sc, const RunOptions& opts) {
  RunResult res;
  try {
    Ctx c = make_ctx(sc, opts);
    res.out_dir = c.out_dir;
    CertReport& rep = res.report;
    rep.title = sc.name;
    const json& checks = sc.raw.at("checks");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const json& cfg = checks[i];
      const std::string type = cfg.at("type").get<std::string>();
      const std::uint64_t seed = check_seed(c, cfg, i);
      CertReport part;
      try {
        if (type == "theorem") part = run_theorem(c, cfg, seed);
        else if (type == "dplus") part = run_dplus(c, cfg, seed);
        else if (type == "comparison") part = run_comparison(c, cfg, seed);
        else if (type == "envelope") part = run_envelope(c, cfg, seed, i);
        else if (type == "extinction") part = run_extinction(c, cfg, seed);
        else if (type == "periodic") part = run_periodic(c, cfg, seed);
        else if (type == "converse") part = run_converse(c, cfg, seed);
        else if (type == "hypotheses") part = run_hypotheses(c, cfg, seed);
        else if (type == "trajectories") run_trajectories(c, cfg, seed, i);
        else throw ConfigError("unknown check type '" + type + "'");
      } catch (const ConfigError& e) {
        throw ConfigError(sc.path + ": checks[" + std::to_string(i) + "] (" + type + "): " + e.what());
      }
      for (auto& k : part.checks) {
        k.details["type"] = type;
        k.details["check"] = i;
        k.details["seed"] = seed;
      }
      for (auto it = part.coverage.begin(); it != part.coverage.end(); ++it)
        rep.coverage["checks[" + std::to_string(i) + "]"][it.key()] = it.value();
      part.coverage = json::object();
      rep.append(part);
    }

    res.report_json = rep.to_json();
    res.report_json["scenario"] = sc.name;
    res.report_json["seed"] = c.seed;
    res.report_json["grid_step"] = c.step;
    res.report_json["system"] = {{"name", c.sys.name}, {"params", c.sys.params}};
    res.report_json["functional"] = c.fspec;

    c.emit("report.json", dump_json(res.report_json));
    for (std::size_t i = 0; i < rep.checks.size(); ++i) {
      const CheckResult& k = rep.checks[i];
      if (k.passed || k.witness.is_null()) continue;
      json w = k.witness;
      w["check_index"] = k.details.value("check", std::size_t{0});
      w["check_type"] = k.details.value("type", std::string());
      w["tolerance"] = k.tolerance;
      w["scenario"] = sc.name;
      w["seed"] = k.details.value("seed", std::uint64_t{0});
      c.emit("witness_" + std::to_string(i) + ".json", dump_json(w));
    }
    c.emit("summary.txt", summary_text(rep, sc.path, c.out_dir));
    res.exit_code = rep.passed() ? 0 : 1;
  } catch (const json::exception& e) {
    throw ConfigError(sc.path + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(sc.path + ": " + e.what());
  }
  return res;
}

ReplayResult replay_scenario_witness(const Scenario& sc, const json& w, const RunOptions& opts) {
  ReplayResult r;
  try {
    Ctx c = make_ctx(sc, opts);
    if (w.contains("grid_step")) c.step = w.at("grid_step").get<double>();
    const std::string type = w.at("check_type").get<std::string>();
    const std::string kind = w.at("kind").get<std::string>();
    const json& cfg = sc.raw.at("checks").at(w.at("check_index").get<std::size_t>());
    r.recorded = w.at("slack").get<double>();
    r.tolerance = w.at("tolerance").get<double>();
    if (type == "theorem") {
      r.slack = replay_witness(c.sys, c.functional(), w, dini_from(w));
    } else if (kind == "periodic" || kind == "extinction") {
      r.slack = replay_trajectory_witness(c.sys, w);
    } else if (kind == "dplus" || kind == "comparison") {
      const Functional& V = c.functional();
      const double t0 = w.at("t0").get<double>();
      const Trajectory traj = run_start(c, t0, HistorySegment::from_json(w.at("x0")),
                                        signal_from_json(w.at("signal")), w.at("horizon").get<double>());
      if (!traj.completed())
        r.slack = kInf;
      else if (kind == "dplus")
        r.slack = dplus_slack(V, traj, w.at("t").get<double>(), dini_from(w));
      else {
        const DominationReport d = comparison_from(V, traj, w.at("restart").get<double>(), w.at("tolerance").get<double>());
        r.slack = d.holds ? std::min(d.worst_gap, 0.0) : d.worst_gap;
      }
    } else if (kind == "converse_lower" || kind == "converse_decrease") {
      const ConverseConfig cc = converse_cfg(c, cfg, nullptr);
      const double t = w.at("t").get<double>();
      const HistorySegment x = HistorySegment::from_json(w.at("x"));
      const int q = w.at("q").get<int>();
      if (kind == "converse_lower") {
        const double U = estimate_Uq_levels(c.sys, cc, t, x)[static_cast<std::size_t>(q - 1)];
        r.slack = std::max(0.0, cc.a1_tilde(x.sup_norm()) - 1.0 / q) - U;
      } else {
        r.slack = check_decrease(c.sys, cc, q, t, x, signal_from_json(w.at("head")), w.at("h").get<double>(),
                                 r.tolerance)
                      .slack;
      }
    } else {
      throw ConfigError("replay: unsupported witness kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("replay: malformed witness: ") + e.what());
  }
  r.reproduced = r.slack == r.recorded || (std::isinf(r.slack) && std::isinf(r.recorded));
  r.failing = !(r.slack <= r.tolerance);
  return r;
}

}  // namespace rfdelyap
