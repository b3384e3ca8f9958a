#include "rfdelyap/registry.hpp"

#include <algorithm>
#include <cmath>

namespace rfdelyap {

namespace {

double num(const nlohmann::json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p.at(key).is_number()) throw ConfigError(std::string("parameter '") + key + "' must be a number");
  return p.at(key).get<double>();
}

using Nonlinearity = double (*)(double);

Nonlinearity nonlinearity(const std::string& fn) {
  if (fn == "id") return [](double v) { return v; };
  if (fn == "square") return [](double v) { return v * v; };
  if (fn == "cube") return [](double v) { return v * v * v; };
  if (fn == "sin") return [](double v) { return std::sin(v); };
  if (fn == "tanh") return [](double v) { return std::tanh(v); };
  if (fn == "sat") return [](double v) { return std::clamp(v, -1.0, 1.0); };
  if (fn == "abs") return [](double v) { return std::abs(v); };
  throw ConfigError("expression: unknown nonlinearity '" + fn + "'");
}

struct Term {
  double coef = 1.0;
  std::size_t state = 0;
  double lag = 0.0;
  Nonlinearity fn = nullptr;
  long disturbance = -1;
};

}  // namespace

std::vector<RegistryEntry> system_entries() {
  return {
      {"example212", "x' = -d x(t - r), d in [a, b]", {{"a", 1.0}, {"b", 1.1}, {"r", 0.4}}},
      {"example213", "planar system with finite-time extinction of x, delay 1", nlohmann::json::object()},
      {"sampled_integrator", "x' = -k x(t_i), t_i = floor(t / r) r", {{"r", 1.0}, {"gain", 1.0}}},
      {"linear_delay", "x' = -a x - b x(t - r)", {{"a", 1.0}, {"b", 0.0}, {"r", 0.0}}},
      {"expression", "user system from affine-in-delay terms with named nonlinearities",
       {{"dim", 1}, {"delay", 0.0}, {"equations", nlohmann::json::array()}}},
  };
}

std::vector<RegistryEntry> functional_entries() {
  return {
      {"V212", "quadratic functional for example212 (window 2r)", {{"c", nullptr}}},
      {"V213", "quartic time-varying functional for example213 (window 6)", nlohmann::json::object()},
      {"half_square", "|x(0)|^2 / 2", {{"span", nullptr}}},
      {"converse", "sampled converse construction sum_q w_q U_q", {{"q_max", 8}, {"a1", "identity"}}},
  };
}

RfdeSystem make_expression_system(const nlohmann::json& p) {
  const auto dim = p.value("dim", std::size_t{1});
  const double r = num(p, "delay", 0.0);
  if (dim == 0) throw ConfigError("expression: dim must be positive");
  if (r < 0.0) throw ConfigError("expression: delay must be nonnegative");
  DisturbanceBox box = p.contains("box") ? DisturbanceBox::from_json(p.at("box"))
                                         : DisturbanceBox::interval(0.0, 0.0);
  if (!p.contains("equations") || !p.at("equations").is_array() || p.at("equations").size() != dim)
    throw ConfigError("expression: need one equation (term list) per state component");

  std::vector<std::vector<Term>> eqs;
  for (const auto& eq : p.at("equations")) {
    std::vector<Term> terms;
    for (const auto& tj : eq) {
      Term t;
      t.coef = num(tj, "coef", 1.0);
      t.state = tj.value("state", std::size_t{0});
      t.lag = num(tj, "lag", 0.0);
      t.fn = nonlinearity(tj.value("fn", std::string("id")));
      t.disturbance = tj.value("disturbance", -1L);
      if (t.state >= dim) throw ConfigError("expression: state index out of range");
      if (t.lag < 0.0 || t.lag > r + 1e-12) throw ConfigError("expression: lag must lie in [0, delay]");
      if (t.disturbance >= static_cast<long>(box.dim())) throw ConfigError("expression: disturbance index out of range");
      terms.push_back(t);
    }
    eqs.push_back(std::move(terms));
  }

  RfdeSystem s;
  s.name = p.value("name", std::string("expression"));
  s.delay_span = r;
  s.state_dim = dim;
  s.box = box;
  s.rhs = [eqs](Instant, const HistoryView& x, std::span<const double> d) {
    State out(eqs.size(), 0.0);
    for (std::size_t i = 0; i < eqs.size(); ++i)
      for (const Term& t : eqs[i]) {
        double v = t.coef * t.fn(x.at(-t.lag)[t.state]);
        if (t.disturbance >= 0) v *= d[static_cast<std::size_t>(t.disturbance)];
        out[i] += v;
      }
    return out;
  };
  if (p.contains("lipschitz")) {
    const double L = num(p, "lipschitz", 0.0);
    s.lipschitz = [L](double, double) { return L; };
  }
  if (p.contains("growth")) {
    const double G = num(p, "growth", 0.0);
    s.growth = GrowthEnvelope{[](double v) { return v; }, [G](double) { return G; }};
  }
  s.autonomous = true;
  s.params = p;
  return s;
}

RfdeSystem make_system(const std::string& name, const nlohmann::json& params) {
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  if (name == "example212") return builtin_example212(num(p, "a", 1.0), num(p, "b", 1.1), num(p, "r", 0.4));
  if (name == "example213") return builtin_example213();
  if (name == "sampled_integrator") {
    const double r = num(p, "r", 1.0), k = num(p, "gain", 1.0);
    RfdeSystem s = build_sampled_data(
        [](double, std::span<const double>, std::span<const double> u) { return State(u.begin(), u.end()); },
        [k](double, std::span<const double>, std::span<const double> past) { return State{-k * past[0]}; },
        r, 1, true);
    s.name = "sampled_integrator";
    s.params = {{"r", r}, {"gain", k}};
    return s;
  }
  if (name == "linear_delay") return builtin_linear_delay(num(p, "a", 1.0), num(p, "b", 0.0), num(p, "r", 0.0));
  if (name == "expression") return make_expression_system(p);
  throw ConfigError("unknown system '" + name + "'");
}

ConverseConfig converse_config_from_json(const nlohmann::json& params, const RfdeSystem& sys,
                                         EnvelopeFit* fit_out) {
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  ConverseConfig cfg;
  cfg.q_max = p.value("q_max", 8);
  if (cfg.q_max < 1) throw ConfigError("converse: q_max must be at least 1");
  const auto a1 = p.value("a1", std::string("identity"));
  if (a1 == "huber")
    use_huber_a1(cfg);
  else if (a1 != "identity")
    throw ConfigError("converse: a1 must be 'identity' or 'huber'");
  if (p.contains("family")) cfg.family = FamilySpec::from_json(p.at("family"));
  cfg.grid_step = num(p, "grid_step", 0.0);
  cfg.plain_weights = p.value("plain_weights", false);

  if (p.contains("a2")) {
    const auto& a2 = p.at("a2");
    const double c1 = num(a2, "c1", 1.0), c2 = num(a2, "c2", 0.0), k = num(a2, "kappa", 1.0);
    if (c1 < 0.0 || c2 < 0.0 || c1 + c2 <= 0.0) throw ConfigError("converse: a2 coefficients must be nonnegative, not both zero");
    cfg.a2_tilde = [c1, c2, k](double s) { return k * (c1 * s + c2 * s * s); };
    cfg.beta = [](double) { return 1.0; };
    return cfg;
  }
  EnvelopeFitSpec spec;
  if (p.contains("fit")) {
    const auto& f = p.at("fit");
    spec.norms = f.value("norms", spec.norms);
    spec.start_times = f.value("start_times", spec.start_times);
    spec.histories = f.value("histories", spec.histories);
    spec.max_horizon = num(f, "max_horizon", spec.max_horizon);
    spec.kappa = num(f, "kappa", spec.kappa);
    spec.seed = f.value("seed", spec.seed);
  }
  const bool uniform = p.value("uniform", sys.autonomous || sys.period.has_value());
  const EnvelopeFit fit = fit_envelope(sys, cfg, spec, uniform);
  cfg.a2_tilde = fit.a2();
  cfg.beta = fit.beta();
  if (fit_out) *fit_out = fit;
  return cfg;
}

Functional make_functional(const std::string& name, const nlohmann::json& params, const RfdeSystem& sys) {
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  const nlohmann::json& sp = sys.params;
  if (name == "V212") {
    const double a = num(p, "a", num(sp, "a", 1.0));
    const double b = num(p, "b", num(sp, "b", 1.1));
    const double r = num(p, "r", num(sp, "r", 0.4));
    double c;
    if (p.contains("c") && !p.at("c").is_null()) {
      c = num(p, "c", 0.0);
    } else {
      const auto found = find_c(a, b, r);
      if (!found) throw ConfigError("V212: no feasible c for these parameters");
      c = *found;
    }
    return builtin_V212(a, b, r, c, p.value("unchecked", false));
  }
  if (name == "V213") return builtin_V213();
  if (name == "half_square") {
    const double span = p.contains("span") && !p.at("span").is_null() ? num(p, "span", 0.0) : sys.delay_span;
    return half_square(span, sys.state_dim);
  }
  if (name == "converse") {
    EnvelopeFit fit;
    const ConverseConfig cfg = converse_config_from_json(p, sys, &fit);
    std::optional<std::vector<double>> w;
    if (p.contains("weights")) w = p.at("weights").get<std::vector<double>>();
    ConverseFunctional cf = assemble_V(sys, cfg, w);
    if (!p.contains("a2")) cf.V.params["envelope_fit"] = fit.to_json();
    return cf.V;
  }
  throw ConfigError("unknown functional '" + name + "'");
}

}  // namespace rfdelyap
