#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfdelyap/converse.hpp"
#include "rfdelyap/functionals.hpp"
#include "rfdelyap/system.hpp"

namespace rfdelyap {

struct RegistryEntry {
  std::string name;
  std::string summary;
  nlohmann::json defaults;
};

std::vector<RegistryEntry> system_entries();
std::vector<RegistryEntry> functional_entries();

/// Built-in system by name; unknown names and bad parameters raise ConfigError.
RfdeSystem make_system(const std::string& name, const nlohmann::json& params);

/// User system from the expression form:
///   {"dim": n, "delay": r, "box": {"lower": [..], "upper": [..]},
///    "equations": [[term, ...], ...],
///    "lipschitz": L?, "growth": G?}
/// with term = {"coef": c, "state": i, "lag": theta in [0, r],
///              "fn": "id" | "square" | "cube" | "sin" | "tanh" | "sat" | "abs",
///              "disturbance": j?}, contributing coef * d_j * fn(x_i(t - lag)).
/// L is a constant one-sided Lipschitz modulus and G declares |f| <= G ||x||.
RfdeSystem make_expression_system(const nlohmann::json& params);

/// Built-in functional by name. "converse" takes a ConverseConfig description
/// and fits a2~ when none is given.
Functional make_functional(const std::string& name, const nlohmann::json& params,
                           const RfdeSystem& sys);

/// Converse configuration from JSON: q_max, a1 ("identity" | "huber"),
/// a2 {c1, c2, kappa} or absent (fitted), family, grid_step, plain_weights,
/// fit {norms, start_times, histories, max_horizon, kappa, seed}.
ConverseConfig converse_config_from_json(const nlohmann::json& params, const RfdeSystem& sys,
                                         EnvelopeFit* fit_out = nullptr);

}  // namespace rfdelyap
