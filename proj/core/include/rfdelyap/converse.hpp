#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfdelyap/functionals.hpp"
#include "rfdelyap/integrator.hpp"
#include "rfdelyap/signals.hpp"
#include "rfdelyap/system.hpp"

namespace rfdelyap {

/// A sampled trajectory escaped; the construction does not apply.
class ConstructionInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Disturbance sample family, generated relative to a start time.
struct FamilySpec {
  bool vertices = true;
  int bang_bang_count = 8;
  int bang_bang_max_switches = 3;
  int random_count = 16;
  int random_max_switches = 4;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static FamilySpec from_json(const nlohmann::json& j);
};

/// Constant vertex signals, bang-bang signals and random piecewise-constant
/// signals with switch times at t0 + k * grid_step inside (t0, t0 + horizon).
std::vector<DisturbanceSignal> make_family(const FamilySpec& spec, const DisturbanceBox& box,
                                           double t0, double horizon, double grid_step);

struct ConverseConfig {
  /// K-infinity with unit Lipschitz constant, and its inverse.
  ScalarFn a1_tilde = [](double s) { return s; };
  ScalarFn a1_tilde_inv = [](double s) { return s; };
  ScalarFn a2_tilde;
  /// beta(t); identically 1 for uniform systems.
  ScalarFn beta = [](double) { return 1.0; };
  int q_max = 8;
  FamilySpec family;
  /// 0 selects default_grid_step(sys).
  double grid_step = 0.0;
  /// Use 2^-q weights when the system lacks L, zeta or gamma.
  bool plain_weights = false;

  nlohmann::json to_json() const;
};

/// a1(s) = s^2 / 2 for s <= 1 and s - 1/2 beyond: unit Lipschitz, K-infinity.
void use_huber_a1(ConverseConfig& cfg);

/// max{0, log(q a2(beta(R) R)) / 2}.
double horizon_T(double R, int q, const ConverseConfig& cfg);

struct UqSample {
  double value = 0.0;
  double tau = 0.0;
  std::size_t signal = 0;
};

/// Sampled sup of max{0, a1(||phi(tau)||) - 1/q} e^{tau - t} over tau on the
/// grid of [t, t + horizon] and the given signals. The sample always includes
/// tau = t.
UqSample sample_Uq(const RfdeSystem& sys, const ConverseConfig& cfg, int q, double t,
                   const HistorySegment& x, const std::vector<DisturbanceSignal>& family,
                   double horizon);

/// sample_Uq over make_family(cfg.family, ...) with horizon T(max{t, ||x||}, q).
double estimate_Uq(const RfdeSystem& sys, const ConverseConfig& cfg, int q, double t,
                   const HistorySegment& x);

/// U_q(t, x) for q = 1 .. q_max from one shared family.
std::vector<double> estimate_Uq_levels(const RfdeSystem& sys, const ConverseConfig& cfg, double t,
                                       const HistorySegment& x);

/// L~(t, s), G1(t, s), G3(R, q) and the default series weight of level q.
double converse_L(const RfdeSystem& sys, const ConverseConfig& cfg, double t, double s);
double converse_G1(const RfdeSystem& sys, const ConverseConfig& cfg, double t, double s);
double converse_G3(const RfdeSystem& sys, const ConverseConfig& cfg, double R, int q);
double default_weight(const RfdeSystem& sys, const ConverseConfig& cfg, int q);
/// 1 + sum_{q <= floor(R)} 2^-q G3(R, q) / (1 + G3(q, q)).
double converse_M(const RfdeSystem& sys, const ConverseConfig& cfg, double R);

struct ConverseFunctional {
  Functional V;
  std::vector<double> weights;
  /// sum_q w_q max{0, a1~(s) - 1/q}.
  ScalarFn lower_bound;
  nlohmann::json to_json() const;
};

/// V(t, x) = sum_{q=1}^{q_max} w_q U_q(t, x).
ConverseFunctional assemble_V(const RfdeSystem& sys, const ConverseConfig& cfg,
                              std::optional<std::vector<double>> weights = std::nullopt);

struct DecreaseReport {
  double lhs = 0.0;    // U_q(t + h, phi(t + h))
  double rhs = 0.0;    // U_q(t, x)
  double bound = 0.0;  // e^{-h} U_q(t, x)
  double slack = 0.0;  // (lhs - bound) / (1 + rhs)
  bool holds = true;
  nlohmann::json to_json() const;
};

/// Checks U_q(t + h, phi(t + h, t, x; d_head)) <= e^{-h} U_q(t, x) with the
/// t-side family extended by every continuation of d_head on [t, t + h).
DecreaseReport check_decrease(const RfdeSystem& sys, const ConverseConfig& cfg, int q, double t,
                              const HistorySegment& x, const DisturbanceSignal& d_head, double h,
                              double tol = 1e-9);

/// Data of the decay-envelope fit used for a2~ and beta.
struct EnvelopeFitSpec {
  std::vector<double> norms = {0.25, 0.5, 1.0, 2.0};
  std::vector<double> start_times = {0.0};
  int histories = 4;
  double max_horizon = 40.0;
  double kappa = 1.1;
  std::uint64_t seed = 0;
};

struct EnvelopeFit {
  double c1 = 0.0, c2 = 0.0;
  double kappa = 1.1;
  std::vector<double> beta_times;
  std::vector<double> beta_values;
  double horizon = 0.0;
  ScalarFn a2() const;
  ScalarFn beta() const;
  nlohmann::json to_json() const;
};

/// Fits a2~(s) = kappa (c1 s + c2 s^2) so that a1~(m(s, t)) <= e^{-2t} a2~(beta s)
/// on the simulated data, with beta a non-decreasing step function of the
/// start time (identically 1 when `uniform`).
EnvelopeFit fit_envelope(const RfdeSystem& sys, const ConverseConfig& cfg,
                         const EnvelopeFitSpec& spec, bool uniform);

}  // namespace rfdelyap
