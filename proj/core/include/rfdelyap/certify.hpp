#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfdelyap/converse.hpp"
#include "rfdelyap/dini.hpp"
#include "rfdelyap/functionals.hpp"
#include "rfdelyap/integrator.hpp"
#include "rfdelyap/system.hpp"

namespace rfdelyap {

/// One sampled inequality or property check. A failed check carries a
/// witness that `replay_witness` can re-evaluate.
struct CheckResult {
  std::string name;
  bool passed = true;
  /// Largest normalized slack; <= tolerance means no violation was found.
  double worst_slack = -std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::size_t samples = 0;
  nlohmann::json witness;  // null when passed
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct CertReport {
  std::string title;
  std::vector<CheckResult> checks;
  nlohmann::json coverage = nlohmann::json::object();
  std::vector<std::string> warnings;

  bool passed() const;
  void append(const CertReport& other);
  nlohmann::json to_json() const;
};

/// A sampled element of S(t): the (r + tau)-window at time t of a trajectory
/// started at t - tau.
struct SState {
  HistorySegment window;
  double t0 = 0.0;
  HistorySegment x0;
  nlohmann::json signal;
  /// max |x(theta) - x(-tau) - int f| over the window's last tau.
  double residual = 0.0;
};

struct SBatch {
  std::size_t count = 200;
  /// Histories are scaled to a sup norm drawn uniformly from [1e-3 amplitude, amplitude].
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  double grid_step = 0.0;
  int max_switches = 3;
};

struct SStates {
  std::vector<SState> states;
  std::size_t discarded = 0;
  double worst_residual = 0.0;
};

/// Signals cycle through the box vertices, random bang-bang signals and random
/// piecewise-constant signals. Escaping trajectories are discarded.
SStates generate_S_states(const RfdeSystem& sys, double t, double tau, const SBatch& batch);

/// Integral-equation residual of a stored trajectory over [from, to].
double membership_residual(const RfdeSystem& sys, const Trajectory& traj, double from, double to);

struct EnvelopeSpec {
  std::vector<double> norms = {0.25, 0.5, 1.0, 2.0};
  std::vector<double> start_times = {0.0};
  std::size_t histories = 8;
  FamilySpec family;
  double horizon = 10.0;
  /// Spacing of the stored t columns (a grid multiple; 0 keeps every node).
  double output_step = 0.1;
  double grid_step = 0.0;
  std::uint64_t seed = 0;
  /// Relative decay level for the tau table.
  double epsilon = 1e-3;
};

/// m(s, t) = max over the batch of the window norm at t0 + t, ||x0|| <= s.
struct KLEnvelope {
  std::vector<double> s;
  std::vector<double> t;
  std::vector<std::vector<double>> m;
  bool bounded = true;
  std::size_t blow_ups = 0;
  /// First t after which row i stays <= epsilon * s_i; nullopt if never.
  std::vector<std::optional<double>> tau;
  double epsilon = 1e-3;
  nlohmann::json batch = nlohmann::json::object();
  nlohmann::json witness;  // first escaping sample

  /// max over t' <= T of m(s_i, t').
  double sup_until(std::size_t row, double T) const;
  /// First column after which the row stays <= level.
  std::optional<double> decay_time(std::size_t row, double level) const;
  nlohmann::json to_json() const;
  void write_csv(std::ostream& os) const;
};

KLEnvelope empirical_envelope(const RfdeSystem& sys, const EnvelopeSpec& spec);

enum class TheoremForm { varying_lipschitz, varying_restricted, uniform_lipschitz, uniform_restricted };
TheoremForm theorem_form_from_string(const std::string& s);
std::string to_string(TheoremForm f);

struct SampleSpec {
  /// Arbitrary states for the unrestricted inequalities.
  std::size_t histories = 200;
  double amplitude = 1.0;
  /// Evaluation times; the S-restricted checks use those >= tau.
  std::vector<double> times = {0.0};
  SBatch s_batch;
  /// Disturbances: box vertices, plus this many random points of the box.
  bool vertices = true;
  std::size_t random_points = 0;
  double tolerance = 1e-3;
  DiniOptions dini;
  std::uint64_t seed = 0;
  double grid_step = 0.0;
  /// Radii for the Lipschitz check of the (b) forms.
  std::vector<double> lipschitz_radii = {1.0, 2.0};
  /// Threshold level c of the restricted set in the time-varying form; unset
  /// means the restricted set is the whole space.
  std::optional<double> eta_level;
};

CertReport check_theorem_conditions(const RfdeSystem& sys, const Functional& V, TheoremForm form,
                                    const SampleSpec& spec);

/// Recomputes the slack of a theorem-condition witness.
double replay_witness(const RfdeSystem& sys, const Functional& V, const nlohmann::json& witness,
                      const DiniOptions& dini = {});

struct PeriodicBatch {
  std::size_t histories = 8;
  /// Start times t0; each must be a grid multiple.
  std::vector<double> start_times = {0.0, 3.0};
  double horizon = 5.0;
  double amplitude = 1.0;
  double grid_step = 0.0;
  std::uint64_t seed = 0;
  double tolerance = 1e-12;
};

/// Compares phi(t, t0, x0; d) with phi(t - kT, t0 - kT, x0; d(. + kT)), k = floor(t0 / T).
CertReport periodic_reduction_check(const RfdeSystem& sys, const PeriodicBatch& batch);

struct ExtinctionSpec {
  std::size_t histories = 20;
  std::size_t signals = 8;
  std::vector<double> start_times = {0.0};
  std::size_t component = 0;
  /// |x_component(t)| is checked for t >= t0 + after + grid_step.
  double after = 4.0;
  double horizon = 8.0;
  double amplitude = 1.0;
  double tolerance = 1e-6;
  double grid_step = 0.0;
  std::uint64_t seed = 0;
};

CheckResult check_extinction(const RfdeSystem& sys, const ExtinctionSpec& spec);

/// Recomputes the slack of a periodic-shift or extinction witness.
double replay_trajectory_witness(const RfdeSystem& sys, const nlohmann::json& witness);

}  // namespace rfdelyap
