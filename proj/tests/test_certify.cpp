#include <doctest.h>

#include <cmath>

#include "rfdelyap/certify.hpp"
#include "rfdelyap/registry.hpp"

using namespace rfdelyap;

namespace {

SampleSpec small_spec(std::uint64_t seed, double step) {
  SampleSpec s;
  s.histories = 20;
  s.times = {0.4, 1.5};
  s.s_batch.count = 20;
  s.s_batch.seed = seed + 1;
  s.seed = seed;
  s.grid_step = step;
  return s;
}

}  // namespace

TEST_SUITE("certify") {

TEST_CASE("S-states of the planar system have an extinct first component") {
  const RfdeSystem s = builtin_example213();
  SBatch b;
  b.count = 20;
  b.grid_step = 0.01;
  b.seed = 9;
  const SStates st = generate_S_states(s, 5.0, 5.0, b);
  REQUIRE(st.states.size() == 20);
  CHECK(st.worst_residual < 1e-6);
  for (const SState& x : st.states) {
    CHECK(x.window.span() == doctest::Approx(6.0));
    const double tol = 1e-6 * (1.0 + x.x0.sup_norm());
    for (std::size_t k = x.window.intervals() - 100; k < x.window.node_count(); ++k)
      CHECK(std::abs(x.window.node(k)[0]) <= tol);
  }
}

TEST_CASE("membership residual vanishes on the zero trajectory") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  const Trajectory tr = integrate(s, 0.0, HistorySegment::zero(0.4, 0.02, 1), make_constant(s.box, {1.0}), 1.0,
                                  IntegratorOptions{0.02});
  CHECK(membership_residual(s, tr, 0.0, 1.0) == 0.0);
}

TEST_CASE("envelope of x' = -x is s e^{-t}") {
  const RfdeSystem s = builtin_linear_delay(1.0, 0.0, 0.0);
  EnvelopeSpec e;
  e.norms = {0.5, 2.0};
  e.histories = 2;
  e.horizon = 3.0;
  e.output_step = 0.5;
  e.grid_step = 0.01;
  const KLEnvelope env = empirical_envelope(s, e);
  CHECK(env.bounded);
  for (std::size_t i = 0; i < env.s.size(); ++i)
    for (std::size_t k = 0; k < env.t.size(); ++k)
      CHECK(env.m[i][k] == doctest::Approx(env.s[i] * std::exp(-env.t[k])).epsilon(1e-9));
  CHECK(env.sup_until(1, 3.0) == doctest::Approx(2.0));
}

TEST_CASE("envelope is non-decreasing in s (property)") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  EnvelopeSpec e;
  e.norms = {2.0, 0.25, 1.0};
  e.histories = 2;
  e.horizon = 4.0;
  e.grid_step = 0.04;
  e.family.random_count = 2;
  e.family.bang_bang_count = 2;
  const KLEnvelope env = empirical_envelope(s, e);
  CHECK(env.s == std::vector<double>{0.25, 1.0, 2.0});
  for (std::size_t i = 1; i < env.s.size(); ++i)
    for (std::size_t k = 0; k < env.t.size(); ++k) CHECK(env.m[i][k] >= env.m[i - 1][k]);
  std::ostringstream csv;
  env.write_csv(csv);
  CHECK(csv.str().rfind("s,0,", 0) == 0);
}

TEST_CASE("quadratic functional passes its conditions and an inflated rate fails") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  const Functional good = make_functional("V212", {}, s);
  const CertReport ok = check_theorem_conditions(s, good, TheoremForm::uniform_restricted, small_spec(3, 0.02));
  CHECK(ok.passed());
  CHECK(ok.to_json().at("schema_version") == 1);

  const Functional bad = builtin_V212(1.0, 1.1, 0.4, 1.5, true);
  const CertReport rep = check_theorem_conditions(s, bad, TheoremForm::uniform_restricted, small_spec(3, 0.02));
  CHECK_FALSE(rep.passed());
  bool decrease_failed = false;
  for (const auto& c : rep.checks) {
    if (c.passed) continue;
    REQUIRE_FALSE(c.witness.is_null());
    CHECK(replay_witness(s, bad, c.witness) == c.worst_slack);
    if (c.witness.at("kind") == "V0_le_minus_rho") decrease_failed = true;
  }
  CHECK(decrease_failed);
}

TEST_CASE("missing bounds are a configuration error") {
  const RfdeSystem s = builtin_linear_delay(1.0, 0.0, 0.0);
  CHECK_THROWS_AS(check_theorem_conditions(s, half_square(0.0, 1), TheoremForm::varying_restricted, small_spec(1, 0.01)),
                  ConfigError);
  CHECK(theorem_form_from_string("uniform_lipschitz") == TheoremForm::uniform_lipschitz);
  CHECK(to_string(TheoremForm::varying_restricted) == "varying_restricted");
  CHECK_THROWS(theorem_form_from_string("th3"));
}

TEST_CASE("periodic reduction of the sampled integrator is exact") {
  const RfdeSystem s = make_system("sampled_integrator", {{"r", 1.0}});
  PeriodicBatch b;
  b.grid_step = 0.05;
  b.start_times = {0.0, 2.0, 5.0};
  const CertReport rep = periodic_reduction_check(s, b);
  CHECK(rep.passed());
  b.start_times = {0.53};  // off the integration grid
  CHECK_THROWS_AS(periodic_reduction_check(s, b), ConfigError);
}

TEST_CASE("extinction and its replay") {
  ExtinctionSpec e;
  e.histories = 4;
  e.signals = 2;
  e.grid_step = 0.01;
  const CheckResult ok = check_extinction(builtin_example213(), e);
  CHECK(ok.passed);
  // the scalar delay system does not go extinct
  e.after = 1.0;
  e.horizon = 2.0;
  const CheckResult bad = check_extinction(builtin_example212(1.0, 1.1, 0.4), e);
  CHECK_FALSE(bad.passed);
  CHECK(replay_trajectory_witness(builtin_example212(1.0, 1.1, 0.4), bad.witness) == bad.worst_slack);
}

}
