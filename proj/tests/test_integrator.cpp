#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rfdelyap/integrator.hpp"
#include "rfdelyap/registry.hpp"

using namespace rfdelyap;

namespace {

double max_error_unit_delay(double step, double horizon) {
  const RfdeSystem s = builtin_linear_delay(0.0, 1.0, 1.0);
  const State one{1.0};
  const HistorySegment x0 = HistorySegment::constant(1.0, step, one);
  IntegratorOptions o;
  o.grid_step = step;
  const Trajectory tr = integrate(s, 0.0, x0, make_constant(s.box, {0.0}), horizon, o);
  double err = 0.0;
  for (std::size_t k = 0; k < tr.node_count(); ++k)
    err = std::max(err, std::abs(tr.node(k)[0] - oracle::unit_delay_decay(tr.time(k))));
  return err;
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("method-of-steps oracle is right") {
  CHECK(oracle::unit_delay_decay(0.5) == doctest::Approx(0.5));
  CHECK(oracle::unit_delay_decay(2.5) == doctest::Approx(1.0 - 2.5 + 1.125 - 0.125 / 6.0));
  CHECK(oracle::unit_delay_decay(1.5) == doctest::Approx(1.0 - 1.5 + 0.125));
  CHECK(oracle::unit_delay_decay(2.0) == doctest::Approx(1.0 - 2.0 + 0.5));
}

TEST_CASE("x' = -x matches exp(-t)") {
  const RfdeSystem s = builtin_linear_delay(1.0, 0.0, 0.0);
  const Trajectory tr = integrate(s, 0.0, HistorySegment(0.01, 1, {2.0}), make_constant(s.box, {0.0}), 5.0,
                                  IntegratorOptions{0.01});
  REQUIRE(tr.completed());
  for (std::size_t k = 0; k < tr.node_count(); k += 37)
    CHECK(tr.node(k)[0] == doctest::Approx(2.0 * std::exp(-tr.time(k))).epsilon(1e-9));
  CHECK(tr.at(2.345)[0] == doctest::Approx(2.0 * std::exp(-2.345)).epsilon(1e-8));
}

TEST_CASE("fourth-order convergence on the unit delay equation") {
  double prev = max_error_unit_delay(0.1, 8.0);
  CHECK(prev < 1e-4);
  for (double h : {0.05, 0.025, 0.0125}) {
    const double e = max_error_unit_delay(h, 8.0);
    CHECK(prev / e >= 8.0);
    prev = e;
  }
}

TEST_CASE("histories, windows and node indexing") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  Rng rng(4);
  const HistorySegment x0 = random_history(rng, 0.4, 0.02, 1, 1.0);
  const Trajectory tr = integrate(s, 1.0, x0, make_bang_bang(s.box, {1.2, 1.6}), 3.0, IntegratorOptions{0.02});
  CHECK(tr.t_first() == doctest::Approx(0.6));
  CHECK(tr.t_last() == doctest::Approx(3.0));
  const HistorySegment w0 = tr.window(1.0, 0.4);
  for (std::size_t k = 0; k < w0.node_count(); ++k) CHECK(w0.node(k)[0] == x0.node(k)[0]);
  CHECK(tr.index_of(1.0) == 20);
  CHECK_THROWS(tr.index_of(1.011));
  CHECK_THROWS(tr.window(1.2, 0.8));
  CHECK(tr.window(1.2, 0.8, true).span() == doctest::Approx(0.8));
  CHECK(tr.window_norm(2.0, 0.4) == doctest::Approx(tr.window(2.0, 0.4).sup_norm()));
}

TEST_CASE("escape is reported as blow-up") {
  const nlohmann::json p = {{"dim", 1}, {"delay", 0.0},
                            {"equations", {{{{"coef", 1.0}, {"state", 0}, {"lag", 0.0}, {"fn", "square"}}}}}};
  const RfdeSystem s = make_system("expression", p);
  const Trajectory tr = integrate(s, 0.0, HistorySegment(0.01, 1, {2.0}), make_constant(s.box, {0.0}), 2.0,
                                  IntegratorOptions{0.001, 1e6});
  CHECK(tr.status() == TrajectoryStatus::blow_up);
  CHECK(tr.t_last() == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("off-grid switch times are rejected") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  const HistorySegment x0 = HistorySegment::zero(0.4, 0.02, 1);
  CHECK_THROWS_AS(integrate(s, 0.0, x0, make_bang_bang(s.box, {0.013}), 1.0, IntegratorOptions{0.02}), ConfigError);
  CHECK_THROWS_AS(integrate(s, 0.0, HistorySegment::zero(0.4, 0.03, 1), make_constant(s.box, {1.0}), 1.0,
                            IntegratorOptions{0.03}),
                  ConfigError);
}

TEST_CASE("zero initial data stays at zero") {
  const RfdeSystem s = builtin_example213();
  const Trajectory tr = integrate(s, 0.0, HistorySegment::zero(1.0, 0.01, 2), make_constant(s.box, {1.0}), 3.0,
                                  IntegratorOptions{0.01});
  CHECK(tr.running_sup(3.0) == 0.0);
}

TEST_CASE("Gronwall bound dominates the gap (property)") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    const HistorySegment x = random_history(rng, 0.4, 0.02, 1, 1.0);
    const HistorySegment y = random_history(rng, 0.4, 0.02, 1, 1.0);
    const auto g = continuity_gap(s, 0.0, x, y, random_bang_bang(rng, s.box, 0.0, 5.0, 0.02, 3), 5.0,
                                  IntegratorOptions{0.02});
    for (std::size_t k = 0; k < g.times.size(); ++k) CHECK(g.measured[k] <= g.bound[k] * (1.0 + 1e-3));
  }
}

}
