#include <doctest.h>

#include <cmath>

#include "rfdelyap/registry.hpp"
#include "rfdelyap/system.hpp"

using namespace rfdelyap;

TEST_SUITE("system") {

TEST_CASE("scalar delay system evaluates -d x(-r)") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  CHECK(s.delay_span == doctest::Approx(0.4));
  const HistorySegment x = HistorySegment::sample(0.4, 0.02, 1, [](double th) { return State{1.0 + th}; });
  const State d{1.05};
  CHECK(eval_rhs(s, 0.0, x, d)[0] == doctest::Approx(-1.05 * 0.6));
  CHECK(s.box.lower[0] == 1.0);
  CHECK(s.box.upper[0] == 1.1);
}

TEST_CASE("gain of the planar system") {
  CHECK(example213_gain(0.5) == doctest::Approx(2.0));
  CHECK(example213_gain(1.5) == 0.0);
  CHECK(example213_gain(2.25) == doctest::Approx(1.0));
  CHECK(example213_gain(3.7) == 0.0);
  CHECK(example213_gain(0.0) == doctest::Approx(0.0).epsilon(1e-30));
  for (double t = 0.0; t < 10.0; t += 0.01) {
    CHECK(example213_gain(t) >= 0.0);
    CHECK(example213_gain(t) <= 2.0);
  }
}

TEST_CASE("planar system right-hand side") {
  const RfdeSystem s = builtin_example213();
  const HistorySegment x = HistorySegment::sample(1.0, 0.01, 2, [](double th) { return State{2.0 + th, 3.0}; });
  const double t = 0.25;
  const State f = eval_rhs(s, t, x, State{-0.5});
  CHECK(f[0] == doctest::Approx(-example213_gain(t) * 1.0));
  CHECK(f[1] == doctest::Approx(-3.0 - 0.5 * std::exp(t) * 4.0));
}

TEST_CASE("sample index uses floor with the left limit at multiples") {
  CHECK(sample_index(2.5, 1.0, false) == 2);
  CHECK(sample_index(3.0, 1.0, false) == 3);
  CHECK(sample_index(3.0, 1.0, true) == 2);
  CHECK(sample_index(0.0, 0.5, false) == 0);
}

TEST_CASE("sampled integrator holds the last sample") {
  const RfdeSystem s = make_system("sampled_integrator", {{"r", 1.0}, {"gain", 1.0}});
  REQUIRE(s.period);
  CHECK(*s.period == 1.0);
  // x(theta) = theta + 5 on [-1, 0]; at t = 2.4 the last sample was at 2 = t - 0.4
  const HistorySegment x = HistorySegment::sample(1.0, 0.1, 1, [](double th) { return State{th + 5.0}; });
  CHECK(eval_rhs(s, 2.4, x, State{0.0})[0] == doctest::Approx(-(5.0 - 0.4)));
  CHECK(eval_rhs(s, Instant{3.0, false}, x, State{0.0})[0] == doctest::Approx(-5.0));
  CHECK(eval_rhs(s, Instant{3.0, true}, x, State{0.0})[0] == doctest::Approx(-4.0));
  CHECK(probe_periodicity(s, 200, 4) == 0.0);
}

TEST_CASE("zero is an equilibrium of every built-in system") {
  for (const auto& e : system_entries()) {
    if (e.name == "expression") continue;
    const RfdeSystem s = make_system(e.name, e.defaults.is_null() ? nlohmann::json::object() : e.defaults);
    CHECK_MESSAGE(probe_equilibrium(s, 300, 2) == 0.0, e.name);
  }
}

TEST_CASE("one-sided Lipschitz bound holds on random pairs (property)") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const HistorySegment x = random_history(rng, 0.4, 0.02, 1, 3.0);
    const HistorySegment y = random_history(rng, 0.4, 0.02, 1, 3.0);
    CHECK(probe_one_sided_lipschitz(s, 0.0, x, y, State{rng.uniform(1.0, 1.1)}).holds());
  }
}

TEST_CASE("linear growth envelope bounds |f|") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  const auto g = probe_growth(s, 5.0, {2.0, 1.0, 0.1}, 200, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] <= 1.1 * 2.0 + 1e-12);
  CHECK(g[2] <= 1.1 * 0.1 + 1e-12);
  CHECK(g[2] < g[0]);
}

TEST_CASE("expression systems") {
  const nlohmann::json p = {
      {"dim", 2},
      {"delay", 0.5},
      {"box", {{"lower", {-1.0}}, {"upper", {1.0}}}},
      {"equations",
       {{{{"coef", -1.0}, {"state", 0}, {"lag", 0.5}, {"fn", "id"}}},
        {{{"coef", 2.0}, {"state", 0}, {"lag", 0.0}, {"fn", "square"}, {"disturbance", 0}},
         {{"coef", -1.0}, {"state", 1}, {"lag", 0.0}, {"fn", "tanh"}}}}},
      {"lipschitz", 3.0}};
  const RfdeSystem s = make_system("expression", p);
  const HistorySegment x = HistorySegment::sample(0.5, 0.05, 2, [](double th) { return State{1.0 + th, 0.5}; });
  const State f = eval_rhs(s, 0.0, x, State{0.25});
  CHECK(f[0] == doctest::Approx(-0.5));
  CHECK(f[1] == doctest::Approx(2.0 * 0.25 * 1.0 - std::tanh(0.5)));
  CHECK(s.lipschitz);
  CHECK(s.autonomous);
  CHECK_THROWS_AS(make_system("expression", {{"dim", 1}, {"delay", 0.0}, {"equations", {{{{"state", 3}}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(make_system("nope", nlohmann::json::object()), ConfigError);
}

TEST_CASE("non-finite right-hand side raises") {
  RfdeSystem s = builtin_linear_delay(1.0, 0.0, 0.0);
  s.rhs = [](Instant, const HistoryView&, std::span<const double>) { return State{NAN}; };
  CHECK_THROWS_AS(eval_rhs(s, 0.0, HistorySegment(1.0, 1, {1.0}), State{0.0}), ModelError);
}

TEST_CASE("default grid step") {
  CHECK(default_grid_step(builtin_example212(1.0, 1.1, 0.4)) == doctest::Approx(0.004));
  CHECK(default_grid_step(builtin_linear_delay(1.0, 0.0, 0.0)) == doctest::Approx(0.01));
}

}
