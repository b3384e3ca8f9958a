#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rfdelyap/dini.hpp"
#include "rfdelyap/functionals.hpp"
#include "rfdelyap/random.hpp"

using namespace rfdelyap;

TEST_SUITE("dini") {

TEST_CASE("Richardson removes the linear error term") {
  std::vector<double> h{0.08, 0.04, 0.02, 0.01}, q;
  for (double x : h) q.push_back(2.0 + 3.0 * x);
  const DiniEstimate e = aggregate_quotients(h, q, DiniRule::automatic);
  CHECK(e.extrapolated);
  CHECK(e.value == doctest::Approx(2.0).epsilon(1e-12));
  const DiniEstimate t = aggregate_quotients(h, q, DiniRule::tail_max);
  CHECK(t.value == doctest::Approx(2.0 + 3.0 * 0.04));
}

TEST_CASE("non-converging quotients fall back to the tail maximum") {
  std::vector<double> h{0.08, 0.04, 0.02, 0.01}, q{1.0, -1.0, 1.0, -1.0};
  const DiniEstimate e = aggregate_quotients(h, q, DiniRule::automatic);
  CHECK_FALSE(e.extrapolated);
  CHECK(e.value == 1.0);
  CHECK_THROWS(dini_rule_from_string("bogus"));
}

TEST_CASE("estimate matches the quadratic functional's derivative on linear histories") {
  const double a = 1.0, b = 1.1, r = 0.4, c = *find_c(a, b, r);
  const Functional V = builtin_V212(a, b, r, c);
  Rng rng(31);
  for (int i = 0; i < 40; ++i) {
    const double A = rng.uniform(-2.0, 2.0), B = rng.uniform(-2.0, 2.0), d = rng.uniform(a, b);
    const HistorySegment x = HistorySegment::sample(
        2 * r, 0.02, 1, [&](double th) { return State{A + B * th}; }, [&](double) { return State{B}; });
    const double L = 2.0 * r;
    const double int_sq = A * A * L - A * B * L * L + B * B * L * L * L / 3.0;
    const double expect = oracle::v212_derivative(a, b, r, c, d, A, A - B * r, int_sq);
    const State v{-d * (A - B * r)};
    const double est = estimate_V0(V, 0.0, x, v).value;
    CHECK(std::abs(est - expect) <= 1e-3 * std::abs(expect) + 1e-6);
    CHECK(V.derivative(0.0, x, v) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("estimate matches the planar functional's derivative") {
  const Functional V = builtin_V213();
  Rng rng(32);
  for (int i = 0; i < 40; ++i) {
    const double A = rng.uniform(-1.0, 1.0), B = rng.uniform(-0.5, 0.5), Y = rng.uniform(-1.0, 1.0);
    const double t = rng.uniform(0.0, 2.0), d = rng.uniform(-1.0, 1.0);
    const HistorySegment x = HistorySegment::sample(
        6.0, 0.01, 2, [&](double th) { return State{A + B * th, Y}; }, [&](double) { return State{B, 0.0}; });
    const double x1 = A - B, ga = example213_gain(t);
    const State v{-ga * x1, -Y + d * std::exp(t) * A * A};
    const double expect = oracle::v213_derivative(t, ga, d, A, x1, Y);
    CHECK(std::abs(estimate_V0(V, t, x, v).value - expect) <= 1e-3 * std::abs(expect) + 1e-6);
  }
}

TEST_CASE("upper Dini derivative along a trajectory stays below V0 (property)") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  const Functional V = builtin_V212(1.0, 1.1, 0.4, *find_c(1.0, 1.1, 0.4));
  Rng rng(40);
  for (int i = 0; i < 10; ++i) {
    const auto d = random_bang_bang(rng, s.box, 0.0, 3.0, 0.02, 3);
    const Trajectory tr = integrate(s, 0.0, random_history(rng, 0.4, 0.02, 1, 1.0), d, 3.0, IntegratorOptions{0.02});
    for (double t = 0.4; t < 2.9; t += 0.3) {
      const double tt = std::round(t / 0.02) * 0.02;
      const HistorySegment w = tr.window(tt, 0.8);
      const State f = eval_rhs(s, tt, w.tail(0.4), d(tt));
      const double v0 = V.derivative(tt, w, f);
      const double dp = dplus_along(V, tr, tt).value;
      CHECK(dp <= v0 + 1e-3 * (1.0 + std::abs(v0)));
    }
  }
}

TEST_CASE("derivative of V along the zero solution is zero") {
  const Functional V = half_square(0.0, 2);
  const HistorySegment z(0.01, 2, {0.0, 0.0});
  CHECK(estimate_V0(V, 0.0, z, State{0.0, 0.0}).value == 0.0);
}

}
