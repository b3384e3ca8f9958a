#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rfdelyap/history.hpp"
#include "rfdelyap/random.hpp"

using namespace rfdelyap;

TEST_SUITE("history") {

TEST_CASE("cubic Hermite reproduces cubics between nodes") {
  auto f = [](double th) { return State{1.0 + th - 2.0 * th * th + 0.5 * th * th * th}; };
  auto df = [](double th) { return State{1.0 - 4.0 * th + 1.5 * th * th}; };
  const HistorySegment x = HistorySegment::sample(1.0, 0.1, 1, f, df);
  for (double th = -1.0; th <= 0.0; th += 0.013) CHECK(x.at(th)[0] == doctest::Approx(f(th)[0]).epsilon(1e-13));
}

TEST_CASE("linear interpolation without derivatives") {
  const HistorySegment x(0.5, 1, {0.0, 1.0, 3.0});
  CHECK(x.span() == doctest::Approx(1.0));
  CHECK(x.at(-0.75)[0] == doctest::Approx(0.5));
  CHECK(x.at(-0.25)[0] == doctest::Approx(2.0));
  CHECK(x.sup_norm() == doctest::Approx(3.0));
  CHECK_THROWS_AS(interpolate(x, 0.1), std::out_of_range);
}

TEST_CASE("sup norm sees the interior maximum of a cell") {
  // sin peaks at -pi/2, between nodes of a coarse grid
  const double pi = std::acos(-1.0);
  const HistorySegment x = HistorySegment::sample(
      2.0, 0.25, 1, [](double th) { return State{std::sin(th)}; }, [](double th) { return State{std::cos(th)}; });
  CHECK(x.sup_norm() == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(x.at(-pi / 2)[0]) <= x.sup_norm() + 1e-15);
}

TEST_CASE("zero and constant segments") {
  const HistorySegment z = HistorySegment::zero(2.0, 0.1, 3);
  CHECK(z.node_count() == 21);
  CHECK(z.sup_norm() == 0.0);
  const State v{3.0, -4.0};
  const HistorySegment c = HistorySegment::constant(1.0, 0.5, v);
  CHECK(c.sup_norm() == doctest::Approx(5.0));
  CHECK(c.at(-0.3)[1] == -4.0);
}

TEST_CASE("tail, slice and refine keep values") {
  Rng rng(3);
  const HistorySegment x = random_fourier_history(rng, 2.0, 0.1, 2, 1.0);
  const HistorySegment t = x.tail(0.5);
  CHECK(t.span() == doctest::Approx(0.5));
  for (double th = -0.5; th <= 0.0; th += 0.05) CHECK(t.at(th)[1] == doctest::Approx(x.at(th)[1]).epsilon(1e-14));
  const HistorySegment r = x.refine(4);
  CHECK(r.grid_step() == doctest::Approx(0.025));
  for (double th = -2.0; th <= 0.0; th += 0.07) CHECK(r.at(th)[0] == doctest::Approx(x.at(th)[0]).epsilon(1e-12));
  const HistorySegment s = x.slice(0, 10);
  CHECK(s.head()[0] == x.node(10)[0]);
  CHECK_THROWS(x.tail(0.55));
}

TEST_CASE("E_h splices the ray onto the shifted history") {
  const HistorySegment x = HistorySegment::sample(
      1.0, 0.1, 1, [](double th) { return State{th * th}; }, [](double th) { return State{2.0 * th}; });
  const State v{3.0};
  const HistorySegment e = apply_Eh(x, v, 0.2);
  CHECK(e.span() == doctest::Approx(1.0));
  // shifted part: e(theta) = x(theta + h) for theta <= -h
  CHECK(e.at(-0.5)[0] == doctest::Approx(0.09));
  // ray: x(0) + (theta + h) v
  CHECK(e.at(-0.1)[0] == doctest::Approx(0.3));
  CHECK(e.head()[0] == doctest::Approx(0.6));
  const HistorySegment p(1.0, 1, {2.0});
  CHECK(apply_Eh(HistorySegment(1.0, 1, {2.0}), v, 0.5).head()[0] == doctest::Approx(3.5));
  CHECK(p.span() == 0.0);
}

TEST_CASE("modulus of continuity of a line") {
  // x(theta) = 2 theta: both parts equal 2h
  const HistorySegment x = HistorySegment::sample(
      1.0, 0.1, 1, [](double th) { return State{2.0 * th}; }, [](double) { return State{2.0}; });
  CHECK(modulus_G2(x, 0.3) == doctest::Approx(1.2));
  CHECK(modulus_G2(x, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("json and csv round trips are exact") {
  Rng rng(11);
  const HistorySegment x = random_fourier_history(rng, 1.0, 0.05, 2, 2.0);
  const HistorySegment j = HistorySegment::from_json(x.to_json());
  CHECK(j.samples() == x.samples());
  CHECK(j.right_derivatives() == x.right_derivatives());
  std::stringstream ss;
  x.write_csv(ss);
  const HistorySegment c = HistorySegment::read_csv(ss);
  CHECK(c.node_count() == x.node_count());
  CHECK(c.at(-0.37)[1] == doctest::Approx(x.at(-0.37)[1]).epsilon(1e-12));
}

TEST_CASE("random histories respect the amplitude (property)") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const HistorySegment x = random_history(rng, 0.4, 0.02, 1, 2.5);
    CHECK(x.sup_norm() <= 2.5 * (1 + 1e-12));
    CHECK(x.sup_norm() >= 2.5e-3 * (1 - 1e-12));
  }
}

TEST_CASE("subtraction and scaling are linear (property)") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const HistorySegment x = random_fourier_history(rng, 1.0, 0.1, 1, 1.0);
    const HistorySegment y = random_fourier_history(rng, 1.0, 0.1, 1, 1.0);
    const HistorySegment d = x - y;
    const double th = -rng.uniform();
    CHECK(d.at(th)[0] == doctest::Approx(x.at(th)[0] - y.at(th)[0]).epsilon(1e-12));
    CHECK(x.scaled(-2.0).sup_norm() == doctest::Approx(2.0 * x.sup_norm()));
  }
}

}
