#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rfdelyap/functionals.hpp"
#include "rfdelyap/random.hpp"

using namespace rfdelyap;

TEST_SUITE("functionals") {

TEST_CASE("delay-bound hypothesis of the worked scalar example") {
  // 2 b^3 r^2 = 0.42592 < 1 = a
  CHECK(2.0 * 1.1 * 1.1 * 1.1 * 0.4 * 0.4 == doctest::Approx(0.42592).epsilon(1e-12));
}

TEST_CASE("find_c agrees with a dense scan") {
  const auto c = find_c(1.0, 1.1, 0.4);
  REQUIRE(c);
  CHECK(*c == doctest::Approx(oracle::best_c(1.0, 1.1, 0.4)).epsilon(1e-5));
  CHECK(*c == doctest::Approx(0.181405).epsilon(1e-5));
  CHECK(margin212(1.0, 1.1, 0.4, *c) > 0.0);
  CHECK(margin212(1.0, 1.1, 0.4, 0.3) == doctest::Approx(oracle::margin(1.0, 1.1, 0.4, 0.3)));
  CHECK_FALSE(find_c(1.0, 1.1, 0.7));
  CHECK(*find_c(2.0, 2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("node quadrature is exact for cubics on every interval count") {
  for (int m : {1, 2, 3, 4, 5, 7, 10}) {
    const double h = 0.1;
    const HistorySegment x = HistorySegment::sample(1.0, h, 1, [](double th) { return State{th}; });
    const double from = -m * h;
    const double q = node_quadrature(x, from, [](double th, std::span<const double>) {
      return 1.0 + 2.0 * th + 3.0 * th * th + 4.0 * th * th * th;
    });
    const double exact = -(from + from * from + std::pow(from, 3) + std::pow(from, 4));
    if (m == 1)
      CHECK(q == doctest::Approx(0.5 * h * (1.0 + (1.0 - 0.2 + 0.03 - 0.004))));
    else
      CHECK(q == doctest::Approx(exact).epsilon(1e-12));
  }
  const HistorySegment x = HistorySegment::zero(1.0, 0.1, 1);
  CHECK_THROWS(node_quadrature(x, -0.15, [](double, std::span<const double>) { return 1.0; }));
  CHECK_THROWS(node_quadrature(x, -1.5, [](double, std::span<const double>) { return 1.0; }));
}

TEST_CASE("quadratic functional on a constant history") {
  const double a = 1.0, b = 1.1, r = 0.4, c = 0.15;
  const Functional V = builtin_V212(a, b, r, c);
  const State one{1.0};
  const double K1 = oracle::margin(a, b, r, c), K2 = b * b * b * r + c * (a - c);
  CHECK(eval(V, 0.0, HistorySegment::constant(0.8, 0.02, one)) ==
        doctest::Approx(0.5 + 0.5 * K1 * r + K2 * r * r).epsilon(1e-12));
  CHECK(V.window_span() == doctest::Approx(0.8));
  CHECK(*V.growth_rate == doctest::Approx(a - c + b * b / K1));
  CHECK(V.rho(2.0) == doctest::Approx(2.0 * c));
  CHECK(V.a2(1.0) == doctest::Approx(0.5 * (1.0 + 2.0 * r * (a - c))));
  CHECK_THROWS_AS(builtin_V212(a, b, r, 0.9), ConfigError);
  CHECK_NOTHROW(builtin_V212(a, b, r, 0.9, true));
  CHECK_THROWS_AS(eval(V, 0.0, HistorySegment::constant(0.4, 0.02, one)), ConfigError);
}

TEST_CASE("sandwich bounds hold on random windows (property)") {
  const Functional V = builtin_V212(1.0, 1.1, 0.4, *find_c(1.0, 1.1, 0.4));
  Rng rng(50);
  for (int i = 0; i < 300; ++i) {
    const HistorySegment x = random_history(rng, 0.8, 0.02, 1, 3.0);
    const double v = eval(V, 0.0, x);
    CHECK(V.a1(std::abs(x.head()[0])) <= v * (1 + 1e-12));
    CHECK(v <= V.a2(x.sup_norm()) * (1 + 1e-12));
  }
}

TEST_CASE("planar functional") {
  const Functional V = builtin_V213();
  CHECK(V.window_span() == 6.0);
  const HistorySegment x = HistorySegment::constant(6.0, 0.01, State{1.0, 2.0});
  CHECK(eval(V, 0.0, x) == doctest::Approx(0.5 + 0.5 + 2.0 + 2.0).epsilon(1e-12));
  CHECK(V.beta2(1.0) == doctest::Approx(12.0 * std::exp(1.0)));
  CHECK(V.beta4(3.0) == 2.0);
  CHECK(V.a2(1.0) == 6.0);
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    const HistorySegment y = random_history(rng, 6.0, 0.05, 2, 2.0);
    const double t = rng.uniform(0.0, 3.0);
    const double v = eval(V, t, y);
    CHECK(V.a1(std::abs(y.head()[0])) <= v);
    CHECK(v <= V.a2(V.beta(t) * y.sup_norm()));
  }
}

TEST_CASE("half square") {
  const Functional V = half_square(0.0, 2);
  CHECK(eval(V, 0.0, HistorySegment(1.0, 2, {3.0, 4.0})) == 12.5);
}

}
