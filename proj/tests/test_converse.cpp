#include <doctest.h>

#include <cmath>

#include "rfdelyap/converse.hpp"
#include "rfdelyap/random.hpp"
#include "rfdelyap/registry.hpp"

using namespace rfdelyap;

namespace {

ConverseConfig scalar_cfg(int q_max = 6) {
  ConverseConfig c;
  c.q_max = q_max;
  c.a2_tilde = [q_max](double s) { return q_max * s * s + s; };
  c.grid_step = 0.01;
  return c;
}

HistorySegment point(double v) { return HistorySegment(0.01, 1, {v}); }

}  // namespace

TEST_SUITE("converse") {

TEST_CASE("family layout") {
  FamilySpec f;
  f.seed = 3;
  const auto fam = make_family(f, DisturbanceBox::interval(1.0, 1.1), 0.0, 2.0, 0.02);
  CHECK(fam.size() == 2 + 8 + 16);
  CHECK(fam[0](0.5)[0] == 1.0);
  CHECK(fam[1](0.5)[0] == 1.1);
  CHECK(make_family(f, DisturbanceBox::interval(0.0, 0.0), 0.0, 2.0, 0.02).size() == 1);
  const auto again = make_family(f, DisturbanceBox::interval(1.0, 1.1), 0.0, 2.0, 0.02);
  for (std::size_t i = 0; i < fam.size(); ++i) CHECK(fam[i].description() == again[i].description());
  CHECK(FamilySpec::from_json(f.to_json()).to_json() == f.to_json());
}

TEST_CASE("horizon formula") {
  const ConverseConfig c = scalar_cfg(4);
  CHECK(horizon_T(2.0, 3, c) == doctest::Approx(0.5 * std::log(3.0 * (4.0 * 4.0 + 2.0))));
  CHECK(horizon_T(0.0, 1, c) == 0.0);
}

TEST_CASE("exponential decay: U_q = max{0, |x| - 1/q}") {
  const RfdeSystem s = builtin_linear_delay(1.0, 0.0, 0.0);
  const ConverseConfig c = scalar_cfg();
  for (double x : {-3.0, -0.4, 0.0, 0.1, 0.3, 1.0, 2.5})
    for (int q = 1; q <= c.q_max; ++q)
      CHECK(std::abs(estimate_Uq(s, c, q, 0.0, point(x)) - std::max(0.0, std::abs(x) - 1.0 / q)) <= 1e-6);
}

TEST_CASE("exponential decay: one-step decrease against the case analysis") {
  const RfdeSystem s = builtin_linear_delay(1.0, 0.0, 0.0);
  const ConverseConfig c = scalar_cfg();
  const auto d = make_constant(s.box, {0.0});
  for (double x : {0.0, 0.2, 0.9, 3.0})
    for (int q : {1, 2, 5}) {
      const DecreaseReport r = check_decrease(s, c, q, 0.0, point(x), d, 0.05);
      CHECK(r.lhs == doctest::Approx(std::max(0.0, x * std::exp(-0.05) - 1.0 / q)).epsilon(1e-6));
      CHECK(r.rhs == doctest::Approx(std::max(0.0, x - 1.0 / q)).epsilon(1e-6));
      CHECK(r.holds);
    }
}

TEST_CASE("q-monotonicity and the lower bound (property)") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  ConverseConfig c;
  c.q_max = 5;
  c.a2_tilde = [](double v) { return 3.0 * v + 3.0 * v * v; };
  c.grid_step = 0.05;
  c.family.random_count = 4;
  c.family.bang_bang_count = 2;
  Rng rng(14);
  for (int i = 0; i < 6; ++i) {
    const HistorySegment x = random_history(rng, 0.4, 0.05, 1, 2.0);
    const auto U = estimate_Uq_levels(s, c, 0.0, x);
    for (std::size_t q = 1; q < U.size(); ++q) CHECK(U[q] >= U[q - 1]);
    for (std::size_t q = 0; q < U.size(); ++q) CHECK(U[q] >= std::max(0.0, x.sup_norm() - 1.0 / (q + 1.0)));
  }
}

TEST_CASE("enlarging the family or the horizon never lowers the sample (property)") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  ConverseConfig c;
  c.q_max = 3;
  c.a2_tilde = [](double v) { return 3.0 * v + 3.0 * v * v; };
  c.grid_step = 0.05;
  Rng rng(15);
  const HistorySegment x = random_history(rng, 0.4, 0.05, 1, 1.5);
  auto fam = make_family(c.family, s.box, 0.0, 3.0, 0.05);
  const std::vector<DisturbanceSignal> small(fam.begin(), fam.begin() + 5);
  for (int q = 1; q <= 3; ++q) {
    const double a = sample_Uq(s, c, q, 0.0, x, small, 1.0).value;
    const double b = sample_Uq(s, c, q, 0.0, x, fam, 1.0).value;
    const double e = sample_Uq(s, c, q, 0.0, x, fam, 3.0).value;
    CHECK(a <= b);
    CHECK(b <= e);
  }
}

TEST_CASE("decrease under concatenation-consistent sampling on the scalar delay example") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  ConverseConfig c;
  c.q_max = 4;
  c.a2_tilde = [](double v) { return 3.0 * v + 3.0 * v * v; };
  c.grid_step = 0.05;
  c.family.random_count = 4;
  Rng rng(16);
  for (int i = 0; i < 4; ++i) {
    const HistorySegment x = random_history(rng, 0.4, 0.05, 1, 1.5);
    const auto head = random_bang_bang(rng, s.box, 0.0, 0.05, 0.05, 1);
    for (int q = 1; q <= 4; ++q) CHECK(check_decrease(s, c, q, 0.0, x, head, 0.05).slack <= 1e-9);
  }
}

TEST_CASE("zero state and zero solution") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  ConverseConfig c;
  c.q_max = 3;
  c.a2_tilde = [](double v) { return v + v * v; };
  c.grid_step = 0.05;
  const HistorySegment z = HistorySegment::zero(0.4, 0.05, 1);
  for (int q = 1; q <= 3; ++q) {
    CHECK(estimate_Uq(s, c, q, 1.0, z) == 0.0);
    const DecreaseReport r = check_decrease(s, c, q, 1.0, z, make_constant(s.box, {1.0}), 0.05);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
  }
  const ConverseFunctional cf = assemble_V(s, c);
  for (double t : {0.0, 0.5, 2.0}) CHECK(eval(cf.V, t, z) == 0.0);
  double sum = 0.0;
  for (double w : cf.weights) {
    CHECK(w > 0.0);
    sum += w;
  }
  CHECK(sum <= 1.0 + 1e-15);
}

TEST_CASE("weights") {
  const RfdeSystem s = builtin_example212(1.0, 1.1, 0.4);
  ConverseConfig c;
  c.q_max = 4;
  c.a2_tilde = [](double v) { return v; };
  c.plain_weights = true;
  const auto cf = assemble_V(s, c);
  CHECK(cf.weights == std::vector<double>{0.5, 0.25, 0.125, 0.0625});
  CHECK(cf.lower_bound(2.0) == doctest::Approx(0.5 * 1.0 + 0.25 * 1.5 + 0.125 * (2.0 - 1.0 / 3) + 0.0625 * 1.75));
  const auto user = assemble_V(s, c, std::vector<double>{2.0, 2.0, 0.0, 0.0});
  CHECK(user.weights[0] + user.weights[1] <= 1.0);
  c.plain_weights = false;
  for (int q = 1; q <= 4; ++q) CHECK(default_weight(s, c, q) > 0.0);
  CHECK(converse_M(s, c, 3.5) >= converse_M(s, c, 1.5));
  CHECK(converse_G3(s, c, 2.0, 1) <= converse_G3(s, c, 3.0, 1));
}

TEST_CASE("escaping samples invalidate the construction") {
  const nlohmann::json p = {{"dim", 1}, {"delay", 0.0},
                            {"equations", {{{{"coef", 1.0}, {"state", 0}, {"lag", 0.0}, {"fn", "square"}}}}}};
  const RfdeSystem s = make_system("expression", p);
  ConverseConfig c;
  c.q_max = 2;
  c.a2_tilde = [](double v) { return 1e6 * v; };
  c.grid_step = 0.01;
  CHECK_THROWS_AS(estimate_Uq(s, c, 2, 0.0, point(5.0)), ConstructionInvalid);
}

TEST_CASE("envelope fit dominates the simulated need") {
  const RfdeSystem s = builtin_linear_delay(1.0, 0.0, 0.0);
  ConverseConfig c;
  c.q_max = 4;
  c.grid_step = 0.01;
  EnvelopeFitSpec spec;
  spec.norms = {0.5, 1.0, 2.0};
  const EnvelopeFit fit = fit_envelope(s, c, spec, true);
  // need(s) = max_t e^{2t} s e^{-t} until s e^{-t} < 1 / q_max, i.e. about q_max s^2
  for (double v : spec.norms) CHECK(fit.a2()(v) >= 0.95 * 4.0 * v * v);
  CHECK(fit.beta()(10.0) == 1.0);
  const EnvelopeFit tv = fit_envelope(builtin_example213(), c, EnvelopeFitSpec{{0.5, 1.0}, {0.0, 2.0}, 2, 40.0, 1.1, 1}, false);
  CHECK(tv.beta()(0.0) >= 1.0);
  CHECK(tv.beta()(2.5) >= tv.beta()(0.0));
}

}
