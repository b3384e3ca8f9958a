#include "rfdelyap/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rfdelyap {

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

HistorySegment random_fourier_history(Rng& rng, double span, double grid_step, std::size_t dim,
                                      double amplitude, int modes) {
  if (span == 0.0) {
    State v(dim);
    for (double& e : v) e = rng.uniform(-amplitude, amplitude);
    return HistorySegment(grid_step, dim, std::move(v), State(dim, 0.0));
  }
  struct Mode {
    double a, b;
  };
  std::vector<double> c0(dim);
  std::vector<std::vector<Mode>> coef(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    c0[i] = rng.uniform(-amplitude, amplitude);
    for (int k = 1; k <= modes; ++k) {
      const double bound = amplitude / static_cast<double>(k + 1);
      coef[i].push_back({rng.uniform(-bound, bound), rng.uniform(-bound, bound)});
    }
  }
  const double w = std::numbers::pi / span;
  auto f = [&](double theta) {
    State v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      double s = c0[i];
      for (int k = 1; k <= modes; ++k) {
        const double arg = k * w * theta;
        s += coef[i][k - 1].a * std::cos(arg) + coef[i][k - 1].b * std::sin(arg);
      }
      v[i] = s;
    }
    return v;
  };
  auto df = [&](double theta) {
    State v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int k = 1; k <= modes; ++k) {
        const double arg = k * w * theta;
        s += k * w * (-coef[i][k - 1].a * std::sin(arg) + coef[i][k - 1].b * std::cos(arg));
      }
      v[i] = s;
    }
    return v;
  };
  return HistorySegment::sample(span, grid_step, dim, f, df);
}

namespace {

std::vector<double> random_switch_times(Rng& rng, double origin, double horizon, double grid_step,
                                        int max_switches) {
  const long slots = static_cast<long>(std::floor(horizon / grid_step + 1e-9)) - 1;
  std::vector<double> times;
  if (slots <= 0 || max_switches <= 0) return times;
  const auto count = rng.below(static_cast<std::uint64_t>(max_switches) + 1);
  std::vector<long> picks;
  for (std::uint64_t i = 0; i < count; ++i)
    picks.push_back(1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(slots))));
  std::sort(picks.begin(), picks.end());
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  for (long p : picks) times.push_back(origin + static_cast<double>(p) * grid_step);
  return times;
}

}  // namespace

DisturbanceSignal random_piecewise_constant(Rng& rng, const DisturbanceBox& box, double origin,
                                            double horizon, double grid_step, int max_switches) {
  auto times = random_switch_times(rng, origin, horizon, grid_step, max_switches);
  std::vector<State> values;
  for (std::size_t k = 0; k <= times.size(); ++k) {
    State v(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) v[i] = rng.uniform(box.lower[i], box.upper[i]);
    values.push_back(std::move(v));
  }
  return make_piecewise_constant(box, std::move(times), std::move(values));
}

DisturbanceSignal random_bang_bang(Rng& rng, const DisturbanceBox& box, double origin,
                                   double horizon, double grid_step, int max_switches) {
  const bool start_upper = rng.below(2) == 1;
  auto times = random_switch_times(rng, origin, horizon, grid_step, max_switches);
  return make_bang_bang(box, std::move(times), start_upper);
}

HistorySegment random_history(Rng& rng, double span, double grid_step, std::size_t dim,
                              double amplitude) {
  HistorySegment x = random_fourier_history(rng, span, grid_step, dim, 1.0);
  const double target = amplitude * rng.uniform(1e-3, 1.0);
  const double n = x.sup_norm();
  return n > 0.0 ? x.scaled(target / n) : x;
}

DisturbanceSignal sample_signal(Rng& rng, const DisturbanceBox& box, std::size_t index,
                                double origin, double horizon, double grid_step, int max_switches) {
  bool flat = true;
  for (std::size_t i = 0; i < box.dim(); ++i)
    if (box.upper[i] > box.lower[i]) flat = false;
  if (flat) return make_constant(box, box.lower);
  switch (index % 3) {
    case 0: {
      const auto verts = box.vertices();
      return make_constant(box, verts[(index / 3) % verts.size()]);
    }
    case 1:
      return random_bang_bang(rng, box, origin, horizon, grid_step, max_switches);
    default:
      return random_piecewise_constant(rng, box, origin, horizon, grid_step, max_switches);
  }
}

}  // namespace rfdelyap
