#pragma once

#include <cstdint>
#include <random>

#include "rfdelyap/history.hpp"
#include "rfdelyap/signals.hpp"

namespace rfdelyap {

/// Seeded generator with platform-independent real draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent seed for the `index`-th child stream.
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index);

/// Random smooth history: per component, c0 + sum_k (a_k cos + b_k sin)(k pi theta / span)
/// with coefficients uniform in [-amplitude / (k+1), amplitude / (k+1)]. Exact
/// derivatives are attached. For span 0 a random vector is returned.
HistorySegment random_fourier_history(Rng& rng, double span, double grid_step, std::size_t dim,
                                      double amplitude, int modes = 4);

/// Random piecewise-constant signal with switch times on `origin + k * grid_step`
/// inside (origin, origin + horizon) and values uniform in the box.
DisturbanceSignal random_piecewise_constant(Rng& rng, const DisturbanceBox& box, double origin,
                                            double horizon, double grid_step, int max_switches);

/// Bang-bang signal alternating between the box corners with up to
/// `max_switches` grid-aligned switch times in (origin, origin + horizon).
DisturbanceSignal random_bang_bang(Rng& rng, const DisturbanceBox& box, double origin,
                                   double horizon, double grid_step, int max_switches);

/// Fourier history rescaled to a sup norm drawn uniformly from
/// [1e-3 amplitude, amplitude].
HistorySegment random_history(Rng& rng, double span, double grid_step, std::size_t dim,
                              double amplitude);

/// Member `index` of a mixed batch: box vertices, bang-bang and random
/// piecewise-constant signals in turn. A degenerate box yields its only point.
DisturbanceSignal sample_signal(Rng& rng, const DisturbanceBox& box, std::size_t index,
                                double origin, double horizon, double grid_step, int max_switches);

}  // namespace rfdelyap
