#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfdelyap {

/// A point of the finite-dimensional state space (or of the disturbance set).
using State = std::vector<double>;

/// Scalar function of one nonnegative argument (class K, K-infinity, K+ ...).
using ScalarFn = std::function<double(double)>;

/// Raised when user-supplied data violates a documented precondition.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a model evaluation produces a non-finite or mis-shaped value.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a scalar solution leaves the interval it was declared on.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> v) {
  for (double e : v)
    if (!std::isfinite(e)) return false;
  return true;
}

/// True when `value / step` is an integer up to a relative tolerance.
inline bool is_grid_multiple(double value, double step, double tol = 1e-9) {
  if (step <= 0.0) return false;
  const double q = value / step;
  return std::abs(q - std::round(q)) <= tol * std::max(1.0, std::abs(q));
}

/// Integer number of steps in `value`; callers check `is_grid_multiple` first.
inline long grid_count(double value, double step) {
  return static_cast<long>(std::llround(value / step));
}

}  // namespace rfdelyap
