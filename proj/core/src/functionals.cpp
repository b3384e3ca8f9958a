#include "rfdelyap/functionals.hpp"

#include <algorithm>
#include <cmath>

namespace rfdelyap {

double eval(const Functional& V, double t, const HistorySegment& x) {
  if (std::abs(x.span() - V.window_span()) > 1e-9 * std::max(1.0, V.window_span()))
    throw ConfigError("functional " + V.name + ": history span " + std::to_string(x.span()) +
                      " does not match the window " + std::to_string(V.window_span()));
  if (x.dim() != V.dim) throw ConfigError("functional " + V.name + ": dimension mismatch");
  const double v = V.value(t, x);
  if (!std::isfinite(v)) throw ModelError("functional " + V.name + ": non-finite value");
  return v;
}

double node_quadrature(const HistorySegment& x, double from,
                       const std::function<double(double, std::span<const double>)>& g) {
  if (from > 0.0 || from < -x.span() - 1e-9 * x.grid_step())
    throw ConfigError("quadrature: lower limit outside the window");
  if (from == 0.0) return 0.0;
  if (!is_grid_multiple(-from, x.grid_step()))
    throw ConfigError("quadrature: lower limit must be a grid node");
  const auto m = static_cast<std::size_t>(grid_count(-from, x.grid_step()));
  const std::size_t first = x.intervals() - m;
  const double h = x.grid_step();
  auto f = [&](std::size_t j) { return g(x.theta(first + j), x.node(first + j)); };
  if (m == 1) return 0.5 * h * (f(0) + f(1));
  double acc = 0.0;
  std::size_t simpson = m;
  if (m % 2 == 1) {
    simpson = m - 3;
    acc += 3.0 * h / 8.0 * (f(m - 3) + 3.0 * f(m - 2) + 3.0 * f(m - 1) + f(m));
  }
  if (simpson > 0) {
    double s = f(0) + f(simpson);
    for (std::size_t j = 1; j < simpson; ++j) s += (j % 2 == 1 ? 4.0 : 2.0) * f(j);
    acc += h / 3.0 * s;
  }
  return acc;
}

double margin212(double a, double b, double r, double c) {
  return (a - c) * (1.0 - 2.0 * c * r) - 2.0 * b * b * b * r * r;
}

std::optional<double> find_c(double a, double b, double r) {
  if (!(2.0 * b * b * b * r * r < a)) return std::nullopt;
  auto obj = [&](double c) { return c * margin212(a, b, r, c); };
  // Coarse scan for a bracket, then golden-section refinement.
  const int grid = 400;
  int best = 1;
  for (int i = 1; i < grid; ++i)
    if (obj(a * i / grid) > obj(a * best / grid)) best = i;
  double lo = a * (best - 1) / grid, hi = a * (best + 1) / grid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = obj(x1), f2 = obj(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * a; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = obj(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = obj(x1);
    }
  }
  const double c = 0.5 * (lo + hi);
  if (!(c > 0.0 && c < a && margin212(a, b, r, c) > 0.0)) return std::nullopt;
  return c;
}

Functional builtin_V212(double a, double b, double r, double c, bool unchecked) {
  const double K1 = margin212(a, b, r, c);
  if (!unchecked && !(c > 0.0 && c < a && K1 > 0.0))
    throw ConfigError("V212: c = " + std::to_string(c) + " is infeasible (margin " +
                      std::to_string(K1) + ")");
  const double K2 = b * b * b * r + c * (a - c);
  Functional V;
  V.name = "V212";
  V.delay_span = r;
  V.tau = r;
  V.dim = 1;
  auto sq = [](double, std::span<const double> v) { return v[0] * v[0]; };
  V.value = [r, K1, K2, sq](double, const HistorySegment& x) {
    const double x0 = x.head()[0];
    double v = 0.5 * x0 * x0;
    if (r > 0.0) {
      v += 0.5 * K1 * node_quadrature(x, -r, sq);
      // The iterated integral over -2r <= s <= l <= 0 equals a weighted single integral.
      v += 0.5 * K2 *
           node_quadrature(x, -2.0 * r,
                           [r](double th, std::span<const double> y) { return (th + 2.0 * r) * y[0] * y[0]; });
    }
    return v;
  };
  V.derivative = [a, c, r, K1, K2, sq](double, const HistorySegment& x, std::span<const double> v) {
    const double x0 = x.head()[0];
    double out = x0 * v[0] + 0.5 * (a - c) * x0 * x0;
    if (r > 0.0) {
      const double xr = x.at(-r)[0];
      out -= 0.5 * K1 * xr * xr;
      out -= 0.5 * K2 * node_quadrature(x, -2.0 * r, sq);
    }
    return out;
  };
  const double K = 0.5 * (1.0 + 2.0 * r * (a - c));
  V.a1 = [](double s) { return 0.5 * s * s; };
  V.a2 = [K](double s) { return K * s * s; };
  V.beta = [](double) { return 1.0; };
  V.rho = [c](double s) { return c * s; };
  V.mu = [](double) { return 0.0; };
  V.growth_rate = a - c + b * b / K1;
  const double absK1 = std::abs(K1);
  V.lipschitz_M = [r, absK1, K2](double R) {
    return R * (1.0 + absK1 * r + 2.0 * std::abs(K2) * r * r);
  };
  V.params = {{"a", a}, {"b", b}, {"r", r}, {"c", c}, {"K1", K1}, {"K2", K2}, {"K", K}};
  return V;
}

Functional builtin_V213() {
  Functional V;
  V.name = "V213";
  V.delay_span = 1.0;
  V.tau = 5.0;
  V.dim = 2;
  auto quart = [](double, std::span<const double> v) {
    const double s = v[0] * v[0];
    return s + s * s;
  };
  V.value = [quart](double t, const HistorySegment& x) {
    const auto h = x.head();
    const double x2 = h[0] * h[0];
    return 0.5 * x2 + 0.5 * std::exp(2.0 * t) * x2 * x2 + node_quadrature(x, -1.0, quart) +
           0.5 * h[1] * h[1];
  };
  V.derivative = [](double t, const HistorySegment& x, std::span<const double> v) {
    const auto h = x.head();
    const double x0 = h[0];
    const double xp = x.at(-1.0)[0];
    const double e2 = std::exp(2.0 * t);
    const double x2 = x0 * x0;
    return x0 * v[0] + 2.0 * e2 * x2 * x0 * v[0] + e2 * x2 * x2 + x2 + x2 * x2 - xp * xp -
           xp * xp * xp * xp + h[1] * v[1];
  };
  V.a1 = [](double s) { return 0.5 * s * s; };
  V.a2 = [](double s) { return 2.0 * s * s + 4.0 * s * s * s * s; };
  V.beta = [](double t) { return std::exp(t); };
  V.beta2 = [](double t) { return 12.0 * std::exp(t); };
  V.beta3 = [](double) { return 1.0; };
  V.beta4 = [](double) { return 2.0; };
  V.R_const = 0.0;
  V.rho = [](double s) { return s; };
  V.mu = [](double) { return 0.0; };
  V.lipschitz_M = [](double R) {
    return 4.0 * R + 4.0 * R * R * R + 2.0 * std::exp(2.0 * R) * R * R * R;
  };
  return V;
}

Functional half_square(double span, std::size_t dim) {
  Functional V;
  V.name = "half_square";
  V.delay_span = span;
  V.dim = dim;
  V.value = [](double, const HistorySegment& x) {
    const double n = euclidean_norm(x.head());
    return 0.5 * n * n;
  };
  V.derivative = [](double, const HistorySegment& x, std::span<const double> v) {
    double s = 0.0;
    const auto h = x.head();
    for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * v[i];
    return s;
  };
  V.a1 = [](double s) { return 0.5 * s * s; };
  V.a2 = [](double s) { return 0.5 * s * s; };
  V.beta = [](double) { return 1.0; };
  V.lipschitz_M = [](double R) { return R; };
  return V;
}

}  // namespace rfdelyap
