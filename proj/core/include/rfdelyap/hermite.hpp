#pragma once

#include <cstddef>

namespace rfdelyap::hermite {

// Cubic Hermite basis on a cell of width h, local coordinate s in [0, 1].
inline double value(double y0, double y1, double m0, double m1, double h, double s) {
  const double u = 1.0 - s;
  const double h00 = (1.0 + 2.0 * s) * u * u;
  const double h10 = s * u * u;
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
}

inline double slope(double y0, double y1, double m0, double m1, double h, double s) {
  const double d00 = 6.0 * s * s - 6.0 * s;
  const double d10 = 3.0 * s * s - 4.0 * s + 1.0;
  const double d01 = -d00;
  const double d11 = 3.0 * s * s - 2.0 * s;
  return (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1;
}

/// Maximum Euclidean norm of the cell interpolant over s in [0, 1].
/// `m0`/`m1` may be null, in which case the cell is linear.
double cell_max_norm(const double* y0, const double* y1, const double* m0, const double* m1,
                     std::size_t dim, double h);

}  // namespace rfdelyap::hermite
