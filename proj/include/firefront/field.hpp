/// @file field.hpp
/// @brief Uniform 2-D node grids and scalar fields stored on them.

#pragma once

#include <cstddef>
#include <vector>

#include "firefront/errors.hpp"

namespace firefront {

/// Uniform node-centred grid: node (i, j) sits at (x0 + i*dx, y0 + j*dy),
/// 0 <= i < nx, 0 <= j < ny. Coordinates may be scaled or physical; the
/// owner decides and converts at the boundaries of the API.
struct Grid2 {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  double x(int i) const { return x0 + i * dx; }
  double y(int j) const { return y0 + j * dy; }
  std::size_t nodes() const { return static_cast<std::size_t>(nx) * ny; }
};

/// Returns an nx-by-ny grid spanning [x_min, x_max] x [y_min, y_max]
/// inclusive of both ends. Requires nx, ny >= 2.
inline Grid2 make_grid(double x_min, double x_max, double y_min, double y_max,
                       int nx, int ny) {
  if (nx < 2 || ny < 2) throw ValidationError("grid needs at least 2 nodes per axis");
  if (!(x_max > x_min) || !(y_max > y_min))
    throw ValidationError("grid extents must be positive");
  return Grid2{nx, ny, x_min, y_min, (x_max - x_min) / (nx - 1),
               (y_max - y_min) / (ny - 1)};
}

/// Row-major scalar samples: v[j*nx + i] is the value at node (i, j).
struct ScalarField2 {
  int nx = 0;
  int ny = 0;
  std::vector<double> v;

  ScalarField2() = default;
  ScalarField2(int nx_, int ny_, double fill = 0.0)
      : nx(nx_), ny(ny_), v(static_cast<std::size_t>(nx_) * ny_, fill) {}

  double& at(int i, int j) { return v[static_cast<std::size_t>(j) * nx + i]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(j) * nx + i]; }
};

}  // namespace firefront
