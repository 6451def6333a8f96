#pragma once

#include <array>
#include <span>
#include <vector>

#include "flashsim/hilbert.hpp"

namespace flashsim {

/// Uniform hypercubic grid: `points` per axis in `dim` dimensions, spacing
/// `spacing`, first coordinate `origin` on every axis.
struct GridSpec {
  int dim = 1;
  int points = 32;
  double spacing = 0.5;
  double origin = 0.0;

  Index size() const;
  double cell_volume() const;
  double coordinate(int k) const { return origin + k * spacing; }
  /// Centered grid: the coordinates are symmetric about zero.
  static GridSpec centered(int dim, int points, double spacing);
  void validate() const;
};

/// A d-dimensional point.
using Point = std::vector<double>;

/// Coordinates of flat grid index `idx` (axis 0 major).
Point grid_point(const GridSpec& grid, Index idx);
std::vector<int> unravel(Index idx, int dim, int points);

/// Normalized d-dimensional Gaussian (2 pi sigma^2)^{-d/2} exp(-r^2 / 2 sigma^2).
double gaussian_density(double r2, double sigma, int dim);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Flash locations: the particle grid padded on every side by enough points to
/// hold the Gaussian tail, so that the location sum of the rate field is the
/// identity to quadrature accuracy.
struct FlashSites {
  GridSpec grid;   // padded grid
  int padding = 0; // points added per side

  static FlashSites around(const GridSpec& particle_grid, double sigma, double tail_sigmas = 9.0);
  Index size() const { return grid.size(); }
  Point location(Index idx) const { return grid_point(grid, idx); }
};

}  // namespace flashsim
