#include "flashsim/grid.hpp"

#include <cmath>
#include <numbers>

namespace flashsim {

Index GridSpec::size() const {
  Index n = 1;
  for (int i = 0; i < dim; ++i) n *= points;
  return n;
}

double GridSpec::cell_volume() const { return std::pow(spacing, dim); }

GridSpec GridSpec::centered(int dim, int points, double spacing) {
  return GridSpec{dim, points, spacing, -0.5 * (points - 1) * spacing};
}

void GridSpec::validate() const {
  if (dim < 1 || dim > 3) throw InvariantError("grid dimension must be 1, 2 or 3");
  if (points < 1) throw InvariantError("grid needs at least one point per axis");
  if (!(spacing > 0) || !std::isfinite(spacing)) throw InvariantError("grid spacing must be positive");
  if (!std::isfinite(origin)) throw InvariantError("grid origin must be finite");
}

std::vector<int> unravel(Index idx, int dim, int points) {
  std::vector<int> out(dim);
  for (int a = dim - 1; a >= 0; --a) {
    out[a] = static_cast<int>(idx % points);
    idx /= points;
  }
  return out;
}

Point grid_point(const GridSpec& grid, Index idx) {
  const auto k = unravel(idx, grid.dim, grid.points);
  Point p(grid.dim);
  for (int a = 0; a < grid.dim; ++a) p[a] = grid.coordinate(k[a]);
  return p;
}

double gaussian_density(double r2, double sigma, int dim) {
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * dim);
  return norm * std::exp(-r2 / (2.0 * sigma * sigma));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

FlashSites FlashSites::around(const GridSpec& particle_grid, double sigma, double tail_sigmas) {
  particle_grid.validate();
  const int pad = static_cast<int>(std::ceil(tail_sigmas * sigma / particle_grid.spacing));
  GridSpec g = particle_grid;
  g.points = particle_grid.points + 2 * pad;
  g.origin = particle_grid.origin - pad * particle_grid.spacing;
  return FlashSites{g, pad};
}

}  // namespace flashsim
