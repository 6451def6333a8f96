#include "flashsim/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flashsim {

SpacetimePoint boost(const SpacetimePoint& p, double eta) {
  const double c = std::cosh(eta), s = std::sinh(eta);
  return {p.t * c + p.x * s, p.x * c + p.t * s};
}

double minkowski_interval(const SpacetimePoint& a, const SpacetimePoint& b) {
  const double dt = b.t - a.t, dx = b.x - a.x;
  return dt * dt - dx * dx;
}

bool in_future_cone(const SpacetimePoint& a, const SpacetimePoint& b) {
  return b.t > a.t && minkowski_interval(a, b) > 0;
}

double proper_time(const SpacetimePoint& a, const SpacetimePoint& b) {
  if (!in_future_cone(a, b)) throw InvariantError("point is not in the future light cone");
  return std::sqrt(minkowski_interval(a, b));
}

// ---------------------------------------------------------------------------
// DiracSpace

DiracSpace::DiracSpace(DiracParams p) : p_(p) {
  if (!(p_.mass >= 0)) throw InvariantError("mass must be non-negative");
  if (!(p_.cutoff > 0)) throw InvariantError("momentum cutoff must be positive");
  if (p_.modes < 2) throw InvariantError("need at least two momentum modes");
  dk_ = 2.0 * p_.cutoff / p_.modes;
  box_ = 2.0 * std::numbers::pi / dk_;
  for (int j = 0; j < p_.modes; ++j) {
    k_.push_back(p_.momentum_center - p_.cutoff + j * dk_);
    e_.push_back(std::hypot(k_.back(), p_.mass));
  }
}

double DiracSpace::max_energy() const {
  return std::hypot(std::abs(p_.momentum_center) + p_.cutoff, p_.mass);
}

double DiracSpace::flux_bandwidth() const {
  // positive-positive terms oscillate at most with dk + dE <= 4K; mixed-sign
  // terms are bounded through E_max
  return p_.positive_only ? 2.0 * p_.cutoff : max_energy();
}

Eigen::Vector2cd DiracSpace::spinor_plus(double k) const {
  const double e = std::hypot(k, p_.mass), n = std::sqrt(2.0 * e * (e + p_.mass));
  return Eigen::Vector2cd((e + p_.mass) / n, k / n);
}

Eigen::Vector2cd DiracSpace::spinor_minus(double k) const {
  const double e = std::hypot(k, p_.mass), n = std::sqrt(2.0 * e * (e + p_.mass));
  return Eigen::Vector2cd(-k / n, (e + p_.mass) / n);
}

Mat DiracSpace::evaluation(double t, double x) const {
  const int m = p_.modes;
  Mat b(2, dim());
  const double inv = 1.0 / std::sqrt(box_);
  for (int j = 0; j < m; ++j) {
    const double e = e_[j], k = k_[j];
    const double n = std::sqrt(2.0 * e * (e + p_.mass));
    const double up = (e + p_.mass) / n, lo = k / n;
    const cplx wp = std::polar(inv, -e * t + k * x), wm = std::polar(inv, e * t + k * x);
    b(0, j) = up * wp;
    b(1, j) = lo * wp;
    if (p_.positive_only) continue;
    b(0, m + j) = -lo * wm;
    b(1, m + j) = up * wm;
  }
  return b;
}

Eigen::Vector2cd DiracSpace::evaluate(const Vec& c, double t, double x) const {
  if (c.size() != dim()) throw DimensionError("coefficient vector has the wrong size");
  return evaluation(t, x) * c;
}

std::vector<double> DiracSpace::box_grid() const {
  std::vector<double> xs(p_.modes);
  const double h = box_ / p_.modes;
  for (int n = 0; n < p_.modes; ++n) xs[n] = -0.5 * box_ + n * h;
  return xs;
}

Vec DiracSpace::analyze_samples(const std::vector<Eigen::Vector2cd>& samples) const {
  const std::vector<double> xs = box_grid();
  if (samples.size() != xs.size()) throw DimensionError("one sample per box grid point is required");
  const double h = box_ / p_.modes;
  Vec c = Vec::Zero(dim());
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const Mat b = evaluation(0.0, xs[n]);
    c.noalias() += h * b.adjoint() * samples[n];
  }
  return c;
}

Vec dirac_packet(const DiracSpace& space, double center, double width, double momentum) {
  if (!(width > 0)) throw InvariantError("packet width must be positive");
  Vec c = Vec::Zero(space.dim());
  for (int j = 0; j < space.modes(); ++j) {
    const double k = space.momentum(j);
    c(j) = std::polar(std::exp(-(k - momentum) * (k - momentum) * width * width), -k * center);
  }
  const double n = c.norm();
  if (!(n > 0)) throw NumericalError("packet has no weight inside the momentum cutoff");
  return c / n;
}

double mean_velocity(const DiracSpace& space, const Vec& c) {
  double v = 0;
  const int m = space.modes();
  for (int j = 0; j < m; ++j) {
    const double g = space.momentum(j) / space.energy(j);
    const double neg = space.positive_only() ? 0.0 : std::norm(c(m + j));
    v += (std::norm(c(j)) - neg) * g;
  }
  return v / c.squaredNorm();
}

// ---------------------------------------------------------------------------
// surfaces

Surface Surface::flat(const SpacetimePoint& through, double rapidity) {
  Surface s;
  s.kind = Kind::flat;
  s.base = through;
  s.rapidity = rapidity;
  return s;
}

Surface Surface::hyperboloid(const SpacetimePoint& base, double radius) {
  if (!(radius > 0)) throw InvariantError("hyperboloid radius must be positive");
  Surface s;
  s.kind = Kind::hyperboloid;
  s.base = base;
  s.radius = radius;
  return s;
}

Surface Surface::through(const SpacetimePoint& base, const SpacetimePoint& point) {
  return hyperboloid(base, proper_time(base, point));
}

double Surface::time_at(double x) const {
  const double u = x - base.x;
  if (kind == Kind::flat) return base.t + std::tanh(rapidity) * u;
  return base.t + std::hypot(radius, u);
}

double Surface::slope(double x) const {
  const double u = x - base.x;
  if (kind == Kind::flat) return std::tanh(rapidity);
  return u / std::hypot(radius, u);
}

double Surface::arc(double x) const {
  const double u = x - base.x;
  if (kind == Kind::flat) return u / std::cosh(rapidity);
  return radius * std::asinh(u / radius);
}

double Surface::x_at_arc(double l) const {
  if (kind == Kind::flat) return base.x + l * std::cosh(rapidity);
  return base.x + radius * std::sinh(l / radius);
}

bool Surface::contains(const SpacetimePoint& p, double tol) const {
  return std::abs(p.t - time_at(p.x)) <= tol * std::max(1.0, std::abs(p.t));
}

std::pair<double, double> Surface::normal(double x) const {
  if (kind == Kind::flat) return {std::cosh(rapidity), std::sinh(rapidity)};
  const double u = x - base.x, r = std::hypot(radius, u);
  return {r / radius, u / radius};
}

double Surface::line_element(double x) const {
  if (kind == Kind::flat) return 1.0 / std::cosh(rapidity);
  return radius / std::hypot(radius, x - base.x);
}

Surface Surface::boosted(double eta) const {
  Surface s = *this;
  s.base = boost(base, eta);
  if (kind == Kind::flat) s.rapidity += eta;
  return s;
}

double surface_distance(const Surface& s, const SpacetimePoint& a, const SpacetimePoint& b, double tol) {
  if (!s.contains(a, tol) || !s.contains(b, tol)) throw InvariantError("point does not lie on the surface");
  return std::abs(s.arc(a.x) - s.arc(b.x));
}

SurfaceGrid make_surface_grid(const Surface& s, double anchor, double half_width, double spacing) {
  if (!(spacing > 0) || !(half_width >= 0)) throw InvariantError("surface grid needs positive spacing");
  SurfaceGrid g;
  g.surface = s;
  g.spacing = spacing;
  const int n = static_cast<int>(std::floor(half_width / spacing));
  for (int q = -n; q <= n; ++q) {
    const double x = anchor + q * spacing;
    g.x.push_back(x);
    g.t.push_back(s.time_at(x));
    g.arc.push_back(s.arc(x));
    g.slope.push_back(s.slope(x));
  }
  return g;
}

SurfaceBasis make_surface_basis(const DiracSpace& space, const SurfaceGrid& grid) {
  SurfaceBasis b;
  b.grid = grid;
  b.eval.resize(2 * grid.size(), space.dim());
  for (Index q = 0; q < grid.size(); ++q) b.eval.middleRows(2 * q, 2) = space.evaluation(grid.t[q], grid.x[q]);
  return b;
}

Vec SurfaceBasis::flux_weighted(const Vec& phi) const {
  Vec out(phi.size());
  const double h = grid.spacing;
  for (Index q = 0; q < grid.size(); ++q) {
    const double f = grid.slope[q];
    out(2 * q) = h * (phi(2 * q) - f * phi(2 * q + 1));
    out(2 * q + 1) = h * (phi(2 * q + 1) - f * phi(2 * q));
  }
  return out;
}

Mat SurfaceBasis::flux_weighted(const Mat& phi) const {
  Mat out(phi.rows(), phi.cols());
  const double h = grid.spacing;
  for (Index q = 0; q < grid.size(); ++q) {
    const double f = grid.slope[q];
    out.row(2 * q) = h * (phi.row(2 * q) - f * phi.row(2 * q + 1));
    out.row(2 * q + 1) = h * (phi.row(2 * q + 1) - f * phi.row(2 * q));
  }
  return out;
}

RVec SurfaceBasis::flux_density(const Vec& phi) const {
  RVec d(grid.size());
  for (Index q = 0; q < grid.size(); ++q) {
    const cplx a = phi(2 * q), b = phi(2 * q + 1);
    d(q) = std::norm(a) + std::norm(b) - 2.0 * grid.slope[q] * std::real(std::conj(a) * b);
  }
  return d;
}

SurfaceState restrict_to_surface(const DiracSpace& space, const Vec& c, const SurfaceGrid& grid) {
  if (c.size() != space.dim()) throw DimensionError("coefficient vector has the wrong size");
  const double reach = 0.5 * space.box_length();
  SurfaceState st;
  st.grid = grid;
  st.density.resize(grid.size());
  for (Index q = 0; q < grid.size(); ++q) {
    if (std::abs(grid.x[q] - grid.x[grid.size() / 2]) > reach)
      throw InvariantError("surface window exceeds the periodic box");
    const Eigen::Vector2cd v = space.evaluation(grid.t[q], grid.x[q]) * c;
    st.values.push_back(v);
    st.density(q) = v.squaredNorm() - 2.0 * grid.slope[q] * std::real(std::conj(v(0)) * v(1));
  }
  return st;
}

Eigen::Matrix2cd boost_spinor(double eta) {
  Eigen::Matrix2cd s;
  const double c = std::cosh(0.5 * eta), h = std::sinh(0.5 * eta);
  s << c, h, h, c;
  return s;
}

Vec boost_state(const DiracSpace& space, const Vec& c, double eta, double center, std::optional<double> reach) {
  if (c.size() != space.dim()) throw DimensionError("coefficient vector has the wrong size");
  const double r = reach.value_or(0.45 * space.box_length() / std::cosh(eta));
  const Eigen::Matrix2cd s = boost_spinor(eta);
  return space.analyze([&](double x) -> Eigen::Vector2cd {
    if (std::abs(x - center) > r) return Eigen::Vector2cd::Zero();
    const SpacetimePoint p = boost({0.0, x}, -eta);
    return s * space.evaluate(c, p.t, p.x);
  });
}

}  // namespace flashsim
