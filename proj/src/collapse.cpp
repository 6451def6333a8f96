#include <algorithm>
#include <cmath>
#include <numbers>

#include "flashsim/dirac.hpp"
#include "flashsim/quadrature.hpp"

namespace flashsim {

RelModel::RelModel(RelParams p) : p_(p), space_(p.dirac) {
  if (!(p_.sigma > 0) || !(p_.tau > 0)) throw InvariantError("sigma and tau must be positive");
  spacing_ = p_.spacing > 0 ? p_.spacing
                            : std::min(p_.sigma / 6.0, std::numbers::pi / (2.5 * space_.flux_bandwidth()));
  half_width_ = p_.half_width > 0 ? p_.half_width : 0.45 * space_.box_length();
  if (half_width_ > 0.5 * space_.box_length()) throw InvariantError("surface window exceeds the periodic box");
}

double RelModel::gaussian_norm() const { return 1.0 / (std::sqrt(2.0 * std::numbers::pi) * p_.sigma); }

SurfaceGrid RelModel::grid(const Surface& s, double spacing_scale) const {
  return make_surface_grid(s, s.base.x, half_width_, spacing_ * spacing_scale);
}

SurfaceBasis RelModel::basis(const Surface& s, double spacing_scale) const {
  return make_surface_basis(space_, grid(s, spacing_scale));
}

SurfaceGrid RelModel::grid_at(const Surface& s, double anchor, double spacing_scale) const {
  return make_surface_grid(s, anchor, half_width_, spacing_ * spacing_scale);
}

SurfaceBasis RelModel::basis_at(const Surface& s, double anchor, double spacing_scale) const {
  return make_surface_basis(space_, grid_at(s, anchor, spacing_scale));
}

double surface_gaussian_tail(const RelModel& model, const SurfaceGrid& grid, double center_arc) {
  if (grid.size() == 0) return 1.0;
  const double r = std::sqrt(2.0) * model.sigma();
  return 1.0 - 0.5 * (std::erf((grid.arc.back() - center_arc) / r) - std::erf((grid.arc.front() - center_arc) / r));
}

namespace {

RVec gaussian_weights(const RelModel& model, const SurfaceGrid& grid, double center_arc) {
  RVec g(grid.size());
  const double pref = model.gaussian_norm() / model.tau(), s2 = 2.0 * model.sigma() * model.sigma();
  for (Index q = 0; q < grid.size(); ++q) {
    const double d = grid.arc[q] - center_arc;
    g(q) = pref * std::exp(-d * d / s2);
  }
  return g;
}

double flux_norm2(const SurfaceBasis& b, const Mat& phi) {
  return (phi.adjoint() * b.flux_weighted(phi)).trace().real();
}

void scale_rows(Mat& phi, const RVec& f) {
  for (Index q = 0; q < f.size(); ++q) {
    phi.row(2 * q) *= f(q);
    phi.row(2 * q + 1) *= f(q);
  }
}

}  // namespace

RVec surface_gaussian(const RelModel& model, const SurfaceGrid& grid, double center_arc) {
  if (surface_gaussian_tail(model, grid, center_arc) > 1e-6)
    throw NumericalError("surface window too small for the collapse Gaussian (tail mass above 1e-6)");
  return gaussian_weights(model, grid, center_arc);
}

Mat collapse_on(const RelModel& model, const SurfaceBasis& basis, double arc, const Mat& block, CollapseInfo* info) {
  if (basis.grid.surface.kind != Surface::Kind::hyperboloid) throw InvariantError("collapse needs a hyperboloid");
  if (block.rows() != model.dim()) throw DimensionError("state dimension differs from the Dirac space");
  const double s = basis.grid.surface.radius;
  Mat phi = basis.restrict(block);
  const double captured = info ? flux_norm2(basis, phi) : 0.0;
  scale_rows(phi, gaussian_weights(model, basis.grid, arc).cwiseSqrt());
  Mat out = basis.synthesize(phi);
  if (info) {
    info->proper_time = s;
    info->captured = captured;
    const double n2 = flux_norm2(basis, phi);
    info->residual = n2 > 0 ? std::sqrt(std::max(0.0, flux_norm2(basis, phi - basis.restrict(out))) / n2) : 0.0;
  }
  return std::exp(-0.5 * s / model.tau()) * out;
}

Mat collapse(const RelModel& model, const SpacetimePoint& prev, const SpacetimePoint& flash, const Mat& block,
             CollapseInfo* info) {
  if (!in_future_cone(prev, flash)) {
    if (info) *info = CollapseInfo{};
    return Mat::Zero(block.rows(), block.cols());
  }
  const Surface h = Surface::through(prev, flash);
  return collapse_on(model, model.basis_at(h, flash.x), h.arc(flash.x), block, info);
}

Vec collapse(const RelModel& model, const SpacetimePoint& prev, const SpacetimePoint& flash, const Vec& c,
             CollapseInfo* info) {
  return collapse(model, prev, flash, Mat(c), info).col(0);
}

double collapse_density(const RelModel& model, const SpacetimePoint& prev, const SpacetimePoint& flash,
                        const Vec& c) {
  if (!in_future_cone(prev, flash)) return 0.0;
  const Surface h = Surface::through(prev, flash);
  const SurfaceBasis b = model.basis_at(h, flash.x);
  const RVec rho = b.flux_density(b.restrict(c));
  const RVec g = gaussian_weights(model, b.grid, h.arc(flash.x));
  return std::exp(-h.radius / model.tau()) * b.grid.spacing * rho.dot(g);
}

PovmSpec PovmSpec::refined() const {
  PovmSpec r = *this;
  r.spacing_scale *= 0.5;
  r.s_panels *= 2;
  return r;
}

PovmResult povm_integral(const RelModel& model, const SpacetimePoint& base, const Vec& c, const PovmSpec& spec) {
  if (c.size() != model.dim()) throw DimensionError("state dimension differs from the Dirac space");
  const double tau = model.tau(), sigma = model.sigma();
  const double u_max = -std::expm1(-spec.s_max_factor);
  const QuadratureRule ru = composite_gauss_legendre(0.0, u_max, spec.s_panels, spec.s_order);
  const QuadratureRule unit = gauss_legendre(spec.arc_order, 0.0, 1.0);
  const double pref = model.gaussian_norm(), s2 = 2.0 * sigma * sigma;

  PovmResult res;
  res.truncation = std::exp(-spec.s_max_factor);
  for (std::size_t k = 0; k < ru.nodes.size(); ++k) {
    const double s = -tau * std::log1p(-ru.nodes[k]);
    const SurfaceBasis b = model.basis(Surface::hyperboloid(base, s), spec.spacing_scale);
    const RVec rho = b.flux_density(b.restrict(c));
    const std::vector<double>& arc = b.grid.arc;
    // flash locations y on the hyperboloid: arc panels of width sigma
    const double lo = arc.front() - 9 * sigma, hi = arc.back() + 9 * sigma;
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / sigma)));
    const double w = (hi - lo) / panels;
    double inner = 0;
    for (int p = 0; p < panels; ++p)
      for (std::size_t j = 0; j < unit.nodes.size(); ++j) {
        const double ly = lo + (p + unit.nodes[j]) * w;
        const auto first = std::lower_bound(arc.begin(), arc.end(), ly - 9 * sigma) - arc.begin();
        const auto last = std::upper_bound(arc.begin(), arc.end(), ly + 9 * sigma) - arc.begin();
        double acc = 0;
        for (auto q = first; q < last; ++q) {
          const double d = arc[q] - ly;
          acc += rho(q) * std::exp(-d * d / s2);
        }
        inner += unit.weights[j] * w * pref * b.grid.spacing * acc;
      }
    // ds (1/tau) e^{-s/tau} = du; the tau cancels the 1/tau inside Lambda
    res.s_nodes.push_back(s);
    res.flux.push_back(inner);
    res.total += ru.weights[k] * inner;
  }
  return res;
}

double proper_time_to_slice(const SpacetimePoint& base, const Surface& flat) {
  if (flat.kind != Surface::Kind::flat) throw InvariantError("expected a flat slice");
  const double eta = flat.rapidity;
  const double d = (base.t - flat.base.t) * std::cosh(eta) - (base.x - flat.base.x) * std::sinh(eta);
  return -d;
}

Mat past_flash_operator(const RelModel& model, const SpacetimePoint& base, const Surface& sigma,
                        const SurvivalSpec& spec) {
  const Index n = model.dim();
  const double tau = model.tau(), sg = model.sigma();
  Mat q_op = Mat::Zero(n, n);

  double s_top;
  const bool flat = sigma.kind == Surface::Kind::flat;
  if (flat) {
    s_top = proper_time_to_slice(base, sigma);
  } else {
    if (std::abs(sigma.base.t - base.t) > 1e-12 || std::abs(sigma.base.x - base.x) > 1e-12)
      throw InvariantError("hyperboloid surfaces must share the base point of the survival operator");
    s_top = sigma.radius;
  }
  if (s_top <= 0) return q_op;

  const double u_top = -std::expm1(-s_top / tau);
  QuadratureRule ru;
  if (flat) {
    // the arc length inside the past of the slice vanishes like sqrt(s_top - s)
    const QuadratureRule g = graded_gauss_legendre(0.0, u_top, spec.s_panels, spec.s_order);
    for (std::size_t k = g.nodes.size(); k-- > 0;) {
      ru.nodes.push_back(u_top - g.nodes[k]);
      ru.weights.push_back(g.weights[k]);
    }
  } else {
    ru = composite_gauss_legendre(0.0, u_top, spec.s_panels, spec.s_order);
  }

  for (std::size_t k = 0; k < ru.nodes.size(); ++k) {
    const double s = -tau * std::log1p(-ru.nodes[k]);
    const Surface hyp = Surface::hyperboloid(base, s);
    double half = model.half_width();
    double l_lo = -1e300, l_hi = 1e300;
    if (flat) {
      const double a = std::acosh(std::max(1.0, s_top / s));
      l_lo = s * (sigma.rapidity - a);
      l_hi = s * (sigma.rapidity + a);
      const double x_lo = hyp.x_at_arc(l_lo - 10 * sg), x_hi = hyp.x_at_arc(l_hi + 10 * sg);
      half = std::min(half, std::max(std::abs(x_lo - base.x), std::abs(x_hi - base.x)) + model.spacing());
    }
    SurfaceBasis b = make_surface_basis(model.space(), make_surface_grid(hyp, base.x, half, model.spacing() * spec.spacing_scale));
    RVec cq = RVec::Ones(b.grid.size());
    if (flat) {
      const double r = std::sqrt(2.0) * sg;
      for (Index q = 0; q < cq.size(); ++q)
        cq(q) = 0.5 * (std::erf((l_hi - b.grid.arc[q]) / r) - std::erf((l_lo - b.grid.arc[q]) / r));
    }
    Mat weighted = b.flux_weighted(b.eval);
    scale_rows(weighted, cq);
    q_op.noalias() += ru.weights[k] * b.eval.adjoint() * weighted;
  }
  return 0.5 * (q_op + q_op.adjoint());
}

Mat survival_operator(const RelModel& model, const SpacetimePoint& base, const Surface& sigma,
                      const SurvivalSpec& spec) {
  return Mat::Identity(model.dim(), model.dim()) - past_flash_operator(model, base, sigma, spec);
}

Mat survival_root(const RelModel& model, const SpacetimePoint& base, const Surface& sigma,
                  const SurvivalSpec& spec) {
  return positive_sqrt(survival_operator(model, base, sigma, spec), 1e-8);
}

}  // namespace flashsim
