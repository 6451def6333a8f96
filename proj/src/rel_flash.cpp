#include "flashsim/rel_flash.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace flashsim {

RelFlashHistory::RelFlashHistory(std::vector<SpacetimePoint> s) : seeds(std::move(s)), flashes(seeds.size()) {}

std::size_t RelFlashHistory::size() const {
  std::size_t n = 0;
  for (const auto& f : flashes) n += f.size();
  return n;
}

const SpacetimePoint& RelFlashHistory::last(int type) const {
  const auto& f = flashes.at(type);
  return f.empty() ? seeds.at(type) : f.back();
}

void RelFlashHistory::validate() const {
  if (flashes.size() != seeds.size()) throw InvariantError("one flash sequence per seed is required");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    SpacetimePoint prev = seeds[i];
    for (const auto& p : flashes[i]) {
      if (!in_future_cone(prev, p)) throw InvariantError("consecutive flashes of a type must be timelike and future directed");
      prev = p;
    }
  }
}

namespace {

// C = left * right^T with orthogonal-ish thin factors.
struct Factors {
  Mat left, right;
};

Factors factorize(const Mat& c) {
  if (c.cols() == 1) return {c, Mat::Ones(1, 1)};
  Eigen::BDCSVD<Mat> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && s(r) > 1e-13 * s(0)) ++r;
  r = std::max<Index>(r, 1);
  return {svd.matrixU().leftCols(r) * s.head(r).asDiagonal(), svd.matrixV().leftCols(r).conjugate()};
}

// ||L R^T||_F^2
double product_norm2(const Mat& l, const Mat& r) {
  const Mat gl = l.adjoint() * l, gr = r.adjoint() * r;
  return (gl * gr.conjugate()).trace().real();
}

void require_types(const RelModel& model, const Mat& state, const RelFlashHistory& h) {
  if (particle_count(model, state) != h.types()) throw DimensionError("history types differ from the particle count");
}

}  // namespace

Mat product_state(const Vec& a, const Vec& b) { return a * b.transpose(); }

int particle_count(const RelModel& model, const Mat& state) {
  if (state.rows() != model.dim()) throw DimensionError("state rows differ from the Dirac space dimension");
  if (state.cols() == 1) return 1;
  if (state.cols() == model.dim()) return 2;
  throw DimensionError("state must be a single column or a square two-particle block");
}

Mat reduced_density(const RelModel& model, const Mat& state, int type) {
  const int n = particle_count(model, state);
  if (type < 0 || type >= n) throw DimensionError("no such particle");
  if (n == 1) return state * state.adjoint();
  return type == 0 ? Mat(state * state.adjoint()) : Mat(state.transpose() * state.conjugate());
}

Mat apply_rel_history(const RelModel& model, const SpacetimePoint& seed, const std::vector<SpacetimePoint>& flashes,
                      const Mat& block) {
  Mat out = block;
  SpacetimePoint prev = seed;
  for (const auto& p : flashes) {
    if (!in_future_cone(prev, p)) return Mat::Zero(block.rows(), block.cols());
    out = collapse(model, prev, p, out);
    prev = p;
  }
  return out;
}

Mat rel_history_operator(const RelModel& model, const SpacetimePoint& seed,
                         const std::vector<SpacetimePoint>& flashes) {
  return apply_rel_history(model, seed, flashes, Mat::Identity(model.dim(), model.dim()));
}

Mat apply_history(const RelModel& model, const RelFlashHistory& h, const Mat& state) {
  require_types(model, state, h);
  if (h.types() == 1) return apply_rel_history(model, h.seeds[0], h.flashes[0], state);
  const Factors f = factorize(state);
  const Mat l = apply_rel_history(model, h.seeds[0], h.flashes[0], f.left);
  const Mat r = apply_rel_history(model, h.seeds[1], h.flashes[1], f.right);
  return l * r.transpose();
}

double rel_joint_density(const RelModel& model, const Mat& state, const RelFlashHistory& h) {
  require_types(model, state, h);
  if (h.types() == 1) return apply_rel_history(model, h.seeds[0], h.flashes[0], state).squaredNorm();
  const Factors f = factorize(state);
  return product_norm2(apply_rel_history(model, h.seeds[0], h.flashes[0], f.left),
                       apply_rel_history(model, h.seeds[1], h.flashes[1], f.right));
}

std::vector<Mat> survival_roots(const RelModel& model, const RelFlashHistory& h, const Surface& sigma,
                                const SurvivalSpec& spec) {
  std::vector<Mat> w;
  for (int i = 0; i < h.types(); ++i) w.push_back(survival_root(model, h.last(i), sigma, spec));
  return w;
}

namespace {

// (x)_i ops[i] applied to a state, ops acting on the rows of a factor.
Mat apply_each(const Mat& state, const std::vector<Mat>& ops) {
  if (ops.size() == 1) return ops[0] * state;
  return ops[0] * state * ops[1].transpose();
}

Mat normalized(const Mat& m, const char* what) {
  const double n = m.norm();
  if (!(n > 1e-150)) throw NumericalError(std::string(what) + ": state norm underflows");
  return m / n;
}

bool in_future_of(const Surface& sigma, const SpacetimePoint& p) {
  if (sigma.kind == Surface::Kind::flat) return p.t > sigma.time_at(p.x);
  return in_future_cone(sigma.base, p) && proper_time(sigma.base, p) > sigma.radius;
}

}  // namespace

double rel_survival(const RelModel& model, const Mat& state, const RelFlashHistory& h, const Surface& sigma,
                    const SurvivalSpec& spec) {
  require_types(model, state, h);
  const std::vector<Mat> w = survival_roots(model, h, sigma, spec);
  if (h.types() == 1) return (w[0] * apply_rel_history(model, h.seeds[0], h.flashes[0], state)).squaredNorm();
  const Factors f = factorize(state);
  return product_norm2(w[0] * apply_rel_history(model, h.seeds[0], h.flashes[0], f.left),
                       w[1] * apply_rel_history(model, h.seeds[1], h.flashes[1], f.right));
}

double conditional_density_given_last(const RelModel& model, const Mat& state, const std::vector<SpacetimePoint>& seeds,
                                      const Surface& sigma, const RelFlashHistory& future, const SurvivalSpec& spec) {
  if (future.seeds.size() != seeds.size()) throw DimensionError("future history must have one sequence per seed");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (in_future_of(sigma, seeds[i])) throw InvariantError("seed lies in the future of the surface");
    if (!future.flashes[i].empty() && !in_future_of(sigma, future.flashes[i].front()))
      throw InvariantError("future flashes must lie in the future of the surface");
  }
  RelFlashHistory f = future;
  f.seeds = seeds;
  const double denom = rel_survival(model, state, RelFlashHistory(seeds), sigma, spec);
  if (!(denom > 1e-300)) throw NumericalError("survival probability up to the surface vanishes");
  return rel_joint_density(model, state, f) / denom;
}

Mat root_pseudo_inverse(const Mat& w, double cutoff) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (w + w.adjoint()));
  const RVec& l = es.eigenvalues();
  const double top = l.cwiseAbs().maxCoeff();
  RVec inv(l.size());
  for (Index i = 0; i < l.size(); ++i) inv(i) = l(i) > cutoff * top ? 1.0 / l(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

Mat psi_on_surface(const RelModel& model, const Mat& state, const RelFlashHistory& past, const Surface& sigma,
                   const SurvivalSpec& spec) {
  const Mat k = apply_history(model, past, state);
  return normalized(apply_each(k, survival_roots(model, past, sigma, spec)), "psi_on_surface");
}

Mat phi_on_surface(const RelModel& model, const Mat& state, const RelFlashHistory& past, const Surface& sigma,
                   const SurvivalSpec& spec) {
  const Mat k = apply_history(model, past, state);
  const double n = apply_each(k, survival_roots(model, past, sigma, spec)).norm();
  if (!(n > 1e-150)) throw NumericalError("phi_on_surface: survival norm underflows");
  return k / n;
}

Mat apply_root_inverse(const std::vector<Mat>& roots, const Mat& block, double cutoff, double tol) {
  std::vector<Mat> inv;
  for (const Mat& w : roots) inv.push_back(root_pseudo_inverse(w, cutoff));
  const Mat out = apply_each(block, inv);
  // the pseudo-inverse only resolves the range of W
  const Mat back = apply_each(out, roots);
  const double miss = (back - block).norm(), scale = block.norm();
  if (miss > tol * std::max(scale, 1e-300)) {
    std::ostringstream msg;
    msg << "survival root is ill-conditioned on this state (range residual " << miss / scale << ")";
    throw NumericalError(msg.str());
  }
  return out;
}

double future_density_from_psi(const RelModel& model, const Mat& psi_sigma, const std::vector<Mat>& roots,
                               const RelFlashHistory& future) {
  return apply_history(model, future, apply_root_inverse(roots, psi_sigma)).squaredNorm();
}

double future_density_from_phi(const RelModel& model, const Mat& phi_sigma, const RelFlashHistory& future) {
  return apply_history(model, future, phi_sigma).squaredNorm();
}

Mat evolve_psi(const RelModel& model, const Mat& psi_sigma, const std::vector<Mat>& roots_from,
               const RelFlashHistory& between, const Surface& later, const SurvivalSpec& spec) {
  const Mat k = apply_history(model, between, apply_root_inverse(roots_from, psi_sigma));
  return normalized(apply_each(k, survival_roots(model, between, later, spec)), "evolve_psi");
}

double type_marginal(const RelModel& model, const Mat& rho, const SpacetimePoint& seed,
                     const std::vector<SpacetimePoint>& flashes) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim()) throw DimensionError("density matrix has the wrong size");
  const Mat root = positive_sqrt(0.5 * (rho + rho.adjoint()), 1e-10);
  return apply_rel_history(model, seed, flashes, root).squaredNorm();
}

double type_marginal_from_state(const RelModel& model, const Mat& state, int type, const SpacetimePoint& seed,
                                const std::vector<SpacetimePoint>& flashes) {
  const int n = particle_count(model, state);
  if (type < 0 || type >= n) throw DimensionError("no such particle");
  if (n == 1) return apply_rel_history(model, seed, flashes, state).squaredNorm();
  const Factors f = factorize(state);
  const Mat& mine = type == 0 ? f.left : f.right;
  const Mat& other = type == 0 ? f.right : f.left;
  return product_norm2(apply_rel_history(model, seed, flashes, mine), other);
}

CorrelationReport correlation_check(const RelModel& model, const Mat& state, const RelFlashHistory& h,
                                    double tolerance) {
  if (h.types() != 2) throw DimensionError("correlation check needs two particle types");
  CorrelationReport r;
  r.joint = rel_joint_density(model, state, h);
  r.product_of_marginals = type_marginal_from_state(model, state, 0, h.seeds[0], h.flashes[0]) *
                           type_marginal_from_state(model, state, 1, h.seeds[1], h.flashes[1]);
  r.ratio = r.product_of_marginals > 0 ? r.joint / r.product_of_marginals : 0.0;
  r.equal = std::abs(r.ratio - 1.0) <= tolerance;
  return r;
}

// ---------------------------------------------------------------------------
// sampling

namespace {

// Where a block's probability crosses the hyperboloid of radius s about base:
// mean position at the base time, moved along the mean velocity.
double packet_anchor(const RelModel& model, const Mat& block, const SpacetimePoint& base, double s) {
  const DiracSpace& sp = model.space();
  const double box = sp.box_length();
  const int n = sp.modes();
  cplx acc = 0;
  double vel = 0, weight = 0;
  for (int j = 0; j < n; ++j) {
    const double x = base.x - 0.5 * box + (j + 0.5) * box / n;
    const double p = (sp.evaluation(base.t, x) * block).squaredNorm();
    acc += p * std::polar(1.0, 2.0 * std::numbers::pi * (x - base.x) / box);
  }
  for (Index c = 0; c < block.cols(); ++c) {
    const double w = block.col(c).squaredNorm();
    if (w > 0) {
      vel += w * mean_velocity(sp, block.col(c));
      weight += w;
    }
  }
  const double u0 = std::abs(acc) > 0 ? box * std::arg(acc) / (2.0 * std::numbers::pi) : 0.0;
  const double v = weight > 0 ? std::clamp(vel / weight, -0.999, 0.999) : 0.0;
  // (1 - v^2) T^2 - 2 u0 v T - u0^2 - s^2 = 0
  const double a = 1.0 - v * v;
  const double t = (u0 * v + std::sqrt(u0 * u0 * v * v + a * (u0 * u0 + s * s))) / a;
  return base.x + u0 + v * t;
}

RVec block_flux(const SurfaceBasis& b, const Mat& phi) {
  RVec d = RVec::Zero(b.grid.size());
  for (Index c = 0; c < phi.cols(); ++c) d += b.flux_density(phi.col(c));
  return d.cwiseMax(0.0);
}

void sample_chain(const RelModel& model, Mat& block, SpacetimePoint base, double horizon, Rng& rng,
                  const RelSamplerOptions& opt, RelSampleDiagnostics* diag, std::vector<SpacetimePoint>& out) {
  block = normalized(block, "sample_rel_history");
  while (out.size() < opt.max_flashes) {
    const double s = rng.exponential(model.tau());
    if (base.t + s > horizon) break;  // the whole hyperboloid lies past the horizon
    const Surface h = Surface::hyperboloid(base, s);
    const double anchor = packet_anchor(model, block, base, s);
    // widen the window for long flights, where the packet has spread
    double half = model.half_width();
    SurfaceBasis b = model.basis_at(h, anchor);
    RVec rho = block_flux(b, b.restrict(block));
    double leak = 1.0 - b.grid.spacing * rho.sum();
    while (leak > opt.leakage_bound && 2.0 * half <= 0.45 * model.space().box_length()) {
      half *= 2.0;
      b = make_surface_basis(model.space(), make_surface_grid(h, anchor, half, model.spacing()));
      rho = block_flux(b, b.restrict(block));
      leak = 1.0 - b.grid.spacing * rho.sum();
    }
    if (leak > opt.leakage_bound) {
      std::ostringstream msg;
      msg << "flux leakage " << leak << " exceeds the bound " << opt.leakage_bound << " on the hyperboloid s = " << s
          << " about (" << base.t << ", " << base.x << ")";
      throw NumericalError(msg.str());
    }
    const std::size_t q = rng.discrete(std::span<const double>(rho.data(), static_cast<std::size_t>(rho.size())));
    const double xq = b.grid.x[q] + (rng.uniform() - 0.5) * b.grid.spacing;
    const double arc = h.arc(xq) + model.sigma() * rng.normal();
    const double xy = h.x_at_arc(arc);
    const SpacetimePoint y{h.time_at(xy), xy};
    if (!(y.t <= horizon)) break;
    if (!in_future_cone(base, y)) {
      // s << sigma: the flash lies so far out that it rounds onto the light cone
      if (diag) ++diag->escaped;
      break;
    }
    CollapseInfo info;
    block = normalized(collapse_on(model, b, arc, block, diag ? &info : nullptr), "sample_rel_history");
    if (diag) {
      diag->max_leakage = std::max(diag->max_leakage, leak);
      diag->max_residual = std::max(diag->max_residual, info.residual);
      diag->proper_times.push_back(s);
    }
    out.push_back(y);
    base = y;
  }
}

}  // namespace

RelFlashHistory sample_rel_history(const RelModel& model, const Mat& state, const std::vector<SpacetimePoint>& seeds,
                                   double horizon, Rng& rng, const RelSamplerOptions& opt,
                                   RelSampleDiagnostics* diag) {
  const int n = particle_count(model, state);
  if (static_cast<int>(seeds.size()) != n) throw DimensionError("one seed per particle is required");
  RelFlashHistory h(seeds);
  if (n == 1) {
    Mat block = state;
    sample_chain(model, block, seeds[0], horizon, rng, opt, diag, h.flashes[0]);
    return h;
  }
  Factors f = factorize(state / state.norm());
  // type 0 from its reduced density chain: rho_0 = L L^dagger
  Mat block = f.left;
  sample_chain(model, block, seeds[0], horizon, rng, opt, diag, h.flashes[0]);
  // type 1 from the state conditioned on the type-0 flashes
  const Mat l = apply_rel_history(model, seeds[0], h.flashes[0], f.left);
  const Mat gram = (l.adjoint() * l).conjugate();
  Mat block1 = f.right * positive_sqrt(0.5 * (gram + gram.adjoint()), 1e-10);
  sample_chain(model, block1, seeds[1], horizon, rng, opt, diag, h.flashes[1]);
  return h;
}

RelFlashHistory boost_history(const RelFlashHistory& h, double rapidity) {
  RelFlashHistory out = h;
  for (auto& p : out.seeds) p = boost(p, rapidity);
  for (auto& f : out.flashes)
    for (auto& p : f) p = boost(p, rapidity);
  return out;
}

Mat boost_rel_state(const RelModel& model, const Mat& state, double rapidity, double center) {
  const DiracSpace& sp = model.space();
  auto boost_cols = [&](const Mat& m) {
    Mat out(m.rows(), m.cols());
    for (Index c = 0; c < m.cols(); ++c) out.col(c) = boost_state(sp, m.col(c), rapidity, center);
    return out;
  };
  if (particle_count(model, state) == 1) return boost_cols(state);
  const Factors f = factorize(state);
  return boost_cols(f.left) * boost_cols(f.right).transpose();
}

}  // namespace flashsim
