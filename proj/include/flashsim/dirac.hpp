#pragma once

// Free Dirac field in 1+1 dimensions (hbar = c = 1), alpha = sigma_x,
// beta = sigma_z. A global solution is stored as plane-wave coefficients on a
// periodic box: index j < M is the positive-energy mode of momentum k_j, index
// M + j the negative-energy mode (absent for positive-only spaces). The mode
// functions are orthonormal on every time slice of the box, so the state norm
// is the coefficient norm.
//
// Operators on global data act on coefficient vectors; the dynamics is
// already in the mode functions (Heisenberg form).

#include <optional>
#include <vector>

#include "flashsim/hilbert.hpp"

namespace flashsim {

struct SpacetimePoint {
  double t = 0;
  double x = 0;
};

/// (t, x) -> (t cosh(eta) + x sinh(eta), x cosh(eta) + t sinh(eta))
SpacetimePoint boost(const SpacetimePoint& p, double rapidity);
/// (dt)^2 - (dx)^2
double minkowski_interval(const SpacetimePoint& a, const SpacetimePoint& b);
/// True when b lies strictly inside the future light cone of a.
bool in_future_cone(const SpacetimePoint& a, const SpacetimePoint& b);
/// Timelike distance |b - a|; throws unless b is in the future cone of a.
double proper_time(const SpacetimePoint& a, const SpacetimePoint& b);

struct DiracParams {
  double mass = 1.0;
  double cutoff = 16.0;  // momentum cutoff K
  int modes = 512;       // momenta per energy sign
  double momentum_center = 0.0;  // modes cover [center - K, center + K)
  bool positive_only = false;    // drop the negative-energy modes
};

class DiracSpace {
 public:
  explicit DiracSpace(DiracParams p = {});

  double mass() const { return p_.mass; }
  double cutoff() const { return p_.cutoff; }
  int modes() const { return p_.modes; }
  double momentum_center() const { return p_.momentum_center; }
  bool positive_only() const { return p_.positive_only; }
  Index dim() const { return (p_.positive_only ? 1 : 2) * static_cast<Index>(p_.modes); }
  double dk() const { return dk_; }
  double box_length() const { return box_; }
  double momentum(int j) const { return k_[j]; }
  double energy(int j) const { return e_[j]; }
  double max_energy() const;
  /// Largest |d/dx| of the phase of a flux bilinear on a surface with |slope| < 1.
  double flux_bandwidth() const;

  /// Positive- and negative-energy spinors of h(k) = k sigma_x + m sigma_z.
  Eigen::Vector2cd spinor_plus(double k) const;
  Eigen::Vector2cd spinor_minus(double k) const;

  /// 2 x dim() matrix mapping coefficients to psi(t, x).
  Mat evaluation(double t, double x) const;
  /// psi(t, x) for a coefficient vector.
  Eigen::Vector2cd evaluate(const Vec& c, double t, double x) const;

  /// Coefficients of the solution whose t = 0 data is `data(x)` (exact for
  /// data band-limited to the mode set; samples on the periodic box grid).
  template <class F>
  Vec analyze(F&& data) const;
  /// Sample points of the periodic box grid used by analyze().
  std::vector<double> box_grid() const;
  Vec analyze_samples(const std::vector<Eigen::Vector2cd>& samples) const;

 private:
  DiracParams p_;
  double dk_, box_;
  std::vector<double> k_, e_;
};

template <class F>
Vec DiracSpace::analyze(F&& data) const {
  const std::vector<double> xs = box_grid();
  std::vector<Eigen::Vector2cd> s;
  s.reserve(xs.size());
  for (double x : xs) s.push_back(data(x));
  return analyze_samples(s);
}

/// Positive-energy Gaussian packet: momentum amplitude exp(-(k-p)^2 w^2) e^{-ik x0}
/// (position width w), normalized.
Vec dirac_packet(const DiracSpace& space, double center, double width, double momentum);
/// Mean velocity sum (|a|^2 - |b|^2) k/E over the norm.
double mean_velocity(const DiracSpace& space, const Vec& c);

// ---------------------------------------------------------------------------
// surfaces

/// Spacelike curve given as a graph t = f(x): a flat slice through `base` with
/// rapidity `rapidity`, or the hyperboloid of proper radius `radius` about
/// `base` (future sheet).
struct Surface {
  enum class Kind { flat, hyperboloid };
  Kind kind = Kind::flat;
  SpacetimePoint base;
  double rapidity = 0;
  double radius = 0;

  static Surface flat(const SpacetimePoint& through, double rapidity = 0.0);
  static Surface time_slice(double t) { return flat({t, 0.0}); }
  static Surface hyperboloid(const SpacetimePoint& base, double radius);
  /// The hyperboloid about `base` through `point`.
  static Surface through(const SpacetimePoint& base, const SpacetimePoint& point);

  double time_at(double x) const;
  double slope(double x) const;  // dt/dx
  /// Arc-length coordinate along the surface (s * chi for hyperboloids).
  double arc(double x) const;
  /// Inverse of arc().
  double x_at_arc(double l) const;
  SpacetimePoint point_at(double x) const { return {time_at(x), x}; }
  bool contains(const SpacetimePoint& p, double tol = 1e-9) const;
  /// Future-directed unit normal (n^0, n^1).
  std::pair<double, double> normal(double x) const;
  /// d(arc)/dx
  double line_element(double x) const;
  Surface boosted(double eta) const;
};

/// Riemannian distance along a hyperboloid or flat slice between two of its points.
double surface_distance(const Surface& s, const SpacetimePoint& a, const SpacetimePoint& b, double tol = 1e-9);

/// Uniform sample points in x (one node on the anchor) with flux weights.
struct SurfaceGrid {
  Surface surface;
  std::vector<double> x, t, arc, slope;
  double spacing = 0;
  Index size() const { return static_cast<Index>(x.size()); }
};

/// Grid over [anchor - half_width, anchor + half_width] with spacing h.
SurfaceGrid make_surface_grid(const Surface& s, double anchor, double half_width, double spacing);

/// Plane-wave dictionary restricted to a surface grid: A is (2Q x dim).
struct SurfaceBasis {
  SurfaceGrid grid;
  Mat eval;  // rows 2q, 2q+1: spinor components at point q

  /// psi at the sample points (2Q vector).
  Vec restrict(const Vec& c) const { return eval * c; }
  Mat restrict(const Mat& c) const { return eval * c; }
  /// Weighted surface data W phi with W = blockdiag(h (I - f' sigma_x)).
  Vec flux_weighted(const Vec& phi) const;
  Mat flux_weighted(const Mat& phi) const;
  /// Surface inner product density psi^dagger (I - f' sigma_x) psi per dx.
  RVec flux_density(const Vec& phi) const;
  double surface_norm2(const Vec& phi) const { return flux_density(phi).sum() * grid.spacing; }
  /// Global coefficients from surface data: A^dagger W phi (adjoint of the
  /// restriction in the surface inner product).
  Vec synthesize(const Vec& phi) const { return eval.adjoint() * flux_weighted(phi); }
  Mat synthesize(const Mat& phi) const { return eval.adjoint() * flux_weighted(phi); }
};

SurfaceBasis make_surface_basis(const DiracSpace& space, const SurfaceGrid& grid);

/// Spinor values and flux data of a global state on a surface.
struct SurfaceState {
  SurfaceGrid grid;
  std::vector<Eigen::Vector2cd> values;
  RVec density;  // psi^dagger gamma^0 gamma^mu n_mu psi per unit x
  double norm2() const { return density.sum() * grid.spacing; }
};

SurfaceState restrict_to_surface(const DiracSpace& space, const Vec& c, const SurfaceGrid& grid);

/// Spinor representation of a boost: exp(eta sigma_x / 2).
Eigen::Matrix2cd boost_spinor(double rapidity);
/// Boosted global state: psi'(x) = S psi(Lambda^{-1} x), re-analyzed on the
/// t = 0 slice. Samples farther than `reach` from `center` in the boosted
/// frame are dropped (they would see periodic images of the box).
Vec boost_state(const DiracSpace& space, const Vec& c, double rapidity, double center = 0.0,
                std::optional<double> reach = std::nullopt);

// ---------------------------------------------------------------------------
// collapse model

struct RelParams {
  DiracParams dirac;
  double sigma = 1.0;
  double tau = 1.0;
  double spacing = 0;     // surface grid spacing; 0 picks min(sigma/6, pi/(2.5 B)), B the flux bandwidth
  double half_width = 0;  // surface window half-width; 0 picks 0.45 box length
};

class RelModel {
 public:
  explicit RelModel(RelParams p);

  const DiracSpace& space() const { return space_; }
  double sigma() const { return p_.sigma; }
  double tau() const { return p_.tau; }
  double spacing() const { return spacing_; }
  double half_width() const { return half_width_; }
  Index dim() const { return space_.dim(); }
  /// Flat-geometry normalization (2 pi sigma^2)^{-1/2}.
  double gaussian_norm() const;

  /// Window anchored on the surface base point.
  SurfaceGrid grid(const Surface& s, double spacing_scale = 1.0) const;
  SurfaceBasis basis(const Surface& s, double spacing_scale = 1.0) const;
  /// Window centred on x = anchor.
  SurfaceGrid grid_at(const Surface& s, double anchor, double spacing_scale = 1.0) const;
  SurfaceBasis basis_at(const Surface& s, double anchor, double spacing_scale = 1.0) const;

 private:
  RelParams p_;
  DiracSpace space_;
  double spacing_, half_width_;
};

/// Lambda_Sigma(x) at the grid points: (N / tau) exp(-dist^2 / 2 sigma^2),
/// dist measured along the surface from the arc coordinate `center_arc`.
/// Throws when the window misses more than 1e-6 of the Gaussian mass.
RVec surface_gaussian(const RelModel& model, const SurfaceGrid& grid, double center_arc);
/// Gaussian mass outside the window's arc range.
double surface_gaussian_tail(const RelModel& model, const SurfaceGrid& grid, double center_arc);

struct CollapseInfo {
  double proper_time = 0;
  double residual = 0;  // relative surface-norm residual of the re-synthesis
  double captured = 0;  // surface norm of the pre-collapse state on the window
};

/// K_{prev}(flash) c = e^{-s/2 tau} A^dagger W Lambda^{1/2} A c on the
/// hyperboloid about `prev` through `flash`, with the window centred on the
/// flash; zero outside the future cone.
Vec collapse(const RelModel& model, const SpacetimePoint& prev, const SpacetimePoint& flash, const Vec& c,
             CollapseInfo* info = nullptr);
/// Same on the columns of a block (tensor factor in the rows).
Mat collapse(const RelModel& model, const SpacetimePoint& prev, const SpacetimePoint& flash, const Mat& block,
             CollapseInfo* info = nullptr);
/// Collapse with a prebuilt basis of the hyperboloid; `arc` locates the flash,
/// which may lie outside the window (the Gaussian is not tail-checked here).
Mat collapse_on(const RelModel& model, const SurfaceBasis& basis, double arc, const Mat& block,
                CollapseInfo* info = nullptr);

/// ||K c||^2 through the surface density e^{-s/tau} <Lambda_Sigma(x)>_Sigma,
/// without re-synthesis.
double collapse_density(const RelModel& model, const SpacetimePoint& prev, const SpacetimePoint& flash,
                        const Vec& c);

struct PovmSpec {
  int s_panels = 12;
  int s_order = 8;
  double s_max_factor = 12.0;  // s integral truncated at s_max_factor * tau
  double spacing_scale = 1.0;  // multiplies the model's surface spacing
  int arc_order = 8;           // Gauss-Legendre order per sigma-wide arc panel
  /// One refinement step: halve the spacing, double the s panels.
  PovmSpec refined() const;
};

struct PovmResult {
  double total = 0;
  double truncation = 0;  // e^{-s_max / tau}, mass beyond the s cut
  std::vector<double> s_nodes, flux;  // hyperboloid flux per s node
};

/// Integral of ||K_{base}(x) c||^2 over the future cone with d^2x = ds dl.
PovmResult povm_integral(const RelModel& model, const SpacetimePoint& base, const Vec& c, const PovmSpec& spec = {});

struct SurvivalSpec {
  int s_panels = 6;
  int s_order = 8;
  double spacing_scale = 1.0;
};

/// Q = integral of K^dagger K over the part of the future cone of `base`
/// lying in the past of `sigma`. Supports flat slices and hyperboloids about
/// `base`.
Mat past_flash_operator(const RelModel& model, const SpacetimePoint& base, const Surface& sigma,
                        const SurvivalSpec& spec = {});
/// S = I - Q; ||S^{1/2} c||^2 is the probability of no flash after `base` up to sigma.
Mat survival_operator(const RelModel& model, const SpacetimePoint& base, const Surface& sigma,
                      const SurvivalSpec& spec = {});
/// W = S^{1/2}
Mat survival_root(const RelModel& model, const SpacetimePoint& base, const Surface& sigma,
                  const SurvivalSpec& spec = {});

/// Proper time from `base` to the flat slice measured in the slice's rest
/// frame (the largest hyperboloid radius that still dips into its past);
/// non-positive when `base` is not in the past of the slice.
double proper_time_to_slice(const SpacetimePoint& base, const Surface& flat);

}  // namespace flashsim
