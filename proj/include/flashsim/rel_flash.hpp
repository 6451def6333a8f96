#pragma once

// Relativistic flash process for one or two Dirac particles.
//
// States are coefficient blocks: one particle is a single column, two
// particles a dim x dim matrix C with psi = sum C_ab e_a (x) e_b, so that
// (A (x) B) psi = A C B^T. Type 0 acts on rows, type 1 on columns.

#include <optional>
#include <vector>

#include "flashsim/dirac.hpp"
#include "flashsim/rng.hpp"

namespace flashsim {

struct RelFlashHistory {
  std::vector<SpacetimePoint> seeds;                 // one per type
  std::vector<std::vector<SpacetimePoint>> flashes;  // per type, after the seed

  RelFlashHistory() = default;
  explicit RelFlashHistory(std::vector<SpacetimePoint> seeds);

  int types() const { return static_cast<int>(seeds.size()); }
  std::size_t size() const;
  /// Last flash of a type, or its seed.
  const SpacetimePoint& last(int type) const;
  /// Throws InvariantError unless consecutive flashes of each type are
  /// timelike and future directed.
  void validate() const;
};

/// Two-particle state from factors: a b^T.
Mat product_state(const Vec& a, const Vec& b);
/// Number of particles a block represents (1 or 2).
int particle_count(const RelModel& model, const Mat& state);
/// Reduced density matrix of the given particle.
Mat reduced_density(const RelModel& model, const Mat& state, int type);

/// K(f) = K_{x_{n-1}}(x_n) ... K_{x_0}(x_1) applied to the rows of a block.
Mat apply_rel_history(const RelModel& model, const SpacetimePoint& seed, const std::vector<SpacetimePoint>& flashes,
                      const Mat& block);
/// The same as a dense operator.
Mat rel_history_operator(const RelModel& model, const SpacetimePoint& seed,
                         const std::vector<SpacetimePoint>& flashes);
/// (K(f_1) (x) K(f_2)) psi.
Mat apply_history(const RelModel& model, const RelFlashHistory& h, const Mat& state);
/// ||(x)_i K(f_i) psi||^2, density with respect to the product of d^2x.
double rel_joint_density(const RelModel& model, const Mat& state, const RelFlashHistory& h);

/// Survival roots W_{x'_i}(Sigma), one per type, about each type's last flash.
std::vector<Mat> survival_roots(const RelModel& model, const RelFlashHistory& h, const Surface& sigma,
                                const SurvivalSpec& spec = {});
/// ||(x)_i W_{x'_i}(Sigma) K(f_i) psi||^2: density of the recorded flashes
/// together with no further flash up to sigma.
double rel_survival(const RelModel& model, const Mat& state, const RelFlashHistory& h, const Surface& sigma,
                    const SurvivalSpec& spec = {});

/// Density of `future` (flashes after each type's seed, all in the future of
/// sigma) given that the seeds were the last flashes before sigma.
double conditional_density_given_last(const RelModel& model, const Mat& state, const std::vector<SpacetimePoint>& seeds,
                                      const Surface& sigma, const RelFlashHistory& future,
                                      const SurvivalSpec& spec = {});

/// Pseudo-inverse of a positive root with relative spectral cutoff.
Mat root_pseudo_inverse(const Mat& w, double cutoff = 1e-10);

/// psi_Sigma = (x) W K(f') psi / norm, for the flashes `past` up to sigma.
Mat psi_on_surface(const RelModel& model, const Mat& state, const RelFlashHistory& past, const Surface& sigma,
                   const SurvivalSpec& spec = {});
/// phi_Sigma = (x) K(f') psi / ||(x) W K(f') psi|| (not normalized).
Mat phi_on_surface(const RelModel& model, const Mat& state, const RelFlashHistory& past, const Surface& sigma,
                   const SurvivalSpec& spec = {});
/// Applies (x)_i W_i^{-1}; throws NumericalError when the block has weight
/// outside the range the pseudo-inverse resolves (relative tolerance `tol`).
Mat apply_root_inverse(const std::vector<Mat>& roots, const Mat& block, double cutoff = 1e-10, double tol = 1e-8);
/// Density of future flashes from psi_Sigma: ||(x) K(f~) W^{-1} psi_Sigma||^2,
/// the future histories starting at each type's last flash before sigma.
double future_density_from_psi(const RelModel& model, const Mat& psi_sigma, const std::vector<Mat>& roots,
                               const RelFlashHistory& future);
/// Density of future flashes from phi_Sigma: ||(x) K(f~) phi_Sigma||^2.
double future_density_from_phi(const RelModel& model, const Mat& phi_sigma, const RelFlashHistory& future);
/// psi_Sigma -> psi_{Sigma~} for flashes `between` the two surfaces (their
/// seeds are the last flashes before sigma).
Mat evolve_psi(const RelModel& model, const Mat& psi_sigma, const std::vector<Mat>& roots_from,
               const RelFlashHistory& between, const Surface& later, const SurvivalSpec& spec = {});

/// tr(rho K(f)^dagger K(f)) for a one-particle density matrix.
double type_marginal(const RelModel& model, const Mat& rho, const SpacetimePoint& seed,
                     const std::vector<SpacetimePoint>& flashes);
/// Marginal of one type's flashes computed from a pure two-particle state.
double type_marginal_from_state(const RelModel& model, const Mat& state, int type, const SpacetimePoint& seed,
                                const std::vector<SpacetimePoint>& flashes);

struct CorrelationReport {
  double joint = 0;
  double product_of_marginals = 0;
  double ratio = 0;
  bool equal = false;  // |ratio - 1| <= tolerance
};

/// Joint density of a two-type history against the product of its marginals.
CorrelationReport correlation_check(const RelModel& model, const Mat& state, const RelFlashHistory& h,
                                    double tolerance = 1e-10);

struct RelSamplerOptions {
  double leakage_bound = 1e-3;      // abort when the window misses more flux than this
  std::size_t max_flashes = 100000;  // per type
};

struct RelSampleDiagnostics {
  double max_leakage = 0;
  double max_residual = 0;
  std::vector<double> proper_times;  // s of every sampled flash, in order
  std::size_t escaped = 0;           // chains ended by a flash that rounds onto the light cone
};

/// Samples flashes until their time passes `horizon` (a time slice) or a
/// flash escapes to the light cone (see RelSampleDiagnostics::escaped). Two
/// particles: type 0 from its reduced density chain, then type 1 from the
/// state conditioned on the type-0 flashes.
RelFlashHistory sample_rel_history(const RelModel& model, const Mat& state, const std::vector<SpacetimePoint>& seeds,
                                   double horizon, Rng& rng, const RelSamplerOptions& opt = {},
                                   RelSampleDiagnostics* diag = nullptr);

/// Boosts a history's points.
RelFlashHistory boost_history(const RelFlashHistory& h, double rapidity);
/// Boosts a one- or two-particle state.
Mat boost_rel_state(const RelModel& model, const Mat& state, double rapidity, double center = 0.0);

}  // namespace flashsim
