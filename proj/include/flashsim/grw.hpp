#pragma once

// Nonrelativistic flash process: N distinguishable particles on a spatial
// grid, one flash type per particle (or a single type for Fock-space models).
//
// Amplitude convention: StateVector amplitudes are discrete weights with
// sum |a|^2 = 1; the continuum density is |a|^2 / (dr^d)^N. Flash densities
// are densities with respect to dt d^d r, so the probability of a flash in a
// cell is density * dr^d * dt.

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "flashsim/grid.hpp"
#include "flashsim/hilbert.hpp"
#include "flashsim/rng.hpp"

namespace flashsim {

/// The history has zero probability density, so no conditional state exists.
class ImpossibleHistoryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Flash-rate operator at a single location: a multiplication operator
/// (diagonal) or a general positive matrix.
class RateOperator {
 public:
  RateOperator() = default;
  explicit RateOperator(RVec diagonal);
  explicit RateOperator(Mat dense, double tol = kDefaultTol);

  bool is_diagonal() const { return std::holds_alternative<RVec>(data_); }
  Index dim() const;
  const RVec& diagonal() const { return std::get<RVec>(data_); }

  Mat matrix() const;
  Mat sqrt_matrix() const;
  double expectation(const Vec& psi) const;
  Vec apply(const Vec& psi) const;
  Vec apply_sqrt(const Vec& psi) const;
  /// Right-multiplication helpers for tensor-factored states stored as
  /// matrices (rows index this factor).
  Mat apply_sqrt(const Mat& block) const;

 private:
  std::variant<RVec, Mat> data_;
  Mat sqrt_;  // dense case only
};

/// Rate operators Lambda_i(r) for every flash type i and flash site r.
class FlashRateField {
 public:
  FlashRateField() = default;
  FlashRateField(FlashSites sites, std::vector<std::vector<RateOperator>> rates);

  int types() const { return static_cast<int>(rates_.size()); }
  Index site_count() const { return sites_.size(); }
  const FlashSites& sites() const { return sites_; }
  double cell_volume() const { return sites_.grid.cell_volume(); }
  const RateOperator& rate(int type, Index site) const { return rates_.at(type).at(site); }
  const std::vector<RateOperator>& rates(int type) const { return rates_.at(type); }
  Index dim() const;

  /// sum_{i,r} Lambda_i(r) dr^d
  Mat integrated() const;
  /// sum_r Lambda_i(r) dr^d for one type.
  Mat integrated(int type) const;

  /// Site index of a location; throws when it is not a site.
  Index site_of(const Point& r) const;

 private:
  FlashSites sites_;
  std::vector<std::vector<RateOperator>> rates_;
};

struct FlashEvent {
  double t = 0;
  Point r;        // flash location
  int type = 0;   // zero-based flash type
  Index site = -1;  // index into the model's flash sites; -1 when unknown
};

/// Per-type ordered flash sequences.
struct FlashHistory {
  std::vector<std::vector<FlashEvent>> per_type;
  double t0 = 0;
  std::uint64_t rng_seed = 0;

  explicit FlashHistory(int types = 1, double t0_ = 0) : per_type(types), t0(t0_) {}
  std::size_t total() const;
  /// All events sorted by time; throws when two events share a time or a
  /// type's sequence is not strictly increasing.
  std::vector<FlashEvent> merged() const;
  void validate() const;
};

/// Hamiltonian, rate field, Gaussian parameters and grid of a flash model.
class GrwModel {
 public:
  GrwModel(OperatorMatrix hamiltonian, FlashRateField rates, double sigma, double tau,
           GridSpec grid, int particles, double t0 = 0);

  /// Original GRW: one Gaussian multiplication-rate type per particle.
  static GrwModel original(const GridSpec& grid, int particles, double sigma, double tau,
                           OperatorMatrix hamiltonian, double t0 = 0);

  const OperatorMatrix& hamiltonian() const { return hamiltonian_; }
  const FlashRateField& rates() const { return rates_; }
  double sigma() const { return sigma_; }
  double tau() const { return tau_; }
  double t0() const { return t0_; }
  const GridSpec& grid() const { return grid_; }
  int particles() const { return particles_; }
  int types() const { return rates_.types(); }
  Index dim() const { return hamiltonian_.dim(); }

  /// W_t = exp(t G), G = -iH - (1/2) sum Lambda dr^d.
  const Semigroup& propagator() const { return propagator_; }
  Vec evolve(double t, const Vec& psi) const { return propagator_.apply(t, psi); }
  /// When the integrated rate is lambda * identity, returns lambda.
  std::optional<double> scalar_total_rate() const { return scalar_rate_; }

  /// Flash event at a site with the location filled in.
  FlashEvent event(double t, int type, Index site) const;

 private:
  OperatorMatrix hamiltonian_;
  FlashRateField rates_;
  double sigma_, tau_;
  GridSpec grid_;
  int particles_;
  double t0_;
  Semigroup propagator_;
  std::optional<double> scalar_rate_;
};

/// Multiplication rates (1/tau) g_sigma(r - r_i) for particle `type` on the
/// N-particle configuration grid, one operator per flash site.
std::vector<RateOperator> gaussian_flash_rates(const GridSpec& grid, int particles, int type,
                                               double sigma, double tau, const FlashSites& sites);
std::vector<RateOperator> gaussian_flash_rate(const GrwModel& model, int type);

/// -(1/2m) Laplacian (3-point stencil per axis, hard walls) plus a potential
/// evaluated on the configuration grid.
OperatorMatrix grid_hamiltonian(const GridSpec& grid, int particles, double mass,
                                const std::function<double(const std::vector<Point>&)>& potential = {});

/// Ordered product of Lambda^{1/2} and W factors, rightmost W_{t_1 - t_0}.
OperatorMatrix history_operator(const GrwModel& model, const FlashHistory& flashes);
/// K_n psi without forming K_n.
Vec apply_history(const GrwModel& model, const FlashHistory& flashes, const Vec& psi);
/// K_n applied to the columns of a block (row index = this model's space).
Mat apply_history(const GrwModel& model, const FlashHistory& flashes, const Mat& block);

/// ||K_n psi||^2
double joint_flash_density(const GrwModel& model, const StateVector& psi, const FlashHistory& flashes);
/// ||W_{t - t0} psi||^2
double survival_probability(const GrwModel& model, const StateVector& psi, double t);
/// W_{t - t_n} K_n psi, normalized.
StateVector conditional_state(const GrwModel& model, const StateVector& psi,
                              const FlashHistory& flashes, double t);

struct SamplerOptions {
  double time_tol_rel = 1e-10;  // bisection tolerance relative to tau
  int max_iterations = 400;
};

/// Draws a flash history on [t0, horizon] from the joint density.
FlashHistory sample_history(const GrwModel& model, const StateVector& psi, double horizon, Rng& rng,
                            const SamplerOptions& options = {});

/// m(r) on the particle grid; sum_r m(r) dr^d = N.
RVec matter_density(const StateVector& psi, const GrwModel& model);

/// Discrete Gaussian packet on a grid (normalized amplitudes).
Vec gaussian_packet(const GridSpec& grid, const Point& center, double width, double momentum = 0.0);

}  // namespace flashsim
