#pragma once

// Relativistic demonstrations that go beyond single density evaluations:
// time dilation of the flash rate, the nonrelativistic limit of the first
// flash, and a search for states whose surface density matrices agree on one
// surface but not on a later one.

#include <cstdint>
#include <vector>

#include "flashsim/rel_flash.hpp"

namespace flashsim {

// ---------------------------------------------------------------------------
// time dilation

struct DilationSetup {
  double mass = 1000.0;
  double sigma = 1.0;
  double tau = 1000.0;
  double velocity = 0.6;
  double packet_width = 2.0;
  double cutoff = 8.0;  // momentum half-window around the packet momentum
  int modes = 384;
  double half_width = 20.0;   // initial collapse window; widened on demand
  double horizon_taus = 10.0;  // coordinate horizon in units of tau
  std::size_t trajectories = 1300;
  std::uint64_t seed = 1;
  RelSamplerOptions sampler{};
};

struct DilationResult {
  std::size_t flashes = 0;
  std::size_t trajectories = 0;
  std::size_t escaped = 0;
  double horizon = 0;
  double rate_tau = 0;     // flashes per unit coordinate time, times tau
  double rate_se_tau = 0;  // Poisson standard error of rate_tau
  double expected = 0;     // sqrt(1 - v^2)
  double measured_velocity = 0;
  double max_leakage = 0;
  std::vector<RelFlashHistory> histories;  // filled when requested
};

RelModel dilation_model(const DilationSetup& s);
/// Flash rate per coordinate time of a packet moving with the given velocity,
/// counted over [0, horizon] from a seed at the origin.
DilationResult time_dilation_experiment(const DilationSetup& s, unsigned threads, bool keep_histories = false);

// ---------------------------------------------------------------------------
// nonrelativistic limit

struct NonrelSetup {
  double mass = 20.0;
  double sigma = 1.0;
  double tau = 50.0;
  double packet_width = 2.0;
  double cutoff = 3.0;
  int modes = 128;
  // nonrelativistic grid
  int grid_points = 321;
  double grid_spacing = 0.25;
  // bins: edges in units of tau (time) and sigma (position); outer bins open
  std::vector<double> t_edges = {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
  std::vector<double> x_edges = {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
  int t_panels = 8;    // per time bin
  int s_panels = 48;   // proper-time panels (over 1 - e^{-s/tau})
};

struct NonrelResult {
  double total_variation = 0;
  std::vector<double> relativistic, nonrelativistic;  // bin probabilities, t-major
  double relativistic_mass = 0, nonrelativistic_mass = 0;  // before normalization
};

/// First-flash distributions of a packet at rest from a seed at its centre:
/// the relativistic model with a Dirac packet versus GRW with H = p^2/2m,
/// binned in (t, x) and compared in total variation.
NonrelResult nonrelativistic_limit(const NonrelSetup& s);

// ---------------------------------------------------------------------------
// surface density matrices

struct NonAutonomySetup {
  double mass = 5.0;
  double sigma = 1.0;
  double tau = 1.0;
  double cutoff = 4.0;
  int modes = 128;
  double packet_width = 1.0;
  std::vector<double> packet_centers = {-12.0, 12.0};  // equal-weight superposition
  double seed_x = -12.0;                              // first seed, on t = 0
  std::vector<double> other_seeds = {35.0, -40.0};    // candidate second seeds, on t = 0
  std::vector<double> later_times = {3.0, 6.0};       // in units of tau
};

struct NonAutonomyCandidate {
  double other_seed = 0;
  double later_time = 0;
  double first_upper = 0;   // certified bound on ||rho_1 - rho'_1||
  double second_lower = 0;  // certified bound on ||rho_2 - rho'_2||
};

struct NonAutonomyWitness {
  bool found = false;
  NonAutonomyCandidate best;
  SpacetimePoint seed, seed_prime;
  std::vector<NonAutonomyCandidate> scanned;
};

/// The surface density matrix rho_Sigma = E |psi_Sigma><psi_Sigma| splits into
/// the no-flash term N = W psi psi^dag W and a positive remainder of trace
/// 1 - tr N. Both setups share psi; their seeds differ. Sigma_1 is the slice
/// t = 0 through both seeds, Sigma_2 a later slice. Operator-norm bounds:
///   ||rho_1 - rho'_1|| <= ||N_1 - N'_1|| + eps_1 + eps'_1
///   ||rho_2 - rho'_2|| >= max(lambda_max(N_2 - N'_2) - eps'_2, lambda_max(N'_2 - N_2) - eps_2)
/// The search scans second seeds and later times and keeps the best pair.
/// A seed's near-null hyperboloids reach far along x, so a distant seed still
/// carries eps' of a few percent; the state is two separated packets so that a
/// seed on one of them reshapes the no-flash term well beyond that.
NonAutonomyWitness non_autonomy_search(const NonAutonomySetup& s);

}  // namespace flashsim
