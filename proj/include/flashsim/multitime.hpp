#pragma once

// Noninteracting systems with one flash type each: the joint state lives on
// the tensor product of the system spaces (system 0 leftmost), each flash
// type evolves with its own Hamiltonian and rate field.

#include <vector>

#include "flashsim/grw.hpp"

namespace flashsim {

class MultiSystem {
 public:
  /// Each model must have a single flash type and the same initial time.
  explicit MultiSystem(std::vector<GrwModel> models);
  /// Also checks that `total_hamiltonian` is the noninteracting sum of the
  /// system Hamiltonians.
  MultiSystem(std::vector<GrwModel> models, const Mat& total_hamiltonian, double tol = 1e-10);

  int systems() const { return static_cast<int>(models_.size()); }
  const GrwModel& model(int i) const { return models_.at(i); }
  std::vector<Index> dims() const;
  Index dim() const;
  double t0() const { return models_.front().t0(); }

  /// sum_i I x H_i x I
  Mat total_hamiltonian() const;

  /// The flashes of one type as a single-type history of that system.
  FlashHistory system_history(const FlashHistory& flashes, int system) const;

  /// Applies an operator given as a map on blocks (rows = factor `system`) to
  /// one tensor factor of psi.
  Vec apply_on(int system, const Vec& psi, const Mat& op) const;
  Vec apply_history_on(int system, const FlashHistory& single, const Vec& psi) const;
  Vec evolve_on(int system, double t, const Vec& psi) const;

 private:
  template <class F>
  Vec map_factor(int system, const Vec& psi, F&& f) const;
  std::vector<GrwModel> models_;
};

/// || (x)_i K_{i, n_i} psi ||^2
double multitype_joint_density(const MultiSystem& sys, const StateVector& psi, const FlashHistory& flashes);

/// Density of one system's flashes alone: || K_{i, n} psi ||^2 with K acting on
/// factor i only.
double marginal_density(const MultiSystem& sys, const StateVector& psi, int system, const FlashHistory& single);

/// psi_Delta = W_{Delta + t0 - t_n'} K_{0, n'} psi, normalized (system 0).
/// `past` holds system-0 flashes in [t0, t0 + Delta).
StateVector shift_and_condition(const MultiSystem& sys, const StateVector& psi, double delta,
                                const FlashHistory& past);

struct CovarianceReport {
  std::vector<double> lhs, rhs;
  double max_abs_diff = 0;
  double max_rel_diff = 0;
};

/// For each test history (original time coordinates, t0-based), splits the
/// system-0 flashes at t0 + Delta into past and future. lhs is the Bayes
/// quotient of original-law densities (future given past and no further
/// system-0 flash before t0 + Delta); rhs is the joint density from psi_Delta
/// with system-0 future times shifted by -Delta.
CovarianceReport covariance_check(const MultiSystem& sys, const StateVector& psi, double delta,
                                  const std::vector<FlashHistory>& tests);

/// Deterministic set of test histories: system-0 flashes on both sides of
/// t0 + Delta and a few flashes of every other system, times within
/// [t0, t0 + horizon].
std::vector<FlashHistory> covariance_test_set(const MultiSystem& sys, double delta, double horizon, int count,
                                              std::uint64_t seed);

}  // namespace flashsim
