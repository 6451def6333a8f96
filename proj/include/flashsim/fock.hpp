#pragma once

// Identical particles and variable particle number on a lattice Fock space.
//
// Basis: occupation-number states ordered by particle number, then by
// lexicographic order of the occupation vector. Fermionic states are
// c+_{i1} ... c+_{iN} |0> with i1 < ... < iN (Jordan-Wigner signs).

#include <map>
#include <string>
#include <vector>

#include "flashsim/grid.hpp"
#include "flashsim/grw.hpp"
#include "flashsim/hilbert.hpp"

namespace flashsim {

enum class Statistics { fermion, boson };
std::string to_string(Statistics s);
Statistics statistics_from_string(const std::string& s);

using Occupation = std::vector<int>;

class FockSpace {
 public:
  FockSpace(int lattice_sites, Statistics statistics, int max_particles);
  /// N_max = 3 for bosons, min(L, 3) for fermions.
  static FockSpace with_default_truncation(int lattice_sites, Statistics statistics);

  int lattice_sites() const { return sites_; }
  Statistics statistics() const { return stats_; }
  int max_particles() const { return nmax_; }
  Index dim() const { return static_cast<Index>(basis_.size()); }
  Index sector_dim(int n) const { return sector_dims_.at(n); }
  Index sector_offset(int n) const { return sector_offsets_.at(n); }
  const std::vector<Index>& sector_dims() const { return sector_dims_; }

  const Occupation& occupation(Index i) const { return basis_.at(i); }
  int particle_number(Index i) const;
  /// Basis index of an occupation vector, or -1 when outside the truncated space.
  Index index_of(const Occupation& occ) const;

  /// Annihilation operator at a lattice site; creation is its adjoint.
  /// Creation out of the top sector is truncated away.
  Mat annihilation(int site) const;
  Mat creation(int site) const { return annihilation(site).adjoint(); }
  /// Diagonal of the site number operator in the occupation basis.
  RVec number_diagonal(int site) const;
  RVec total_number_diagonal() const;

  /// Probability of each particle-number sector.
  std::vector<double> sector_weights(const Vec& psi) const;

 private:
  int sites_;
  Statistics stats_;
  int nmax_;
  std::vector<Occupation> basis_;
  std::vector<Index> sector_dims_, sector_offsets_;
  std::map<Occupation, Index> index_;
};

/// Isometry from the N-particle (anti)symmetric sector to (C^L)^{tensor N};
/// columns follow the sector order of FockSpace.
Mat symmetrizer_isometry(int lattice_sites, int particles, Statistics statistics);

/// sum_i Lambda_i(r) on (C^L)^{tensor N}, Lambda acting on factor i.
Mat summed_single_rate(const Mat& single, int particles);

/// sum_i Lambda_i(r) compressed to the (anti)symmetric subspace, one operator
/// per flash location.
std::vector<Mat> symmetric_flash_rate(const std::vector<Mat>& single, int particles, Statistics statistics);

/// Block-diagonal direct sum over sectors 0..N_max of symmetric_flash_rate.
std::vector<Mat> fock_flash_rate(const FockSpace& space, const std::vector<Mat>& single);

/// Single-particle Gaussian multiplication rates (1/tau) g(r - x) on a 1D
/// lattice, one L x L matrix per flash site. `weight` scales the rate (for
/// mass-proportional variants; 1 by default).
std::vector<Mat> single_particle_rates(const GridSpec& lattice, double sigma, double tau,
                                       const FlashSites& sites, double weight = 1.0);

/// (1/tau) sum_x g(r - x) n_x, diagonal in the occupation basis.
std::vector<RVec> smeared_number_density(const FockSpace& space, const GridSpec& lattice, double sigma,
                                         double tau, const FlashSites& sites, double weight = 1.0);

/// -J sum (c+_j c_{j+1} + h.c.) + sum V_j n_j
Mat hopping_hamiltonian(const FockSpace& space, double hopping, const std::vector<double>& onsite = {});
/// g sum_j (c+_j c+_{j+1} + h.c.): changes the particle number by two.
Mat pair_creation_term(const FockSpace& space, double strength);

/// Flash model on Fock space with a single flash type, rates from the smeared
/// number density.
GrwModel fock_model(const FockSpace& space, const GridSpec& lattice, const Mat& hamiltonian, double sigma,
                    double tau, double t0 = 0.0, double weight = 1.0);

}  // namespace flashsim
