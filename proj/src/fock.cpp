#include "flashsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace flashsim {

std::string to_string(Statistics s) { return s == Statistics::fermion ? "fermion" : "boson"; }

Statistics statistics_from_string(const std::string& s) {
  if (s == "fermion" || s == "fermions") return Statistics::fermion;
  if (s == "boson" || s == "bosons") return Statistics::boson;
  throw InvariantError("unknown statistics '" + s + "' (expected fermion or boson)");
}

FockSpace::FockSpace(int lattice_sites, Statistics statistics, int max_particles)
    : sites_(lattice_sites), stats_(statistics), nmax_(max_particles) {
  if (sites_ < 1) throw InvariantError("Fock space needs at least one lattice site");
  if (nmax_ < 0) throw InvariantError("particle-number truncation must be non-negative");
  if (stats_ == Statistics::fermion && nmax_ > sites_)
    throw InvariantError("fermion truncation exceeds the number of lattice sites");

  Occupation occ(sites_, 0);
  // fill sites left to right; yields lexicographically descending order per sector
  std::function<void(int, int)> fill = [&](int site, int left) {
    if (site == sites_ - 1) {
      if (stats_ == Statistics::fermion && left > 1) return;
      occ[site] = left;
      basis_.push_back(occ);
      return;
    }
    const int top = stats_ == Statistics::fermion ? std::min(left, 1) : left;
    for (int k = top; k >= 0; --k) {
      occ[site] = k;
      fill(site + 1, left - k);
    }
  };
  for (int n = 0; n <= nmax_; ++n) {
    sector_offsets_.push_back(static_cast<Index>(basis_.size()));
    fill(0, n);
    sector_dims_.push_back(static_cast<Index>(basis_.size()) - sector_offsets_.back());
  }
  for (Index i = 0; i < dim(); ++i) index_[basis_[i]] = i;
}

FockSpace FockSpace::with_default_truncation(int lattice_sites, Statistics statistics) {
  return FockSpace(lattice_sites, statistics, statistics == Statistics::fermion ? std::min(lattice_sites, 3) : 3);
}

int FockSpace::particle_number(Index i) const {
  const Occupation& o = basis_.at(i);
  return std::accumulate(o.begin(), o.end(), 0);
}

Index FockSpace::index_of(const Occupation& occ) const {
  auto it = index_.find(occ);
  return it == index_.end() ? -1 : it->second;
}

Mat FockSpace::annihilation(int site) const {
  if (site < 0 || site >= sites_) throw DimensionError("lattice site out of range");
  Mat a = Mat::Zero(dim(), dim());
  for (Index i = 0; i < dim(); ++i) {
    Occupation o = basis_[i];
    const int n = o[site];
    if (n == 0) continue;
    double coeff = std::sqrt(double(n));
    if (stats_ == Statistics::fermion) {
      const int before = std::accumulate(o.begin(), o.begin() + site, 0);
      if (before % 2) coeff = -coeff;
    }
    o[site] -= 1;
    a(index_of(o), i) = coeff;
  }
  return a;
}

RVec FockSpace::number_diagonal(int site) const {
  if (site < 0 || site >= sites_) throw DimensionError("lattice site out of range");
  RVec d(dim());
  for (Index i = 0; i < dim(); ++i) d(i) = basis_[i][site];
  return d;
}

RVec FockSpace::total_number_diagonal() const {
  RVec d(dim());
  for (Index i = 0; i < dim(); ++i) d(i) = particle_number(i);
  return d;
}

std::vector<double> FockSpace::sector_weights(const Vec& psi) const {
  if (psi.size() != dim()) throw DimensionError("state dimension differs from the Fock space");
  std::vector<double> w(nmax_ + 1, 0.0);
  for (Index i = 0; i < dim(); ++i) w[particle_number(i)] += std::norm(psi(i));
  return w;
}

Mat symmetrizer_isometry(int lattice_sites, int particles, Statistics statistics) {
  if (particles < 1) throw InvariantError("symmetrizer needs at least one particle");
  if (statistics == Statistics::fermion && particles > lattice_sites)
    throw InvariantError("no antisymmetric states: more fermions than lattice sites");
  const FockSpace space(lattice_sites, statistics, particles);
  const Index off = space.sector_offset(particles), cols = space.sector_dim(particles);
  Index full = 1;
  for (int i = 0; i < particles; ++i) full *= lattice_sites;
  Mat v = Mat::Zero(full, cols);

  const double nfact = std::tgamma(particles + 1.0);
  for (Index c = 0; c < cols; ++c) {
    const Occupation& occ = space.occupation(off + c);
    std::vector<int> list;
    double mult = 1.0;
    for (int s = 0; s < lattice_sites; ++s) {
      for (int k = 0; k < occ[s]; ++k) list.push_back(s);
      mult *= std::tgamma(occ[s] + 1.0);
    }
    const double amp = std::sqrt(mult / nfact);
    // distinct arrangements of the sorted multiset
    do {
      Index idx = 0;
      int inversions = 0;
      for (int k = 0; k < particles; ++k) {
        idx = idx * lattice_sites + list[k];
        for (int l = k + 1; l < particles; ++l) inversions += list[k] > list[l];
      }
      const double sign = (statistics == Statistics::fermion && inversions % 2) ? -1.0 : 1.0;
      v(idx, c) += sign * amp;
    } while (std::next_permutation(list.begin(), list.end()));
  }
  return v;
}

Mat summed_single_rate(const Mat& single, int particles) {
  if (single.rows() != single.cols()) throw DimensionError("single-particle rate must be square");
  if (particles < 1) throw InvariantError("need at least one particle");
  const Index l = single.rows();
  Index full = 1;
  for (int i = 0; i < particles; ++i) full *= l;
  Mat total = Mat::Zero(full, full);
  for (int i = 0; i < particles; ++i) {
    Index before = 1, after = 1;
    for (int k = 0; k < i; ++k) before *= l;
    for (int k = i + 1; k < particles; ++k) after *= l;
    total += kron(kron(Mat(Mat::Identity(before, before)), single), Mat(Mat::Identity(after, after)));
  }
  return total;
}

std::vector<Mat> symmetric_flash_rate(const std::vector<Mat>& single, int particles, Statistics statistics) {
  if (single.empty()) return {};
  const Index l = single.front().rows();
  const Mat v = symmetrizer_isometry(static_cast<int>(l), particles, statistics);
  std::vector<Mat> out;
  out.reserve(single.size());
  for (const Mat& s : single) {
    if (s.rows() != l || s.cols() != l) throw DimensionError("single-particle rates differ in dimension");
    out.push_back(particles == 1 ? s : Mat(v.adjoint() * summed_single_rate(s, particles) * v));
  }
  return out;
}

std::vector<Mat> fock_flash_rate(const FockSpace& space, const std::vector<Mat>& single) {
  std::vector<Mat> out(single.size(), Mat::Zero(space.dim(), space.dim()));
  for (int n = 1; n <= space.max_particles(); ++n) {
    const std::vector<Mat> block = symmetric_flash_rate(single, n, space.statistics());
    const Index off = space.sector_offset(n), d = space.sector_dim(n);
    for (std::size_t r = 0; r < single.size(); ++r) out[r].block(off, off, d, d) = block[r];
  }
  return out;
}

std::vector<Mat> single_particle_rates(const GridSpec& lattice, double sigma, double tau,
                                       const FlashSites& sites, double weight) {
  const std::vector<RateOperator> diag = gaussian_flash_rates(lattice, 1, 0, sigma, tau, sites);
  std::vector<Mat> out;
  out.reserve(diag.size());
  for (const RateOperator& r : diag) out.push_back(weight * r.matrix());
  return out;
}

std::vector<RVec> smeared_number_density(const FockSpace& space, const GridSpec& lattice, double sigma,
                                         double tau, const FlashSites& sites, double weight) {
  if (lattice.size() != space.lattice_sites()) throw DimensionError("lattice and Fock space differ in size");
  std::vector<RVec> numbers;
  for (int x = 0; x < space.lattice_sites(); ++x) numbers.push_back(space.number_diagonal(x));
  std::vector<RVec> out;
  out.reserve(sites.size());
  for (Index s = 0; s < sites.size(); ++s) {
    const Point r = sites.location(s);
    RVec d = RVec::Zero(space.dim());
    for (int x = 0; x < space.lattice_sites(); ++x)
      d += gaussian_density(squared_distance(r, grid_point(lattice, x)), sigma, lattice.dim) * numbers[x];
    out.push_back(weight / tau * d);
  }
  return out;
}

Mat hopping_hamiltonian(const FockSpace& space, double hopping, const std::vector<double>& onsite) {
  const int l = space.lattice_sites();
  if (!onsite.empty() && static_cast<int>(onsite.size()) != l)
    throw DimensionError("onsite potential needs one value per lattice site");
  std::vector<Mat> a;
  for (int x = 0; x < l; ++x) a.push_back(space.annihilation(x));
  Mat h = Mat::Zero(space.dim(), space.dim());
  for (int x = 0; x + 1 < l; ++x) {
    const Mat t = a[x].adjoint() * a[x + 1];
    h -= hopping * (t + t.adjoint());
  }
  if (!onsite.empty())
    for (int x = 0; x < l; ++x) h.diagonal() += onsite[x] * space.number_diagonal(x).cast<cplx>();
  return h;
}

Mat pair_creation_term(const FockSpace& space, double strength) {
  const int l = space.lattice_sites();
  Mat p = Mat::Zero(space.dim(), space.dim());
  for (int x = 0; x + 1 < l; ++x) p += space.creation(x) * space.creation(x + 1);
  return strength * (p + p.adjoint());
}

GrwModel fock_model(const FockSpace& space, const GridSpec& lattice, const Mat& hamiltonian, double sigma,
                    double tau, double t0, double weight) {
  const FlashSites sites = FlashSites::around(lattice, sigma);
  std::vector<RateOperator> rates;
  for (RVec& d : smeared_number_density(space, lattice, sigma, tau, sites, weight)) rates.emplace_back(std::move(d));
  return GrwModel(OperatorMatrix(hamiltonian, OperatorKind::hermitian), FlashRateField(sites, {std::move(rates)}),
                  sigma, tau, lattice, 1, t0);
}

}  // namespace flashsim
