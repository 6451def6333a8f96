#include "doctest.h"

#include <cmath>

#include "flashsim/fock.hpp"
#include "flashsim/quadrature.hpp"
#include "flashsim/stats.hpp"
#include "test_util.hpp"

using namespace flashsim;

namespace {

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Transposition of tensor factors a and b on (C^l)^{tensor n}.
Mat swap_factors(Index l, int n, int a, int b) {
  Index full = 1;
  for (int i = 0; i < n; ++i) full *= l;
  Mat p = Mat::Zero(full, full);
  for (Index idx = 0; idx < full; ++idx) {
    auto digits = unravel(idx, n, static_cast<int>(l));
    std::swap(digits[a], digits[b]);
    Index out = 0;
    for (int d : digits) out = out * l + d;
    p(out, idx) = 1.0;
  }
  return p;
}

Mat random_positive(Index n, std::uint64_t seed) {
  const Mat a = testutil::random_matrix(n, seed);
  return a * a.adjoint();
}

struct Lattice {
  GridSpec grid;
  FlashSites sites;
  double sigma, tau;
};

Lattice make_lattice(int l, double sigma = 1.0, double tau = 1.0) {
  const GridSpec g = GridSpec::centered(1, l, 0.5);
  return {g, FlashSites::around(g, sigma), sigma, tau};
}

}  // namespace

TEST_CASE("Fock space sector dimensions") {
  const FockSpace f(6, Statistics::fermion, 3);
  CHECK(f.sector_dims() == std::vector<Index>{1, 6, 15, 20});
  CHECK(f.dim() == 42);
  const FockSpace b(6, Statistics::boson, 3);
  CHECK(b.sector_dims() == std::vector<Index>{1, 6, 21, 56});
  CHECK(b.dim() == 84);
  CHECK(FockSpace::with_default_truncation(2, Statistics::fermion).max_particles() == 2);
  CHECK(FockSpace::with_default_truncation(5, Statistics::boson).max_particles() == 3);
  CHECK_THROWS_AS(FockSpace(3, Statistics::fermion, 4), InvariantError);
  for (Index i = 0; i < b.dim(); ++i) CHECK(b.index_of(b.occupation(i)) == i);
  CHECK(b.index_of({4, 0, 0, 0, 0, 0}) == -1);
}

TEST_CASE("canonical (anti)commutation below the truncation") {
  for (Statistics st : {Statistics::fermion, Statistics::boson}) {
    const FockSpace f(4, st, 3);
    // states with N < N_max are not affected by truncation
    std::vector<Index> low;
    for (Index i = 0; i < f.dim(); ++i)
      if (f.particle_number(i) < f.max_particles()) low.push_back(i);
    const double s = st == Statistics::fermion ? 1.0 : -1.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const Mat c = f.annihilation(i) * f.creation(j) + s * f.creation(j) * f.annihilation(i);
        for (Index a : low)
          for (Index b : low) CHECK(std::abs(c(a, b) - (i == j && a == b ? 1.0 : 0.0)) < 1e-14);
        if (st == Statistics::fermion) {
          const Mat aa = f.annihilation(i) * f.annihilation(j) + f.annihilation(j) * f.annihilation(i);
          CHECK(max_abs(aa) < 1e-14);
        }
      }
    for (int i = 0; i < 4; ++i) {
      const Mat n = f.creation(i) * f.annihilation(i);
      CHECK((n.diagonal().real() - f.number_diagonal(i)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("symmetric rate for one particle is the single-particle rate") {
  std::vector<Mat> single{random_positive(5, 1), random_positive(5, 2)};
  for (Statistics st : {Statistics::fermion, Statistics::boson}) {
    const auto out = symmetric_flash_rate(single, 1, st);
    for (std::size_t r = 0; r < single.size(); ++r) CHECK(max_abs(out[r] - single[r]) < 1e-15);
  }
}

TEST_CASE("summed rate is permutation invariant and the isometry is isometric") {
  const Mat s = random_positive(3, 7);
  const Mat sum = summed_single_rate(s, 3);
  for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {1, 2}}) {
    const Mat p = swap_factors(3, 3, a, b);
    CHECK(max_abs(p * sum * p.adjoint() - sum) < 1e-12);
  }
  for (Statistics st : {Statistics::fermion, Statistics::boson}) {
    const Mat v = symmetrizer_isometry(3, 3, st);
    CHECK(max_abs(v.adjoint() * v - Mat::Identity(v.cols(), v.cols())) < 1e-13);
    const double sign = st == Statistics::fermion ? -1.0 : 1.0;
    CHECK(max_abs(swap_factors(3, 3, 0, 2) * v - sign * v) < 1e-13);
  }
  CHECK_THROWS_AS(symmetrizer_isometry(2, 3, Statistics::fermion), InvariantError);
}

TEST_CASE("two fermions on four sites: Slater-basis oracle") {
  const Mat lam = random_positive(4, 11);
  const FockSpace f(4, Statistics::fermion, 2);
  const Mat out = symmetric_flash_rate({lam}, 2, Statistics::fermion)[0];
  const Index off = f.sector_offset(2);
  auto pair_of = [&](Index c) {
    const Occupation& o = f.occupation(off + c);
    std::vector<int> p;
    for (int s = 0; s < 4; ++s)
      if (o[s]) p.push_back(s);
    return p;
  };
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  for (Index r = 0; r < 6; ++r)
    for (Index c = 0; c < 6; ++c) {
      const auto ij = pair_of(r), kl = pair_of(c);
      const int i = ij[0], j = ij[1], k = kl[0], l = kl[1];
      const cplx expect = lam(i, k) * d(j, l) + lam(j, l) * d(i, k) - lam(i, l) * d(j, k) - lam(j, k) * d(i, l);
      CHECK(std::abs(out(r, c) - expect) < 1e-12);
    }
}

TEST_CASE("direct-sum rate equals the smeared number density") {
  for (Statistics st : {Statistics::fermion, Statistics::boson}) {
    const Lattice lat = make_lattice(6, 0.8, 2.0);
    const FockSpace f(6, st, 3);
    const auto sum = fock_flash_rate(f, single_particle_rates(lat.grid, lat.sigma, lat.tau, lat.sites));
    const auto dens = smeared_number_density(f, lat.grid, lat.sigma, lat.tau, lat.sites);
    REQUIRE(sum.size() == dens.size());
    double worst = 0;
    for (std::size_t r = 0; r < sum.size(); ++r) {
      const Mat diff = sum[r] - Mat(dens[r].cast<cplx>().asDiagonal());
      worst = std::max(worst, diff.operatorNorm());
    }
    CHECK(worst <= 1e-10);
    // vacuum block is zero, and the blocks do not mix sectors
    const RVec n = f.total_number_diagonal();
    for (const Mat& m : sum) {
      CHECK(std::abs(m(0, 0)) == 0.0);
      CHECK(max_abs(m * n.cast<cplx>().asDiagonal() - n.cast<cplx>().asDiagonal() * m) < 1e-14);
    }
  }
}

TEST_CASE("smeared number density: expectations and location sum") {
  const Lattice lat = make_lattice(5, 1.0, 1.5);
  const FockSpace f(5, Statistics::boson, 3);
  const auto dens = smeared_number_density(f, lat.grid, lat.sigma, lat.tau, lat.sites);
  for (const RVec& d : dens) CHECK(d(0) == 0.0);

  const Vec phi = testutil::random_vector(5, 3);
  Vec one = Vec::Zero(f.dim());
  for (int x = 0; x < 5; ++x) {
    Occupation o(5, 0);
    o[x] = 1;
    one(f.index_of(o)) = phi(x);
  }
  for (Index s = 0; s < lat.sites.size(); s += 3) {
    const Point r = lat.sites.location(s);
    double expect = 0;
    for (int x = 0; x < 5; ++x)
      expect += gaussian_density(squared_distance(r, grid_point(lat.grid, x)), lat.sigma, 1) * std::norm(phi(x));
    expect /= lat.tau;
    const double got = (one.conjugate().cwiseProduct(dens[s].cast<cplx>().cwiseProduct(one))).sum().real();
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }

  RVec total = RVec::Zero(f.dim());
  for (const RVec& d : dens) total += d * lat.grid.spacing;
  CHECK((total - f.total_number_diagonal() / lat.tau).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("toy Hamiltonians") {
  const FockSpace f(4, Statistics::boson, 3);
  const Mat hop = hopping_hamiltonian(f, 1.0, {0.1, -0.2, 0.3, 0.0});
  CHECK(is_hermitian(hop, 1e-14));
  const Mat n = f.total_number_diagonal().cast<cplx>().asDiagonal();
  CHECK(max_abs(hop * n - n * hop) < 1e-13);
  const Mat pair = pair_creation_term(f, 0.3);
  CHECK(is_hermitian(pair, 1e-14));
  CHECK(max_abs(pair * n - n * pair) > 0.1);
  CHECK_THROWS_AS(hopping_hamiltonian(f, 1.0, {1.0}), DimensionError);
}

TEST_CASE("number-conserving flash process keeps sector probabilities") {
  const Lattice lat = make_lattice(4, 1.0, 1.0);
  const FockSpace f(4, Statistics::boson, 3);
  const GrwModel m = fock_model(f, lat.grid, hopping_hamiltonian(f, 1.0), lat.sigma, lat.tau);
  Vec psi = testutil::random_vector(f.dim(), 21);
  const StateVector start(psi);
  const auto w0 = f.sector_weights(psi);

  // every collapse operator commutes with the sector projectors
  FlashHistory h(1, 0.0);
  h.per_type[0].push_back(m.event(0.4, 0, 9));
  h.per_type[0].push_back(m.event(1.1, 0, 12));
  const Mat k = history_operator(m, h).matrix();
  const RVec n = f.total_number_diagonal();
  const Mat nd = n.cast<cplx>().asDiagonal();
  CHECK(max_abs(k * nd - nd * k) < 1e-12);

  // ensemble average of the sector weights over sampled trajectories
  const int trials = 1500;
  std::vector<std::vector<double>> per(f.max_particles() + 1);
  for (int j = 0; j < trials; ++j) {
    Rng rng = Rng::stream(101, j);
    const FlashHistory fh = sample_history(m, start, 2.0, rng);
    const auto w = f.sector_weights(conditional_state(m, start, fh, 2.0).amplitudes());
    for (std::size_t s = 0; s < w.size(); ++s) per[s].push_back(w[s]);
  }
  for (std::size_t s = 0; s < w0.size(); ++s) {
    const auto est = stats::mean_with_error(per[s]);
    CHECK(std::abs(est.mean - w0[s]) < 4 * est.standard_error + 1e-12);
  }
}

TEST_CASE("pair creation: sectors mix but densities still normalize") {
  const Lattice lat = make_lattice(3, 1.0, 1.0);
  const FockSpace f(3, Statistics::fermion, 3);
  const Mat h = hopping_hamiltonian(f, 1.0) + pair_creation_term(f, 0.8);
  const GrwModel m = fock_model(f, lat.grid, h, lat.sigma, lat.tau);
  Vec v = Vec::Zero(f.dim());
  v(0) = 1.0;  // vacuum
  const StateVector vac(v);
  const double horizon = 2.0;
  const Vec later = m.evolve(1.0, v);
  CHECK(f.sector_weights(later / later.norm())[2] > 1e-3);

  const QuadratureRule q = composite_gauss_legendre(0.0, horizon, 16, 10);
  double total = survival_probability(m, vac, horizon);
  for (std::size_t j = 0; j < q.nodes.size(); ++j)
    for (Index s = 0; s < m.rates().site_count(); ++s) {
      FlashHistory fh(1, 0.0);
      fh.per_type[0].push_back(m.event(q.nodes[j], 0, s));
      total += q.weights[j] * m.rates().cell_volume() * joint_flash_density(m, vac, fh);
    }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("superposed particle numbers give non-exponential waiting times") {
  const Lattice lat = make_lattice(4, 1.0, 1.0);
  const FockSpace f(4, Statistics::boson, 3);
  const GrwModel m = fock_model(f, lat.grid, hopping_hamiltonian(f, 1.0), lat.sigma, lat.tau);
  CHECK_FALSE(m.scalar_total_rate().has_value());
  Vec v = Vec::Zero(f.dim());
  v(f.index_of({1, 0, 0, 0})) = std::sqrt(0.5);
  v(f.index_of({0, 1, 1, 1})) = std::sqrt(0.5);
  const StateVector psi(v);
  const double mean_rate = 2.0 / lat.tau;  // <N> / tau
  double worst = 0;
  for (double t = 0.1; t <= 4.0; t += 0.1) {
    const double s = survival_probability(m, psi, t);
    CHECK(s == doctest::Approx(0.5 * std::exp(-t / lat.tau) + 0.5 * std::exp(-3 * t / lat.tau)).epsilon(1e-9));
    worst = std::max(worst, std::abs(s - std::exp(-mean_rate * t)));
  }
  CHECK(worst > 10 * 1e-6);
}
