#include "doctest.h"

#include <cmath>

#include "flashsim/multitime.hpp"
#include "test_util.hpp"

using namespace flashsim;

namespace {

const GridSpec kGrid = GridSpec::centered(1, 8, 0.5);

GrwModel system_model(double mass, double tau = 1.0, double sigma = 0.75) {
  OperatorMatrix h = mass > 0 ? grid_hamiltonian(kGrid, 1, mass) : OperatorMatrix::zero(kGrid.size());
  return GrwModel::original(kGrid, 1, sigma, tau, h);
}

MultiSystem pair(double m1 = 1.0, double m2 = 2.0) { return MultiSystem({system_model(m1), system_model(m2)}); }

FlashHistory single(const GrwModel& m, std::vector<std::pair<double, Index>> flashes) {
  FlashHistory h(1, m.t0());
  for (auto [t, s] : flashes) h.per_type[0].push_back(m.event(t, 0, s));
  return h;
}

FlashHistory joint(const FlashHistory& a, const FlashHistory& b) {
  FlashHistory h(2, a.t0);
  h.per_type[0] = a.per_type[0];
  h.per_type[1] = b.per_type[0];
  for (auto& e : h.per_type[1]) e.type = 1;
  return h;
}

}  // namespace

TEST_CASE("product states factorize the joint density") {
  const MultiSystem sys = pair();
  const Vec a = gaussian_packet(kGrid, {-0.5}, 0.6, 1.0), b = gaussian_packet(kGrid, {0.7}, 0.5);
  const FlashHistory h1 = single(sys.model(0), {{0.3, 9}, {1.2, 12}});
  const FlashHistory h2 = single(sys.model(1), {{0.8, 11}});
  const double joint_d = multitype_joint_density(sys, StateVector(kron(a, b)), joint(h1, h2));
  const double d1 = joint_flash_density(sys.model(0), StateVector(a), h1);
  const double d2 = joint_flash_density(sys.model(1), StateVector(b), h2);
  CHECK(std::abs(joint_d - d1 * d2) <= 1e-12 * std::max(1.0, d1 * d2));
  CHECK(multitype_joint_density(sys, StateVector(kron(a, b)), FlashHistory(2, 0.0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("entangled joint density matches a direct contraction") {
  const MultiSystem sys = pair();
  const StateVector psi(testutil::random_vector(sys.dim(), 8));
  const FlashHistory h1 = single(sys.model(0), {{0.2, 10}, {0.9, 13}});
  const FlashHistory h2 = single(sys.model(1), {{0.5, 8}});
  const Mat k1 = history_operator(sys.model(0), h1).matrix();
  const Mat k2 = history_operator(sys.model(1), h2).matrix();
  const Mat e = kron(Mat(k1.adjoint() * k1), Mat(k2.adjoint() * k2));
  const double brute = (psi.amplitudes().adjoint() * e * psi.amplitudes())(0, 0).real();
  CHECK(std::abs(multitype_joint_density(sys, psi, joint(h1, h2)) - brute) <= 1e-10 * std::max(1.0, brute));
}

TEST_CASE("shift and condition") {
  const MultiSystem sys = pair();
  const StateVector psi(testutil::random_vector(sys.dim(), 13));
  const double delta = 0.6;
  const FlashHistory none(1, 0.0);

  SUBCASE("no past flashes") {
    Vec expect = sys.evolve_on(0, delta, psi.amplitudes());
    expect.normalize();
    CHECK((shift_and_condition(sys, psi, delta, none).amplitudes() - expect).norm() < 1e-13);
  }
  SUBCASE("free original model leaves the state unchanged") {
    const MultiSystem free_sys({system_model(0.0), system_model(1.0)});
    CHECK((shift_and_condition(free_sys, psi, delta, none).amplitudes() - psi.amplitudes()).norm() < 1e-13);
  }
  SUBCASE("one past flash equals the single-system conditional state") {
    const Vec a = gaussian_packet(kGrid, {0.2}, 0.7, -0.5), b = testutil::random_vector(8, 2);
    const FlashHistory past = single(sys.model(0), {{0.25, 10}});
    const StateVector got = shift_and_condition(sys, StateVector(kron(a, b)), delta, past);
    const StateVector c = conditional_state(sys.model(0), StateVector(a), past, delta);
    CHECK((got.amplitudes() - kron(c.amplitudes(), b)).norm() <= 1e-10);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(shift_and_condition(sys, psi, -0.1, none), InvariantError);
    CHECK_THROWS_AS(shift_and_condition(sys, psi, delta, single(sys.model(0), {{0.7, 10}})), InvariantError);
  }
}

TEST_CASE("covariance under relative time translation") {
  const MultiSystem sys = pair();
  SUBCASE("zero shift is exact") {
    const StateVector psi(testutil::random_vector(sys.dim(), 3));
    const auto tests = covariance_test_set(sys, 0.0, 2.0, 10, 4);
    const auto rep = covariance_check(sys, psi, 0.0, tests);
    CHECK(rep.max_abs_diff <= 1e-14 * std::max(1.0, *std::max_element(rep.lhs.begin(), rep.lhs.end())));
  }
  SUBCASE("product state") {
    const Vec a = gaussian_packet(kGrid, {-0.3}, 0.6, 0.8), b = gaussian_packet(kGrid, {0.4}, 0.8);
    const auto tests = covariance_test_set(sys, 0.7, 2.5, 20, 5);
    const auto rep = covariance_check(sys, StateVector(kron(a, b)), 0.7, tests);
    CHECK(rep.max_abs_diff <= 1e-10);
  }
  SUBCASE("entangled state") {
    const double tau = 1.0;
    const StateVector psi(testutil::random_vector(sys.dim(), 17));
    const auto tests = covariance_test_set(sys, 0.7 * tau, 2.5 * tau, 24, 6);
    const auto rep = covariance_check(sys, psi, 0.7 * tau, tests);
    CHECK(rep.lhs.size() == 24);
    CHECK(rep.max_abs_diff <= 1e-8);
    // the check is not vacuous: densities are of order one
    CHECK(*std::max_element(rep.lhs.begin(), rep.lhs.end()) > 1e-3);
  }
}

TEST_CASE("type-2 marginal depends on system 1 only through the reduced state") {
  const MultiSystem a = pair(1.0, 2.0), b = pair(3.0, 2.0);
  const Vec psi = testutil::random_vector(64, 31);
  // local unitary on system 1 preserves the reduced state of system 2
  const Mat u = OperatorMatrix(testutil::random_hermitian(8, 4)).matrix();
  Eigen::SelfAdjointEigenSolver<Mat> es(u);
  const Mat unitary = es.eigenvectors() * es.eigenvalues().unaryExpr([](double x) { return std::polar(1.0, x); })
                                               .asDiagonal() * es.eigenvectors().adjoint();
  const Vec rotated = a.apply_on(0, psi, unitary);
  const FlashHistory h2 = single(a.model(1), {{0.3, 9}, {1.7, 14}});
  const double ref = marginal_density(a, StateVector(psi), 1, h2);
  CHECK(std::abs(marginal_density(b, StateVector(psi), 1, h2) - ref) <= 1e-8);
  CHECK(std::abs(marginal_density(a, StateVector(rotated), 1, h2) - ref) <= 1e-8);
}

TEST_CASE("interacting Hamiltonians are rejected") {
  std::vector<GrwModel> models{system_model(1.0), system_model(2.0)};
  const MultiSystem sys(models);
  const Mat h = sys.total_hamiltonian();
  CHECK_NOTHROW(MultiSystem(models, h));
  Mat coupled = h;
  coupled(0, 9) += 0.1;
  coupled(9, 0) += 0.1;
  CHECK_THROWS_AS(MultiSystem(models, coupled), InvariantError);
  CHECK_THROWS_AS(MultiSystem(models, Mat::Identity(3, 3)), DimensionError);
}
