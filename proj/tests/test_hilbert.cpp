#include "doctest.h"
#include "test_util.hpp"

#include <cmath>

#include "flashsim/hilbert.hpp"

using namespace flashsim;

TEST_CASE("tensor_product identity and diagonal cases") {
  auto i6 = tensor_product(OperatorMatrix::identity(2), OperatorMatrix::identity(3));
  CHECK((i6.matrix() - Mat::Identity(6, 6)).norm() == 0.0);

  Mat a = Mat::Zero(2, 2), b = Mat::Zero(2, 2);
  a.diagonal() << 1, 2;
  b.diagonal() << 3, 4;
  Mat expected = Mat::Zero(4, 4);
  expected.diagonal() << 3, 4, 6, 8;
  CHECK((kron(a, b) - expected).norm() == 0.0);
}

TEST_CASE("tensor_product acts factorwise on product vectors") {
  const Mat a = testutil::random_matrix(2, 1), b = testutil::random_matrix(2, 2);
  const Vec u = testutil::random_vector(2, 3), v = testutil::random_vector(2, 4);
  const Vec lhs = kron(a, b) * kron(u, v);
  const Vec rhs = kron(Vec(a * u), Vec(b * v));
  CHECK((lhs - rhs).norm() < 1e-13);
}

TEST_CASE("tensor_product is associative") {
  const Mat a = testutil::random_matrix(2, 5), b = testutil::random_matrix(3, 6), c = testutil::random_matrix(2, 7);
  CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).norm() < 1e-12);
}

TEST_CASE("partial_trace examples") {
  SUBCASE("product of density matrices") {
    const Vec u = testutil::random_vector(3, 11), v = testutil::random_vector(2, 12);
    const Mat r1 = u * u.adjoint(), r2 = v * v.adjoint();
    CHECK((partial_trace(kron(r1, r2), 0, {3, 2}) - r1).norm() < 1e-14);
    CHECK((partial_trace(kron(r1, r2), 1, {3, 2}) - r2).norm() < 1e-14);
  }
  SUBCASE("Bell state reduces to the maximally mixed qubit") {
    Vec bell = Vec::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const DensityMatrix red = partial_trace(DensityMatrix::pure(bell), 0, {2, 2});
    CHECK((red.matrix() - 0.5 * Mat::Identity(2, 2)).norm() < 1e-15);
    CHECK((reduced_density(bell, 0, {2, 2}) - 0.5 * Mat::Identity(2, 2)).norm() < 1e-15);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(partial_trace(Mat(Mat::Identity(6, 6)), 0, {2, 2}), DimensionError);
    CHECK_THROWS_AS(partial_trace(Mat(Mat::Identity(4, 4)), 2, {2, 2}), DimensionError);
  }
}

TEST_CASE("partial_trace of a three-factor system keeps the middle factor") {
  const Vec a = testutil::random_vector(2, 21), b = testutil::random_vector(3, 22), c = testutil::random_vector(2, 23);
  const Vec psi = kron(kron(a, b), c);
  const Mat rho = psi * psi.adjoint();
  CHECK((partial_trace(rho, 1, {2, 3, 2}) - b * b.adjoint()).norm() < 1e-14);
  CHECK((reduced_density(psi, 1, {2, 3, 2}) - b * b.adjoint()).norm() < 1e-14);
}

TEST_CASE("partial_trace commutes with local conjugation") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Vec psi = testutil::random_vector(6, 100 + seed);
    const Mat rho = psi * psi.adjoint();
    const Mat a = testutil::random_matrix(3, 200 + seed);
    const Mat a_full = kron(a, Mat(Mat::Identity(2, 2)));
    const Mat lhs = partial_trace(Mat(a_full * rho * a_full.adjoint()), 0, {3, 2});
    const Mat rhs = a * partial_trace(rho, 0, {3, 2}) * a.adjoint();
    CHECK((lhs - rhs).norm() < 1e-10);
  }
}

TEST_CASE("positive_sqrt") {
  CHECK((positive_sqrt(Mat(Mat::Identity(3, 3))) - Mat::Identity(3, 3)).norm() < 1e-15);
  Mat d = Mat::Zero(2, 2);
  d.diagonal() << 4, 9;
  Mat e = Mat::Zero(2, 2);
  e.diagonal() << 2, 3;
  CHECK((positive_sqrt(d) - e).norm() < 1e-14);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Mat m = testutil::random_matrix(3, 300 + seed);
    const Mat p = m.adjoint() * m;
    const Mat s = positive_sqrt(p);
    CHECK((s * s - p).norm() <= 1e-10);
    CHECK(is_hermitian(s));
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("positive_sqrt of an orthogonal projector is the projector") {
  const Vec u = testutil::random_vector(4, 31), v = testutil::random_vector(4, 32);
  Mat basis(4, 2);
  basis.col(0) = u;
  basis.col(1) = v;
  const Eigen::HouseholderQR<Mat> qr(basis);
  const Mat q = qr.householderQ() * Mat::Identity(4, 2);
  const Mat proj = q * q.adjoint();
  CHECK((positive_sqrt(proj) - proj).norm() < 1e-12);
}

TEST_CASE("positive_sqrt clamps roundoff but rejects negative spectra") {
  Mat p = Mat::Zero(2, 2);
  p.diagonal() << 1.0, -1e-14;
  CHECK_NOTHROW(positive_sqrt(p));
  p(1, 1) = -1e-3;
  CHECK_THROWS_AS(positive_sqrt(p), NumericalError);
}

TEST_CASE("OperatorMatrix kind validation") {
  CHECK_THROWS_AS(OperatorMatrix(testutil::random_matrix(3, 1), OperatorKind::hermitian), InvariantError);
  CHECK_THROWS_AS(OperatorMatrix(testutil::random_matrix(3, 1), OperatorKind::unitary), InvariantError);
  Mat neg = -Mat::Identity(2, 2);
  CHECK_THROWS_AS(OperatorMatrix(neg, OperatorKind::positive), InvariantError);
  CHECK_NOTHROW(OperatorMatrix(testutil::random_hermitian(3, 1), OperatorKind::hermitian));
}

TEST_CASE("semigroup_propagator") {
  SUBCASE("t = 0 gives the identity") {
    CHECK((semigroup_propagator(testutil::random_matrix(4, 1), 0.0) - Mat::Identity(4, 4)).norm() == 0.0);
  }
  SUBCASE("negative time gives the zero operator") {
    CHECK(semigroup_propagator(testutil::random_matrix(4, 1), -0.1).norm() == 0.0);
  }
  SUBCASE("scalar rate, no Hamiltonian: exp(-t / 2 tau)") {
    const double tau = 10.0;
    const Mat g = -0.5 / tau * Mat::Identity(3, 3);
    for (double t : {0.1, 1.0, 7.5}) {
      const Mat w = semigroup_propagator(g, t);
      CHECK((w - std::exp(-t / (2 * tau)) * Mat::Identity(3, 3)).norm() < 1e-15);
    }
  }
  SUBCASE("general generator against a truncated power series") {
    const Mat g = testutil::random_matrix(5, 77, 0.5);
    const double t = 0.3;
    Mat term = Mat::Identity(5, 5), series = Mat::Identity(5, 5);
    for (int k = 1; k < 60; ++k) {
      term = term * (t * g) / double(k);
      series += term;
    }
    CHECK((semigroup_propagator(g, t) - series).norm() <= 1e-9);
  }
  SUBCASE("normal generator against a truncated power series") {
    const Mat h = testutil::random_hermitian(5, 78);
    const Mat g = cplx(0, -1) * h - 0.05 * Mat::Identity(5, 5);
    Semigroup sg(g);
    CHECK(sg.is_normal());
    const double t = 0.3;
    Mat term = Mat::Identity(5, 5), series = Mat::Identity(5, 5);
    for (int k = 1; k < 60; ++k) {
      term = term * (t * g) / double(k);
      series += term;
    }
    CHECK((sg.at(t) - series).norm() <= 1e-9);
  }
  SUBCASE("non-finite generator") {
    Mat g = Mat::Identity(2, 2);
    g(0, 1) = std::nan("");
    CHECK_THROWS_AS(semigroup_propagator(g, 1.0), NumericalError);
  }
}

TEST_CASE("semigroup property and contraction") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Mat h = testutil::random_hermitian(6, 400 + seed);
    const Mat m = testutil::random_matrix(6, 500 + seed, 0.3);
    const Mat lambda = m.adjoint() * m;  // positive, not commuting with h
    const Mat g = cplx(0, -1) * h - 0.5 * lambda;
    Semigroup sg(g);
    CHECK_FALSE(sg.is_normal());
    const double s = 0.4, t = 0.9;
    CHECK((sg.at(s + t) - sg.at(s) * sg.at(t)).norm() <= 1e-9);
    const Vec v = testutil::random_vector(6, 600 + seed);
    CHECK(sg.apply(t, v).norm() <= 1.0 + 1e-12);
  }
}
