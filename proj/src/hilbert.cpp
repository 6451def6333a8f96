#include "flashsim/hilbert.hpp"

#include <limits>

#include <cmath>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace flashsim {

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::general: return "general";
    case OperatorKind::hermitian: return "hermitian";
    case OperatorKind::positive: return "positive";
    case OperatorKind::unitary: return "unitary";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(Vec amplitudes, std::vector<Index> factors, double norm_tol)
    : amplitudes_(std::move(amplitudes)), factors_(std::move(factors)), norm_tol_(norm_tol) {
  if (factors_.empty()) factors_.push_back(amplitudes_.size());
  const Index prod = std::accumulate(factors_.begin(), factors_.end(), Index{1},
                                     std::multiplies<Index>());
  if (prod != amplitudes_.size())
    throw DimensionError("state length does not match the product of factor dimensions");
}

bool StateVector::is_normalized() const { return std::abs(norm() - 1.0) <= norm_tol_; }

StateVector& StateVector::normalize() {
  const double n = norm();
  if (!(n > 1e-300) || !std::isfinite(n))
    throw NumericalError("cannot normalize a state of vanishing or non-finite norm");
  amplitudes_ /= n;
  return *this;
}

StateVector StateVector::normalized() const {
  StateVector out = *this;
  out.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// checks

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() <= tol * scale;
}

bool is_unitary(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - Mat::Identity(m.rows(), m.cols())).norm() <= tol * std::sqrt(double(m.rows()));
}

// ---------------------------------------------------------------------------
// OperatorMatrix

OperatorMatrix::OperatorMatrix(Mat entries, OperatorKind kind, double tol)
    : entries_(std::move(entries)), kind_(kind) {
  if (entries_.rows() != entries_.cols()) throw DimensionError("operator must be square");
  if (!entries_.allFinite()) throw NumericalError("operator has non-finite entries");
  switch (kind_) {
    case OperatorKind::general: break;
    case OperatorKind::hermitian:
      if (!is_hermitian(entries_, tol)) throw InvariantError("operator tagged hermitian is not");
      break;
    case OperatorKind::positive: {
      if (!is_hermitian(entries_, tol)) throw InvariantError("operator tagged positive is not hermitian");
      if (entries_.size() == 0) break;
      Eigen::SelfAdjointEigenSolver<Mat> es(entries_, Eigen::EigenvaluesOnly);
      const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
      if (es.eigenvalues().minCoeff() < -tol * std::max(1.0, radius))
        throw InvariantError("operator tagged positive has a negative eigenvalue");
      break;
    }
    case OperatorKind::unitary:
      if (!is_unitary(entries_, tol)) throw InvariantError("operator tagged unitary is not");
      break;
  }
}

OperatorMatrix OperatorMatrix::identity(Index n) {
  return OperatorMatrix(Mat::Identity(n, n), OperatorKind::unitary);
}

OperatorMatrix OperatorMatrix::zero(Index n) {
  return OperatorMatrix(Mat::Zero(n, n), OperatorKind::positive);
}

OperatorMatrix OperatorMatrix::adjoint() const {
  return OperatorMatrix(entries_.adjoint(), kind_);
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Mat entries, double tol) : entries_(std::move(entries)) {
  if (!is_hermitian(entries_, tol)) throw InvariantError("density matrix is not hermitian");
  if (std::abs(entries_.trace() - cplx(1.0)) > tol)
    throw InvariantError("density matrix trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(entries_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol)
    throw InvariantError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(const Vec& psi) {
  const double n2 = psi.squaredNorm();
  if (!(n2 > 0)) throw NumericalError("pure density matrix of a zero vector");
  return DensityMatrix(psi * psi.adjoint() / n2);
}

// ---------------------------------------------------------------------------
// tensor products and partial traces

Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

OperatorMatrix tensor_product(const OperatorMatrix& a, const OperatorMatrix& b) {
  OperatorKind kind = OperatorKind::general;
  if (a.kind() == b.kind()) kind = a.kind();
  else if (a.kind() != OperatorKind::general && b.kind() != OperatorKind::general &&
           a.kind() != OperatorKind::unitary && b.kind() != OperatorKind::unitary)
    kind = OperatorKind::hermitian;
  return OperatorMatrix(kron(a.matrix(), b.matrix()), kind);
}

namespace {

void check_dims(Index total, std::size_t keep, const std::vector<Index>& dims) {
  if (dims.empty() || keep >= dims.size())
    throw DimensionError("partial trace: subsystem index out of range");
  const Index prod = std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<Index>());
  if (prod != total) throw DimensionError("partial trace: product of dims differs from dim(rho)");
}

}  // namespace

Mat partial_trace(const Mat& rho, std::size_t keep, const std::vector<Index>& dims) {
  if (rho.rows() != rho.cols()) throw DimensionError("partial trace of a non-square matrix");
  check_dims(rho.rows(), keep, dims);
  // index = (before * dk + k) * after + a
  Index before = 1, after = 1;
  for (std::size_t i = 0; i < keep; ++i) before *= dims[i];
  for (std::size_t i = keep + 1; i < dims.size(); ++i) after *= dims[i];
  const Index dk = dims[keep];
  Mat out = Mat::Zero(dk, dk);
  for (Index p = 0; p < before; ++p)
    for (Index a = 0; a < after; ++a)
      for (Index i = 0; i < dk; ++i)
        for (Index j = 0; j < dk; ++j)
          out(i, j) += rho((p * dk + i) * after + a, (p * dk + j) * after + a);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep,
                            const std::vector<Index>& dims) {
  return DensityMatrix(partial_trace(rho.matrix(), keep, dims));
}

Mat reduced_density(const Vec& psi, std::size_t keep, const std::vector<Index>& dims) {
  check_dims(psi.size(), keep, dims);
  Index before = 1, after = 1;
  for (std::size_t i = 0; i < keep; ++i) before *= dims[i];
  for (std::size_t i = keep + 1; i < dims.size(); ++i) after *= dims[i];
  const Index dk = dims[keep];
  Mat out = Mat::Zero(dk, dk);
  for (Index p = 0; p < before; ++p) {
    // block(k, a) = psi[(p*dk + k)*after + a]
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> block(
        psi.data() + p * dk * after, dk, after);
    out.noalias() += block * block.adjoint();
  }
  return out;
}

// ---------------------------------------------------------------------------
// square roots and exponentials

Mat positive_sqrt(const Mat& p, double clamp_rel) {
  if (p.rows() != p.cols()) throw DimensionError("square root of a non-square matrix");
  if (p.size() == 0) return p;
  if (!p.allFinite()) throw NumericalError("square root of a non-finite matrix");
  const Mat h = 0.5 * (p + p.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  RVec ev = es.eigenvalues();
  const double radius = ev.cwiseAbs().maxCoeff();
  const double tol = clamp_rel * radius;
  // eigenvalues at rounding level are zero; their square roots would not be
  const double floor = 16.0 * ev.size() * std::numeric_limits<double>::epsilon() * radius;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol)
      throw NumericalError("square root of an operator with eigenvalue " + std::to_string(ev(i)));
    ev(i) = ev(i) > floor ? std::sqrt(ev(i)) : 0.0;
  }
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

OperatorMatrix positive_sqrt(const OperatorMatrix& p, double clamp_rel) {
  return OperatorMatrix(positive_sqrt(p.matrix(), clamp_rel), OperatorKind::positive);
}

Semigroup::Semigroup(Mat generator, double tol) : generator_(std::move(generator)) {
  if (generator_.rows() != generator_.cols()) throw DimensionError("generator must be square");
  if (!generator_.allFinite()) throw NumericalError("generator has non-finite entries");
  const Index n = generator_.rows();
  if (n == 0) return;
  const double scale = std::max(1.0, generator_.norm());
  const Mat herm = 0.5 * (generator_ + generator_.adjoint());
  const Mat anti_i = cplx(0, -0.5) * (generator_ - generator_.adjoint());  // hermitian
  if ((herm * anti_i - anti_i * herm).norm() > tol * scale * scale) return;

  // Commuting hermitian parts share an eigenbasis; an irrational mixing
  // coefficient separates degeneracies of either part.
  const Mat probe = herm + 0.5772156649015329 * anti_i;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (probe + probe.adjoint()));
  if (es.info() != Eigen::Success) return;
  basis_ = es.eigenvectors();
  const Mat rotated = basis_.adjoint() * generator_ * basis_;
  eigenvalues_ = rotated.diagonal();
  const Mat off = rotated - Mat(eigenvalues_.asDiagonal());
  if (off.norm() > 10 * tol * scale) {
    basis_.resize(0, 0);
    eigenvalues_.resize(0);
    return;
  }
  normal_ = true;
}

Mat Semigroup::at(double t) const {
  const Index n = dim();
  if (!std::isfinite(t)) throw NumericalError("propagator time is not finite");
  if (t < 0) return Mat::Zero(n, n);
  if (t == 0) return Mat::Identity(n, n);
  if (normal_) {
    const Vec phases = (t * eigenvalues_).array().exp();
    return basis_ * phases.asDiagonal() * basis_.adjoint();
  }
  Mat scaled = t * generator_;
  Mat out = scaled.exp();
  if (!out.allFinite()) throw NumericalError("matrix exponential produced non-finite entries");
  return out;
}

Vec Semigroup::apply(double t, const Vec& v) const {
  if (v.size() != dim()) throw DimensionError("propagator applied to a vector of wrong size");
  if (t < 0) return Vec::Zero(v.size());
  if (t == 0) return v;
  if (normal_) {
    Vec c = basis_.adjoint() * v;
    c.array() *= (t * eigenvalues_).array().exp();
    return basis_ * c;
  }
  return at(t) * v;
}

Mat Semigroup::apply(double t, const Mat& block) const {
  if (block.rows() != dim()) throw DimensionError("propagator applied to a block of wrong size");
  if (t < 0) return Mat::Zero(block.rows(), block.cols());
  if (t == 0) return block;
  if (normal_) {
    Mat c = basis_.adjoint() * block;
    const Vec phases = (t * eigenvalues_).array().exp();
    c = phases.asDiagonal() * c;
    return basis_ * c;
  }
  return at(t) * block;
}

Mat semigroup_propagator(const Mat& generator, double t) {
  if (!generator.allFinite()) throw NumericalError("generator has non-finite entries");
  if (t < 0) return Mat::Zero(generator.rows(), generator.cols());
  return Semigroup(generator).at(t);
}

OperatorMatrix semigroup_propagator(const OperatorMatrix& generator, double t) {
  return OperatorMatrix(semigroup_propagator(generator.matrix(), t));
}

}  // namespace flashsim
