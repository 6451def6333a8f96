#pragma once

// Dense finite-dimensional Hilbert-space machinery shared by every model.

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace flashsim {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultTol = 1e-10;

/// Shape or size of an argument does not fit the operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (non-finite data, non-convergence, negative
/// spectrum where positivity is required, vanishing norms).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates the invariant its type promises.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class OperatorKind { general, hermitian, positive, unitary };

std::string to_string(OperatorKind kind);

/// Normalized amplitude array. `factors` records the tensor-factor layout
/// (system-1 index major); a single factor means no tensor structure.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(Vec amplitudes, std::vector<Index> factors = {},
                       double norm_tol = kDefaultTol);

  const Vec& amplitudes() const { return amplitudes_; }
  Vec& amplitudes() { return amplitudes_; }
  const std::vector<Index>& factors() const { return factors_; }
  Index dim() const { return amplitudes_.size(); }
  double norm() const { return amplitudes_.norm(); }
  double norm_tol() const { return norm_tol_; }
  bool is_normalized() const;

  /// Scales to unit norm; throws NumericalError when the norm underflows.
  StateVector& normalize();
  StateVector normalized() const;

 private:
  Vec amplitudes_;
  std::vector<Index> factors_;
  double norm_tol_ = kDefaultTol;
};

/// Dense complex matrix tagged with the structural property it carries.
/// Construction checks the tag against the entries.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  explicit OperatorMatrix(Mat entries, OperatorKind kind = OperatorKind::general,
                          double tol = kDefaultTol);

  static OperatorMatrix identity(Index n);
  static OperatorMatrix zero(Index n);

  const Mat& matrix() const { return entries_; }
  OperatorKind kind() const { return kind_; }
  Index dim() const { return entries_.rows(); }

  Vec apply(const Vec& v) const { return entries_ * v; }
  OperatorMatrix adjoint() const;

 private:
  Mat entries_;
  OperatorKind kind_ = OperatorKind::general;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(Mat entries, double tol = 1e-9);
  static DensityMatrix pure(const Vec& psi);

  const Mat& matrix() const { return entries_; }
  Index dim() const { return entries_.rows(); }
  cplx trace() const { return entries_.trace(); }

 private:
  Mat entries_;
};

bool is_hermitian(const Mat& m, double tol = kDefaultTol);
bool is_unitary(const Mat& m, double tol = kDefaultTol);

/// Kronecker product, first factor's index major.
OperatorMatrix tensor_product(const OperatorMatrix& a, const OperatorMatrix& b);
Mat kron(const Mat& a, const Mat& b);
Vec kron(const Vec& a, const Vec& b);

/// Traces out every subsystem except `keep`. The trace of the result equals
/// the trace of the input; for a normalized input the result is a
/// DensityMatrix.
Mat partial_trace(const Mat& rho, std::size_t keep, const std::vector<Index>& dims);
DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep,
                            const std::vector<Index>& dims);

/// Reduced density matrix of subsystem `keep` for a pure state, computed
/// without forming the full projector.
Mat reduced_density(const Vec& psi, std::size_t keep, const std::vector<Index>& dims);

/// Positive square root. Eigenvalues in [-tol, 0) are clamped to zero where
/// tol = clamp_rel * spectral radius; anything more negative throws.
Mat positive_sqrt(const Mat& p, double clamp_rel = 1e-12);
OperatorMatrix positive_sqrt(const OperatorMatrix& p, double clamp_rel = 1e-12);

/// exp(t G) for t >= 0 and the zero operator for t < 0.
Mat semigroup_propagator(const Mat& generator, double t);
OperatorMatrix semigroup_propagator(const OperatorMatrix& generator, double t);

/// Caches a spectral decomposition of G so that exp(tG) can be evaluated for
/// many t. Normal generators are diagonalized unitarily; anything else is
/// exponentiated per call by scaling and squaring.
class Semigroup {
 public:
  Semigroup() = default;
  explicit Semigroup(Mat generator, double tol = kDefaultTol);

  Index dim() const { return generator_.rows(); }
  bool is_normal() const { return normal_; }
  const Mat& generator() const { return generator_; }

  Mat at(double t) const;
  Vec apply(double t, const Vec& v) const;
  /// Same as apply() for a block of column vectors.
  Mat apply(double t, const Mat& block) const;

 private:
  Mat generator_;
  bool normal_ = false;
  Mat basis_;        // unitary eigenbasis (normal case)
  Vec eigenvalues_;  // eigenvalues of G in that basis
};

}  // namespace flashsim
