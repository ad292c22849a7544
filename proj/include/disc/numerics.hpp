#pragma once

// Dense symmetric primitives for Gram matrices of the form lambda*I + sum v v^T.
// Everything is templated on the scalar type; the rest of the library uses double.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace disc {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a factorization that requires strict positive definiteness fails.
class NotPositiveDefinite : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Symmetric PSD matrix. Symmetry holds exactly: every mutation writes both
/// triangles with the same value.
template <typename Scalar>
class SymPsdMatrix {
 public:
  using Matrix = MatrixX<Scalar>;

  SymPsdMatrix() = default;

  static SymPsdMatrix zero(Eigen::Index dim) {
    check_dim(dim);
    return SymPsdMatrix(Matrix::Zero(dim, dim));
  }

  static SymPsdMatrix identity(Eigen::Index dim, Scalar scale = Scalar(1)) {
    check_dim(dim);
    return SymPsdMatrix(Matrix::Identity(dim, dim) * scale);
  }

  /// Takes the lower triangle of `m` as authoritative and mirrors it.
  template <typename Derived>
  static SymPsdMatrix from_lower(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) {
      throw std::invalid_argument("SymPsdMatrix: matrix is not square");
    }
    check_dim(m.rows());
    Matrix full = m.template selfadjointView<Eigen::Lower>();
    return SymPsdMatrix(std::move(full));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// In-place V += v v^T.
  template <typename Derived>
  SymPsdMatrix& add_outer(const Eigen::MatrixBase<Derived>& v) {
    if (v.size() != dim()) {
      throw std::invalid_argument("rank1_update: dimension mismatch (" + std::to_string(dim()) +
                                  " vs " + std::to_string(v.size()) + ")");
    }
    const Eigen::Index n = dim();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        const Scalar value = m_(i, j) + v(i) * v(j);
        m_(i, j) = value;
        m_(j, i) = value;
      }
    }
    return *this;
  }

  SymPsdMatrix& operator+=(const SymPsdMatrix& other) {
    if (other.dim() != dim()) {
      throw std::invalid_argument("SymPsdMatrix: dimension mismatch in sum");
    }
    m_ += other.m_;
    return *this;
  }

  friend SymPsdMatrix operator+(SymPsdMatrix lhs, const SymPsdMatrix& rhs) {
    lhs += rhs;
    return lhs;
  }

  /// lambda * I + this.
  SymPsdMatrix shifted(Scalar lambda) const {
    SymPsdMatrix out = *this;
    out.m_.diagonal().array() += lambda;
    return out;
  }

  bool operator==(const SymPsdMatrix& other) const { return m_ == other.m_; }

 private:
  explicit SymPsdMatrix(Matrix m) : m_(std::move(m)) {}

  static void check_dim(Eigen::Index dim) {
    if (dim <= 0) throw std::invalid_argument("SymPsdMatrix: dimension must be positive");
  }

  Matrix m_;
};

using SymPsd = SymPsdMatrix<double>;

namespace detail {

template <typename Scalar>
Eigen::LLT<MatrixX<Scalar>> factor(const SymPsdMatrix<Scalar>& v, const char* what) {
  Eigen::LLT<MatrixX<Scalar>> llt(v.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite");
  }
  // LLT only inspects the lower triangle and can succeed on tiny negative pivots
  // that round to positive; reject non-positive diagonals of the factor explicitly.
  const auto diag = llt.matrixLLT().diagonal();
  if ((diag.array() <= Scalar(0)).any() || !diag.allFinite()) {
    throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite");
  }
  return llt;
}

}  // namespace detail

template <typename Scalar, typename Derived>
SymPsdMatrix<Scalar> rank1_update(SymPsdMatrix<Scalar> v, const Eigen::MatrixBase<Derived>& x) {
  v.add_outer(x);
  return v;
}

/// Natural log of det(V); V must be strictly positive definite.
template <typename Scalar>
Scalar logdet(const SymPsdMatrix<Scalar>& v) {
  const auto llt = detail::factor(v, "logdet");
  return Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
}

template <typename Scalar>
Scalar min_eigenvalue(const SymPsdMatrix<Scalar>& v) {
  if (v.dim() == 1) return v(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(v.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("min_eigenvalue: eigen decomposition did not converge");
  }
  return solver.eigenvalues()(0);
}

template <typename Scalar, typename Derived>
VectorX<Scalar> solve_psd(const SymPsdMatrix<Scalar>& v, const Eigen::MatrixBase<Derived>& b) {
  if (b.size() != v.dim()) throw std::invalid_argument("solve_psd: dimension mismatch");
  return detail::factor(v, "solve_psd").solve(b);
}

/// sqrt(x^T V^{-1} x).
template <typename Scalar, typename Derived>
Scalar mahalanobis_inv_norm(const Eigen::MatrixBase<Derived>& x, const SymPsdMatrix<Scalar>& v) {
  if (x.size() != v.dim()) throw std::invalid_argument("mahalanobis_inv_norm: dimension mismatch");
  const auto llt = detail::factor(v, "mahalanobis_inv_norm");
  // ||L^{-1} x||_2 with V = L L^T
  const VectorX<Scalar> z = llt.matrixL().solve(x);
  return z.norm();
}

/// Factorization cache for repeated V^{-1} queries against one matrix within a round.
template <typename Scalar>
class PsdFactor {
 public:
  explicit PsdFactor(const SymPsdMatrix<Scalar>& v) : llt_(detail::factor(v, "PsdFactor")) {}

  template <typename Derived>
  VectorX<Scalar> solve(const Eigen::MatrixBase<Derived>& b) const {
    return llt_.solve(b);
  }

  template <typename Derived>
  Scalar inv_norm(const Eigen::MatrixBase<Derived>& x) const {
    return llt_.matrixL().solve(VectorX<Scalar>(x)).norm();
  }

  Scalar logdet() const { return Scalar(2) * llt_.matrixLLT().diagonal().array().log().sum(); }

 private:
  Eigen::LLT<MatrixX<Scalar>> llt_;
};

}  // namespace disc
