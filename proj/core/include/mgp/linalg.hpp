#pragma once

#include <Eigen/Dense>

#include "mgp/errors.hpp"

namespace mgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense symmetric matrix.  Construction symmetrizes by averaging with the
// transpose, so entries(i,j) == entries(j,i) holds exactly afterwards; this
// corrects accumulated rounding from block assembly, nothing more.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m);
  explicit SymMatrix(Matrix&& m);

  const Matrix& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  void finish();
  Matrix m_;
};

// Lower Cholesky factor of (source + jitter * I).
struct CholFactor {
  Matrix lower;       // L with L L^T = source + jitter I, positive diagonal
  double jitter = 0;  // jitter actually applied after escalation

  Eigen::Index dim() const { return lower.rows(); }
  Vector solve(const Vector& b) const;  // (L L^T)^{-1} b
  Matrix solve(const Matrix& b) const;
  Matrix inverse() const;  // explicit (L L^T)^{-1}, for trace terms only
  double log_det() const;  // log det(L L^T)
};

struct SymEigen {
  Vector eigvals;  // ascending
  Matrix eigvecs;  // orthonormal columns, eigvecs.col(i) <-> eigvals(i)
};

// Factor m + jitter I.  On failure the jitter escalates from
// 1e-10 * mean(diag) by factors of 10 up to 1e-4 * mean(diag); if even the
// cap fails the matrix is reported as not positive definite.  Near-singular
// kernel matrices (tiny length-scales, duplicate-ish timestamps) are routine
// here, hence the policy lives in one place.
CholFactor cholesky(const SymMatrix& m, double jitter = 0.0);

SymEigen sym_eigen(const SymMatrix& m);

double mvn_logpdf(const Vector& x, const Vector& mean, const SymMatrix& cov);
double mvn_logpdf(const Vector& x, const Vector& mean, const CholFactor& chol);

// (a kron b) v without forming the Kronecker product.  a is M x M, b is
// N x N, v has length M*N in dimension-major order (index = m*N + n), so the
// product is vec(b V a^T) with V the N x M column-major reshape of v.
Vector kron_mvprod(const Matrix& a, const Matrix& b, const Vector& v);

}  // namespace mgp
