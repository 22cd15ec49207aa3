#include "mgp/linalg.hpp"

#include <cmath>
#include <string>

namespace mgp {

namespace {
constexpr double log_2pi = 1.8378770664093454836;
}

SymMatrix::SymMatrix(const Matrix& m) : m_(m) { finish(); }
SymMatrix::SymMatrix(Matrix&& m) : m_(std::move(m)) { finish(); }

void SymMatrix::finish() {
  if (m_.rows() < 1 || m_.rows() != m_.cols())
    throw dimension_mismatch("SymMatrix: need square matrix of dim >= 1, got " +
                             std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  // (a+b)/2 == (b+a)/2 in IEEE arithmetic, so symmetry is exact
  m_ = 0.5 * (m_ + m_.transpose()).eval();
}

Vector CholFactor::solve(const Vector& b) const {
  Vector x = lower.triangularView<Eigen::Lower>().solve(b);
  lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Matrix CholFactor::solve(const Matrix& b) const {
  Matrix x = lower.triangularView<Eigen::Lower>().solve(b);
  lower.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Matrix CholFactor::inverse() const {
  Matrix eye = Matrix::Identity(dim(), dim());
  return solve(eye);
}

double CholFactor::log_det() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

CholFactor cholesky(const SymMatrix& m, double jitter) {
  const Matrix& a = m.mat();
  double scale = a.diagonal().mean();
  if (!(scale > 0.0)) scale = 1.0;  // zero/negative trace: fall back to absolute jitter
  const double cap = 1e-4 * scale;

  double j = jitter;
  for (;;) {
    Matrix work = a;
    if (j > 0.0) work.diagonal().array() += j;
    Eigen::LLT<Matrix> llt(work);
    if (llt.info() == Eigen::Success)
      return CholFactor{Matrix(llt.matrixL()), j};
    if (j >= cap)
      throw not_positive_definite(
          "cholesky: matrix of dim " + std::to_string(a.rows()) +
          " not positive definite at jitter cap " + std::to_string(cap));
    j = (j <= 0.0) ? 1e-10 * scale : std::min(j * 10.0, cap);
  }
}

SymEigen sym_eigen(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
  if (es.info() != Eigen::Success)
    throw no_convergence("sym_eigen: eigensolver failed on dim " + std::to_string(m.dim()));
  return SymEigen{es.eigenvalues(), es.eigenvectors()};
}

double mvn_logpdf(const Vector& x, const Vector& mean, const CholFactor& chol) {
  if (x.size() != mean.size() || x.size() != chol.dim())
    throw dimension_mismatch("mvn_logpdf: size mismatch");
  // quadratic form through one triangular solve, never an explicit inverse
  Vector r = chol.lower.triangularView<Eigen::Lower>().solve(x - mean);
  const double quad = r.squaredNorm();
  return -0.5 * (static_cast<double>(x.size()) * log_2pi + chol.log_det() + quad);
}

double mvn_logpdf(const Vector& x, const Vector& mean, const SymMatrix& cov) {
  return mvn_logpdf(x, mean, cholesky(cov));
}

Vector kron_mvprod(const Matrix& a, const Matrix& b, const Vector& v) {
  const Eigen::Index m = a.rows(), n = b.rows();
  if (a.cols() != m || b.cols() != n)
    throw dimension_mismatch("kron_mvprod: factors must be square");
  if (v.size() != m * n)
    throw dimension_mismatch("kron_mvprod: vector length " + std::to_string(v.size()) +
                             " != " + std::to_string(m) + "*" + std::to_string(n));
  Eigen::Map<const Matrix> vmat(v.data(), n, m);
  Matrix r = b * vmat * a.transpose();
  return Eigen::Map<const Vector>(r.data(), m * n);
}

}  // namespace mgp
