#pragma once

#include <mgp/linalg.hpp>
#include <mgp/rng.hpp>

// shared helpers for the unit suites

inline mgp::Matrix random_matrix(mgp::rng& gen, Eigen::Index r, Eigen::Index c) {
  mgp::Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = gen.normal();
  return m;
}

inline mgp::Vector random_vector(mgp::rng& gen, Eigen::Index n) {
  mgp::Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gen.normal();
  return v;
}

// well-conditioned random SPD matrix
inline mgp::Matrix random_spd(mgp::rng& gen, Eigen::Index n, double ridge = 0.5) {
  mgp::Matrix a = random_matrix(gen, n, n);
  mgp::Matrix s = a * a.transpose();
  s.diagonal().array() += ridge * n;
  return s;
}

// sorted strictly-increasing times in (0, span)
inline mgp::Vector random_times(mgp::rng& gen, Eigen::Index n, double span = 1.0) {
  mgp::Vector t(n);
  for (Eigen::Index i = 0; i < n; ++i) t(i) = span * gen.uniform();
  std::sort(t.data(), t.data() + n);
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (t(i + 1) <= t(i)) t(i + 1) = t(i) + 1e-9;
  return t;
}

// textbook dense Kronecker product, the oracle for kron_mvprod
inline mgp::Matrix dense_kron(const mgp::Matrix& a, const mgp::Matrix& b) {
  mgp::Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}
