#include "mgp/kernels.hpp"

#include <cmath>

#include "mgp/model.hpp"

namespace mgp {

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::smgp: return "smgp";
    case ModelKind::nmgp: return "nmgp";
    case ModelKind::gnmgp: return "gnmgp";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "smgp") return ModelKind::smgp;
  if (s == "nmgp") return ModelKind::nmgp;
  if (s == "gnmgp") return ModelKind::gnmgp;
  throw invalid_argument("unknown model kind '" + s + "' (want smgp|nmgp|gnmgp)");
}

double rbf(double t, double t2, double amp, double len) {
  const double d = t - t2;
  return amp * amp * std::exp(-d * d / (2.0 * len * len));
}

double gibbs(double t, double t2, double l1, double l2) {
  const double s = l1 * l1 + l2 * l2;
  const double d = t - t2;
  return std::sqrt(2.0 * l1 * l2 / s) * std::exp(-d * d / s);
}

double nmgp_k(double t, double t2, double l1, double l2, double s1, double s2) {
  return s1 * s2 * gibbs(t, t2, l1, l2);
}

Matrix gnmgp_block(double t, double t2, const Matrix& l1, const Matrix& l2, double kval) {
  (void)t;
  (void)t2;
  if (l1.rows() != l2.rows() || l1.rows() != l1.cols() || l2.rows() != l2.cols())
    throw dimension_mismatch("gnmgp_block: coregionalization factors must be square and equal size");
  return kval * (l1 * l2.transpose());
}

Eigen::Index KernelSlice::m() const {
  if (kind == ModelKind::gnmgp)
    return coreg.empty() ? 0 : coreg.front().rows();
  return coreg_const.rows();
}

KernelSlice kernel_slice(const ModelParams& p, const Vector& grid) {
  p.validate(grid.size());
  KernelSlice s;
  s.kind = p.kind;
  s.times = grid;
  const Eigen::Index n = grid.size();
  switch (p.kind) {
    case ModelKind::smgp:
      s.len = Vector::Constant(n, std::exp(p.log_len));
      s.sd = Vector::Constant(n, std::exp(p.log_amp));
      s.coreg_const = p.coreg_const;
      break;
    case ModelKind::nmgp:
      s.len = p.loglen->values.array().exp().matrix();
      s.sd = p.logsd->values.array().exp().matrix();
      s.coreg_const = p.coreg_const;
      break;
    case ModelKind::gnmgp: {
      s.len = p.loglen->values.array().exp().matrix();
      s.sd = Vector::Ones(n);
      const Eigen::Index m = p.m_dims();
      s.coreg.assign(static_cast<size_t>(n), Matrix::Zero(m, m));
      for (const auto& proc : p.coreg_procs)
        for (Eigen::Index i = 0; i < n; ++i)
          s.coreg[static_cast<size_t>(i)](proc.coreg_i, proc.coreg_j) = proc.values(i);
      break;
    }
  }
  return s;
}

KernelSlice kernel_slice(const ModelParams& p, const Vector& grid, const Vector& at) {
  if (at.size() == grid.size() && at == grid) return kernel_slice(p, grid);
  p.validate(grid.size());
  KernelSlice s;
  s.kind = p.kind;
  s.times = at;
  const Eigen::Index q = at.size();
  switch (p.kind) {
    case ModelKind::smgp:
      s.len = Vector::Constant(q, std::exp(p.log_len));
      s.sd = Vector::Constant(q, std::exp(p.log_amp));
      s.coreg_const = p.coreg_const;
      break;
    case ModelKind::nmgp:
      s.len = conditional_mean(*p.loglen, grid, at).array().exp().matrix();
      s.sd = conditional_mean(*p.logsd, grid, at).array().exp().matrix();
      s.coreg_const = p.coreg_const;
      break;
    case ModelKind::gnmgp: {
      s.len = conditional_mean(*p.loglen, grid, at).array().exp().matrix();
      s.sd = Vector::Ones(q);
      const Eigen::Index m = p.m_dims();
      s.coreg.assign(static_cast<size_t>(q), Matrix::Zero(m, m));
      for (const auto& proc : p.coreg_procs) {
        Vector v = conditional_mean(proc, grid, at);
        for (Eigen::Index i = 0; i < q; ++i)
          s.coreg[static_cast<size_t>(i)](proc.coreg_i, proc.coreg_j) = v(i);
      }
      break;
    }
  }
  return s;
}

double cov_entry(const KernelSlice& r, Eigen::Index i, Eigen::Index a,
                 const KernelSlice& c, Eigen::Index j, Eigen::Index b) {
  const double g = gibbs(r.times(i), c.times(j), r.len(i), c.len(j));
  double co;
  if (r.kind == ModelKind::gnmgp)
    co = r.coreg[static_cast<size_t>(i)].row(a).dot(c.coreg[static_cast<size_t>(j)].row(b));
  else
    co = r.coreg_const.row(a).dot(c.coreg_const.row(b));
  return r.sd(i) * c.sd(j) * g * co;
}

Matrix cross_cov(const KernelSlice& rows, const KernelSlice& cols) {
  if (rows.kind != cols.kind || rows.m() != cols.m())
    throw dimension_mismatch("cross_cov: incompatible slices");
  const Eigen::Index nr = rows.n(), nc = cols.n(), m = rows.m();
  Matrix out(nr * m, nc * m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      for (Eigen::Index i = 0; i < nr; ++i)
        for (Eigen::Index j = 0; j < nc; ++j)
          out(a * nr + i, b * nc + j) = cov_entry(rows, i, a, cols, j, b);
  return out;
}

Matrix time_gram(const KernelSlice& s) {
  const Eigen::Index n = s.n();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = s.sd(i) * s.sd(i);  // gibbs(t,t,l,l) == 1
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = s.sd(i) * s.sd(j) * gibbs(s.times(i), s.times(j), s.len(i), s.len(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

SymMatrix assemble_cov(const ModelParams& p, const Vector& times) {
  KernelSlice s = kernel_slice(p, times);
  const Eigen::Index n = s.n(), m = s.m();
  Matrix out(n * m, n * m);
  if (p.kind == ModelKind::gnmgp) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double g = (i == j) ? 1.0 : gibbs(times(i), times(j), s.len(i), s.len(j));
        Matrix block = g * (s.coreg[static_cast<size_t>(i)] *
                            s.coreg[static_cast<size_t>(j)].transpose());
        for (Eigen::Index a = 0; a < m; ++a)
          for (Eigen::Index b = 0; b < m; ++b) {
            out(a * n + i, b * n + j) = block(a, b);
            out(b * n + j, a * n + i) = block(a, b);
          }
      }
  } else {
    Matrix kt = time_gram(s);
    Matrix b = s.coreg_const * s.coreg_const.transpose();
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b2 = 0; b2 < m; ++b2)
        out.block(a * n, b2 * n, n, n) = b(a, b2) * kt;
  }
  return SymMatrix(std::move(out));
}

}  // namespace mgp
