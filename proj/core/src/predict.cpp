#include "mgp/predict.hpp"

#include <cmath>

namespace mgp {

namespace {

// covariance block between training time index i and query index j:
// block(a, b) = cov(f_a(t_i), f_b(t*_j)), channels of the training point in
// rows, channels of the query point in columns
Matrix pair_block(const KernelSlice& tr, Eigen::Index i, const KernelSlice& qu,
                  Eigen::Index j) {
  const double g = gibbs(tr.times(i), qu.times(j), tr.len(i), qu.len(j));
  Matrix block;
  if (tr.kind == ModelKind::gnmgp)
    block = gnmgp_block(tr.times(i), qu.times(j), tr.coreg[static_cast<size_t>(i)],
                        qu.coreg[static_cast<size_t>(j)], g);
  else
    block = g * (tr.coreg_const * tr.coreg_const.transpose());
  return tr.sd(i) * qu.sd(j) * block;
}

}  // namespace

PredictiveDist predict(const ModelParams& params, const Episode& ep, const Vector& query) {
  if (!query.allFinite()) throw non_finite("predict: non-finite query time");
  const Eigen::Index n = ep.n(), q = query.size();
  params.validate(n);
  const Eigen::Index m = params.m_dims();

  KernelSlice qslice = kernel_slice(params, ep.times, query);
  Matrix kqq = cross_cov(qslice, qslice);

  PredictiveDist out;
  if (n == 0) {  // no conditioning data: the prior at the query times
    out.mean = Vector::Zero(q * m);
    out.cov = 0.5 * (kqq + kqq.transpose());
    return out;
  }
  ep.validate();
  if (ep.m() != m) throw dimension_mismatch("predict: episode channels != model dims");

  // present training entries, dimension-major
  std::vector<Eigen::Index> pm, pn;
  for (Eigen::Index mm = 0; mm < m; ++mm)
    for (Eigen::Index nn = 0; nn < n; ++nn)
      if (ep.mask(nn, mm)) {
        pm.push_back(mm);
        pn.push_back(nn);
      }
  const Eigen::Index np = static_cast<Eigen::Index>(pm.size());
  Vector y(np);
  for (Eigen::Index i = 0; i < np; ++i)
    y(i) = ep.obs(pn[static_cast<size_t>(i)], pm[static_cast<size_t>(i)]);

  KernelSlice tslice = kernel_slice(params, ep.times);

  // cross covariance: stack per-time blocks time-major over the full grid,
  // permute rows (n*M + a) -> (a*N + n) into dimension-major, then keep the
  // present training rows
  Matrix kfull(n * m, q * m);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      Matrix block = pair_block(tslice, i, qslice, j);
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
          kfull(a * n + i, b * q + j) = block(a, b);
    }
  Matrix kx(np, q * m);
  for (Eigen::Index i = 0; i < np; ++i)
    kx.row(i) = kfull.row(pm[static_cast<size_t>(i)] * n + pn[static_cast<size_t>(i)]);

  // training covariance over present entries
  Matrix kt = cross_cov(tslice, tslice);
  Matrix sigma(np, np);
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < np; ++j)
      sigma(i, j) = kt(pm[static_cast<size_t>(i)] * n + pn[static_cast<size_t>(i)],
                       pm[static_cast<size_t>(j)] * n + pn[static_cast<size_t>(j)]);
  sigma.diagonal().array() += params.noise_var;
  CholFactor ch = cholesky(SymMatrix(std::move(sigma)));

  out.mean = kx.transpose() * ch.solve(y);
  Matrix reduction = kx.transpose() * ch.solve(kx);
  out.cov = 0.5 * ((kqq - reduction) + (kqq - reduction).transpose());
  return out;
}

double rmse(const PredictiveDist& pred, const Matrix& truth, const Mask& mask) {
  const Eigen::Index qn = truth.rows(), m = truth.cols();
  if (mask.rows() != qn || mask.cols() != m || pred.size() != qn * m)
    throw dimension_mismatch("rmse: prediction/truth shapes disagree");
  double acc = 0.0;
  long cnt = 0;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index i = 0; i < qn; ++i)
      if (mask(i, a)) {
        const double d = pred.mean(a * qn + i) - truth(i, a);
        acc += d * d;
        ++cnt;
      }
  if (cnt == 0) throw empty_holdout("rmse: no present hold-out entries");
  return std::sqrt(acc / static_cast<double>(cnt));
}

double lpd(const PredictiveDist& pred, const Matrix& truth, const Mask& mask,
           double noise_var) {
  const Eigen::Index qn = truth.rows(), m = truth.cols();
  if (mask.rows() != qn || mask.cols() != m || pred.size() != qn * m)
    throw dimension_mismatch("lpd: prediction/truth shapes disagree");
  if (!(noise_var >= 0.0)) throw invalid_argument("lpd: noise_var must be >= 0");

  std::vector<Eigen::Index> idx;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index i = 0; i < qn; ++i)
      if (mask(i, a)) idx.push_back(a * qn + i);
  const Eigen::Index cnt = static_cast<Eigen::Index>(idx.size());
  if (cnt == 0) throw empty_holdout("lpd: no present hold-out entries");

  Vector mu(cnt), x(cnt);
  Matrix cov(cnt, cnt);
  for (Eigen::Index i = 0; i < cnt; ++i) {
    mu(i) = pred.mean(idx[static_cast<size_t>(i)]);
    const Eigen::Index a = idx[static_cast<size_t>(i)] / qn;
    const Eigen::Index r = idx[static_cast<size_t>(i)] % qn;
    x(i) = truth(r, a);
    for (Eigen::Index j = 0; j < cnt; ++j)
      cov(i, j) = pred.cov(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  cov.diagonal().array() += noise_var;  // observations carry the error term
  const double joint = mvn_logpdf(x, mu, SymMatrix(std::move(cov)));
  return joint / static_cast<double>(cnt);
}

}  // namespace mgp
