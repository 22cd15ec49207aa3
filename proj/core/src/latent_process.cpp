#include "mgp/latent_process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mgp {

namespace {
void check_prior(const GpPrior& p) {
  if (!(p.amp > 0.0) || !(p.len > 0.0))
    throw invalid_argument("GpPrior: amp and len must be positive");
}
}  // namespace

Matrix rbf_cross(const Vector& a, const Vector& b, const GpPrior& prior) {
  check_prior(prior);
  const double a2 = prior.amp * prior.amp;
  const double inv = 1.0 / (2.0 * prior.len * prior.len);
  Matrix k(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const double d = a(i) - b(j);
      k(i, j) = a2 * std::exp(-d * d * inv);
    }
  return k;
}

Matrix rbf_gram(const Vector& times, const GpPrior& prior) {
  return rbf_cross(times, times, prior);
}

Matrix prior_density_gram(const Vector& times, const GpPrior& prior) {
  Matrix k = rbf_gram(times, prior);
  k.diagonal().array() += kPriorNugget * prior.amp * prior.amp;
  return k;
}

double prior_logpdf(const LatentProcess& p, const Vector& times) {
  if (p.values.size() != times.size())
    throw dimension_mismatch("prior_logpdf: values/times length mismatch");
  SymMatrix k(prior_density_gram(times, p.prior));
  Vector mean = Vector::Constant(times.size(), p.prior.mean);
  return mvn_logpdf(p.values, mean, k);
}

Vector conditional_mean(const LatentProcess& p, const Vector& times, const Vector& query) {
  if (p.values.size() != times.size())
    throw dimension_mismatch("conditional_mean: values/times length mismatch");
  if (!query.allFinite()) throw non_finite("conditional_mean: non-finite query time");
  if (times.size() == 0)  // no knots: the prior mean everywhere
    return Vector::Constant(query.size(), p.prior.mean);
  CholFactor kf = cholesky(SymMatrix(rbf_gram(times, p.prior)));
  Vector centered = p.values;
  centered.array() -= p.prior.mean;
  Vector w = kf.solve(centered);
  Vector out = rbf_cross(query, times, p.prior) * w;
  out.array() += p.prior.mean;
  return out;
}

Vector init_loglen_semivariogram(const Episode& ep, int nbins) {
  const Eigen::Index n = ep.n(), m = ep.m();
  if (n < 4) throw degenerate_data("semivariogram: need at least 4 observations");
  if (nbins < 1) throw invalid_argument("semivariogram: nbins must be >= 1");

  const double span = ep.times(n - 1) - ep.times(0);
  const double max_lag = 0.5 * span;
  if (!(max_lag > 0.0)) throw degenerate_data("semivariogram: zero time span");
  const double width = max_lag / nbins;

  double loglen_sum = 0.0;
  int loglen_cnt = 0;
  for (Eigen::Index c = 0; c < m; ++c) {
    std::vector<double> acc(nbins, 0.0);
    std::vector<long> cnt(nbins, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!ep.mask(i, c)) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (!ep.mask(j, c)) continue;
        const double h = ep.times(j) - ep.times(i);
        if (h > max_lag) break;
        int b = std::min(static_cast<int>(h / width), nbins - 1);
        const double d = ep.obs(i, c) - ep.obs(j, c);
        acc[b] += 0.5 * d * d;
        ++cnt[b];
      }
    }
    std::vector<int> nonempty;
    for (int b = 0; b < nbins; ++b)
      if (cnt[b] > 0) nonempty.push_back(b);
    if (nonempty.empty()) continue;

    // sill = plateau estimate: mean gamma over the last third of nonempty bins
    const int tail = std::max<int>(1, static_cast<int>(nonempty.size()) / 3);
    double sill = 0.0;
    for (int k = static_cast<int>(nonempty.size()) - tail; k < static_cast<int>(nonempty.size()); ++k) {
      const int b = nonempty[k];
      sill += acc[b] / cnt[b];
    }
    sill /= tail;
    if (!(sill > 0.0)) continue;  // constant channel

    double range = (nonempty.back() + 0.5) * width;
    for (int b : nonempty) {
      if (acc[b] / cnt[b] >= 0.95 * sill) {
        range = (b + 0.5) * width;
        break;
      }
    }
    loglen_sum += std::log(range);
    ++loglen_cnt;
  }
  if (loglen_cnt == 0)
    throw degenerate_data("semivariogram: all channels constant (zero sill)");
  return Vector::Constant(n, loglen_sum / loglen_cnt);
}

namespace {

// pairwise-deletion sample covariance of the given rows
Matrix window_cov(const Episode& ep, const std::vector<Eigen::Index>& rows, const Vector& global_var) {
  const Eigen::Index m = ep.m();
  Vector mu = Vector::Zero(m);
  Eigen::VectorXi nc = Eigen::VectorXi::Zero(m);
  for (Eigen::Index r : rows)
    for (Eigen::Index c = 0; c < m; ++c)
      if (ep.mask(r, c)) {
        mu(c) += ep.obs(r, c);
        ++nc(c);
      }
  for (Eigen::Index c = 0; c < m; ++c)
    if (nc(c) > 0) mu(c) /= nc(c);

  Matrix cov = Matrix::Zero(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      double s = 0.0;
      long k = 0;
      for (Eigen::Index r : rows) {
        if (!ep.mask(r, a) || !ep.mask(r, b)) continue;
        s += (ep.obs(r, a) - mu(a)) * (ep.obs(r, b) - mu(b));
        ++k;
      }
      double v;
      if (k >= 2)
        v = s / (k - 1);
      else
        v = (a == b) ? global_var(a) : 0.0;
      cov(a, b) = v;
      cov(b, a) = v;
    }
  }
  return cov;
}

}  // namespace

std::vector<Matrix> init_coreg_windowed(const Episode& ep, double w) {
  if (w < 0.0) throw invalid_argument("init_coreg_windowed: window must be >= 0");
  const Eigen::Index n = ep.n(), m = ep.m();

  // per-channel variance over the whole episode, for data-poor fallbacks
  Vector global_var = Vector::Ones(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    double s = 0.0, s2 = 0.0;
    long k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (ep.mask(i, c)) {
        s += ep.obs(i, c);
        s2 += ep.obs(i, c) * ep.obs(i, c);
        ++k;
      }
    if (k >= 2) {
      const double v = (s2 - s * s / k) / (k - 1);
      if (v > 0.0) global_var(c) = v;
    }
  }

  std::vector<Matrix> out(static_cast<size_t>(n));
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.clear();
    for (Eigen::Index r = 0; r < n; ++r)
      if (std::abs(ep.times(r) - ep.times(i)) <= w) rows.push_back(r);
    const Eigen::Index want = std::min<Eigen::Index>(m + 1, n);
    if (static_cast<Eigen::Index>(rows.size()) < want) {
      // widen to the nearest M+1 rows
      rows.resize(static_cast<size_t>(n));
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
      std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(ep.times(a) - ep.times(i)) < std::abs(ep.times(b) - ep.times(i));
      });
      rows.resize(static_cast<size_t>(want));
    }
    Matrix cov = window_cov(ep, rows, global_var);
    try {
      out[static_cast<size_t>(i)] = cholesky(SymMatrix(cov)).lower;
    } catch (const not_positive_definite&) {
      // pairwise deletion can produce an indefinite estimate; keep the sds
      Matrix l = Matrix::Zero(m, m);
      for (Eigen::Index c = 0; c < m; ++c)
        l(c, c) = std::sqrt(std::max(cov(c, c), 1e-12));
      out[static_cast<size_t>(i)] = l;
    }
  }
  return out;
}

}  // namespace mgp
