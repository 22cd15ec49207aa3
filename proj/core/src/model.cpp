#include "mgp/model.hpp"

#include <cmath>
#include <string>

namespace mgp {

namespace {
constexpr double log_2pi = 1.8378770664093454836;

double lognorm1(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (log_2pi + std::log(var) + d * d / var);
}
}  // namespace

Eigen::Index ModelParams::m_dims() const {
  if (kind == ModelKind::gnmgp) {
    const double c = static_cast<double>(coreg_procs.size());
    return static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * c + 1.0) - 1.0) / 2.0));
  }
  return coreg_const.rows();
}

void ModelParams::validate(Eigen::Index n) const {
  if (!(noise_var > 0.0) || !std::isfinite(noise_var))
    throw invalid_argument("ModelParams: noise_var must be positive and finite");
  if (kind == ModelKind::gnmgp) {
    const Eigen::Index m = m_dims();
    if (m < 1 || static_cast<Eigen::Index>(coreg_procs.size()) != m * (m + 1) / 2)
      throw invalid_argument("ModelParams: coreg_procs count is not a triangular number");
    Eigen::Index k = 0;
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b, ++k) {
        const auto& pr = coreg_procs[static_cast<size_t>(k)];
        if (pr.kind != LatentKind::coreg_entry || pr.coreg_i != a || pr.coreg_j != b)
          throw invalid_argument("ModelParams: coreg_procs must be in canonical order (0,0),(1,0),(1,1),...");
        if (pr.values.size() != n)
          throw dimension_mismatch("ModelParams: coreg process length != grid length");
      }
    if (!loglen || loglen->values.size() != n)
      throw invalid_argument("ModelParams: gnmgp needs a log length-scale process on the grid");
  } else {
    if (coreg_const.rows() < 1 || coreg_const.rows() != coreg_const.cols())
      throw invalid_argument("ModelParams: coreg_const must be square, dim >= 1");
    if (kind == ModelKind::nmgp) {
      if (!loglen || loglen->values.size() != n || !logsd || logsd->values.size() != n)
        throw invalid_argument("ModelParams: nmgp needs loglen and logsd processes on the grid");
    }
  }
}

Eigen::Index packed_size(const ModelParams& p) {
  const Eigen::Index m = p.m_dims();
  const Eigen::Index tri = m * (m + 1) / 2;
  switch (p.kind) {
    case ModelKind::smgp: return 1 + tri + 2;
    case ModelKind::nmgp: return 1 + tri + 2 * p.loglen->values.size();
    case ModelKind::gnmgp: {
      const Eigen::Index n = p.loglen->values.size();
      return 1 + tri * n + n;
    }
  }
  return 0;
}

Vector pack(const ModelParams& p) {
  Vector th(packed_size(p));
  Eigen::Index k = 0;
  th(k++) = std::log(p.noise_var);
  const Eigen::Index m = p.m_dims();
  if (p.kind == ModelKind::gnmgp) {
    for (const auto& proc : p.coreg_procs) {
      th.segment(k, proc.values.size()) = proc.values;
      k += proc.values.size();
    }
  } else {
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b) th(k++) = p.coreg_const(a, b);
  }
  if (p.kind == ModelKind::smgp) {
    th(k++) = p.log_len;
    th(k++) = p.log_amp;
  } else {
    th.segment(k, p.loglen->values.size()) = p.loglen->values;
    k += p.loglen->values.size();
    if (p.kind == ModelKind::nmgp) {
      th.segment(k, p.logsd->values.size()) = p.logsd->values;
      k += p.logsd->values.size();
    }
  }
  return th;
}

ModelParams unpack(const Vector& theta, const ModelParams& tmpl) {
  if (theta.size() != packed_size(tmpl))
    throw dimension_mismatch("unpack: parameter vector length " + std::to_string(theta.size()) +
                             " != " + std::to_string(packed_size(tmpl)));
  ModelParams p = tmpl;
  Eigen::Index k = 0;
  p.noise_var = std::exp(theta(k++));
  const Eigen::Index m = tmpl.m_dims();
  if (p.kind == ModelKind::gnmgp) {
    for (auto& proc : p.coreg_procs) {
      proc.values = theta.segment(k, proc.values.size());
      k += proc.values.size();
    }
  } else {
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b) p.coreg_const(a, b) = theta(k++);
  }
  if (p.kind == ModelKind::smgp) {
    p.log_len = theta(k++);
    p.log_amp = theta(k++);
  } else {
    p.loglen->values = theta.segment(k, p.loglen->values.size());
    k += p.loglen->values.size();
    if (p.kind == ModelKind::nmgp) {
      p.logsd->values = theta.segment(k, p.logsd->values.size());
      k += p.logsd->values.size();
    }
  }
  return p;
}

double kron_fast_loglik(const SymMatrix& b, const SymMatrix& k, double noise_var,
                        const Vector& y) {
  const Eigen::Index m = b.dim(), n = k.dim();
  if (y.size() != m * n)
    throw dimension_mismatch("kron_fast_loglik: y length != M*N");
  if (!(noise_var >= 0.0))
    throw invalid_argument("kron_fast_loglik: noise_var must be >= 0");
  SymEigen eb = sym_eigen(b);
  SymEigen ek = sym_eigen(k);
  // rotate into the joint eigenbasis without forming U_B kron U_K
  Vector z = kron_mvprod(eb.eigvecs.transpose(), ek.eigvecs.transpose(), y);
  double logdet = 0.0, quad = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = eb.eigvals(i) * ek.eigvals(j) + noise_var;
      if (!(d > 0.0))
        throw not_positive_definite("kron_fast_loglik: nonpositive spectrum entry " +
                                    std::to_string(d));
      const double zi = z(i * n + j);
      logdet += std::log(d);
      quad += zi * zi / d;
    }
  return -0.5 * (static_cast<double>(m * n) * log_2pi + logdet + quad);
}

PosteriorEval::PosteriorEval(const Episode& ep, ModelKind kind, const PriorSpec& priors)
    : ep_(ep), kind_(kind), priors_(priors) {
  ep_.validate();
  const Eigen::Index n = ep_.n(), m = ep_.m();
  pos_.assign(static_cast<size_t>(m), std::vector<Eigen::Index>(static_cast<size_t>(n), -1));
  for (Eigen::Index mm = 0; mm < m; ++mm)
    for (Eigen::Index nn = 0; nn < n; ++nn)
      if (ep_.mask(nn, mm)) {
        pos_[static_cast<size_t>(mm)][static_cast<size_t>(nn)] =
            static_cast<Eigen::Index>(pm_.size());
        pm_.push_back(mm);
        pn_.push_back(nn);
      }
  y_.resize(static_cast<Eigen::Index>(pm_.size()));
  for (size_t i = 0; i < pm_.size(); ++i)
    y_(static_cast<Eigen::Index>(i)) = ep_.obs(pn_[i], pm_[i]);
}

const CholFactor& PosteriorEval::prior_chol(const GpPrior& pr) const {
  for (const auto& [key, ch] : prior_chols_)
    if (key.mean == pr.mean && key.amp == pr.amp && key.len == pr.len) return ch;
  prior_chols_.emplace_back(pr, cholesky(SymMatrix(prior_density_gram(ep_.times, pr))));
  return prior_chols_.back().second;
}

namespace {

// present-row coregionalization factors scaled by sd, so that the present
// covariance (before noise) is (R R^T) .* G with G the pure gibbs matrix
Matrix present_rows(const KernelSlice& s, const std::vector<Eigen::Index>& pm,
                    const std::vector<Eigen::Index>& pn) {
  const Eigen::Index np = static_cast<Eigen::Index>(pm.size());
  Matrix r(np, s.m());
  for (Eigen::Index p = 0; p < np; ++p) {
    if (s.kind == ModelKind::gnmgp)
      r.row(p) = s.coreg[static_cast<size_t>(pn[static_cast<size_t>(p)])].row(
          pm[static_cast<size_t>(p)]);
    else
      r.row(p) = s.coreg_const.row(pm[static_cast<size_t>(p)]);
    r.row(p) *= s.sd(pn[static_cast<size_t>(p)]);
  }
  return r;
}

Matrix present_gibbs(const KernelSlice& s, const std::vector<Eigen::Index>& pn) {
  // the same time pair recurs once per channel pair, so evaluate the kernel
  // on the time grid once and gather
  const Eigen::Index n = s.n();
  Matrix t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = gibbs(s.times(i), s.times(j), s.len(i), s.len(j));
      t(i, j) = v;
      t(j, i) = v;
    }
  }
  const Eigen::Index np = static_cast<Eigen::Index>(pn.size());
  Matrix g(np, np);
  for (Eigen::Index p = 0; p < np; ++p)
    for (Eigen::Index q = 0; q < np; ++q)
      g(p, q) = t(pn[static_cast<size_t>(p)], pn[static_cast<size_t>(q)]);
  return g;
}

// d gibbs(t_i, t_j; l_i, l_j) / d log l_i, as an (asymmetric) N x N table;
// exactly zero on the diagonal
Matrix dgibbs_dloglen(const KernelSlice& s) {
  const Eigen::Index n = s.n();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double li2 = s.len(i) * s.len(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double sij = li2 + s.len(j) * s.len(j);
      const double dt = s.times(i) - s.times(j);
      const double g = gibbs(s.times(i), s.times(j), s.len(i), s.len(j));
      d(i, j) = g * (0.5 - li2 / sij + 2.0 * li2 * dt * dt / (sij * sij));
    }
  }
  return d;
}

double inverse_gamma_logpdf_logspace(double u, double a, double b) {
  // density of v = exp(u) under IG(a, b), without the transform Jacobian
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * u - b * std::exp(-u);
}

}  // namespace

double PosteriorEval::logpost(const ModelParams& p, DensityMode mode) const {
  if (p.kind != kind_) throw invalid_argument("PosteriorEval: model kind mismatch");
  p.validate(ep_.n());
  KernelSlice s = kernel_slice(p, ep_.times);

  Matrix r = present_rows(s, pm_, pn_);
  Matrix sigma = (r * r.transpose()).cwiseProduct(present_gibbs(s, pn_));
  sigma.diagonal().array() += p.noise_var;
  CholFactor ch = cholesky(SymMatrix(std::move(sigma)));
  double lp = mvn_logpdf(y_, Vector::Zero(y_.size()), ch);

  // latent-process and scalar priors
  if (p.kind == ModelKind::smgp) {
    lp += lognorm1(p.log_len, priors_.loglen_prior.mean,
                   priors_.loglen_prior.amp * priors_.loglen_prior.amp);
    lp += lognorm1(p.log_amp, priors_.logsd_prior.mean,
                   priors_.logsd_prior.amp * priors_.logsd_prior.amp);
  } else {
    const CholFactor& cl = prior_chol(p.loglen->prior);
    lp += mvn_logpdf(p.loglen->values, Vector::Constant(ep_.n(), p.loglen->prior.mean), cl);
    if (p.kind == ModelKind::nmgp) {
      const CholFactor& cs = prior_chol(p.logsd->prior);
      lp += mvn_logpdf(p.logsd->values, Vector::Constant(ep_.n(), p.logsd->prior.mean), cs);
    }
  }
  if (p.kind == ModelKind::gnmgp) {
    for (const auto& proc : p.coreg_procs) {
      const CholFactor& cc = prior_chol(proc.prior);
      lp += mvn_logpdf(proc.values, Vector::Constant(ep_.n(), proc.prior.mean), cc);
    }
  } else {
    const Eigen::Index m = p.m_dims();
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b)
        lp += lognorm1(p.coreg_const(a, b), 0.0, priors_.coreg_var_c);
  }

  lp += inverse_gamma_logpdf_logspace(std::log(p.noise_var), priors_.ig_a, priors_.ig_b);
  if (mode == DensityMode::hmc) lp += std::log(p.noise_var);
  return lp;
}

Vector PosteriorEval::grad(const ModelParams& p, DensityMode mode) const {
  if (p.kind != kind_) throw invalid_argument("PosteriorEval: model kind mismatch");
  const Eigen::Index n = ep_.n(), m = ep_.m(), np = n_present();
  p.validate(n);
  KernelSlice s = kernel_slice(p, ep_.times);

  Matrix r = present_rows(s, pm_, pn_);
  Matrix g = present_gibbs(s, pn_);
  Matrix c = r * r.transpose();     // coreg-and-sd part
  Matrix kf = c.cwiseProduct(g);    // covariance without noise
  Matrix sigma = kf;
  sigma.diagonal().array() += p.noise_var;
  CholFactor ch = cholesky(SymMatrix(std::move(sigma)));
  Vector alpha = ch.solve(y_);
  Matrix w = -ch.inverse();
  const double inv_trace = -w.trace();
  w.noalias() += alpha * alpha.transpose();  // W = alpha alpha^T - Sigma^{-1}

  Vector out = Vector::Zero(packed_size(p));
  Eigen::Index k = 0;

  // log noise_var: d/du of the likelihood plus the inverse-gamma prior
  out(k++) = 0.5 * p.noise_var * (alpha.squaredNorm() - inv_trace) -
             (priors_.ig_a + 1.0) + priors_.ig_b / p.noise_var +
             (mode == DensityMode::hmc ? 1.0 : 0.0);

  if (p.kind == ModelKind::gnmgp) {
    // per-time coregionalization entries: rank-two structured perturbation
    for (const auto& proc : p.coreg_procs) {
      const Eigen::Index a = proc.coreg_i, b = proc.coreg_j;
      Vector lb(np);
      for (Eigen::Index q = 0; q < np; ++q)
        lb(q) = s.coreg[static_cast<size_t>(pn_[static_cast<size_t>(q)])](
            pm_[static_cast<size_t>(q)], b);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index rr = pos_[static_cast<size_t>(a)][static_cast<size_t>(i)];
        double gv = 0.0;
        if (rr >= 0)
          gv = (g.col(rr).array() * lb.array() * w.col(rr).array()).sum();
        out(k + i) = gv;
      }
      // GP prior on the entry process
      Vector resid = Vector::Constant(n, proc.prior.mean) - proc.values;
      out.segment(k, n) += prior_chol(proc.prior).solve(resid);
      k += n;
    }
  } else {
    // constant coregionalization through the channel-blocked partial trace
    Matrix wt = Matrix::Zero(m, m);
    Vector sp(np);
    for (Eigen::Index q = 0; q < np; ++q) sp(q) = s.sd(pn_[static_cast<size_t>(q)]);
    for (Eigen::Index pp = 0; pp < np; ++pp)
      for (Eigen::Index q = 0; q < np; ++q)
        wt(pm_[static_cast<size_t>(pp)], pm_[static_cast<size_t>(q)]) +=
            w(pp, q) * sp(pp) * sp(q) * g(pp, q);
    Matrix gl = wt * p.coreg_const;
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b)
        out(k++) = gl(a, b) - p.coreg_const(a, b) / priors_.coreg_var_c;
  }

  Matrix wc = w.cwiseProduct(c);  // reused by the length-scale terms

  if (p.kind == ModelKind::smgp) {
    // scalar log length-scale and log amplitude
    const double len = std::exp(p.log_len);
    double acc = 0.0, amp_acc = 0.0;
    for (Eigen::Index pp = 0; pp < np; ++pp)
      for (Eigen::Index q = 0; q < np; ++q) {
        const double dt = ep_.times(pn_[static_cast<size_t>(pp)]) -
                          ep_.times(pn_[static_cast<size_t>(q)]);
        const double wkf = w(pp, q) * kf(pp, q);
        acc += wkf * dt * dt;
        amp_acc += wkf;
      }
    out(k++) = 0.5 * acc / (len * len) -
               (p.log_len - priors_.loglen_prior.mean) /
                   (priors_.loglen_prior.amp * priors_.loglen_prior.amp);
    out(k++) = amp_acc - (p.log_amp - priors_.logsd_prior.mean) /
                             (priors_.logsd_prior.amp * priors_.logsd_prior.amp);
  } else {
    // per-time log length-scale
    Matrix dg = dgibbs_dloglen(s);
    for (Eigen::Index i = 0; i < n; ++i) {
      double gv = 0.0;
      for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index rr = pos_[static_cast<size_t>(a)][static_cast<size_t>(i)];
        if (rr < 0) continue;
        for (Eigen::Index q = 0; q < np; ++q)
          gv += wc(rr, q) * dg(i, pn_[static_cast<size_t>(q)]);
      }
      out(k + i) = gv;
    }
    Vector lresid = Vector::Constant(n, p.loglen->prior.mean) - p.loglen->values;
    out.segment(k, n) += prior_chol(p.loglen->prior).solve(lresid);
    k += n;

    if (p.kind == ModelKind::nmgp) {
      // per-time log signal sd
      Matrix wkf = w.cwiseProduct(kf);
      for (Eigen::Index i = 0; i < n; ++i) {
        double gv = 0.0;
        for (Eigen::Index a = 0; a < m; ++a) {
          const Eigen::Index rr = pos_[static_cast<size_t>(a)][static_cast<size_t>(i)];
          if (rr >= 0) gv += wkf.row(rr).sum();
        }
        out(k + i) = gv;
      }
      Vector sresid = Vector::Constant(n, p.logsd->prior.mean) - p.logsd->values;
      out.segment(k, n) += prior_chol(p.logsd->prior).solve(sresid);
      k += n;
    }
  }
  return out;
}

double log_posterior(const ModelParams& p, const PriorSpec& priors, const Episode& ep,
                     DensityMode mode) {
  return PosteriorEval(ep, p.kind, priors).logpost(p, mode);
}

Vector grad_log_posterior(const ModelParams& p, const PriorSpec& priors, const Episode& ep,
                          DensityMode mode) {
  return PosteriorEval(ep, p.kind, priors).grad(p, mode);
}

}  // namespace mgp
