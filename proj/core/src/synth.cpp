#include "mgp/synth.hpp"

#include <algorithm>
#include <cmath>

#include "mgp/infer.hpp"
#include "mgp/rng.hpp"

namespace mgp {

double corr_curve(const std::string& name, double t) {
  if (name == "cos_pi_t") return std::cos(M_PI * t);
  if (name == "zero") return 0.0;
  if (name == "one") return 1.0;
  throw invalid_argument("unknown correlation curve '" + name + "' (want cos_pi_t|zero|one)");
}

namespace {

// draw from N(mean * 1, rbf gram) on the given grid
Vector draw_gp(rng& gen, const Vector& times, const GpPrior& prior) {
  CholFactor ch = cholesky(SymMatrix(rbf_gram(times, prior)));
  Vector z(times.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gen.normal();
  Vector v = ch.lower * z;
  v.array() += prior.mean;
  return v;
}

}  // namespace

ModelParams truth_params(const SynthTruth& truth) {
  const Eigen::Index n = truth.times.size();
  const Eigen::Index m = truth.logsd.cols();
  ModelParams p;
  p.kind = ModelKind::gnmgp;
  p.noise_var = truth.noise_var;
  p.loglen = LatentProcess{LatentKind::log_length_scale, 0, 0, truth.loglen, truth.loglen_prior};
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      LatentProcess proc;
      proc.kind = LatentKind::coreg_entry;
      proc.coreg_i = static_cast<int>(a);
      proc.coreg_j = static_cast<int>(b);
      proc.prior = truth.logsd_prior;  // scale of the entry curves
      proc.values.resize(n);
      for (Eigen::Index i = 0; i < n; ++i)
        proc.values(i) = truth.coreg[static_cast<size_t>(i)](a, b);
      p.coreg_procs.push_back(std::move(proc));
    }
  p.validate(n);
  return p;
}

std::pair<Episode, SynthTruth> generate(const SynthConfig& cfg) {
  if (cfg.n_points < 2) throw invalid_argument("generate: n_points must be >= 2");
  if (cfg.m_dims != 2)
    throw invalid_argument("generate: the correlation-curve construction is two-channel");
  if (!(cfg.noise_var > 0.0)) throw invalid_argument("generate: noise_var must be positive");
  corr_curve(cfg.corr_fn, 0.0);  // validate the name up front
  if (cfg.drop_rate < 0.0 || cfg.drop_rate >= 1.0)
    throw invalid_argument("generate: drop_rate must be in [0, 1)");

  const Eigen::Index n = cfg.n_points;
  const Eigen::Index m = 2;
  rng gen(cfg.seed);

  for (int attempt = 0; attempt < 3; ++attempt) {
    // i.i.d. uniform timestamps, sorted; redraw on (measure-zero) collisions
    Vector times(n);
    for (;;) {
      for (Eigen::Index i = 0; i < n; ++i) times(i) = gen.uniform();
      std::sort(times.data(), times.data() + n);
      bool distinct = true;
      for (Eigen::Index i = 0; i + 1 < n; ++i)
        if (times(i) == times(i + 1)) distinct = false;
      if (distinct) break;
    }

    try {
      SynthTruth truth;
      truth.times = times;
      truth.corr_fn = cfg.corr_fn;
      truth.loglen_prior = cfg.loglen_prior;
      truth.logsd_prior = cfg.logsd_prior;
      truth.noise_var = cfg.noise_var;
      truth.loglen = draw_gp(gen, times, cfg.loglen_prior);
      truth.logsd.resize(n, m);
      for (Eigen::Index c = 0; c < m; ++c)
        truth.logsd.col(c) = draw_gp(gen, times, cfg.logsd_prior);
      truth.corr.resize(n);
      truth.coreg.assign(static_cast<size_t>(n), Matrix::Zero(m, m));
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = corr_curve(cfg.corr_fn, times(i));
        const double s1 = std::exp(truth.logsd(i, 0));
        const double s2 = std::exp(truth.logsd(i, 1));
        truth.corr(i) = r;
        Matrix& l = truth.coreg[static_cast<size_t>(i)];
        l(0, 0) = s1;
        l(1, 0) = s2 * r;
        l(1, 1) = s2 * std::sqrt(std::max(0.0, 1.0 - r * r));
      }

      ModelParams p = truth_params(truth);
      SymMatrix kf = assemble_cov(p, times);
      Matrix cov = kf.mat();
      cov.diagonal().array() += cfg.noise_var;
      CholFactor ch = cholesky(SymMatrix(std::move(cov)));
      Vector z(n * m);
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gen.normal();
      Vector y = ch.lower * z;  // dimension-major draw

      Episode ep;
      ep.id = "synth-" + std::to_string(cfg.seed);
      ep.times = times;
      ep.channels = {"ch1", "ch2"};
      ep.obs.resize(n, m);
      ep.mask = Mask::Constant(n, m, true);
      for (Eigen::Index c = 0; c < m; ++c)
        for (Eigen::Index i = 0; i < n; ++i) ep.obs(i, c) = y(c * n + i);

      if (cfg.drop_rate > 0.0) {
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index c = 0; c < m; ++c)
            if (gen.uniform() < cfg.drop_rate) ep.mask(i, c) = false;
        // never orphan a row: keep one entry where everything was dropped
        for (Eigen::Index i = 0; i < n; ++i)
          if (!ep.mask.row(i).any())
            ep.mask(i, static_cast<Eigen::Index>(gen.raw() % static_cast<std::uint64_t>(m))) = true;
      }
      ep.validate();
      return {ep, truth};
    } catch (const not_positive_definite&) {
      if (attempt == 2) throw;
      // fall through: fresh draw from the same stream
    }
  }
  throw not_positive_definite("generate: unreachable");
}

RecoveryReport score_recovery(const SynthTruth& truth, const ModelParams& fitted,
                              const Vector& fit_times, const Vector& grid) {
  if (grid.size() < 1) throw invalid_argument("score_recovery: empty grid");
  const Eigen::Index m = truth.logsd.cols();
  if (fitted.m_dims() != m || m != 2)
    throw dimension_mismatch("score_recovery: two-channel truth vs fitted dims");

  // truth curves, extended off the knots under the generating priors
  LatentProcess tl{LatentKind::log_length_scale, 0, 0, truth.loglen, truth.loglen_prior};
  Vector true_loglen = conditional_mean(tl, truth.times, grid);
  Matrix true_sd(grid.size(), m);
  for (Eigen::Index c = 0; c < m; ++c) {
    LatentProcess ts{LatentKind::log_signal_sd, 0, 0, truth.logsd.col(c), truth.logsd_prior};
    true_sd.col(c) = conditional_mean(ts, truth.times, grid).array().exp().matrix();
  }

  RecoveryReport rep;
  double corr_acc = 0.0, loglen_acc = 0.0;
  Vector sd_acc = Vector::Zero(m);
  long sign_total = 0, sign_match = 0;

  // one batched latent extension instead of a conditional_mean per point
  KernelSlice fs = kernel_slice(fitted, fit_times, grid);
  Matrix bconst;
  if (fitted.kind != ModelKind::gnmgp)
    bconst = fitted.coreg_const * fitted.coreg_const.transpose();

  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Matrix b = fitted.kind == ModelKind::gnmgp
                         ? Matrix(fs.coreg[static_cast<size_t>(i)] *
                                  fs.coreg[static_cast<size_t>(i)].transpose())
                         : bconst;
    Vector sd = (fs.sd(i) * b.diagonal().array().sqrt()).matrix();
    const double denom = std::max(sd(0) * sd(1), 1e-300);
    const double c21 = fs.sd(i) * fs.sd(i) * b(1, 0) / denom;

    const double rt = corr_curve(truth.corr_fn, grid(i));
    const double dc = c21 - rt;
    corr_acc += dc * dc;
    if (std::abs(rt) >= 0.1) {
      ++sign_total;
      if ((c21 > 0.0) == (rt > 0.0)) ++sign_match;
    }
    for (Eigen::Index c = 0; c < m; ++c) {
      const double ds = sd(c) - true_sd(i, c);
      sd_acc(c) += ds * ds;
    }
    const double dl = std::log(fs.len(i)) - true_loglen(i);
    loglen_acc += dl * dl;
  }
  const double g = static_cast<double>(grid.size());
  rep.corr_rmse = std::sqrt(corr_acc / g);
  rep.corr_sign_match = sign_total > 0 ? static_cast<double>(sign_match) / sign_total : 1.0;
  rep.sd_rmse = (sd_acc / g).array().sqrt().mean();
  rep.loglen_rmse = std::sqrt(loglen_acc / g);
  return rep;
}

}  // namespace mgp
