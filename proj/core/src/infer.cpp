#include "mgp/infer.hpp"

#include <cmath>
#include <limits>

#include "mgp/rng.hpp"

namespace mgp {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// evaluate, mapping numerical failures to -inf so line search can back off
double safe_logpost(const PosteriorEval& pe, const ModelParams& tmpl, const Vector& th,
                    DensityMode mode) {
  try {
    const double v = pe.logpost(unpack(th, tmpl), mode);
    return std::isfinite(v) ? v : neg_inf;
  } catch (const not_positive_definite&) {
    return neg_inf;
  } catch (const non_finite&) {
    return neg_inf;
  }
}
}  // namespace

ModelParams init_params(const Episode& ep, ModelKind kind, const PriorSpec& priors,
                        double window_w) {
  ep.validate();
  const Eigen::Index n = ep.n(), m = ep.m();
  if (n < 4) throw degenerate_data("init_params: need at least 4 observations");
  double w = window_w;
  if (!(w > 0.0)) w = 0.1 * (ep.times(n - 1) - ep.times(0));

  Vector loglen0 = init_loglen_semivariogram(ep);
  std::vector<Matrix> lwin = init_coreg_windowed(ep, w);

  // noise floor: 5% of the mean per-channel variance
  double var_sum = 0.0;
  int var_cnt = 0;
  for (Eigen::Index c = 0; c < m; ++c) {
    double s = 0.0, s2 = 0.0;
    long cnt = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (ep.mask(i, c)) {
        s += ep.obs(i, c);
        s2 += ep.obs(i, c) * ep.obs(i, c);
        ++cnt;
      }
    if (cnt >= 2) {
      const double v = (s2 - s * s / cnt) / (cnt - 1);
      if (v > 0.0) {
        var_sum += v;
        ++var_cnt;
      }
    }
  }
  const double mean_var = var_cnt > 0 ? var_sum / var_cnt : 1.0;

  ModelParams p;
  p.kind = kind;
  p.noise_var = 0.05 * mean_var;

  if (kind == ModelKind::gnmgp) {
    p.loglen = LatentProcess{LatentKind::log_length_scale, 0, 0, loglen0, priors.loglen_prior};
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b) {
        LatentProcess proc;
        proc.kind = LatentKind::coreg_entry;
        proc.coreg_i = static_cast<int>(a);
        proc.coreg_j = static_cast<int>(b);
        proc.prior = priors.coreg_prior;
        proc.values.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
          proc.values(i) = lwin[static_cast<size_t>(i)](a, b);
        p.coreg_procs.push_back(std::move(proc));
      }
  } else {
    // constant coregionalization: mean of the windowed factors
    Matrix l = Matrix::Zero(m, m);
    for (const auto& li : lwin) l += li;
    l /= static_cast<double>(lwin.size());
    p.coreg_const = l;
    if (kind == ModelKind::smgp) {
      p.log_len = loglen0(0);
      p.log_amp = 0.0;
    } else {
      p.loglen = LatentProcess{LatentKind::log_length_scale, 0, 0, loglen0, priors.loglen_prior};
      p.logsd = LatentProcess{LatentKind::log_signal_sd, 0, 0, Vector::Zero(n), priors.logsd_prior};
    }
  }
  p.validate(n);
  return p;
}

// Negate below-diagonal coregionalization components of a packed state (the
// scalar entries for constant kinds, the whole per-time block otherwise).
// Returns false when the model has none (M == 1).
//
// The posterior over the cross terms is bimodal in their sign: flipping the
// polarity of a cross-correlation leaves the marginal variances intact, and
// plain ascent cannot cross the zero-correlation barrier between the two
// modes.  The windowed initializer picks a polarity from local slopes, which
// on smooth data can be a coin flip, so the mirrored start is the single
// most valuable alternative initialization.
static bool flip_cross_terms(Vector& th, const ModelParams& tmpl, Eigen::Index n) {
  const Eigen::Index m = tmpl.m_dims();
  const Eigen::Index len = tmpl.kind == ModelKind::gnmgp ? n : 1;
  bool any = false;
  Eigen::Index off = 1;
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      if (a != b) {
        th.segment(off, len) *= -1.0;
        any = true;
      }
      off += len;
    }
  return any;
}

MapResult map_fit(const Episode& ep, ModelKind kind, const PriorSpec& priors,
                  const MapConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw invalid_argument("map_fit: learning_rate must be positive");
  if (cfg.max_iters < 0) throw invalid_argument("map_fit: max_iters must be >= 0");
  if (cfg.restarts < 0) throw invalid_argument("map_fit: restarts must be >= 0");

  const ModelParams p0 = init_params(ep, kind, priors, cfg.window_w);
  const Vector th0 = pack(p0);
  PosteriorEval pe(ep, kind, priors);

  MapResult best;
  best.log_post = neg_inf;

  for (int restart = 0; restart <= cfg.restarts; ++restart) {
    Vector th = th0;
    if (restart == 1) {
      // deterministic mirror of the cross-correlation polarity
      if (!flip_cross_terms(th, p0, ep.n())) {
        rng gen(cfg.seed + 1);
        for (Eigen::Index i = 0; i < th.size(); ++i) th(i) += 0.1 * gen.normal();
      }
    } else if (restart > 1) {
      // random polarity pattern plus mild jitter
      rng gen(cfg.seed + static_cast<std::uint64_t>(restart));
      const Eigen::Index m = p0.m_dims();
      const Eigen::Index len = kind == ModelKind::gnmgp ? ep.n() : 1;
      Eigen::Index off = 1;
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b <= a; ++b) {
          if (a != b && gen.uniform() < 0.5) th.segment(off, len) *= -1.0;
          off += len;
        }
      for (Eigen::Index i = 0; i < th.size(); ++i) th(i) += 0.1 * gen.normal();
    }

    double lp = safe_logpost(pe, p0, th, DensityMode::map);
    if (lp == neg_inf) {
      if (restart == 0)
        throw non_finite("map_fit: log posterior not finite at the initialization");
      continue;  // a perturbed start may land in a bad region; skip it
    }

    std::vector<double> trace{lp};
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
      Vector grad = pe.grad(unpack(th, p0), DensityMode::map);
      if (!grad.allFinite())
        throw non_finite("map_fit: non-finite gradient at iteration " + std::to_string(it));
      if (grad.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) break;

      // fixed-rate ascent, halving on any decrease of the log posterior
      double step = cfg.learning_rate;
      bool moved = false;
      while (step > cfg.learning_rate * 0x1.0p-40) {
        Vector cand = th + step * grad;
        const double cand_lp = safe_logpost(pe, p0, cand, DensityMode::map);
        if (cand_lp >= lp) {
          th = std::move(cand);
          lp = cand_lp;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;  // no uphill step at any scale: converged
      trace.push_back(lp);
    }

    if (lp > best.log_post) {
      best.params = unpack(th, p0);
      best.log_post = lp;
      best.trace = std::move(trace);
      best.restart_index = restart;
      best.iters = it;
    }
  }
  if (best.log_post == neg_inf)
    throw non_finite("map_fit: no restart produced a finite log posterior");
  return best;
}

std::vector<HmcDraw> hmc_run(const std::function<double(const Vector&)>& logp,
                             const std::function<Vector(const Vector&)>& grad,
                             const Vector& init, const HmcConfig& cfg) {
  if (!(cfg.step_size > 0.0)) throw invalid_argument("hmc_run: step_size must be positive");
  if (cfg.n_leapfrog < 1 || cfg.n_samples < 1 || cfg.n_burnin < 0)
    throw invalid_argument("hmc_run: bad iteration counts");

  const Eigen::Index d = init.size();
  rng gen(cfg.seed);

  Vector th = init;
  double lp = logp(th);
  if (!std::isfinite(lp)) throw non_finite("hmc_run: log density not finite at init");

  std::vector<HmcDraw> out;
  out.reserve(static_cast<size_t>(cfg.n_samples));
  const int total = cfg.n_burnin + cfg.n_samples;
  for (int iter = 0; iter < total; ++iter) {
    Vector mom(d);
    for (Eigen::Index i = 0; i < d; ++i) mom(i) = gen.normal();
    const double h0 = -lp + 0.5 * mom.squaredNorm();

    // leapfrog; any non-finite state rejects the proposal
    Vector q = th;
    Vector p = mom;
    bool ok = true;
    Vector g = grad(q);
    if (!g.allFinite()) ok = false;
    for (int l = 0; ok && l < cfg.n_leapfrog; ++l) {
      p += 0.5 * cfg.step_size * g;
      q += cfg.step_size * p;
      if (!q.allFinite()) {
        ok = false;
        break;
      }
      g = grad(q);
      if (!g.allFinite()) {
        ok = false;
        break;
      }
      p += 0.5 * cfg.step_size * g;
    }

    const double cand_lp = ok ? logp(q) : neg_inf;
    // one uniform per iteration whatever happened above, so the stream
    // position depends only on the iteration count
    const double u = gen.uniform();
    bool accepted = false;
    if (std::isfinite(cand_lp)) {
      const double h1 = -cand_lp + 0.5 * p.squaredNorm();
      if (u < std::exp(h0 - h1)) {
        th = q;
        lp = cand_lp;
        accepted = true;
      }
    }
    if (iter >= cfg.n_burnin) out.push_back(HmcDraw{th, lp, accepted});
  }
  return out;
}

std::vector<PosteriorSample> hmc_sample(const Episode& ep, ModelKind kind,
                                        const PriorSpec& priors, const HmcConfig& cfg,
                                        const ModelParams& init) {
  PosteriorEval pe(ep, kind, priors);
  const ModelParams tmpl = init;
  auto logp = [&](const Vector& th) { return safe_logpost(pe, tmpl, th, DensityMode::hmc); };
  auto grad = [&](const Vector& th) -> Vector {
    try {
      return pe.grad(unpack(th, tmpl), DensityMode::hmc);
    } catch (const not_positive_definite&) {
      return Vector::Constant(th.size(), std::numeric_limits<double>::quiet_NaN());
    }
  };
  std::vector<HmcDraw> draws = hmc_run(logp, grad, pack(init), cfg);
  std::vector<PosteriorSample> out;
  out.reserve(draws.size());
  for (const auto& d : draws)
    out.push_back(PosteriorSample{unpack(d.theta, tmpl), d.log_post, d.accepted});
  return out;
}

std::pair<Matrix, Vector> derive_corr_sd(const ModelParams& params, const Vector& times,
                                         double t) {
  params.validate(times.size());
  const Eigen::Index m = params.m_dims();
  Matrix b(m, m);
  Vector sd(m);

  if (params.kind == ModelKind::gnmgp) {
    Vector at(1);
    at(0) = t;
    Matrix l = Matrix::Zero(m, m);
    for (const auto& proc : params.coreg_procs)
      l(proc.coreg_i, proc.coreg_j) = conditional_mean(proc, times, at)(0);
    b = l * l.transpose();
    sd = b.diagonal().array().sqrt().matrix();
  } else {
    b = params.coreg_const * params.coreg_const.transpose();
    double scale;
    if (params.kind == ModelKind::nmgp) {
      Vector at(1);
      at(0) = t;
      scale = std::exp(conditional_mean(*params.logsd, times, at)(0));
    } else {
      scale = std::exp(params.log_amp);
    }
    sd = (scale * b.diagonal().array().sqrt()).matrix();
  }

  for (Eigen::Index i = 0; i < m; ++i)
    if (!(b(i, i) > 1e-12))
      throw zero_variance("derive_corr_sd: channel " + std::to_string(i) +
                          " has vanishing variance at t=" + std::to_string(t));
  Vector dinv = b.diagonal().array().rsqrt().matrix();
  Matrix corr = dinv.asDiagonal() * b * dinv.asDiagonal();
  corr.diagonal().setOnes();  // exact ones on the diagonal
  return {corr, sd};
}

}  // namespace mgp
