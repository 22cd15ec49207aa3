#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "mgp/episode.hpp"
#include "mgp/kernels.hpp"
#include "mgp/latent_process.hpp"
#include "mgp/linalg.hpp"

namespace mgp {

// Complete parameter state for one model kind.  Exactly the fields the kind
// needs are meaningful:
//   smgp : noise_var, coreg_const, log_len, log_amp
//   nmgp : noise_var, coreg_const, loglen, logsd
//   gnmgp: noise_var, coreg_procs (M(M+1)/2 of them), loglen
struct ModelParams {
  ModelKind kind = ModelKind::smgp;
  double noise_var = 1.0;

  double log_len = 0.0;  // smgp
  double log_amp = 0.0;  // smgp

  Matrix coreg_const;  // lower-triangular M x M (smgp/nmgp)

  std::optional<LatentProcess> loglen;     // nmgp/gnmgp
  std::optional<LatentProcess> logsd;      // nmgp
  std::vector<LatentProcess> coreg_procs;  // gnmgp, order (0,0),(1,0),(1,1),(2,0),...

  Eigen::Index m_dims() const;
  // shape and positivity checks against a grid of n timestamps
  void validate(Eigen::Index n) const;
};

// Hyperparameters of all priors entering the posterior.
struct PriorSpec {
  double ig_a = 1.0;          // inverse-gamma shape on noise_var
  double ig_b = 1.0;          // inverse-gamma scale on noise_var
  double coreg_var_c = 25.0;  // N(0, c) on constant coregionalization entries
  GpPrior loglen_prior{0.0, 5.0, 0.1};
  GpPrior logsd_prior{0.0, 5.0, 0.1};
  GpPrior coreg_prior{0.0, 5.0, 0.1};
};

// The posterior is always evaluated in the unconstrained parameterization
// (log noise_var).  map mode is the plain density there; hmc mode adds the
// log-Jacobian of the noise_var transform so sampling targets the correct
// distribution.
enum class DensityMode { map, hmc };

// Flat parameter vector layout (shared by pack/unpack/grad_log_posterior):
//   [0]               log noise_var
//   coreg block       constant kinds: lower entries (0,0),(1,0),(1,1),...
//                     nonseparable: per lower entry, its N per-time values
//   loglen block      smgp: scalar log_len; otherwise N values
//   logsd block       smgp: scalar log_amp; nmgp: N values; gnmgp: absent
Eigen::Index packed_size(const ModelParams& p);
Vector pack(const ModelParams& p);
ModelParams unpack(const Vector& theta, const ModelParams& tmpl);

double log_posterior(const ModelParams& p, const PriorSpec& priors, const Episode& ep,
                     DensityMode mode = DensityMode::map);
Vector grad_log_posterior(const ModelParams& p, const PriorSpec& priors, const Episode& ep,
                          DensityMode mode = DensityMode::map);

// log N(y | 0, B kron K + noise_var I) through the two small
// eigendecompositions, for complete separable models; never materializes the
// N*M covariance.  y is dimension-major.
double kron_fast_loglik(const SymMatrix& b, const SymMatrix& k, double noise_var,
                        const Vector& y);

// Reusable evaluator: caches the present-entry index structure and the prior
// gram factorizations, which depend only on the grid and the prior
// hyperparameters, across the many evaluations of one optimization or chain.
class PosteriorEval {
 public:
  PosteriorEval(const Episode& ep, ModelKind kind, const PriorSpec& priors);

  double logpost(const ModelParams& p, DensityMode mode) const;
  Vector grad(const ModelParams& p, DensityMode mode) const;

  const Episode& episode() const { return ep_; }
  ModelKind kind() const { return kind_; }
  const PriorSpec& priors() const { return priors_; }
  const Vector& y() const { return y_; }
  Eigen::Index n_present() const { return static_cast<Eigen::Index>(pm_.size()); }

 private:
  const CholFactor& prior_chol(const GpPrior& pr) const;
  Matrix present_cov(const ModelParams& p, const KernelSlice& slice) const;

  Episode ep_;
  ModelKind kind_;
  PriorSpec priors_;
  std::vector<Eigen::Index> pm_, pn_;         // channel / time of each present index
  std::vector<std::vector<Eigen::Index>> pos_;  // pos_[m][n] = present index or -1
  Vector y_;  // observed values, dimension-major
  // deque: references handed out stay valid while the cache grows
  mutable std::deque<std::pair<GpPrior, CholFactor>> prior_chols_;
};

}  // namespace mgp
