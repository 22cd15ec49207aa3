#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mgp/episode.hpp"
#include "mgp/model.hpp"

namespace mgp {

struct MapConfig {
  double learning_rate = 0.01;
  int max_iters = 500;        // 0 is allowed and returns the initialization
  double grad_tol = 1e-3;     // stop when |grad|_inf falls below this
  double window_w = -1.0;     // <= 0: default to 0.1 * time span
  // Extra starts beyond the plain one; the best final log posterior wins.
  // Start 1 mirrors the sign of every cross (below-diagonal)
  // coregionalization component — the posterior is bimodal in that polarity
  // and ascent cannot cross between the modes — and later starts use random
  // polarities plus additive jitter.
  int restarts = 0;
  std::uint64_t seed = 0;     // drives the restart perturbations
};

struct MapResult {
  ModelParams params;
  double log_post = 0.0;
  std::vector<double> trace;  // log posterior per accepted iterate, [0] = init
  int restart_index = 0;      // which start produced the returned params
  int iters = 0;
};

// Build the data-driven initialization the optimizer starts from: length
// scales from the empirical semivariogram, coregionalization from windowed
// sample covariances, log signal sd 0, noise at 5% of mean channel variance.
ModelParams init_params(const Episode& ep, ModelKind kind, const PriorSpec& priors,
                        double window_w);

MapResult map_fit(const Episode& ep, ModelKind kind, const PriorSpec& priors,
                  const MapConfig& cfg);

// Defaults are calibrated on the unit-Gaussian reference target (trajectory
// length ~= pi/2 with a mid-range acceptance rate).  Real posteriors are
// sharper and need a smaller step_size; there is no universal default.
struct HmcConfig {
  double step_size = 0.4;
  int n_leapfrog = 4;
  int n_samples = 1000;  // returned samples, after burn-in
  int n_burnin = 500;
  std::uint64_t seed = 0;
};

struct HmcDraw {
  Vector theta;
  double log_post = 0.0;
  bool accepted = false;
};

// Plain HMC on an arbitrary differentiable log density: identity mass,
// n_leapfrog steps of size step_size, Metropolis correction, momentum
// resampled every iteration.  Deterministic for a fixed seed.
std::vector<HmcDraw> hmc_run(const std::function<double(const Vector&)>& logp,
                             const std::function<Vector(const Vector&)>& grad,
                             const Vector& init, const HmcConfig& cfg);

struct PosteriorSample {
  ModelParams params;
  double log_post = 0.0;
  bool accepted = false;
};

// HMC over the model posterior (hmc density mode: the noise-variance
// log-transform Jacobian is part of the target).
std::vector<PosteriorSample> hmc_sample(const Episode& ep, ModelKind kind,
                                        const PriorSpec& priors, const HmcConfig& cfg,
                                        const ModelParams& init);

// Instantaneous cross-channel correlation matrix and per-channel signal sd
// at time t, per model kind:
//   gnmgp: B(t) = L(t) L(t)^T from the entry processes, C = D^-1/2 B D^-1/2,
//          sd = sqrt(diag B(t))
//   nmgp : C from the constant B, sd(t) = exp(logsd(t)) sqrt(diag B)
//   smgp : C from the constant B, sd = exp(log_amp) sqrt(diag B)
std::pair<Matrix, Vector> derive_corr_sd(const ModelParams& params, const Vector& times,
                                         double t);

}  // namespace mgp
