#pragma once

#include <vector>

#include "mgp/episode.hpp"
#include "mgp/linalg.hpp"

namespace mgp {

// RBF-GP prior over one latent function: constant mean, signal sd `amp`,
// length-scale `len`.
struct GpPrior {
  double mean = 0.0;
  double amp = 1.0;
  double len = 1.0;
};

enum class LatentKind { log_length_scale, log_signal_sd, coreg_entry };

// Values of one latent function at the model's N timestamps, plus its prior.
// Everything between and beyond those timestamps is reached through
// conditional_mean.  For coreg_entry, (coreg_i, coreg_j) with i >= j names
// the lower-triangular slot this process fills.
struct LatentProcess {
  LatentKind kind = LatentKind::log_length_scale;
  int coreg_i = 0;
  int coreg_j = 0;
  Vector values;
  GpPrior prior;
};

// Gram matrix of the prior kernel amp^2 exp(-(t-t')^2 / (2 len^2)).
Matrix rbf_gram(const Vector& times, const GpPrior& prior);
Matrix rbf_cross(const Vector& a, const Vector& b, const GpPrior& prior);

// The prior DENSITY carries a relative white-noise nugget so its curvature
// stays bounded on dense grids, where the bare RBF gram is numerically
// singular and its inverse would swamp every other term in the posterior
// gradient.  The value also caps the stiffest prior precision at
// 1/(kPriorNugget amp^2), which is what limits the stable step of plain
// gradient ascent on latent fields: 1e-4 (a white jitter of one percent of
// the prior amplitude) is small enough not to matter statistically and large
// enough that optimization is not throttled by directions the prior has
// already decided.  Interpolation (conditional_mean) stays nugget-free: the
// latent function itself is still the smooth GP.
constexpr double kPriorNugget = 1e-4;
Matrix prior_density_gram(const Vector& times, const GpPrior& prior);

// log N(values | mean * 1, prior_density_gram(times)).
double prior_logpdf(const LatentProcess& p, const Vector& times);

// Noise-free GP posterior mean of the latent function at `query`:
//   k(query, times) K(times, times)^{-1} (values - mean) + mean
Vector conditional_mean(const LatentProcess& p, const Vector& times, const Vector& query);

// Initial log length-scale from the empirical semivariogram
//   gamma(h) = 0.5 mean[(y(t) - y(t+h))^2]
// over nbins lag bins up to half the time span: the sill is estimated as the
// mean of the last third of the nonempty bins, the range is the first bin
// center where gamma reaches 95% of the sill, and the result is the log of
// that range averaged over channels, broadcast to all N entries.
Vector init_loglen_semivariogram(const Episode& ep, int nbins = 15);

// Initial per-time coregionalization: at each t_n, the lower Cholesky factor
// of the sample covariance of the observations in [t_n - w, t_n + w].  The
// window widens to the nearest M+1 rows when too few fall inside, so this
// never fails; it falls back to a diagonal sd factor if even the jittered
// factorization does.
std::vector<Matrix> init_coreg_windowed(const Episode& ep, double w);

}  // namespace mgp
