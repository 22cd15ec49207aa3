#pragma once

#include "mgp/episode.hpp"
#include "mgp/model.hpp"

namespace mgp {

// Exact predictive distribution of the latent f at the query times,
// dimension-major over the query grid (index = m*Q + q).
struct PredictiveDist {
  Vector mean;
  Matrix cov;

  Eigen::Index size() const { return mean.size(); }
};

// Condition the model on the episode's present observations and return the
// joint normal of f at `query`.  Latent functions are extended to the query
// times by their conditional means.  The cross covariance is assembled
// time-major (per-time channel blocks stacked over the training grid) and
// then permuted into the canonical dimension-major ordering.  With no
// training rows the prior at the query is returned.
PredictiveDist predict(const ModelParams& params, const Episode& ep, const Vector& query);

// Root mean squared error of the predictive mean over present hold-out
// entries.  truth is Q x M with its own presence mask.
double rmse(const PredictiveDist& pred, const Matrix& truth, const Mask& mask);

// Joint log density of the present hold-out entries under the predictive
// normal for observations (cov + noise_var I), divided by the number of
// scored scalars.  Observations are scored, not latent function values.
double lpd(const PredictiveDist& pred, const Matrix& truth, const Mask& mask,
           double noise_var);

}  // namespace mgp
