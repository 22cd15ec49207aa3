#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgp/episode.hpp"
#include "mgp/model.hpp"

namespace mgp {

// Synthetic data generator: two channels driven by a shared nonstationary
// length-scale process, per-channel log-sd processes, and a deterministic
// correlation curve r(t) combined into the unique lower-triangular
//   L(t) = [ s1(t)        0
//            s2(t) r(t)   s2(t) sqrt(1 - r(t)^2) ]
// from which observations are drawn under the nonseparable model.
struct SynthConfig {
  int n_points = 200;
  int m_dims = 2;  // the L(t) construction above is two-channel
  std::uint64_t seed = 0;
  double noise_var = 1e-6;
  GpPrior loglen_prior{0.0, 4.0, 0.4};
  GpPrior logsd_prior{0.0, 1.0, 0.1};
  std::string corr_fn = "cos_pi_t";  // cos_pi_t | zero | one
  double drop_rate = 0.0;            // optional uniform missingness
};

// Everything the generator drew, for recovery scoring and truth CSVs.
struct SynthTruth {
  Vector times;
  Vector loglen;               // shared log length-scale at the timestamps
  Matrix logsd;                // N x M per-channel log sd
  Vector corr;                 // r(t) at the timestamps
  std::vector<Matrix> coreg;   // L(t) per timestamp
  std::string corr_fn;         // the curve by name, for off-grid evaluation
  GpPrior loglen_prior;        // generating priors, for off-grid extension
  GpPrior logsd_prior;
  double noise_var = 0.0;
};

double corr_curve(const std::string& name, double t);

std::pair<Episode, SynthTruth> generate(const SynthConfig& cfg);

// Truth latents as model parameters (the identity fit); useful for
// self-comparison tests and as an oracle for the recovery scorer.
ModelParams truth_params(const SynthTruth& truth);

struct RecoveryReport {
  double corr_rmse = 0.0;       // C_21(t) vs r(t)
  double corr_sign_match = 0.0; // fraction of grid with matching sign, |r| >= 0.1
  double sd_rmse = 0.0;         // mean over channels of sd-curve RMSE
  double loglen_rmse = 0.0;
};

// Evaluate the fitted model's derived curves on `grid` against the
// generating truth (extended off its knots by the generating priors).
RecoveryReport score_recovery(const SynthTruth& truth, const ModelParams& fitted,
                              const Vector& fit_times, const Vector& grid);

}  // namespace mgp
