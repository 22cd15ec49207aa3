#pragma once

#include <string>
#include <vector>

#include <mgp/episode.hpp>
#include <mgp/infer.hpp>
#include <mgp/model.hpp>
#include <mgp/predict.hpp>

#include "json.hpp"

namespace mgp::cli {

// bumped whenever any artifact layout changes
inline constexpr int kSchemaVersion = 1;

// provenance block stamped into every artifact
struct Meta {
  std::string config_hash;
  std::uint64_t seed = 0;
  ModelKind kind = ModelKind::gnmgp;
};

nlohmann::json meta_json(const Meta& meta);
std::vector<std::string> meta_comments(const Meta& meta);  // '# key=value' lines for CSVs

// Fitted parameter state, self-contained: latent-process values live on the
// training grid, so the grid rides along.
nlohmann::json params_to_json(const ModelParams& p, const PriorSpec& priors,
                              const Vector& times, const Meta& meta);

void write_json(const std::string& path, const nlohmann::json& j);

void write_trace_csv(const std::string& path, const std::vector<double>& trace,
                     const Meta& meta);

// one row per held-out (time, channel): observed is empty when masked
void write_predictions_csv(const std::string& path, const Episode& holdout,
                           const PredictiveDist& pred, const Meta& meta);

// chain archive: one row per sample over the packed parameter vector
void write_samples_csv(const std::string& path, const std::vector<PosteriorSample>& chain,
                       const Meta& meta);

// derived correlation/sd curves: one row per (sample, grid point)
struct DerivedCurves {
  Vector grid;
  // per sample, per grid point: lower-triangle correlations then per-channel sds
  std::vector<Matrix> corr21;  // grid x n_pairs, one matrix per sample
  std::vector<Matrix> sd;      // grid x m, one matrix per sample
};
void write_curves_csv(const std::string& path, const DerivedCurves& curves, Eigen::Index m,
                      const Meta& meta);

std::string sanitize_id(const std::string& id);

}  // namespace mgp::cli
