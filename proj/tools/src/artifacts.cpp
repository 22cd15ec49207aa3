#include "artifacts.hpp"

#include <cstdio>
#include <fstream>

namespace mgp::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-identical artifacts
  if (!out) throw invalid_argument("cannot open output file '" + path + "'");
  return out;
}

nlohmann::json prior_json(const GpPrior& p) {
  return {{"mean", p.mean}, {"amp", p.amp}, {"len", p.len}};
}

}  // namespace

nlohmann::json meta_json(const Meta& meta) {
  return {{"schema_version", kSchemaVersion},
          {"config_hash", meta.config_hash},
          {"seed", meta.seed},
          {"model_kind", to_string(meta.kind)}};
}

std::vector<std::string> meta_comments(const Meta& meta) {
  return {"schema_version=" + std::to_string(kSchemaVersion), "config_hash=" + meta.config_hash,
          "seed=" + std::to_string(meta.seed), "model_kind=" + std::string(to_string(meta.kind))};
}

nlohmann::json params_to_json(const ModelParams& p, const PriorSpec& priors,
                              const Vector& times, const Meta& meta) {
  nlohmann::json j = meta_json(meta);
  j["noise_var"] = p.noise_var;
  j["times"] = std::vector<double>(times.data(), times.data() + times.size());

  if (p.kind == ModelKind::gnmgp) {
    // per-time list of full M x M factors
    nlohmann::json coreg = nlohmann::json::array();
    const Eigen::Index m = p.m_dims();
    for (Eigen::Index i = 0; i < times.size(); ++i) {
      Matrix l = Matrix::Zero(m, m);
      for (const auto& proc : p.coreg_procs) l(proc.coreg_i, proc.coreg_j) = proc.values(i);
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index a = 0; a < m; ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index b = 0; b < m; ++b) row.push_back(l(a, b));
        rows.push_back(std::move(row));
      }
      coreg.push_back(std::move(rows));
    }
    j["coreg"] = std::move(coreg);
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index a = 0; a < p.coreg_const.rows(); ++a) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index b = 0; b < p.coreg_const.cols(); ++b) row.push_back(p.coreg_const(a, b));
      rows.push_back(std::move(row));
    }
    j["coreg"] = std::move(rows);
  }

  if (p.kind == ModelKind::smgp) {
    j["loglen"] = std::vector<double>{p.log_len};
    j["logsd"] = std::vector<double>{p.log_amp};
  } else {
    j["loglen"] =
        std::vector<double>(p.loglen->values.data(), p.loglen->values.data() + p.loglen->values.size());
    if (p.kind == ModelKind::nmgp)
      j["logsd"] =
          std::vector<double>(p.logsd->values.data(), p.logsd->values.data() + p.logsd->values.size());
    else
      j["logsd"] = nullptr;
  }

  j["priors"] = {{"ig_a", priors.ig_a},
                 {"ig_b", priors.ig_b},
                 {"coreg_var_c", priors.coreg_var_c},
                 {"loglen", prior_json(priors.loglen_prior)},
                 {"logsd", prior_json(priors.logsd_prior)},
                 {"coreg", prior_json(priors.coreg_prior)}};
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_trace_csv(const std::string& path, const std::vector<double>& trace,
                     const Meta& meta) {
  std::ofstream out = open_out(path);
  for (const auto& c : meta_comments(meta)) out << "# " << c << '\n';
  out << "iter,log_posterior\n";
  for (size_t i = 0; i < trace.size(); ++i) out << i << ',' << fmt(trace[i]) << '\n';
}

void write_predictions_csv(const std::string& path, const Episode& holdout,
                           const PredictiveDist& pred, const Meta& meta) {
  std::ofstream out = open_out(path);
  for (const auto& c : meta_comments(meta)) out << "# " << c << '\n';
  out << "time,channel,observed,pred_mean,pred_sd\n";
  const Eigen::Index q = holdout.n(), m = holdout.m();
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index a = 0; a < m; ++a) {
      out << fmt(holdout.times(i)) << ',' << holdout.channels[static_cast<size_t>(a)] << ',';
      if (holdout.mask(i, a)) out << fmt(holdout.obs(i, a));
      const double var = pred.cov(a * q + i, a * q + i);
      out << ',' << fmt(pred.mean(a * q + i)) << ',' << fmt(std::sqrt(std::max(0.0, var)))
          << '\n';
    }
}

void write_samples_csv(const std::string& path, const std::vector<PosteriorSample>& chain,
                       const Meta& meta) {
  std::ofstream out = open_out(path);
  for (const auto& c : meta_comments(meta)) out << "# " << c << '\n';
  const Eigen::Index d = chain.empty() ? 0 : packed_size(chain.front().params);
  out << "sample,log_post,accepted";
  for (Eigen::Index i = 0; i < d; ++i) out << ",theta_" << i;
  out << '\n';
  for (size_t s = 0; s < chain.size(); ++s) {
    out << s << ',' << fmt(chain[s].log_post) << ',' << (chain[s].accepted ? 1 : 0);
    Vector th = pack(chain[s].params);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << fmt(th(i));
    out << '\n';
  }
}

void write_curves_csv(const std::string& path, const DerivedCurves& curves, Eigen::Index m,
                      const Meta& meta) {
  std::ofstream out = open_out(path);
  for (const auto& c : meta_comments(meta)) out << "# " << c << '\n';
  out << "sample,t";
  for (Eigen::Index a = 1; a < m; ++a)
    for (Eigen::Index b = 0; b < a; ++b) out << ",corr_" << a + 1 << '_' << b + 1;
  for (Eigen::Index c = 0; c < m; ++c) out << ",sd_" << c + 1;
  out << '\n';
  for (size_t s = 0; s < curves.corr21.size(); ++s)
    for (Eigen::Index i = 0; i < curves.grid.size(); ++i) {
      out << s << ',' << fmt(curves.grid(i));
      for (Eigen::Index p = 0; p < curves.corr21[s].cols(); ++p)
        out << ',' << fmt(curves.corr21[s](i, p));
      for (Eigen::Index c = 0; c < m; ++c) out << ',' << fmt(curves.sd[s](i, c));
      out << '\n';
    }
}

std::string sanitize_id(const std::string& id) {
  std::string out = id;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return out;
}

}  // namespace mgp::cli
