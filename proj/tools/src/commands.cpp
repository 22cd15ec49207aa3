#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <mgp/predict.hpp>
#include <mgp/synth.hpp>

#include "artifacts.hpp"

namespace fs = std::filesystem;

namespace mgp::cli {

namespace {

void ensure_output_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw invalid_argument("cannot create output dir '" + cfg.output_dir + "': " + ec.message());
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

Episode load_episode(const RunConfig& cfg) {
  if (cfg.input.empty()) throw invalid_argument("no input episode given (run.input / --input)");
  return ingest_csv(cfg.input);
}

Meta make_meta(const RunConfig& cfg) { return Meta{config_hash(cfg), cfg.seed, cfg.kind}; }

std::string stem(const RunConfig& cfg, const Episode& ep) {
  return sanitize_id(ep.id) + "-" + to_string(cfg.kind);
}

// uniform grid over the episode's observed span, for derived curves
Vector curve_grid(const Episode& ep, Eigen::Index points) {
  const double lo = ep.times(0), hi = ep.times(ep.n() - 1);
  Vector g(points);
  for (Eigen::Index i = 0; i < points; ++i)
    g(i) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return g;
}

// instantaneous correlation pairs and sds of one parameter state along a
// grid, via a single batched latent extension (the per-point op is
// derive_corr_sd; this matches it within roundoff)
void derived_along_grid(const ModelParams& p, const Vector& fit_times, const Vector& grid,
                        Matrix& corr_pairs, Matrix& sds) {
  const Eigen::Index m = p.m_dims();
  const Eigen::Index n_pairs = m * (m - 1) / 2;
  corr_pairs.resize(grid.size(), n_pairs);
  sds.resize(grid.size(), m);
  KernelSlice s = kernel_slice(p, fit_times, grid);
  Matrix bconst;
  if (p.kind != ModelKind::gnmgp) bconst = p.coreg_const * p.coreg_const.transpose();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Matrix b = p.kind == ModelKind::gnmgp
                         ? Matrix(s.coreg[static_cast<size_t>(i)] *
                                  s.coreg[static_cast<size_t>(i)].transpose())
                         : bconst;
    for (Eigen::Index c = 0; c < m; ++c) {
      if (!(b(c, c) > 1e-12))
        throw zero_variance("derived curves: channel " + std::to_string(c) +
                            " has vanishing variance at t=" + std::to_string(grid(i)));
      sds(i, c) = s.sd(i) * std::sqrt(b(c, c));
    }
    Eigen::Index k = 0;
    for (Eigen::Index a = 1; a < m; ++a)
      for (Eigen::Index bb = 0; bb < a; ++bb, ++k)
        corr_pairs(i, k) = b(a, bb) / std::sqrt(b(a, a) * b(bb, bb));
  }
}

struct EvalRow {
  std::string episode;
  ModelKind kind;
  double rmse = 0.0;
  double lpd = 0.0;
};

EvalRow eval_episode(const RunConfig& cfg, ModelKind kind, const Episode& ep) {
  auto [train, hold] = split_last(ep, cfg.holdout);
  MapResult fit = map_fit(train, kind, cfg.priors, cfg.map);
  PredictiveDist pred = predict(fit.params, train, hold.times);
  EvalRow row;
  row.episode = ep.id;
  row.kind = kind;
  row.rmse = rmse(pred, hold.obs, hold.mask);
  row.lpd = lpd(pred, hold.obs, hold.mask, fit.params.noise_var);
  return row;
}

}  // namespace

void cmd_fit(const RunConfig& cfg) {
  ensure_output_dir(cfg);
  Episode ep = load_episode(cfg);
  MapResult fit = map_fit(ep, cfg.kind, cfg.priors, cfg.map);
  const Meta meta = make_meta(cfg);
  write_json(out_path(cfg, stem(cfg, ep) + "-params.json"),
             params_to_json(fit.params, cfg.priors, ep.times, meta));
  write_trace_csv(out_path(cfg, stem(cfg, ep) + "-trace.csv"), fit.trace, meta);
}

void cmd_hmc(const RunConfig& cfg) {
  ensure_output_dir(cfg);
  Episode ep = load_episode(cfg);
  // chain starts at the posterior mode
  MapResult fit = map_fit(ep, cfg.kind, cfg.priors, cfg.map);
  std::vector<PosteriorSample> chain = hmc_sample(ep, cfg.kind, cfg.priors, cfg.hmc, fit.params);

  const Meta meta = make_meta(cfg);
  write_samples_csv(out_path(cfg, stem(cfg, ep) + "-samples.csv"), chain, meta);

  DerivedCurves curves;
  curves.grid = curve_grid(ep, 100);
  curves.corr21.reserve(chain.size());
  curves.sd.reserve(chain.size());
  for (const auto& s : chain) {
    Matrix corr_pairs, sds;
    derived_along_grid(s.params, ep.times, curves.grid, corr_pairs, sds);
    curves.corr21.push_back(std::move(corr_pairs));
    curves.sd.push_back(std::move(sds));
  }
  write_curves_csv(out_path(cfg, stem(cfg, ep) + "-curves.csv"), curves, ep.m(), meta);
}

void cmd_predict(const RunConfig& cfg) {
  ensure_output_dir(cfg);
  Episode ep = load_episode(cfg);
  auto [train, hold] = split_last(ep, cfg.holdout);
  MapResult fit = map_fit(train, cfg.kind, cfg.priors, cfg.map);
  PredictiveDist pred = predict(fit.params, train, hold.times);

  const Meta meta = make_meta(cfg);
  write_predictions_csv(out_path(cfg, stem(cfg, ep) + "-predictions.csv"), hold, pred, meta);

  nlohmann::json j = meta_json(meta);
  j["episode"] = ep.id;
  j["n_train"] = train.n();
  j["n_holdout"] = hold.n();
  j["rmse"] = rmse(pred, hold.obs, hold.mask);
  j["lpd"] = lpd(pred, hold.obs, hold.mask, fit.params.noise_var);
  write_json(out_path(cfg, stem(cfg, ep) + "-metrics.json"), j);
}

void cmd_synth(const RunConfig& cfg) {
  ensure_output_dir(cfg);
  auto [ep, truth] = generate(cfg.synth);
  Meta meta = make_meta(cfg);
  meta.kind = ModelKind::gnmgp;  // the generator's model family
  write_episode_csv(ep, out_path(cfg, ep.id + ".csv"), meta_comments(meta));

  std::ofstream out(out_path(cfg, ep.id + "-truth.csv"), std::ios::binary);
  if (!out) throw invalid_argument("cannot open truth csv for writing");
  for (const auto& c : meta_comments(meta)) out << "# " << c << '\n';
  const Eigen::Index m = truth.logsd.cols();
  out << "time,loglen";
  for (Eigen::Index c = 0; c < m; ++c) out << ",logsd_" << c + 1;
  out << ",corr";
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) out << ",l_" << a + 1 << '_' << b + 1;
  out << '\n';
  char buf[40];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (Eigen::Index i = 0; i < truth.times.size(); ++i) {
    out << fmt(truth.times(i)) << ',' << fmt(truth.loglen(i));
    for (Eigen::Index c = 0; c < m; ++c) out << ',' << fmt(truth.logsd(i, c));
    out << ',' << fmt(truth.corr(i));
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b)
        out << ',' << fmt(truth.coreg[static_cast<size_t>(i)](a, b));
    out << '\n';
  }
}

void cmd_eval(const RunConfig& cfg) {
  ensure_output_dir(cfg);
  if (cfg.input.empty()) throw invalid_argument("no input directory given (run.input / --input)");
  if (!fs::is_directory(cfg.input))
    throw invalid_argument("eval input must be a directory of episode csv files: '" + cfg.input +
                           "'");

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(cfg.input)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".csv") continue;
    if (name.size() >= 10 && name.substr(name.size() - 10) == "-truth.csv") continue;
    files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw empty_data("eval: no episode csv files in '" + cfg.input + "'");

  std::vector<Episode> episodes;
  episodes.reserve(files.size());
  for (const auto& f : files) episodes.push_back(ingest_csv(f));

  const ModelKind kinds[] = {ModelKind::smgp, ModelKind::nmgp, ModelKind::gnmgp};
  std::vector<EvalRow> rows(episodes.size() * 3);

  // episodes are independent: farm (episode, kind) pairs out to a worker pool
  std::atomic<size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const size_t j = next.fetch_add(1);
      if (j >= rows.size()) return;
      try {
        rows[j] = eval_episode(cfg, kinds[j % 3], episodes[j / 3]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t n_threads = std::min<size_t>(hw, rows.size());
  std::vector<std::thread> pool;
  for (size_t t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  const Meta meta = make_meta(cfg);
  {
    std::ofstream out(out_path(cfg, "eval-episodes.csv"), std::ios::binary);
    if (!out) throw invalid_argument("cannot open eval-episodes.csv for writing");
    for (const auto& c : meta_comments(meta)) out << "# " << c << '\n';
    out << "episode,model_kind,rmse,lpd\n";
    char buf[40];
    auto fmt = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    for (const auto& r : rows)
      out << r.episode << ',' << to_string(r.kind) << ',' << fmt(r.rmse) << ',' << fmt(r.lpd)
          << '\n';
  }

  nlohmann::json summary = meta_json(meta);
  summary.erase("model_kind");  // the report spans all three kinds
  summary["n_episodes"] = episodes.size();
  for (ModelKind kind : kinds) {
    double rs = 0.0, r2 = 0.0, ls = 0.0, l2 = 0.0;
    long n = 0;
    for (const auto& r : rows)
      if (r.kind == kind) {
        rs += r.rmse;
        r2 += r.rmse * r.rmse;
        ls += r.lpd;
        l2 += r.lpd * r.lpd;
        ++n;
      }
    const double rmean = rs / n, lmean = ls / n;
    const double rsd = n > 1 ? std::sqrt(std::max(0.0, (r2 - rs * rs / n) / (n - 1))) : 0.0;
    const double lsd = n > 1 ? std::sqrt(std::max(0.0, (l2 - ls * ls / n) / (n - 1))) : 0.0;
    summary[to_string(kind)] = {{"rmse_mean", rmean},
                                {"rmse_sd", rsd},
                                {"lpd_mean", lmean},
                                {"lpd_sd", lsd},
                                {"n_episodes", n}};
  }
  write_json(out_path(cfg, "eval-summary.json"), summary);
}

}  // namespace mgp::cli
