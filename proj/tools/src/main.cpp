#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <mgp/errors.hpp>

#include "artifacts.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace {

// exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

void print_error(const char* kind, const std::string& message) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  j["schema_version"] = mgp::cli::kSchemaVersion;
  std::cerr << j.dump(2) << std::endl;
}

struct SubOpts {
  std::string config_file;
  std::string input;
  std::string output_dir;
  std::string model;
  long long seed = -1;
  long long holdout = -1;
  bool seed_set = false;
  bool holdout_set = false;
};

void add_common(CLI::App* sub, SubOpts& o, bool wants_input) {
  sub->add_option("-c,--config", o.config_file, "config file (sectioned key = value)");
  if (wants_input) sub->add_option("-i,--input", o.input, "episode csv (or directory for eval)");
  sub->add_option("-o,--output-dir", o.output_dir, "artifact directory (default: out)");
  sub->add_option("-s,--seed", o.seed, "rng seed")->check(CLI::NonNegativeNumber);
  sub->add_option("-m,--model", o.model, "model kind: smgp | nmgp | gnmgp");
  sub->add_option("-k,--holdout", o.holdout, "hold-out length for predict/eval")
      ->check(CLI::NonNegativeNumber);
}

mgp::cli::RunConfig resolve(const SubOpts& o) {
  mgp::cli::RunConfig cfg;
  if (!o.config_file.empty()) mgp::cli::apply_config_file(cfg, o.config_file);
  // command-line flags override the file
  if (!o.input.empty()) cfg.input = o.input;
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  if (o.seed >= 0) cfg.seed = static_cast<uint64_t>(o.seed);
  if (o.holdout >= 0) cfg.holdout = static_cast<Eigen::Index>(o.holdout);
  if (!o.model.empty()) cfg.kind = mgp::model_kind_from_string(o.model);
  mgp::cli::finalize(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multivariate Gaussian-process models for irregular time series"};
  app.require_subcommand(1);

  SubOpts fit_o, hmc_o, pred_o, synth_o, eval_o;
  std::function<void()> run;

  CLI::App* fit = app.add_subcommand("fit", "MAP fit one episode; writes params + trace");
  add_common(fit, fit_o, true);
  fit->callback([&] { run = [&] { mgp::cli::cmd_fit(resolve(fit_o)); }; });

  CLI::App* hmc = app.add_subcommand("hmc", "posterior samples + derived curves for one episode");
  add_common(hmc, hmc_o, true);
  hmc->callback([&] { run = [&] { mgp::cli::cmd_hmc(resolve(hmc_o)); }; });

  CLI::App* pred = app.add_subcommand("predict", "hold out the last k points, fit, predict them");
  add_common(pred, pred_o, true);
  pred->callback([&] { run = [&] { mgp::cli::cmd_predict(resolve(pred_o)); }; });

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic episode + truth latents");
  add_common(synth, synth_o, false);
  synth->callback([&] { run = [&] { mgp::cli::cmd_synth(resolve(synth_o)); }; });

  CLI::App* ev = app.add_subcommand("eval", "fit all kinds over an episode directory");
  add_common(ev, eval_o, true);
  ev->callback([&] { run = [&] { mgp::cli::cmd_eval(resolve(eval_o)); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return kExitConfig;
  }

  try {
    run();
  } catch (const mgp::data_error& e) {
    print_error("data_error", e.what());
    return kExitData;
  } catch (const mgp::invalid_argument& e) {
    print_error("config_error", e.what());
    return kExitConfig;
  } catch (const mgp::dimension_mismatch& e) {
    print_error("config_error", e.what());
    return kExitConfig;
  } catch (const mgp::error& e) {
    print_error("numerical_error", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return kExitNumerical;
  }
  return 0;
}
