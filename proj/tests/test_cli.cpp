#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <mgp/episode.hpp>

// End-to-end coverage of the `mgp` binary: artifact shapes, exit codes, and
// byte-level determinism.  MGP_CLI_PATH is injected by the build.

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(MGP_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mgp_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// a fast-but-real fit configuration so the suite stays quick
const char* kQuickFit =
    "[synth]\n"
    "n_points = 40\n"
    "\n"
    "[map]\n"
    "max_iters = 15\n";

size_t count_data_rows(const std::string& csv) {
  size_t rows = 0;
  std::istringstream in(csv);
  std::string line;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("cli synth writes a deterministic, re-ingestable episode") {
  TempDir tmp("synth");
  const std::string cfg = tmp / "cfg.toml";
  write_text(cfg, kQuickFit);

  CHECK(run("synth -c " + cfg + " -s 21 -o " + (tmp / "a")) == 0);
  CHECK(run("synth -c " + cfg + " -s 21 -o " + (tmp / "b")) == 0);

  const std::string ep_a = slurp(tmp.path / "a" / "synth-21.csv");
  CHECK(ep_a == slurp(tmp.path / "b" / "synth-21.csv"));
  CHECK(slurp(tmp.path / "a" / "synth-21-truth.csv") ==
        slurp(tmp.path / "b" / "synth-21-truth.csv"));

  // metadata comments are stamped on every artifact
  CHECK(ep_a.find("# schema_version=") != std::string::npos);
  CHECK(ep_a.find("# seed=21") != std::string::npos);
  CHECK(ep_a.find("# config_hash=") != std::string::npos);

  mgp::Episode ep = mgp::ingest_csv(tmp / "a/synth-21.csv");
  CHECK(ep.id == "synth-21");
  CHECK(ep.n() == 40);
  CHECK(ep.m() == 2);
}

TEST_CASE("cli fit emits the parameter schema and is byte-deterministic") {
  TempDir tmp("fit");
  const std::string cfg = tmp / "cfg.toml";
  write_text(cfg, kQuickFit);
  REQUIRE(run("synth -c " + cfg + " -s 4 -o " + (tmp / "data")) == 0);
  const std::string input = tmp / "data/synth-4.csv";

  CHECK(run("fit -c " + cfg + " -i " + input + " -m smgp -s 4 -o " + (tmp / "f1")) == 0);
  CHECK(run("fit -c " + cfg + " -i " + input + " -m smgp -s 4 -o " + (tmp / "f2")) == 0);

  const std::string params = slurp(tmp.path / "f1" / "synth-4-smgp-params.json");
  CHECK(params == slurp(tmp.path / "f2" / "synth-4-smgp-params.json"));

  const nlohmann::json j = nlohmann::json::parse(params);
  for (const char* key : {"model_kind", "noise_var", "coreg", "loglen", "logsd", "priors", "seed",
                          "config_hash", "schema_version", "times"})
    CHECK(j.contains(key));
  CHECK(j["model_kind"] == "smgp");
  CHECK(j["noise_var"].get<double>() > 0.0);
  CHECK(j["coreg"].size() == 2);         // M x M matrix
  CHECK(j["loglen"].size() == 1);        // stationary: one scalar
  CHECK(j["logsd"].size() == 1);
  CHECK(j["seed"] == 4);

  const std::string trace = slurp(tmp.path / "f1" / "synth-4-smgp-trace.csv");
  CHECK(trace.find("iter,log_posterior") != std::string::npos);
  CHECK(count_data_rows(trace) >= 2);
}

TEST_CASE("cli fit parameter shapes track the model kind") {
  TempDir tmp("fitkind");
  const std::string cfg = tmp / "cfg.toml";
  write_text(cfg, kQuickFit);
  REQUIRE(run("synth -c " + cfg + " -s 6 -o " + (tmp / "data")) == 0);
  const std::string input = tmp / "data/synth-6.csv";

  REQUIRE(run("fit -c " + cfg + " -i " + input + " -m nmgp -s 6 -o " + (tmp / "fn")) == 0);
  const auto jn = nlohmann::json::parse(slurp(tmp.path / "fn" / "synth-6-nmgp-params.json"));
  CHECK(jn["loglen"].size() == 40);
  CHECK(jn["logsd"].size() == 40);
  CHECK(jn["coreg"].size() == 2);  // constant matrix

  REQUIRE(run("fit -c " + cfg + " -i " + input + " -m gnmgp -s 6 -o " + (tmp / "fg")) == 0);
  const auto jg = nlohmann::json::parse(slurp(tmp.path / "fg" / "synth-6-gnmgp-params.json"));
  CHECK(jg["loglen"].size() == 40);
  CHECK(jg["logsd"].is_null());
  CHECK(jg["coreg"].size() == 40);  // per-time matrices
  CHECK(jg["coreg"][0].size() == 2);
}

TEST_CASE("cli predict writes per-point predictions and a metrics summary") {
  TempDir tmp("pred");
  const std::string cfg = tmp / "cfg.toml";
  write_text(cfg, kQuickFit);
  REQUIRE(run("synth -c " + cfg + " -s 7 -o " + (tmp / "data")) == 0);
  const std::string input = tmp / "data/synth-7.csv";

  CHECK(run("predict -c " + cfg + " -i " + input + " -m smgp -s 7 -k 6 -o " + (tmp / "p")) == 0);

  const std::string preds = slurp(tmp.path / "p" / "synth-7-smgp-predictions.csv");
  CHECK(preds.find("time,channel,observed,pred_mean,pred_sd") != std::string::npos);
  CHECK(count_data_rows(preds) == 6 * 2);  // k rows x M channels

  const auto j = nlohmann::json::parse(slurp(tmp.path / "p" / "synth-7-smgp-metrics.json"));
  CHECK(j["episode"] == "synth-7");
  CHECK(j["n_train"] == 34);
  CHECK(j["n_holdout"] == 6);
  CHECK(std::isfinite(j["rmse"].get<double>()));
  CHECK(std::isfinite(j["lpd"].get<double>()));
  CHECK(j["rmse"].get<double>() >= 0.0);
}

TEST_CASE("cli hmc writes a sample archive and derived curves on a 100-point grid") {
  TempDir tmp("hmc");
  const std::string cfg = tmp / "cfg.toml";
  write_text(cfg, std::string(kQuickFit) +
                      "\n[hmc]\n"
                      "step_size = 0.003\n"
                      "n_leapfrog = 5\n"
                      "n_samples = 8\n"
                      "n_burnin = 2\n");
  REQUIRE(run("synth -c " + cfg + " -s 3 -o " + (tmp / "data")) == 0);

  CHECK(run("hmc -c " + cfg + " -i " + (tmp / "data/synth-3.csv") + " -m smgp -s 3 -o " +
            (tmp / "h")) == 0);

  const std::string samples = slurp(tmp.path / "h" / "synth-3-smgp-samples.csv");
  CHECK(samples.find("sample,log_post,accepted") != std::string::npos);
  CHECK(count_data_rows(samples) == 8);

  const std::string curves = slurp(tmp.path / "h" / "synth-3-smgp-curves.csv");
  CHECK(curves.find("sample,t,corr_2_1,sd_1,sd_2") != std::string::npos);
  CHECK(count_data_rows(curves) == 8 * 100);
}

TEST_CASE("cli eval scores every kind over a directory, deterministically") {
  TempDir tmp("eval");
  const std::string cfg = tmp / "cfg.toml";
  write_text(cfg, kQuickFit);
  REQUIRE(run("synth -c " + cfg + " -s 11 -o " + (tmp / "data")) == 0);
  REQUIRE(run("synth -c " + cfg + " -s 12 -o " + (tmp / "data")) == 0);

  CHECK(run("eval -c " + cfg + " -i " + (tmp / "data") + " -s 1 -k 5 -o " + (tmp / "e1")) == 0);
  CHECK(run("eval -c " + cfg + " -i " + (tmp / "data") + " -s 1 -k 5 -o " + (tmp / "e2")) == 0);

  const std::string summary = slurp(tmp.path / "e1" / "eval-summary.json");
  CHECK(summary == slurp(tmp.path / "e2" / "eval-summary.json"));
  CHECK(slurp(tmp.path / "e1" / "eval-episodes.csv") ==
        slurp(tmp.path / "e2" / "eval-episodes.csv"));

  const auto j = nlohmann::json::parse(summary);
  CHECK(j["n_episodes"] == 2);
  for (const char* kind : {"smgp", "nmgp", "gnmgp"}) {
    REQUIRE(j.contains(kind));
    CHECK(j[kind]["n_episodes"] == 2);
    for (const char* stat : {"rmse_mean", "rmse_sd", "lpd_mean", "lpd_sd"})
      CHECK(std::isfinite(j[kind][stat].get<double>()));
  }
  // truth companions must not be scored as episodes
  CHECK(count_data_rows(slurp(tmp.path / "e1" / "eval-episodes.csv")) == 2 * 3);
}

TEST_CASE("cli exit codes distinguish config, data, and parse failures") {
  TempDir tmp("codes");
  const std::string cfg = tmp / "cfg.toml";
  write_text(cfg, kQuickFit);
  REQUIRE(run("synth -c " + cfg + " -s 2 -o " + (tmp / "data")) == 0);
  const std::string input = tmp / "data/synth-2.csv";
  const std::string sink = " 2> " + (tmp / "stderr.txt");

  SUBCASE("missing input file is a data error") {
    CHECK(run("fit -i " + (tmp / "missing.csv") + sink) == 3);
  }
  SUBCASE("hold-out swallowing the whole episode is a data error") {
    CHECK(run("predict -c " + cfg + " -i " + input + " -k 40" + sink) == 3);
    const std::string err = slurp(tmp.path / "stderr.txt");
    CHECK(err.find("data_error") != std::string::npos);
  }
  SUBCASE("unknown config key is a config error") {
    write_text(tmp / "bad.toml", "[map]\nnot_a_key = 1\n");
    CHECK(run("fit -c " + (tmp / "bad.toml") + " -i " + input + sink) == 2);
    const std::string err = slurp(tmp.path / "stderr.txt");
    CHECK(err.find("config_error") != std::string::npos);
  }
  SUBCASE("unknown model kind is a config error") {
    CHECK(run("fit -i " + input + " -m banana" + sink) == 2);
  }
  SUBCASE("unknown flag is a usage error") {
    CHECK(run("fit --frobnicate" + sink + " 1>/dev/null") == 2);
  }
  SUBCASE("eval over an empty directory is a data error") {
    fs::create_directories(tmp.path / "empty");
    CHECK(run("eval -i " + (tmp / "empty") + sink) == 3);
  }
}

TEST_CASE("cli flags override the config file") {
  TempDir tmp("override");
  const std::string cfg = tmp / "cfg.toml";
  write_text(cfg, std::string(kQuickFit) + "\n[run]\nseed = 100\n\n[model]\nkind = \"nmgp\"\n");
  REQUIRE(run("synth -c " + cfg + " -s 13 -o " + (tmp / "data")) == 0);

  // -m and -s beat [model] kind and [run] seed
  CHECK(run("fit -c " + cfg + " -i " + (tmp / "data/synth-13.csv") + " -m smgp -s 5 -o " +
            (tmp / "f")) == 0);
  const auto j = nlohmann::json::parse(slurp(tmp.path / "f" / "synth-13-smgp-params.json"));
  CHECK(j["model_kind"] == "smgp");
  CHECK(j["seed"] == 5);
}
