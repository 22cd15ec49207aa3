#include "run_config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mgp::cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& section, const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw invalid_argument("config: [" + section + "] " + key + ": not a number: '" + v + "'");
  }
}

long long parse_int(const std::string& section, const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw invalid_argument("config: [" + section + "] " + key + ": not an integer: '" + v + "'");
  }
}

std::string parse_string(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

void set_key(RunConfig& cfg, const std::string& section, const std::string& key,
             const std::string& value) {
  auto num = [&] { return parse_double(section, key, value); };
  auto integer = [&] { return parse_int(section, key, value); };

  if (section == "run") {
    if (key == "input") cfg.input = parse_string(value);
    else if (key == "output_dir") cfg.output_dir = parse_string(value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
    else if (key == "holdout") cfg.holdout = static_cast<int>(integer());
    else throw invalid_argument("config: unknown key [run] " + key);
  } else if (section == "model") {
    if (key == "kind") cfg.kind = model_kind_from_string(parse_string(value));
    else throw invalid_argument("config: unknown key [model] " + key);
  } else if (section == "priors") {
    if (key == "ig_a") cfg.priors.ig_a = num();
    else if (key == "ig_b") cfg.priors.ig_b = num();
    else if (key == "coreg_var_c") cfg.priors.coreg_var_c = num();
    else if (key == "loglen_mean") cfg.priors.loglen_prior.mean = num();
    else if (key == "loglen_amp") cfg.priors.loglen_prior.amp = num();
    else if (key == "loglen_len") cfg.priors.loglen_prior.len = num();
    else if (key == "logsd_mean") cfg.priors.logsd_prior.mean = num();
    else if (key == "logsd_amp") cfg.priors.logsd_prior.amp = num();
    else if (key == "logsd_len") cfg.priors.logsd_prior.len = num();
    else if (key == "coreg_mean") cfg.priors.coreg_prior.mean = num();
    else if (key == "coreg_amp") cfg.priors.coreg_prior.amp = num();
    else if (key == "coreg_len") cfg.priors.coreg_prior.len = num();
    else throw invalid_argument("config: unknown key [priors] " + key);
  } else if (section == "map") {
    if (key == "learning_rate") cfg.map.learning_rate = num();
    else if (key == "max_iters") cfg.map.max_iters = static_cast<int>(integer());
    else if (key == "grad_tol") cfg.map.grad_tol = num();
    else if (key == "window_w") cfg.map.window_w = num();
    else if (key == "restarts") cfg.map.restarts = static_cast<int>(integer());
    else throw invalid_argument("config: unknown key [map] " + key);
  } else if (section == "hmc") {
    if (key == "step_size") cfg.hmc.step_size = num();
    else if (key == "n_leapfrog") cfg.hmc.n_leapfrog = static_cast<int>(integer());
    else if (key == "n_samples") cfg.hmc.n_samples = static_cast<int>(integer());
    else if (key == "n_burnin") cfg.hmc.n_burnin = static_cast<int>(integer());
    else throw invalid_argument("config: unknown key [hmc] " + key);
  } else if (section == "synth") {
    if (key == "n_points") cfg.synth.n_points = static_cast<int>(integer());
    else if (key == "noise_var") cfg.synth.noise_var = num();
    else if (key == "corr_fn") cfg.synth.corr_fn = parse_string(value);
    else if (key == "drop_rate") cfg.synth.drop_rate = num();
    else if (key == "loglen_mean") cfg.synth.loglen_prior.mean = num();
    else if (key == "loglen_amp") cfg.synth.loglen_prior.amp = num();
    else if (key == "loglen_len") cfg.synth.loglen_prior.len = num();
    else if (key == "logsd_mean") cfg.synth.logsd_prior.mean = num();
    else if (key == "logsd_amp") cfg.synth.logsd_prior.amp = num();
    else if (key == "logsd_len") cfg.synth.logsd_prior.len = num();
    else throw invalid_argument("config: unknown key [synth] " + key);
  } else {
    throw invalid_argument("config: unknown section [" + section + "]");
  }
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_argument("config: cannot open '" + path + "'");
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw invalid_argument("config: " + path + ":" + std::to_string(lineno) +
                               ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_argument("config: " + path + ":" + std::to_string(lineno) +
                             ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw invalid_argument("config: " + path + ":" + std::to_string(lineno) +
                             ": key outside any [section]");
    try {
      set_key(cfg, section, key, value);
    } catch (const invalid_argument& e) {
      throw invalid_argument(std::string(e.what()) + " (" + path + ":" +
                             std::to_string(lineno) + ")");
    }
  }
}

void finalize(RunConfig& cfg) {
  cfg.map.seed = cfg.seed;
  cfg.hmc.seed = cfg.seed;
  cfg.synth.seed = cfg.seed;
  if (cfg.holdout < 0) throw invalid_argument("config: holdout must be >= 0");
}

namespace {

void put(std::string& out, const std::string& key, const std::string& v) {
  out += key;
  out += '=';
  out += v;
  out += '\n';
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_prior(std::string& out, const std::string& key, const GpPrior& p) {
  put(out, key + ".mean", fmt(p.mean));
  put(out, key + ".amp", fmt(p.amp));
  put(out, key + ".len", fmt(p.len));
}

}  // namespace

std::string config_hash(const RunConfig& cfg) {
  // canonical field order is fixed here; adding a field is a schema change
  std::string s;
  put(s, "run.seed", std::to_string(cfg.seed));
  put(s, "run.holdout", std::to_string(cfg.holdout));
  put(s, "model.kind", to_string(cfg.kind));
  put(s, "priors.ig_a", fmt(cfg.priors.ig_a));
  put(s, "priors.ig_b", fmt(cfg.priors.ig_b));
  put(s, "priors.coreg_var_c", fmt(cfg.priors.coreg_var_c));
  put_prior(s, "priors.loglen", cfg.priors.loglen_prior);
  put_prior(s, "priors.logsd", cfg.priors.logsd_prior);
  put_prior(s, "priors.coreg", cfg.priors.coreg_prior);
  put(s, "map.learning_rate", fmt(cfg.map.learning_rate));
  put(s, "map.max_iters", std::to_string(cfg.map.max_iters));
  put(s, "map.grad_tol", fmt(cfg.map.grad_tol));
  put(s, "map.window_w", fmt(cfg.map.window_w));
  put(s, "map.restarts", std::to_string(cfg.map.restarts));
  put(s, "hmc.step_size", fmt(cfg.hmc.step_size));
  put(s, "hmc.n_leapfrog", std::to_string(cfg.hmc.n_leapfrog));
  put(s, "hmc.n_samples", std::to_string(cfg.hmc.n_samples));
  put(s, "hmc.n_burnin", std::to_string(cfg.hmc.n_burnin));
  put(s, "synth.n_points", std::to_string(cfg.synth.n_points));
  put(s, "synth.noise_var", fmt(cfg.synth.noise_var));
  put(s, "synth.corr_fn", cfg.synth.corr_fn);
  put(s, "synth.drop_rate", fmt(cfg.synth.drop_rate));
  put_prior(s, "synth.loglen", cfg.synth.loglen_prior);
  put_prior(s, "synth.logsd", cfg.synth.logsd_prior);

  std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;  // FNV prime
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mgp::cli
