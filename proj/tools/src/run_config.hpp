#pragma once

#include <cstdint>
#include <string>

#include <mgp/infer.hpp>
#include <mgp/model.hpp>
#include <mgp/synth.hpp>

namespace mgp::cli {

// Everything one command run depends on.  Loaded from a flat sectioned
// key-value file, then overridden by command-line flags; the effective
// resolved values (not the file text) are what config_hash covers, so a
// default left implicit and a default written out hash identically.
struct RunConfig {
  // [run]
  std::string input;            // episode csv, or a directory for eval
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int holdout = 5;              // hold-out size, last k observations by time
  // [model]
  ModelKind kind = ModelKind::gnmgp;
  // [priors]
  PriorSpec priors;
  // [map]
  MapConfig map;
  // [hmc]
  HmcConfig hmc;
  // [synth]
  SynthConfig synth;
};

// Parse a config file into `cfg` (over whatever it already holds).  Syntax:
// `[section]` headers, `key = value` lines, `#` comments, blank lines.
// Unknown sections or keys are config errors, not warnings.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Copy the run seed into the per-stage seeds and sanity-check ranges.
void finalize(RunConfig& cfg);

// FNV-1a (64-bit) over the canonical serialization of every semantic field
// (paths excluded: where artifacts land does not change the experiment).
// 16 lowercase hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace mgp::cli
