#pragma once

#include "run_config.hpp"

namespace mgp::cli {

// Each command runs one pipeline and writes its artifacts into
// cfg.output_dir.  Failures are reported by throwing; the caller maps
// exception families to exit codes and the error JSON.
void cmd_fit(const RunConfig& cfg);
void cmd_hmc(const RunConfig& cfg);
void cmd_predict(const RunConfig& cfg);
void cmd_synth(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);

}  // namespace mgp::cli
