#pragma once

#include <string>

#include "hmc/config.hpp"

namespace hmc {

// Batch stages. Each one consumes the previous stage's artifacts from
// cfg.out_dir, verifies them against the run manifest, and records its own
// outputs there; `run_pipeline` is exactly the stage composition plus the
// timing report. Stage-order violations and stale artifacts are errors.
void stage_normalize(const RunConfig& cfg);
void stage_split(const RunConfig& cfg);
void stage_features(const RunConfig& cfg);
void stage_embed(const RunConfig& cfg);
void stage_train(const RunConfig& cfg);
void stage_predict(const RunConfig& cfg);
void stage_eval(const RunConfig& cfg);
void stage_baseline(const RunConfig& cfg);

void run_pipeline(const RunConfig& cfg);

// Log verbosity, settable from the HMC_LOG environment variable or the CLI:
// quiet < info < debug.
enum class LogLevel { quiet = 0, info = 1, debug = 2 };
void set_log_level(LogLevel level);
LogLevel log_level_from_env();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace hmc
