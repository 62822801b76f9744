#pragma once
//============================================================================
// Command implementations behind the cglres front end, callable in-process
// (tests drive them directly).  Exit-code contract:
//   0  success
//   1  a requested check reported failures
//   2  configuration or usage error
//   3  numerical abort (blow-up or step underflow)
//   4  resource bound exceeded
//============================================================================

#include <string>

#include "cgl/config.hpp"

namespace cgl {

struct CliOptions {
    std::string config_path;
    std::string cache_dir; // --cache; falls back to env, config, "./cache"
    std::string out_dir;   // --out; falls back to config
    int jobs = 0;          // --jobs; 0 means take the config value
    bool force = false;    // overwrite artifacts with mismatched hashes
};

// Effective settings after folding CLI overrides into the config.
std::string resolve_cache_dir(const RunConfig& cfg, const CliOptions& opt);
std::string resolve_out_dir(const RunConfig& cfg, const CliOptions& opt);
int resolve_jobs(const RunConfig& cfg, const CliOptions& opt);

int run_resonances(const RunConfig& cfg, const CliOptions& opt);
int run_simulate(const RunConfig& cfg, const CliOptions& opt);
int run_compare(const RunConfig& cfg, const CliOptions& opt);
int run_conserve(const RunConfig& cfg, const CliOptions& opt);

// Loads the config and dispatches; maps exceptions to the exit contract.
int dispatch(const std::string& command, const CliOptions& opt);

} // namespace cgl
