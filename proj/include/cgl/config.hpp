#pragma once
//============================================================================
// Run configuration: a small sectioned key=value text format, parsed
// strictly (unknown sections or keys are errors, with file:line locations).
//
//   [lattice]   d, K
//   [equation]  epsilon (single value or decreasing list), mu, m, b, c, p, q
//   [datum]     mode <k_1> ... <k_d> <re> <im>     (one line per mode)
//   [control]   T, cfl, dtau_max, checkpoints, record_every_step,
//               blowup_threshold, max_steps, s_values
//   [run]       mode = full | effective | both, s, s1, residual,
//               conservation, jobs
//   [output]    out_dir, cache_dir
//
// The raw file bytes are kept and hashed; artifacts embed the hash so that
// runs refuse to overwrite output produced from a different configuration.
//============================================================================

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cgl/field.hpp"
#include "cgl/integrate.hpp"

namespace cgl {

enum class SimMode { full_only, effective_only, both };

struct DatumEntry {
    std::vector<int> k;
    Complex amp;
};

struct RunConfig {
    int d = 1;
    int K = 1;

    std::vector<double> eps_list = {0.1};
    double mu = 0.0;
    double b = 0.0;
    double c = 0.0;
    int m = 1;
    int p = 1;
    int q = 1;

    std::vector<DatumEntry> datum;

    StepControl control;
    SimMode mode = SimMode::both;
    double s = 2.0;
    double s1 = 2.0;
    bool residual = false;
    bool conservation = false;
    int jobs = 1;

    std::string out_dir = "out";
    std::string cache_dir; // empty: resolved by the CLI layer

    std::string raw_text;    // exact file contents
    std::uint64_t hash = 0;  // fnv1a64(raw_text)
    std::string hash_hex;

    EquationParams params(double eps) const;
    FourierField build_datum(std::shared_ptr<const LatticeSpec> lat) const;

    // Cross-field validation (beyond the per-line checks done while
    // parsing); throws ConfigError.
    void validate() const;
};

// Parses text in the format above; origin labels error messages.
RunConfig parse_config(const std::string& text, const std::string& origin);

// Reads the file and parses it; throws ConfigError when unreadable.
RunConfig load_config(const std::string& path);

} // namespace cgl
