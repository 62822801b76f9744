#pragma once
//============================================================================
// Artifact writers.  Every artifact embeds the configuration hash; a writer
// refuses to replace an existing file whose embedded hash differs, unless
// forced.  Output bytes are deterministic for a given run, with a single
// exception: NDJSON streams begin with a timestamp record that is isolated
// on the first line so consumers can compare everything after it.
//
// CSV column orders below are frozen; downstream plot scripts rely on them.
//   trajectory:   tau, h_s<value>..., H1, H2, l2, E_nls, E_flip, H_res
//   comparison:   tau, action_error
//   ladder:       epsilon, sup_error, ratio_sqrt_eps, status
//   residual:     tau, cumulative_norm
//   conservation: check, drift, tolerance, pass
//   counts:       index, k, count
//============================================================================

#include <string>

#include "cgl/experiments.hpp"
#include "cgl/resonance.hpp"

namespace cgl {

// NDJSON stream: timestamp record, manifest record, then one record per
// recorded instant (with the field when include_fields).
void write_trajectory_ndjson(const std::string& path, const Trajectory& traj,
                             const std::string& config_hash, bool include_fields,
                             bool force);

void write_diagnostics_csv(const std::string& path, const Trajectory& traj,
                           const std::string& config_hash, bool force);

void write_comparison_csv(const std::string& path, const ComparisonReport& rep,
                          const std::string& config_hash, bool force);

void write_ladder_csv(const std::string& path, const LadderReport& rep,
                      const std::string& config_hash, bool force);

// Two whitespace-separated columns, log10(eps) and log10(sup_error), for
// completed rungs with positive sup_error.
void write_ladder_plot(const std::string& path, const LadderReport& rep,
                       const std::string& config_hash, bool force);

void write_residual_csv(const std::string& path, const ResidualReport& rep,
                        const std::string& config_hash, bool force);

void write_conservation_csv(const std::string& path, const ConservationReport& rep,
                            const std::string& config_hash, bool force);

void write_counts_csv(const std::string& path, const LatticeSpec& lat,
                      const ResonanceTable& tab, const std::string& config_hash,
                      bool force);

} // namespace cgl
