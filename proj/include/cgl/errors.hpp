#pragma once

#include <stdexcept>

namespace cgl {

// Bad user input: malformed config, invalid parameter combinations,
// refusing to overwrite an artifact with a different config hash.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A requested computation exceeds a configured budget (table memory,
// enumeration cost, step-count cap).
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Corrupt or mismatched on-disk data (resonance table cache, snapshots).
struct SerializationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cgl
