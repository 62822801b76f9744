#pragma once
//============================================================================
// Mode lattice for the 2*pi-periodic d-torus.
//
// The truncation keeps the sup-norm box { k in Z^d : max_i |k_i| <= K },
// enumerated lexicographically with every coordinate running -K..K and the
// first coordinate slowest, so d=1, K=1 lists the modes -1, 0, 1 in that
// order.  lambda_k = |k|^2 is stored as an exact integer: all resonance
// arithmetic downstream compares these values exactly, never through
// floating point.
//============================================================================

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace cgl {

struct LatticeSpec {
    int d = 1;                        // space dimension, >= 1
    int K = 0;                        // box radius, >= 0
    int side = 1;                     // 2K+1 points per axis
    std::size_t size = 1;             // side^d modes
    std::vector<int> coords;          // size*d, mode i occupies [i*d, (i+1)*d)
    std::vector<std::int64_t> lambda; // |k|^2 per mode

    std::span<const int> mode(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(d),
                static_cast<std::size_t>(d)};
    }
};

// Throws std::invalid_argument for d < 1 or K < 0, ResourceError when the
// box would exceed the in-memory mode budget.
std::shared_ptr<const LatticeSpec> build_lattice(int d, int K);

std::int64_t lambda_of(std::span<const int> k);
bool in_box(const LatticeSpec& lat, std::span<const int> k);

// Lexicographic rank of an in-box mode; pre: in_box(lat, k).
std::size_t mode_index(const LatticeSpec& lat, std::span<const int> k);

} // namespace cgl
