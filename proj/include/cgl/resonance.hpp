#pragma once
//============================================================================
// Resonance combinatorics over the mode box, in exact integer arithmetic.
//
// A signed tuple of order n is (k_1, ..., k_{2n+1}) with alternating signs
// (+,-,+,...,+).  For a target mode k,
//   S(k,n) = { tuples in box : sum_j (-1)^{j-1} k_j = k }
//   R(k,n) = { tuples in S(k,n) : sum_j (-1)^{j-1} |k_j|^2 = |k|^2 }
// The divisor of a tuple in S(k,n) is -|k|^2 + sum_j (-1)^{j-1}|k_j|^2, an
// integer; nonzero divisors have |divisor| >= 1, which is what makes the
// averaging quadrature exact with finitely many nodes.
//
// Tuples are stored as lattice indexes, width 2n+1, each target's list in
// lexicographic order, so independently built tables compare byte-equal.
//============================================================================

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cgl/lattice.hpp"

namespace cgl {

// Alternating sign of a (0-based) tuple position: +,-,+,-,...
inline int tuple_sign(int j) { return (j % 2 == 0) ? 1 : -1; }

struct DivisorStats {
    static constexpr std::int64_t kGapInfinite =
        std::numeric_limits<std::int64_t>::max();

    std::int64_t max_freq = 0;          // max |divisor| over all of S(.,n)
    std::int64_t gap = kGapInfinite;    // min nonzero |divisor|; sentinel if none

    bool gap_is_infinite() const { return gap == kGapInfinite; }
};

struct ResonanceTable {
    int d = 1;
    int K = 0;
    int n = 1;                          // tuple width 2n+1
    std::size_t lattice_size = 1;
    std::vector<std::uint64_t> offsets; // lattice_size+1 tuple-slot offsets
    std::vector<std::uint32_t> entries; // width() indexes per tuple, flat
    DivisorStats stats;

    int width() const { return 2 * n + 1; }
    std::uint64_t total() const { return offsets.empty() ? 0 : offsets.back(); }
    std::uint64_t count(std::size_t target) const {
        return offsets[target + 1] - offsets[target];
    }
    // All tuples of one target, concatenated, lexicographic.
    std::span<const std::uint32_t> tuples_flat(std::size_t target) const {
        const std::size_t w = static_cast<std::size_t>(width());
        return {entries.data() + offsets[target] * w, count(target) * w};
    }
};

struct BuildOptions {
    int jobs = 1;
    // Budget for the finished table's entry storage, in bytes.
    std::uint64_t max_bytes = std::uint64_t(1) << 30;
};

// Exhaustive reference enumerations.  Flat tuples in lexicographic order of
// their index sequences.  enumerate_S_naive refuses (ResourceError) when the
// scan would touch more than max_monomials candidate tuples.
std::vector<std::uint32_t> enumerate_S_naive(const LatticeSpec& lat,
                                             std::span<const int> k, int n,
                                             std::uint64_t max_monomials = std::uint64_t(1) << 26);
std::vector<std::uint32_t> enumerate_R_naive(const LatticeSpec& lat,
                                             std::span<const int> k, int n);

// Exact extremes of the divisor over all targets, via dynamic programming on
// reachable (partial momentum, partial frequency) pairs.
DivisorStats divisor_statistics(const LatticeSpec& lat, int n);

// Meet-in-the-middle construction: the first n+1 positions are indexed by
// (partial momentum, partial frequency); the remaining n positions and the
// target are scanned.  O(side^{d(n+1)}) instead of O(side^{2dn}).
ResonanceTable build_resonance_table(const LatticeSpec& lat, int n,
                                     const BuildOptions& opt = {});

// Binary cache files: fixed header, per-target counts, flat entries, FNV-1a
// checksum.  load_table throws SerializationError on any inconsistency.
void save_table(const ResonanceTable& tab, const std::string& path);
ResonanceTable load_table(const std::string& path);

std::string table_cache_name(int d, int K, int n);

// Memoized access: load from cache_dir when present and valid (counts and
// geometry revalidated), otherwise build and save.  A corrupt cache entry is
// rebuilt with a notice on stderr.
ResonanceTable load_or_build(const LatticeSpec& lat, int n,
                             const std::string& cache_dir,
                             const BuildOptions& opt = {});

} // namespace cgl
