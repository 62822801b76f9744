#include "cgl/resonance.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "cgl/errors.hpp"
#include "cgl/hash.hpp"

namespace cgl {

static inline int sign_of(int j) { return tuple_sign(j); }

static std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t cap) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > cap / base) return cap + 1;
        r *= base;
    }
    return r;
}

//----------------------------------------------------------------------------
// Naive enumerations.  The first 2n positions run lexicographically over the
// box; the last position is forced by the momentum constraint, so the output
// is lexicographic in the full index sequence.
//----------------------------------------------------------------------------

namespace {

struct NaiveScan {
    const LatticeSpec& lat;
    std::span<const int> target;
    int n;
    bool require_resonant;
    std::int64_t target_lambda;
    std::vector<std::uint32_t> idx;     // width 2n+1
    std::vector<std::int64_t> partial;  // alternating momentum of positions 0..j-1
    std::int64_t partial_freq = 0;
    std::vector<int> last;              // scratch mode coordinates
    std::vector<std::uint32_t> out;

    NaiveScan(const LatticeSpec& l, std::span<const int> k, int order, bool res)
        : lat(l), target(k), n(order), require_resonant(res),
          target_lambda(lambda_of(k)),
          idx(static_cast<std::size_t>(2 * order + 1)),
          partial(static_cast<std::size_t>(l.d), 0),
          last(static_cast<std::size_t>(l.d), 0) {}

    void run(int j) {
        const int d = lat.d;
        if (j == 2 * n) {
            // remaining sign is +1: k_last = k - partial
            for (int a = 0; a < d; ++a) {
                const std::int64_t c = target[static_cast<std::size_t>(a)] -
                                       partial[static_cast<std::size_t>(a)];
                if (c < -lat.K || c > lat.K) return;
                last[static_cast<std::size_t>(a)] = static_cast<int>(c);
            }
            if (require_resonant &&
                partial_freq + lambda_of(last) != target_lambda)
                return;
            idx[static_cast<std::size_t>(2 * n)] =
                static_cast<std::uint32_t>(mode_index(lat, last));
            out.insert(out.end(), idx.begin(), idx.end());
            return;
        }
        const int s = sign_of(j);
        for (std::size_t i = 0; i < lat.size; ++i) {
            idx[static_cast<std::size_t>(j)] = static_cast<std::uint32_t>(i);
            const auto mode = lat.mode(i);
            for (int a = 0; a < d; ++a)
                partial[static_cast<std::size_t>(a)] += s * mode[static_cast<std::size_t>(a)];
            partial_freq += s * lat.lambda[i];
            run(j + 1);
            for (int a = 0; a < d; ++a)
                partial[static_cast<std::size_t>(a)] -= s * mode[static_cast<std::size_t>(a)];
            partial_freq -= s * lat.lambda[i];
        }
    }
};

} // namespace

static void check_target(const LatticeSpec& lat, std::span<const int> k, int n) {
    if (n < 0) throw std::invalid_argument("resonance: order n must be >= 0");
    if (!in_box(lat, k))
        throw std::invalid_argument("resonance: target mode outside the box");
}

std::vector<std::uint32_t> enumerate_S_naive(const LatticeSpec& lat,
                                             std::span<const int> k, int n,
                                             std::uint64_t max_monomials) {
    check_target(lat, k, n);
    if (checked_pow(lat.size, 2 * n, max_monomials) > max_monomials)
        throw ResourceError("enumerate_S_naive: candidate count exceeds budget");
    NaiveScan scan(lat, k, n, /*require_resonant=*/false);
    scan.run(0);
    return std::move(scan.out);
}

std::vector<std::uint32_t> enumerate_R_naive(const LatticeSpec& lat,
                                             std::span<const int> k, int n) {
    check_target(lat, k, n);
    NaiveScan scan(lat, k, n, /*require_resonant=*/true);
    scan.run(0);
    return std::move(scan.out);
}

//----------------------------------------------------------------------------
// Divisor statistics.
//
// Dynamic programming on the set of reachable (alternating momentum,
// alternating frequency) pairs after j positions.  Every reachable pair is
// realized by at least one tuple, so the extremes are exact.  Pairs are
// packed into one int64: momentum coordinates in mixed radix, frequency
// appended.
//----------------------------------------------------------------------------

namespace {

struct PairPacker {
    int d;
    std::int64_t B;      // |momentum coordinate| bound
    std::int64_t F;      // |frequency| bound
    std::int64_t radix;  // 2B+1
    std::int64_t fspan;  // 2F+1

    PairPacker(int dim, std::int64_t mb, std::int64_t fb)
        : d(dim), B(mb), F(fb), radix(2 * mb + 1), fspan(2 * fb + 1) {
        // overflow guard: radix^d * fspan must fit in int64
        long double cap = 1.0L;
        for (int a = 0; a < d; ++a) cap *= static_cast<long double>(radix);
        cap *= static_cast<long double>(fspan);
        if (cap > 4.0e18L)
            throw ResourceError("resonance: lattice too large to pack divisor states");
    }

    std::int64_t pack(std::span<const std::int64_t> m, std::int64_t f) const {
        std::int64_t key = 0;
        for (int a = 0; a < d; ++a)
            key = key * radix + (m[static_cast<std::size_t>(a)] + B);
        return key * fspan + (f + F);
    }
    void unpack(std::int64_t key, std::span<std::int64_t> m, std::int64_t& f) const {
        f = key % fspan - F;
        key /= fspan;
        for (int a = d - 1; a >= 0; --a) {
            m[static_cast<std::size_t>(a)] = key % radix - B;
            key /= radix;
        }
    }
};

} // namespace

DivisorStats divisor_statistics(const LatticeSpec& lat, int n) {
    if (n < 0) throw std::invalid_argument("divisor_statistics: n must be >= 0");
    const int w = 2 * n + 1;
    const std::int64_t dK2 = static_cast<std::int64_t>(lat.d) * lat.K * lat.K;
    const PairPacker pk(lat.d, static_cast<std::int64_t>(w) * lat.K,
                        static_cast<std::int64_t>(n + 1) * dK2);

    std::unordered_set<std::int64_t> cur, next;
    std::vector<std::int64_t> m(static_cast<std::size_t>(lat.d), 0);
    cur.insert(pk.pack(m, 0));

    std::vector<std::int64_t> mm(static_cast<std::size_t>(lat.d));
    for (int j = 0; j < w; ++j) {
        const int s = sign_of(j);
        next.clear();
        next.reserve(cur.size() * lat.size / 2 + 16);
        for (std::int64_t key : cur) {
            std::int64_t f;
            pk.unpack(key, mm, f);
            for (std::size_t i = 0; i < lat.size; ++i) {
                const auto mode = lat.mode(i);
                for (int a = 0; a < lat.d; ++a)
                    m[static_cast<std::size_t>(a)] =
                        mm[static_cast<std::size_t>(a)] + s * mode[static_cast<std::size_t>(a)];
                next.insert(pk.pack(m, f + s * lat.lambda[i]));
            }
        }
        cur.swap(next);
    }

    DivisorStats st;
    std::vector<int> kk(static_cast<std::size_t>(lat.d));
    for (std::int64_t key : cur) {
        std::int64_t f;
        pk.unpack(key, mm, f);
        bool box = true;
        for (int a = 0; a < lat.d; ++a) {
            if (mm[static_cast<std::size_t>(a)] < -lat.K || mm[static_cast<std::size_t>(a)] > lat.K) {
                box = false;
                break;
            }
            kk[static_cast<std::size_t>(a)] = static_cast<int>(mm[static_cast<std::size_t>(a)]);
        }
        if (!box) continue;
        const std::int64_t div = f - lambda_of(kk);
        const std::int64_t ad = div < 0 ? -div : div;
        if (ad > st.max_freq) st.max_freq = ad;
        if (ad != 0 && ad < st.gap) st.gap = ad;
    }
    return st;
}

//----------------------------------------------------------------------------
// Meet-in-the-middle table construction.
//----------------------------------------------------------------------------

namespace {

// Index of all assignments of the first n+1 positions, keyed by their
// (alternating momentum, alternating frequency).  Values are the flat
// position-index groups in lexicographic order.
struct HalfIndex {
    PairPacker pk;
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> buckets;
    int group = 1; // indexes per group = n+1

    HalfIndex(const LatticeSpec& lat, int n)
        : pk(lat.d, static_cast<std::int64_t>(n + 1) * lat.K,
             static_cast<std::int64_t>(n + 1) * lat.d * lat.K * lat.K),
          group(n + 1) {
        std::vector<std::uint32_t> idx(static_cast<std::size_t>(n + 1));
        std::vector<std::int64_t> m(static_cast<std::size_t>(lat.d), 0);
        std::int64_t f = 0;
        fill(lat, n, 0, idx, m, f);
    }

    void fill(const LatticeSpec& lat, int n, int j, std::vector<std::uint32_t>& idx,
              std::vector<std::int64_t>& m, std::int64_t& f) {
        if (j == n + 1) {
            auto& b = buckets[pk.pack(m, f)];
            b.insert(b.end(), idx.begin(), idx.end());
            return;
        }
        const int s = sign_of(j);
        for (std::size_t i = 0; i < lat.size; ++i) {
            idx[static_cast<std::size_t>(j)] = static_cast<std::uint32_t>(i);
            const auto mode = lat.mode(i);
            for (int a = 0; a < lat.d; ++a)
                m[static_cast<std::size_t>(a)] += s * mode[static_cast<std::size_t>(a)];
            f += s * lat.lambda[i];
            fill(lat, n, j + 1, idx, m, f);
            for (int a = 0; a < lat.d; ++a)
                m[static_cast<std::size_t>(a)] -= s * mode[static_cast<std::size_t>(a)];
            f -= s * lat.lambda[i];
        }
    }
};

// Walk all assignments of the scanned half (positions n+1 .. 2n) for one
// target; for each, probe the index with the complementary partial sums.
// visit(bucket, scan_idx) is called for every nonempty bucket.
template <typename Visit>
void scan_half(const LatticeSpec& lat, int n, const HalfIndex& half,
               std::size_t target, Visit&& visit) {
    const int d = lat.d;
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(n));
    std::vector<std::int64_t> m(static_cast<std::size_t>(d), 0);
    std::vector<std::int64_t> probe_m(static_cast<std::size_t>(d));
    std::int64_t f = 0;
    const auto tmode = lat.mode(target);
    const std::int64_t tlam = lat.lambda[target];

    // recursive odometer over scan positions, global positions n+1+j
    auto rec = [&](auto&& self, int j) -> void {
        if (j == n) {
            for (int a = 0; a < d; ++a)
                probe_m[static_cast<std::size_t>(a)] =
                    tmode[static_cast<std::size_t>(a)] - m[static_cast<std::size_t>(a)];
            const std::int64_t probe_f = tlam - f;
            // within packer bounds by construction of B and F
            auto it = half.buckets.find(half.pk.pack(probe_m, probe_f));
            if (it != half.buckets.end()) visit(it->second, idx);
            return;
        }
        const int s = sign_of(n + 1 + j);
        for (std::size_t i = 0; i < lat.size; ++i) {
            idx[static_cast<std::size_t>(j)] = static_cast<std::uint32_t>(i);
            const auto mode = lat.mode(i);
            for (int a = 0; a < d; ++a)
                m[static_cast<std::size_t>(a)] += s * mode[static_cast<std::size_t>(a)];
            f += s * lat.lambda[i];
            self(self, j + 1);
            for (int a = 0; a < d; ++a)
                m[static_cast<std::size_t>(a)] -= s * mode[static_cast<std::size_t>(a)];
            f -= s * lat.lambda[i];
        }
    };
    rec(rec, 0);
}

} // namespace

ResonanceTable build_resonance_table(const LatticeSpec& lat, int n,
                                     const BuildOptions& opt) {
    if (n < 0) throw std::invalid_argument("build_resonance_table: n must be >= 0");
    const int w = 2 * n + 1;
    const std::size_t wz = static_cast<std::size_t>(w);

    // the indexed half must itself stay in memory
    if (checked_pow(lat.size, n + 1, std::uint64_t(1) << 27) > (std::uint64_t(1) << 27))
        throw ResourceError("build_resonance_table: indexed half exceeds budget");

    HalfIndex half(lat, n);

    // counting pass: exact tuple total without materializing
    std::vector<std::uint64_t> counts(lat.size, 0);
    for (std::size_t t = 0; t < lat.size; ++t) {
        std::uint64_t c = 0;
        scan_half(lat, n, half, t,
                  [&](const std::vector<std::uint32_t>& bucket,
                      const std::vector<std::uint32_t>&) {
                      c += bucket.size() / static_cast<std::size_t>(half.group);
                  });
        counts[t] = c;
    }
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) total += c;
    const std::uint64_t bytes = total * wz * sizeof(std::uint32_t);
    if (bytes > opt.max_bytes)
        throw ResourceError("build_resonance_table: estimated " + std::to_string(total) +
                            " tuples (" + std::to_string(bytes) +
                            " bytes) exceeds the memory budget");

    ResonanceTable tab;
    tab.d = lat.d;
    tab.K = lat.K;
    tab.n = n;
    tab.lattice_size = lat.size;
    tab.offsets.resize(lat.size + 1, 0);
    for (std::size_t t = 0; t < lat.size; ++t)
        tab.offsets[t + 1] = tab.offsets[t] + counts[t];
    tab.entries.resize(static_cast<std::size_t>(total) * wz);

    // materialize one target: emit (indexed group ++ scanned suffix), then
    // sort that target's tuples lexicographically so the layout is canonical
    auto fill_target = [&](std::size_t t) {
        const std::size_t cnt = static_cast<std::size_t>(counts[t]);
        if (cnt == 0) return;
        std::vector<std::uint32_t> buf;
        buf.reserve(cnt * wz);
        scan_half(lat, n, half, t,
                  [&](const std::vector<std::uint32_t>& bucket,
                      const std::vector<std::uint32_t>& scan_idx) {
                      const std::size_t g = static_cast<std::size_t>(half.group);
                      for (std::size_t o = 0; o < bucket.size(); o += g) {
                          buf.insert(buf.end(), bucket.begin() + static_cast<std::ptrdiff_t>(o),
                                     bucket.begin() + static_cast<std::ptrdiff_t>(o + g));
                          buf.insert(buf.end(), scan_idx.begin(), scan_idx.end());
                      }
                  });
        std::vector<std::uint32_t> perm(cnt);
        for (std::uint32_t i = 0; i < cnt; ++i) perm[i] = i;
        std::sort(perm.begin(), perm.end(), [&](std::uint32_t a, std::uint32_t b) {
            return std::lexicographical_compare(
                buf.begin() + a * wz, buf.begin() + (a + 1) * wz,
                buf.begin() + b * wz, buf.begin() + (b + 1) * wz);
        });
        std::uint32_t* dst = tab.entries.data() + tab.offsets[t] * wz;
        for (std::uint32_t i = 0; i < cnt; ++i)
            std::memcpy(dst + static_cast<std::size_t>(i) * wz,
                        buf.data() + static_cast<std::size_t>(perm[i]) * wz,
                        wz * sizeof(std::uint32_t));
    };

    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1 || lat.size < 2) {
        for (std::size_t t = 0; t < lat.size; ++t) fill_target(t);
    } else {
        // targets are independent and write disjoint slices
        std::vector<std::thread> pool;
        std::size_t chunk = (lat.size + static_cast<std::size_t>(jobs) - 1) /
                            static_cast<std::size_t>(jobs);
        for (int j = 0; j < jobs; ++j) {
            const std::size_t lo = static_cast<std::size_t>(j) * chunk;
            const std::size_t hi = std::min(lat.size, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::size_t t = lo; t < hi; ++t) fill_target(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    tab.stats = divisor_statistics(lat, n);
    return tab;
}

//----------------------------------------------------------------------------
// Binary cache format (little-endian, as written):
//   magic "CGLRTAB\0" | u32 version | u32 d | u32 K | u32 n
//   u64 lattice_size | u64 total | i64 max_freq | i64 gap | u64 checksum
//   u64 counts[lattice_size] | u32 entries[total * (2n+1)]
// checksum = FNV-1a over the counts and entries bytes.
//----------------------------------------------------------------------------

static constexpr char kMagic[8] = {'C', 'G', 'L', 'R', 'T', 'A', 'B', '\0'};
static constexpr std::uint32_t kVersion = 1;

namespace {
template <typename T>
void put(std::ofstream& os, const T& x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}
template <typename T>
void get(std::ifstream& is, T& x) {
    is.read(reinterpret_cast<char*>(&x), sizeof(T));
}
} // namespace

void save_table(const ResonanceTable& tab, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw SerializationError("save_table: cannot open " + path);

    std::vector<std::uint64_t> counts(tab.lattice_size);
    for (std::size_t t = 0; t < tab.lattice_size; ++t) counts[t] = tab.count(t);

    std::uint64_t chk = fnv1a64(counts.data(), counts.size() * sizeof(std::uint64_t));
    chk = fnv1a64(tab.entries.data(), tab.entries.size() * sizeof(std::uint32_t), chk);

    os.write(kMagic, 8);
    put(os, kVersion);
    put(os, static_cast<std::uint32_t>(tab.d));
    put(os, static_cast<std::uint32_t>(tab.K));
    put(os, static_cast<std::uint32_t>(tab.n));
    put(os, static_cast<std::uint64_t>(tab.lattice_size));
    put(os, tab.total());
    put(os, tab.stats.max_freq);
    put(os, tab.stats.gap);
    put(os, chk);
    os.write(reinterpret_cast<const char*>(counts.data()),
             static_cast<std::streamsize>(counts.size() * sizeof(std::uint64_t)));
    os.write(reinterpret_cast<const char*>(tab.entries.data()),
             static_cast<std::streamsize>(tab.entries.size() * sizeof(std::uint32_t)));
    if (!os) throw SerializationError("save_table: write failed for " + path);
}

ResonanceTable load_table(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SerializationError("load_table: cannot open " + path);

    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw SerializationError("load_table: bad magic in " + path);

    std::uint32_t version = 0, d = 0, K = 0, n = 0;
    std::uint64_t lattice_size = 0, total = 0, chk = 0;
    std::int64_t max_freq = 0, gap = 0;
    get(is, version);
    get(is, d);
    get(is, K);
    get(is, n);
    get(is, lattice_size);
    get(is, total);
    get(is, max_freq);
    get(is, gap);
    get(is, chk);
    if (!is || version != kVersion)
        throw SerializationError("load_table: unsupported version in " + path);
    if (d < 1 || n > 15 || lattice_size == 0 ||
        lattice_size > (std::uint64_t(1) << 24) ||
        total > (std::uint64_t(1) << 40))
        throw SerializationError("load_table: implausible header in " + path);

    ResonanceTable tab;
    tab.d = static_cast<int>(d);
    tab.K = static_cast<int>(K);
    tab.n = static_cast<int>(n);
    tab.lattice_size = static_cast<std::size_t>(lattice_size);
    tab.stats.max_freq = max_freq;
    tab.stats.gap = gap;

    std::vector<std::uint64_t> counts(tab.lattice_size);
    is.read(reinterpret_cast<char*>(counts.data()),
            static_cast<std::streamsize>(counts.size() * sizeof(std::uint64_t)));
    tab.offsets.assign(tab.lattice_size + 1, 0);
    for (std::size_t t = 0; t < tab.lattice_size; ++t)
        tab.offsets[t + 1] = tab.offsets[t] + counts[t];
    if (!is || tab.total() != total)
        throw SerializationError("load_table: count block corrupt in " + path);

    tab.entries.resize(static_cast<std::size_t>(total) *
                       static_cast<std::size_t>(tab.width()));
    is.read(reinterpret_cast<char*>(tab.entries.data()),
            static_cast<std::streamsize>(tab.entries.size() * sizeof(std::uint32_t)));
    if (!is) throw SerializationError("load_table: entries truncated in " + path);
    is.peek();
    if (!is.eof()) throw SerializationError("load_table: trailing bytes in " + path);

    std::uint64_t want = fnv1a64(counts.data(), counts.size() * sizeof(std::uint64_t));
    want = fnv1a64(tab.entries.data(), tab.entries.size() * sizeof(std::uint32_t), want);
    if (want != chk) throw SerializationError("load_table: checksum mismatch in " + path);

    for (std::uint32_t e : tab.entries)
        if (e >= tab.lattice_size)
            throw SerializationError("load_table: entry out of range in " + path);
    return tab;
}

std::string table_cache_name(int d, int K, int n) {
    return "rtable_d" + std::to_string(d) + "_K" + std::to_string(K) + "_n" +
           std::to_string(n) + ".bin";
}

ResonanceTable load_or_build(const LatticeSpec& lat, int n,
                             const std::string& cache_dir, const BuildOptions& opt) {
    namespace fs = std::filesystem;
    fs::create_directories(cache_dir);
    const std::string path =
        (fs::path(cache_dir) / table_cache_name(lat.d, lat.K, n)).string();

    if (fs::exists(path)) {
        try {
            ResonanceTable tab = load_table(path);
            if (tab.d == lat.d && tab.K == lat.K && tab.n == n &&
                tab.lattice_size == lat.size)
                return tab;
            std::fprintf(stderr, "cache: %s keyed for a different lattice, rebuilding\n",
                         path.c_str());
        } catch (const SerializationError& e) {
            std::fprintf(stderr, "cache: %s, rebuilding\n", e.what());
        }
    }
    ResonanceTable tab = build_resonance_table(lat, n, opt);
    save_table(tab, path);
    return tab;
}

} // namespace cgl
