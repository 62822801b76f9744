#include "cgl/lattice.hpp"

#include <stdexcept>
#include <string>

#include "cgl/errors.hpp"

namespace cgl {

// Keep lattices desk-scale: (2K+1)^d modes must stay enumerable.
static constexpr std::size_t kMaxModes = std::size_t(1) << 24;

std::shared_ptr<const LatticeSpec> build_lattice(int d, int K) {
    if (d < 1) throw std::invalid_argument("lattice: dimension must be >= 1");
    if (K < 0) throw std::invalid_argument("lattice: box radius must be >= 0");

    const std::size_t side = 2 * static_cast<std::size_t>(K) + 1;
    std::size_t size = 1;
    for (int i = 0; i < d; ++i) {
        if (size > kMaxModes / side)
            throw ResourceError("lattice: (2K+1)^d exceeds the mode budget, d=" +
                                std::to_string(d) + " K=" + std::to_string(K));
        size *= side;
    }

    auto lat = std::make_shared<LatticeSpec>();
    lat->d = d;
    lat->K = K;
    lat->side = static_cast<int>(side);
    lat->size = size;
    lat->coords.resize(size * static_cast<std::size_t>(d));
    lat->lambda.resize(size);

    std::vector<int> k(static_cast<std::size_t>(d), -K);
    for (std::size_t i = 0; i < size; ++i) {
        std::int64_t lam = 0;
        for (int a = 0; a < d; ++a) {
            lat->coords[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] = k[static_cast<std::size_t>(a)];
            lam += static_cast<std::int64_t>(k[static_cast<std::size_t>(a)]) * k[static_cast<std::size_t>(a)];
        }
        lat->lambda[i] = lam;
        // lexicographic increment, last coordinate fastest
        for (int a = d - 1; a >= 0; --a) {
            if (k[static_cast<std::size_t>(a)] < K) { ++k[static_cast<std::size_t>(a)]; break; }
            k[static_cast<std::size_t>(a)] = -K;
        }
    }
    return lat;
}

std::int64_t lambda_of(std::span<const int> k) {
    std::int64_t lam = 0;
    for (int c : k) lam += static_cast<std::int64_t>(c) * c;
    return lam;
}

bool in_box(const LatticeSpec& lat, std::span<const int> k) {
    if (k.size() != static_cast<std::size_t>(lat.d)) return false;
    for (int c : k)
        if (c < -lat.K || c > lat.K) return false;
    return true;
}

std::size_t mode_index(const LatticeSpec& lat, std::span<const int> k) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < k.size(); ++a)
        idx = idx * static_cast<std::size_t>(lat.side) +
              static_cast<std::size_t>(k[a] + lat.K);
    return idx;
}

} // namespace cgl
