#include "cgl/transform.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <string>

#include "cgl/errors.hpp"

namespace cgl {

// FFTW's planner mutates global state; executing distinct plans is safe
// concurrently, creating/destroying them is not.
static std::mutex g_planner_mutex;

int nice_grid_size(int minimum) {
    if (minimum < 1) minimum = 1;
    for (int M = minimum;; ++M) {
        int r = M;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return M;
    }
}

int dealias_grid_size(int K, int n) {
    if (K < 0 || n < 0) throw std::invalid_argument("dealias_grid_size: bad K or n");
    return nice_grid_size((2 * n + 2) * K + 1);
}

TransformPlan::TransformPlan(int d, int M) : d_(d), M_(M) {
    if (d < 1 || M < 1) throw std::invalid_argument("TransformPlan: bad dimensions");
    npts_ = 1;
    for (int a = 0; a < d; ++a) {
        if (npts_ > (std::size_t(1) << 28) / static_cast<std::size_t>(M))
            throw ResourceError("TransformPlan: grid M^d too large, M=" + std::to_string(M));
        npts_ *= static_cast<std::size_t>(M);
    }
    auto* buf = fftw_alloc_complex(npts_);
    if (!buf) throw ResourceError("TransformPlan: allocation failed");
    buf_ = buf;

    std::vector<int> dims(static_cast<std::size_t>(d), M);
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    fwd_ = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) {
        fftw_free(buf);
        buf_ = nullptr;
        throw ResourceError("TransformPlan: FFTW planning failed");
    }
}

TransformPlan::~TransformPlan() {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    if (buf_) fftw_free(static_cast<fftw_complex*>(buf_));
}

// Grid offset of mode k: each coordinate reduced mod M into 0..M-1,
// first axis slowest.
static std::size_t grid_bin(std::span<const int> k, int M) {
    std::size_t off = 0;
    for (int c : k) {
        int r = c % M;
        if (r < 0) r += M;
        off = off * static_cast<std::size_t>(M) + static_cast<std::size_t>(r);
    }
    return off;
}

void TransformPlan::to_physical(const FourierField& v, PhysicalField& u) {
    const LatticeSpec& lat = *v.lattice;
    if (lat.d != d_)
        throw std::invalid_argument("to_physical: lattice dimension mismatch");
    if (M_ < lat.side)
        throw std::invalid_argument("to_physical: grid below round-trip threshold 2K+1");

    auto* buf = static_cast<fftw_complex*>(buf_);
    for (std::size_t j = 0; j < npts_; ++j) { buf[j][0] = 0.0; buf[j][1] = 0.0; }
    for (std::size_t i = 0; i < lat.size; ++i) {
        const std::size_t off = grid_bin(lat.mode(i), M_);
        buf[off][0] = v.amps[i].real();
        buf[off][1] = v.amps[i].imag();
    }
    fftw_execute(static_cast<fftw_plan>(bwd_));
    u.d = d_;
    u.M = M_;
    u.values.resize(npts_);
    for (std::size_t j = 0; j < npts_; ++j)
        u.values[j] = Complex(buf[j][0], buf[j][1]);
}

void TransformPlan::to_fourier(const PhysicalField& u, FourierField& v) {
    const LatticeSpec& lat = *v.lattice;
    if (u.d != d_ || u.M != M_ || u.values.size() != npts_)
        throw std::invalid_argument("to_fourier: grid shape mismatch with plan");
    if (lat.d != d_)
        throw std::invalid_argument("to_fourier: lattice dimension mismatch");
    if (M_ < lat.side)
        throw std::invalid_argument("to_fourier: grid below round-trip threshold 2K+1");

    auto* buf = static_cast<fftw_complex*>(buf_);
    for (std::size_t j = 0; j < npts_; ++j) {
        buf[j][0] = u.values[j].real();
        buf[j][1] = u.values[j].imag();
    }
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const double scale = 1.0 / static_cast<double>(npts_);
    for (std::size_t i = 0; i < lat.size; ++i) {
        const std::size_t off = grid_bin(lat.mode(i), M_);
        v.amps[i] = Complex(buf[off][0] * scale, buf[off][1] * scale);
    }
}

PhysicalField to_physical(const FourierField& v, int M) {
    if (M == 0) M = v.lattice->side;
    TransformPlan plan(v.lattice->d, M);
    PhysicalField u;
    plan.to_physical(v, u);
    return u;
}

FourierField to_fourier(const PhysicalField& u, std::shared_ptr<const LatticeSpec> lat) {
    TransformPlan plan(u.d, u.M);
    FourierField v = make_field(std::move(lat));
    plan.to_fourier(u, v);
    return v;
}

} // namespace cgl
