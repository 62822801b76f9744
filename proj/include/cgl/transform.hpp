#pragma once
//============================================================================
// Collocation transforms between box-supported spectral data and samples on
// an equispaced M^d grid, x_j = 2*pi*j/M per axis.
//
// Conventions (matching v_k = (2*pi)^{-d} int u e^{-ik.x} dx):
//   to_physical:  u(x_j) = sum_k v_k e^{ i k.x_j}
//   to_fourier:   v_k    = M^{-d} sum_j u(x_j) e^{-i k.x_j}, truncated to box
//
// The pair is lossless when M >= 2K+1 (no two box modes alias).  Pointwise
// products of 2n+1 box factors read back alias-free when M >= (2n+2)K + 1.
// Plans use FFTW_ESTIMATE only, so results are run-to-run deterministic.
//============================================================================

#include "cgl/field.hpp"

namespace cgl {

struct PhysicalField {
    int d = 1;
    int M = 1;                    // points per axis
    std::vector<Complex> values;  // M^d, row-major, first axis slowest
};

// Smallest M >= minimum whose prime factors are all in {2,3,5,7}.
int nice_grid_size(int minimum);

// Grid that evaluates a degree-(2n+1) product of box-K fields alias-free.
int dealias_grid_size(int K, int n);

// Reusable complex-to-complex plan pair of fixed (d, M).  Instances are not
// thread-safe; plan creation itself is serialized internally because FFTW's
// planner is a global resource.
class TransformPlan {
public:
    TransformPlan(int d, int M);
    ~TransformPlan();
    TransformPlan(const TransformPlan&) = delete;
    TransformPlan& operator=(const TransformPlan&) = delete;

    void to_physical(const FourierField& v, PhysicalField& u);
    // Truncates to v.lattice; pre: M >= 2K+1 and grid dims match.
    void to_fourier(const PhysicalField& u, FourierField& v);
    int M() const { return M_; }
    int d() const { return d_; }

private:
    int d_ = 0, M_ = 0;
    std::size_t npts_ = 0;
    void* buf_ = nullptr; // fftw_complex[npts_]
    void* fwd_ = nullptr; // fftw_plan, sign -1
    void* bwd_ = nullptr; // fftw_plan, sign +1
};

// One-shot wrappers (a plan per call; fine outside hot loops).
// M = 0 selects the minimal lossless grid 2K+1.
PhysicalField to_physical(const FourierField& v, int M = 0);
FourierField to_fourier(const PhysicalField& u, std::shared_ptr<const LatticeSpec> lat);

} // namespace cgl
