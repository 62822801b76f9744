#pragma once
// Box-supported spectral fields, action/angle extraction, and the weighted
// norms |v|_s^2 = sum_k (|k|^{2s}+1)|v_k|^2 and |I|~_s = sum_k 2(|k|^{2s}+1)|I_k|.
// The k = 0 weight is (0 + 1) for every s.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "cgl/lattice.hpp"

namespace cgl {

using Complex = std::complex<double>;

struct FourierField {
    std::shared_ptr<const LatticeSpec> lattice;
    std::vector<Complex> amps; // lattice order
};

FourierField make_field(std::shared_ptr<const LatticeSpec> lat);

// (|k|^{2s} + 1) with |k|^{2s} = lambda^s; the lambda = 0 term is 0 for all s.
double sobolev_weight(std::int64_t lambda, double s);

double h_norm(const FourierField& v, double s);

// I_k = |v_k|^2 / 2; phi_k = Arg v_k in (-pi, pi], with Arg 0 := 0.
std::vector<double> actions(const FourierField& v);
std::vector<double> angles(const FourierField& v);

// |I|~_s; entries may be signed differences, so absolute values are taken.
double action_norm(const LatticeSpec& lat, std::span<const double> I, double s);

// (Phi_theta v)_k = e^{i theta_k} v_k
FourierField phase_rotate(const FourierField& v, std::span<const double> theta);

// theta_k = t * lambda_k: the free rotation entering the averaging formula.
FourierField rotate_lambda(const FourierField& v, double t);

// Interaction picture a_k = e^{-i lambda_k tau / eps} v_k; pre: eps > 0.
FourierField interaction_picture(const FourierField& v, double tau, double eps);

double mass(const FourierField& v);             // sum_k |v_k|^2
double quadratic_energy(const FourierField& v); // sum_k lambda_k |v_k|^2
double l2_physical(const FourierField& v);      // (2 pi)^{d/2} sqrt(mass)

} // namespace cgl
