#include "cgl/field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cgl {

FourierField make_field(std::shared_ptr<const LatticeSpec> lat) {
    FourierField v;
    v.amps.assign(lat->size, Complex(0.0, 0.0));
    v.lattice = std::move(lat);
    return v;
}

double sobolev_weight(std::int64_t lambda, double s) {
    if (lambda == 0) return 1.0;
    return std::pow(static_cast<double>(lambda), s) + 1.0;
}

double h_norm(const FourierField& v, double s) {
    const auto& lam = v.lattice->lambda;
    double acc = 0.0;
    for (std::size_t i = 0; i < v.amps.size(); ++i)
        acc += sobolev_weight(lam[i], s) * std::norm(v.amps[i]);
    return std::sqrt(acc);
}

std::vector<double> actions(const FourierField& v) {
    std::vector<double> I(v.amps.size());
    for (std::size_t i = 0; i < v.amps.size(); ++i)
        I[i] = 0.5 * std::norm(v.amps[i]);
    return I;
}

std::vector<double> angles(const FourierField& v) {
    std::vector<double> phi(v.amps.size());
    for (std::size_t i = 0; i < v.amps.size(); ++i) {
        const Complex& a = v.amps[i];
        phi[i] = (a == Complex(0.0, 0.0)) ? 0.0 : std::arg(a);
    }
    return phi;
}

double action_norm(const LatticeSpec& lat, std::span<const double> I, double s) {
    if (I.size() != lat.size)
        throw std::invalid_argument("action_norm: size mismatch with lattice");
    double acc = 0.0;
    for (std::size_t i = 0; i < I.size(); ++i)
        acc += 2.0 * sobolev_weight(lat.lambda[i], s) * std::abs(I[i]);
    return acc;
}

FourierField phase_rotate(const FourierField& v, std::span<const double> theta) {
    if (theta.size() != v.amps.size())
        throw std::invalid_argument("phase_rotate: phase vector size mismatch");
    FourierField out = v;
    for (std::size_t i = 0; i < out.amps.size(); ++i)
        out.amps[i] *= std::polar(1.0, theta[i]);
    return out;
}

FourierField rotate_lambda(const FourierField& v, double t) {
    FourierField out = v;
    const auto& lam = v.lattice->lambda;
    for (std::size_t i = 0; i < out.amps.size(); ++i)
        out.amps[i] *= std::polar(1.0, t * static_cast<double>(lam[i]));
    return out;
}

FourierField interaction_picture(const FourierField& v, double tau, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("interaction_picture: eps must be positive");
    return rotate_lambda(v, -tau / eps);
}

double mass(const FourierField& v) {
    double acc = 0.0;
    for (const Complex& a : v.amps) acc += std::norm(a);
    return acc;
}

double quadratic_energy(const FourierField& v) {
    const auto& lam = v.lattice->lambda;
    double acc = 0.0;
    for (std::size_t i = 0; i < v.amps.size(); ++i)
        acc += static_cast<double>(lam[i]) * std::norm(v.amps[i]);
    return acc;
}

double l2_physical(const FourierField& v) {
    const double vol = std::pow(2.0 * std::numbers::pi, 0.5 * v.lattice->d);
    return vol * std::sqrt(mass(v));
}

} // namespace cgl
