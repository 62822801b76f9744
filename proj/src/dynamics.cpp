#include "cgl/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cgl/errors.hpp"

namespace cgl {

void EquationParams::validate() const {
    if (!(eps > 0.0)) throw std::invalid_argument("params: eps must be > 0");
    if (!(mu >= 0.0)) throw std::invalid_argument("params: mu must be >= 0");
    if (m < 1) throw std::invalid_argument("params: m must be >= 1");
    if (p < 1 || q < 1) throw std::invalid_argument("params: p, q must be >= 1");
    if (!std::isfinite(b) || !std::isfinite(c))
        throw std::invalid_argument("params: b, c must be finite");
}

static void check_lattice(const FourierField& v, const ResonanceTable& tab,
                          const char* who) {
    const LatticeSpec& lat = *v.lattice;
    if (tab.d != lat.d || tab.K != lat.K || tab.lattice_size != lat.size)
        throw std::invalid_argument(std::string(who) +
                                    ": resonance table keyed for a different lattice");
}

//----------------------------------------------------------------------------
// Collocation nonlinearity
//----------------------------------------------------------------------------

NonlinearityEvaluator::NonlinearityEvaluator(std::shared_ptr<const LatticeSpec> lat,
                                             const EquationParams& par, int grid_M)
    : lat_(std::move(lat)), par_(par),
      plan_(lat_->d, grid_M > 0 ? grid_M : dealias_grid_size(lat_->K, par.max_order())) {
    par_.validate();
    if (plan_.M() < dealias_grid_size(lat_->K, par_.max_order()) && grid_M > 0) {
        // an explicit grid may be smaller only if it still dealiases
        if (plan_.M() < (2 * par_.max_order() + 2) * lat_->K + 1)
            throw std::invalid_argument("NonlinearityEvaluator: grid admits aliasing");
    }
}

void NonlinearityEvaluator::eval(const FourierField& v, FourierField& out) {
    plan_.to_physical(v, u_);
    w_.d = u_.d;
    w_.M = u_.M;
    w_.values.resize(u_.values.size());
    const double b = par_.b, c = par_.c;
    const int p = par_.p, q = par_.q;
    for (std::size_t j = 0; j < u_.values.size(); ++j) {
        const Complex uj = u_.values[j];
        const double a2 = std::norm(uj);
        double bp = b, cq = c;
        for (int i = 0; i < p; ++i) bp *= a2;
        for (int i = 0; i < q; ++i) cq *= a2;
        w_.values[j] = Complex(bp, cq) * uj; // (b|u|^2p + i c|u|^2q) u
    }
    if (out.lattice != v.lattice) out = make_field(v.lattice);
    plan_.to_fourier(w_, out);
}

FourierField NonlinearityEvaluator::eval(const FourierField& v) {
    FourierField out = make_field(v.lattice);
    eval(v, out);
    return out;
}

double NonlinearityEvaluator::potential_mean(const FourierField& v, int n) {
    if (n > par_.max_order())
        throw std::invalid_argument("potential_mean: degree above dealiased order");
    plan_.to_physical(v, u_);
    double acc = 0.0;
    for (const Complex& uj : u_.values) {
        const double a2 = std::norm(uj);
        double t = a2;
        for (int i = 0; i < n; ++i) t *= a2;
        acc += t; // |u|^{2n+2}
    }
    return acc / static_cast<double>(u_.values.size());
}

FourierField nonlinearity_P(const FourierField& v, const EquationParams& par) {
    NonlinearityEvaluator ev(v.lattice, par);
    return ev.eval(v);
}

//----------------------------------------------------------------------------
// Reference summation path
//----------------------------------------------------------------------------

// sum over S(k,n) of v_{k_1} conj(v_{k_2}) ... for every target k; the last
// position is forced by the momentum constraint, as in the naive enumerators.
static void accumulate_S_sum(const FourierField& v, int n, Complex coeff,
                             std::vector<Complex>& acc) {
    const LatticeSpec& lat = *v.lattice;
    const int d = lat.d;
    struct Ctx {
        const LatticeSpec& lat;
        const std::vector<Complex>& amps;
        int n;
        std::vector<std::int64_t> partial;
        std::vector<int> last;
        std::vector<Complex> prefix; // running monomial products, prefix[j] before position j
    } ctx{lat, v.amps, n,
          std::vector<std::int64_t>(static_cast<std::size_t>(d), 0),
          std::vector<int>(static_cast<std::size_t>(d), 0),
          std::vector<Complex>(static_cast<std::size_t>(2 * n + 1) + 1)};
    ctx.prefix[0] = coeff;

    std::vector<Complex>* out = &acc;
    auto rec = [&](auto&& self, int j) -> void {
        if (j == 2 * n) {
            // The last position carries sign +1, so target k = partial + k_last;
            // iterate k_last directly and scatter into the matching target.
            for (std::size_t i = 0; i < ctx.lat.size; ++i) {
                const auto mode = ctx.lat.mode(i);
                bool ok = true;
                for (int a = 0; a < d; ++a) {
                    const std::int64_t t = ctx.partial[static_cast<std::size_t>(a)] +
                                           mode[static_cast<std::size_t>(a)];
                    if (t < -ctx.lat.K || t > ctx.lat.K) { ok = false; break; }
                    ctx.last[static_cast<std::size_t>(a)] = static_cast<int>(t);
                }
                if (!ok) continue;
                const std::size_t target = mode_index(ctx.lat, ctx.last);
                (*out)[target] += ctx.prefix[static_cast<std::size_t>(2 * ctx.n)] * ctx.amps[i];
            }
            return;
        }
        const int s = tuple_sign(j);
        for (std::size_t i = 0; i < ctx.lat.size; ++i) {
            const Complex a = (s > 0) ? ctx.amps[i] : std::conj(ctx.amps[i]);
            if (a == Complex(0.0, 0.0)) continue; // sparse data shortcut
            const auto mode = ctx.lat.mode(i);
            for (int t = 0; t < d; ++t)
                ctx.partial[static_cast<std::size_t>(t)] += s * mode[static_cast<std::size_t>(t)];
            ctx.prefix[static_cast<std::size_t>(j) + 1] =
                ctx.prefix[static_cast<std::size_t>(j)] * a;
            self(self, j + 1);
            for (int t = 0; t < d; ++t)
                ctx.partial[static_cast<std::size_t>(t)] -= s * mode[static_cast<std::size_t>(t)];
        }
    };
    rec(rec, 0);
}

FourierField nonlinearity_P_oracle(const FourierField& v, const EquationParams& par,
                                   std::uint64_t max_monomials) {
    par.validate();
    const LatticeSpec& lat = *v.lattice;
    std::uint64_t cost = 0;
    for (int n : {par.p, par.q}) {
        std::uint64_t c = 1;
        for (int i = 0; i < 2 * n + 1; ++i) {
            if (c > max_monomials / lat.size) { c = max_monomials + 1; break; }
            c *= lat.size;
        }
        cost = cost > c ? cost : c;
    }
    if (cost > max_monomials)
        throw ResourceError("nonlinearity_P_oracle: monomial count exceeds budget");

    FourierField out = make_field(v.lattice);
    accumulate_S_sum(v, par.p, Complex(par.b, 0.0), out.amps);
    accumulate_S_sum(v, par.q, Complex(0.0, par.c), out.amps);
    return out;
}

//----------------------------------------------------------------------------
// Resonant vector field
//----------------------------------------------------------------------------

FourierField resonant_monomial_sum(const FourierField& v, const ResonanceTable& tab) {
    check_lattice(v, tab, "resonant_monomial_sum");
    FourierField out = make_field(v.lattice);
    const int w = tab.width();
    const std::vector<Complex>& a = v.amps;
    for (std::size_t t = 0; t < tab.lattice_size; ++t) {
        Complex acc(0.0, 0.0);
        const auto flat = tab.tuples_flat(t);
        for (std::size_t o = 0; o < flat.size(); o += static_cast<std::size_t>(w)) {
            Complex prod = a[flat[o]];
            for (int j = 1; j < w; ++j) {
                const Complex& f = a[flat[o + static_cast<std::size_t>(j)]];
                prod *= (j % 2 == 1) ? std::conj(f) : f;
            }
            acc += prod;
        }
        out.amps[t] = acc;
    }
    return out;
}

FourierField resonant_R_table(const FourierField& v, const EquationParams& par,
                              const ResonanceTable& tab_p, const ResonanceTable& tab_q) {
    par.validate();
    check_lattice(v, tab_p, "resonant_R_table");
    check_lattice(v, tab_q, "resonant_R_table");
    if (tab_p.n != par.p || tab_q.n != par.q)
        throw std::invalid_argument("resonant_R_table: table order mismatch");

    FourierField rp = resonant_monomial_sum(v, tab_p);
    FourierField rq = resonant_monomial_sum(v, tab_q);
    FourierField out = make_field(v.lattice);
    const Complex ic(0.0, par.c);
    for (std::size_t i = 0; i < out.amps.size(); ++i)
        out.amps[i] = par.b * rp.amps[i] + ic * rq.amps[i];
    return out;
}

FourierField resonant_R_average(const FourierField& v, const EquationParams& par,
                                int nodes) {
    par.validate();
    const LatticeSpec& lat = *v.lattice;
    if (nodes == 0) {
        const std::int64_t bound = static_cast<std::int64_t>(2 * par.max_order() + 2) *
                                   lat.d * lat.K * lat.K;
        nodes = static_cast<int>(2 * bound + 1);
    }
    if (nodes < 1) throw std::invalid_argument("resonant_R_average: nodes must be >= 1");

    NonlinearityEvaluator ev(v.lattice, par);
    FourierField acc = make_field(v.lattice);
    FourierField pv = make_field(v.lattice);
    for (int j = 0; j < nodes; ++j) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(j) /
                         static_cast<double>(nodes);
        FourierField rot = rotate_lambda(v, t);
        ev.eval(rot, pv);
        FourierField back = rotate_lambda(pv, -t);
        for (std::size_t i = 0; i < acc.amps.size(); ++i) acc.amps[i] += back.amps[i];
    }
    const double inv = 1.0 / static_cast<double>(nodes);
    for (Complex& a : acc.amps) a *= inv;
    return acc;
}

//----------------------------------------------------------------------------
// Linear parts and assembled right-hand sides
//----------------------------------------------------------------------------

FourierField dissipation_F(const FourierField& v, const EquationParams& par) {
    par.validate();
    FourierField out = v;
    const auto& lam = v.lattice->lambda;
    for (std::size_t i = 0; i < out.amps.size(); ++i)
        out.amps[i] *= -par.mu * std::pow(static_cast<double>(lam[i]), par.m);
    return out;
}

FourierField dissipation_semigroup(const FourierField& v, const EquationParams& par,
                                   double t) {
    par.validate();
    if (!(t >= 0.0))
        throw std::invalid_argument("dissipation_semigroup: t must be >= 0");
    FourierField out = v;
    const auto& lam = v.lattice->lambda;
    for (std::size_t i = 0; i < out.amps.size(); ++i)
        out.amps[i] *= std::exp(-par.mu * std::pow(static_cast<double>(lam[i]), par.m) * t);
    return out;
}

FourierField full_rhs(const FourierField& v, const EquationParams& par) {
    FourierField out = nonlinearity_P(v, par);
    const auto& lam = v.lattice->lambda;
    const double inv_eps = 1.0 / par.eps;
    for (std::size_t i = 0; i < out.amps.size(); ++i) {
        const double l = static_cast<double>(lam[i]);
        out.amps[i] += (Complex(0.0, inv_eps * l) - par.mu * std::pow(l, par.m)) * v.amps[i];
    }
    return out;
}

FourierField effective_rhs(const FourierField& v, const EquationParams& par,
                           const ResonanceTable& tab_p, const ResonanceTable& tab_q) {
    FourierField out = resonant_R_table(v, par, tab_p, tab_q);
    const auto& lam = v.lattice->lambda;
    for (std::size_t i = 0; i < out.amps.size(); ++i)
        out.amps[i] += -par.mu * std::pow(static_cast<double>(lam[i]), par.m) * v.amps[i];
    return out;
}

//----------------------------------------------------------------------------
// Energies
//----------------------------------------------------------------------------

static double half_h2(const FourierField& v) { return 0.5 * quadratic_energy(v); }

double energy_nls(const FourierField& v, const EquationParams& par) {
    NonlinearityEvaluator ev(v.lattice, par);
    const double W = ev.potential_mean(v, par.q);
    return half_h2(v) + par.c * par.eps / (2.0 * par.q + 2.0) * W;
}

double energy_flip(const FourierField& v, const EquationParams& par) {
    NonlinearityEvaluator ev(v.lattice, par);
    const double W = ev.potential_mean(v, par.q);
    return half_h2(v) - par.c * par.eps / (2.0 * par.q + 2.0) * W;
}

double hamiltonian_Hres(const FourierField& v, double c, int q,
                        const ResonanceTable& tab_q) {
    if (tab_q.n != q)
        throw std::invalid_argument("hamiltonian_Hres: table degree != q");
    const FourierField r = resonant_monomial_sum(v, tab_q);
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < v.amps.size(); ++i)
        acc += r.amps[i] * std::conj(v.amps[i]);
    return c / (2.0 * q + 2.0) * acc.real();
}

} // namespace cgl
