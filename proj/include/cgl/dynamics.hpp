#pragma once
//============================================================================
// Right-hand sides of the rescaled and effective flows on the mode box.
//
// Full (slow time tau):   dv_k = (i/eps) lambda_k v_k + F_k v_k + P_k(v)
// Effective:              da_k = F_k a_k + R_k(a)
// with F_k = -mu lambda_k^m,
//      P(v) = b P(v,p) + i c P(v,q),   P_k(v,n) = sum_{S(k,n)} monomials,
//      R(v) = b R(v,p) + i c R(v,q),   R_k(v,n) = sum_{R(k,n)} monomials,
// where a monomial of a signed tuple conjugates the even positions:
// v_{k_1} conj(v_{k_2}) v_{k_3} ...
//
// P is evaluated by dealiased collocation (exactly the box-truncated sum);
// R either from a resonance table or by averaging the rotated nonlinearity
// over a circle of phases, which is exact for enough quadrature nodes since
// every monomial's phase is an integer frequency bounded by max_freq.
//============================================================================

#include <memory>

#include "cgl/field.hpp"
#include "cgl/resonance.hpp"
#include "cgl/transform.hpp"

namespace cgl {

struct EquationParams {
    double eps = 0.1; // > 0
    double mu = 0.0;  // >= 0
    int m = 1;        // >= 1
    double b = 0.0;
    double c = 0.0;
    int p = 1;        // >= 1
    int q = 1;        // >= 1

    int max_order() const { return p > q ? p : q; }
    void validate() const; // throws std::invalid_argument
};

// Dealiased collocation evaluator for P; owns its transform plan and grid
// scratch, so it is cheap to call repeatedly but not shareable across
// threads.  grid_M = 0 selects dealias_grid_size(K, max(p,q)).
class NonlinearityEvaluator {
public:
    NonlinearityEvaluator(std::shared_ptr<const LatticeSpec> lat,
                          const EquationParams& par, int grid_M = 0);

    void eval(const FourierField& v, FourierField& out);
    FourierField eval(const FourierField& v);

    // Mean over the grid of |u|^{2n+2}, i.e. (2 pi)^{-d} int |u|^{2n+2} dx;
    // alias-free for n <= max(p,q).
    double potential_mean(const FourierField& v, int n);

    int grid() const { return plan_.M(); }

private:
    std::shared_ptr<const LatticeSpec> lat_;
    EquationParams par_;
    TransformPlan plan_;
    PhysicalField u_;
    PhysicalField w_;
};

// One-shot convenience wrappers.
FourierField nonlinearity_P(const FourierField& v, const EquationParams& par);

// Reference path: direct summation over S(k,p) and S(k,q).  Refuses
// (ResourceError) when the total monomial count would exceed the budget.
FourierField nonlinearity_P_oracle(const FourierField& v, const EquationParams& par,
                                   std::uint64_t max_monomials = std::uint64_t(1) << 27);

// Bare monomial sum R(v,n) over one table's resonant tuples.
FourierField resonant_monomial_sum(const FourierField& v, const ResonanceTable& tab);

// R(v) = b R(v,p) + i c R(v,q) from precomputed tables (pass the same table
// twice when p == q).  Tables must match the field's lattice.
FourierField resonant_R_table(const FourierField& v, const EquationParams& par,
                              const ResonanceTable& tab_p, const ResonanceTable& tab_q);

// R(v) = (1/M) sum_j Phi_{-t_j Lambda} P(Phi_{t_j Lambda} v), t_j = 2 pi j / M.
// Exact once M >= 2*max_freq + 1; nodes = 0 selects 2*((2n+2) d K^2) + 1,
// a safe overestimate of that threshold.
FourierField resonant_R_average(const FourierField& v, const EquationParams& par,
                                int nodes = 0);

// Dissipative multiplier F_k = -mu lambda_k^m applied to v.
FourierField dissipation_F(const FourierField& v, const EquationParams& par);

// e^{-mu lambda^m t} v, the exact linear-dissipation flow; pre: t >= 0.
FourierField dissipation_semigroup(const FourierField& v, const EquationParams& par,
                                   double t);

FourierField full_rhs(const FourierField& v, const EquationParams& par);
FourierField effective_rhs(const FourierField& v, const EquationParams& par,
                           const ResonanceTable& tab_p, const ResonanceTable& tab_q);

// Spectral energies used by the conservation checks, per unit (2 pi)^d
// volume.  W_n(v) denotes the grid mean of |u|^{2n+2}.
//   energy_nls  = 1/2 sum lambda |v|^2 + (c eps / (2q+2)) W_q   (conserved
//                 exactly by the truncated flow when mu = b = 0)
//   energy_flip = 1/2 sum lambda |v|^2 - (c eps / (2q+2)) W_q   (the
//                 sign-flipped variant; monotone under strong dissipation)
double energy_nls(const FourierField& v, const EquationParams& par);
double energy_flip(const FourierField& v, const EquationParams& par);

// Resonant Hamiltonian (c / (2q+2)) sum_k R_k(v,q) conj(v_k), evaluated over
// a degree-q table.  The tuple set is closed under swapping the roles of
// barred and unbarred positions, so the sum is real; the imaginary part is
// discarded (it is rounding noise, checked in tests).
double hamiltonian_Hres(const FourierField& v, double c, int q,
                        const ResonanceTable& tab_q);

} // namespace cgl
