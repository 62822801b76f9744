#pragma once
//============================================================================
// Time integration.
//
// Both flows are advanced with an integrating-factor RK4: the diagonal
// linear part g_k (rotation i lambda_k / eps plus dissipation -mu lambda^m
// for the full flow, dissipation alone for the effective flow) is applied
// through exact exponentials, and classical RK4 acts on the conjugated
// nonlinearity.  With b = c = 0 a step therefore reproduces e^{g h} v
// exactly, and the stiff rotation never limits stability; accuracy does:
// the full-flow step resolves the fastest resonant divisor,
//     dtau = min(cfl_fraction * eps / omega_max, dtau_max),
// with omega_max taken from the divisor statistics.  The effective flow has
// no epsilon left in it and steps at dtau_max, checked by halving.
//
// A run records the state at uniform checkpoints (the first checkpoint is
// the initial datum), optionally at every accepted step; substeps inside a
// checkpoint interval are uniform, so checkpoint times are hit exactly.
//============================================================================

#include <cstdint>
#include <string>
#include <vector>

#include "cgl/dynamics.hpp"

namespace cgl {

struct StepControl {
    double T = 1.0;              // final slow time, > 0
    double cfl_fraction = 0.1;   // (0, 1]
    double dtau_max = 1.0e-3;    // > 0
    int checkpoints = 64;        // uniform intervals on [0, T], >= 1
    bool record_every_step = false;
    std::vector<double> s_values = {2.0}; // norms logged per checkpoint
    double blowup_threshold = 1.0e6;      // abort when |v|_0 exceeds this
    std::uint64_t max_steps = 20'000'000;

    void validate() const;
};

enum class RunStatus { ok, blowup, step_underflow };
const char* run_status_name(RunStatus s);

struct DiagnosticRow {
    double tau = 0.0;
    std::vector<double> h_norms; // aligned with StepControl::s_values
    double H1 = 0.0;             // sum |v_k|^2
    double H2 = 0.0;             // sum lambda_k |v_k|^2
    double l2 = 0.0;             // (2 pi)^{d/2} sqrt(H1)
    double E_nls = 0.0;          // NaN when not computed
    double E_flip = 0.0;         // NaN when not computed
    double H_res = 0.0;          // NaN when not computed
};

struct Trajectory {
    std::shared_ptr<const LatticeSpec> lattice;
    EquationParams params;
    StepControl control;
    bool effective = false;
    RunStatus status = RunStatus::ok;
    std::uint64_t steps = 0;
    double dtau_base = 0.0;      // uniform substep actually used
    double abort_tau = 0.0;      // meaningful when status != ok

    std::vector<double> times;                 // recorded instants
    std::vector<std::vector<Complex>> fields;  // state at each instant
    std::vector<DiagnosticRow> diagnostics;    // one row per instant

    FourierField field_at(std::size_t i) const;
};

// Full rescaled flow.  Computes divisor statistics for the step rule and
// evaluates P by dealiased collocation.  Returns a trajectory whose status
// reports blow-up aborts; throws ResourceError when max_steps is exceeded.
Trajectory integrate_full(const FourierField& v0, const EquationParams& par,
                          const StepControl& ctl);

// Effective flow; resonance tables must match the datum's lattice.
Trajectory integrate_effective(const FourierField& a0, const EquationParams& par,
                               const StepControl& ctl, const ResonanceTable& tab_p,
                               const ResonanceTable& tab_q);

// Keep only the uniform checkpoint instants of a (possibly densely
// recorded) trajectory; instants must be present exactly.
Trajectory at_uniform_checkpoints(const Trajectory& traj);

struct ResidualReport {
    double s1 = 0.0;
    std::vector<double> taus;
    std::vector<double> cumulative; // |int_0^tau (Y - R) dtau'|_{s1}
    double sup = 0.0;
    bool reliable = true; // false when recording is too coarse for eps
};

// Trapezoid accumulation of the averaging residual Y(a,tau) - R(a) along a
// full-flow trajectory, evaluated in the interaction picture.
ResidualReport residual_Y(const Trajectory& full, const ResonanceTable& tab_p,
                          const ResonanceTable& tab_q, double s1);

} // namespace cgl
