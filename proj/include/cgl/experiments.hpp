#pragma once
//============================================================================
// Paired-run harness: action-discrepancy metric between full and effective
// trajectories, the epsilon ladder with its scaling fit, conservation
// report generation, and the 1d cubic closed-form cross-check.
//
// The observable is e(tau) = |I(v(tau)) - I(a(tau))|~_{s1}, the weighted-l1
// distance between action vectors of the two flows started from the same
// datum, sampled on a shared uniform checkpoint schedule.
//============================================================================

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgl/integrate.hpp"

namespace cgl {

struct ComparisonReport {
    double s1 = 0.0;
    std::vector<double> taus;
    std::vector<double> errors; // e(tau_j), same length as taus
    double sup_error = 0.0;
};

// Both trajectories are reduced to their uniform checkpoint instants first;
// the schedules must then agree exactly.  Throws std::invalid_argument on
// lattice or schedule mismatch.
ComparisonReport compare_actions(const Trajectory& full, const Trajectory& effective,
                                 double s1);

struct LadderRung {
    double eps = 0.0;
    double sup_error = 0.0;
    double ratio_sqrt = 0.0; // sup_error / sqrt(eps)
    RunStatus status = RunStatus::ok;
    bool completed = false;
};

struct LadderReport {
    std::vector<LadderRung> rungs; // one per requested eps, in input order
    bool monotone = false;   // sup_error strictly decreasing along the ladder
    bool degenerate = false; // every sup_error at or below the noise floor
    double fitted_exponent = 0.0; // NaN unless >= 3 completed, nondegenerate
    double ratio_spread = 0.0;    // max/min of ratio_sqrt over completed rungs
    Trajectory effective;         // computed once; independent of eps
    std::vector<Trajectory> fulls; // one per rung (may be densely recorded)
};

// Runs the paired comparison for each eps in the list (strictly decreasing,
// at least 3 entries).  base.eps is ignored; each rung overrides it.  The
// fit is least squares on (log eps, log sup_error) over completed rungs.
// jobs > 1 integrates rungs concurrently.
LadderReport epsilon_ladder(const FourierField& v0, const EquationParams& base,
                            const StepControl& ctl, const ResonanceTable& tab_p,
                            const ResonanceTable& tab_q,
                            std::span<const double> eps_list, double s1,
                            int jobs = 1);

struct ConservationCheck {
    std::string name;
    double drift = 0.0;     // measured worst-case drift or per-step increase
    double tolerance = 0.0;
    bool pass = false;
};

struct ConservationReport {
    std::vector<ConservationCheck> checks; // only the applicable ones
    bool all_pass = true;
};

// Evaluates the invariants that the trajectory's parameter regime promises:
//   effective, mu=b=0:  H1 and H2 conserved (1e-8 rel), H_res (1e-6 rel)
//   full, mu=b=0:       physical L2 conserved (1e-8 rel), E_nls (1e-6 rel)
//   full, mu>0, b<=0, c<=0:  L2 nonincreasing (1e-10 per step); for m=1
//                            also E_flip nonincreasing (1e-8 per step)
ConservationReport conservation_suite(const Trajectory& traj);

// Max over k of |R_k(v,1) - (2 v_k sum_m |v_m|^2 - v_k |v_k|^2)| for a d=1
// cubic table; the closed form is itself table-checked in tests before use.
double closed_form_check_1d(const FourierField& v, const ResonanceTable& tab);

} // namespace cgl
