#include "cgl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace cgl {

namespace {

std::vector<double> action_vector(const FourierField& v) {
    std::vector<double> I(v.amps.size());
    for (std::size_t i = 0; i < I.size(); ++i) I[i] = 0.5 * std::norm(v.amps[i]);
    return I;
}

const double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

ComparisonReport compare_actions(const Trajectory& full, const Trajectory& effective,
                                 double s1) {
    if (full.lattice.get() != effective.lattice.get())
        throw std::invalid_argument("compare_actions: lattice mismatch");

    const Trajectory fu = full.control.record_every_step ? at_uniform_checkpoints(full)
                                                         : full;
    const Trajectory ef = effective.control.record_every_step
                              ? at_uniform_checkpoints(effective)
                              : effective;
    if (fu.times != ef.times)
        throw std::invalid_argument("compare_actions: checkpoint schedules differ");

    const LatticeSpec& lat = *fu.lattice;
    ComparisonReport rep;
    rep.s1 = s1;
    rep.taus = fu.times;
    rep.errors.reserve(fu.times.size());
    std::vector<double> diff(lat.size);
    for (std::size_t j = 0; j < fu.times.size(); ++j) {
        const auto& a = fu.fields[j];
        const auto& b = ef.fields[j];
        for (std::size_t i = 0; i < lat.size; ++i)
            diff[i] = 0.5 * (std::norm(a[i]) - std::norm(b[i]));
        const double e = action_norm(lat, diff, s1);
        rep.errors.push_back(e);
        rep.sup_error = std::max(rep.sup_error, e);
    }
    return rep;
}

LadderReport epsilon_ladder(const FourierField& v0, const EquationParams& base,
                            const StepControl& ctl, const ResonanceTable& tab_p,
                            const ResonanceTable& tab_q,
                            std::span<const double> eps_list, double s1, int jobs) {
    if (eps_list.size() < 3)
        throw std::invalid_argument("epsilon_ladder: need at least 3 eps values");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (!(eps_list[i] > eps_list[i + 1]))
            throw std::invalid_argument("epsilon_ladder: eps values must decrease");
    if (!(eps_list.back() > 0.0))
        throw std::invalid_argument("epsilon_ladder: eps values must be positive");

    LadderReport rep;

    // The effective flow never sees eps, so one run serves every rung.
    rep.effective = integrate_effective(v0, base, ctl, tab_p, tab_q);

    rep.fulls.resize(eps_list.size());
    auto run_rung = [&](std::size_t i) {
        EquationParams par = base;
        par.eps = eps_list[i];
        rep.fulls[i] = integrate_full(v0, par, ctl);
    };
    if (jobs > 1) {
        std::vector<std::future<void>> pending;
        std::size_t next = 0;
        while (next < eps_list.size() || !pending.empty()) {
            while (next < eps_list.size() &&
                   pending.size() < static_cast<std::size_t>(jobs))
                pending.push_back(std::async(std::launch::async, run_rung, next++));
            pending.back().get();
            pending.pop_back();
        }
    } else {
        for (std::size_t i = 0; i < eps_list.size(); ++i) run_rung(i);
    }

    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        LadderRung rung;
        rung.eps = eps_list[i];
        rung.status = rep.fulls[i].status;
        rung.completed = rep.fulls[i].status == RunStatus::ok;
        if (rung.completed) {
            rung.sup_error =
                compare_actions(rep.fulls[i], rep.effective, s1).sup_error;
            rung.ratio_sqrt = rung.sup_error / std::sqrt(rung.eps);
        } else {
            rung.sup_error = rung.ratio_sqrt = kNaN;
        }
        rep.rungs.push_back(rung);
    }

    std::vector<const LadderRung*> done;
    for (const auto& r : rep.rungs)
        if (r.completed) done.push_back(&r);

    const double kFloor = 1.0e-10;
    double sup_max = 0.0;
    for (const auto* r : done) sup_max = std::max(sup_max, r->sup_error);
    rep.degenerate = !done.empty() && sup_max <= kFloor;

    rep.monotone = done.size() == rep.rungs.size() && done.size() >= 2;
    for (std::size_t i = 0; i + 1 < done.size() && rep.monotone; ++i)
        if (!(done[i + 1]->sup_error < done[i]->sup_error)) rep.monotone = false;

    rep.fitted_exponent = kNaN;
    rep.ratio_spread = kNaN;
    if (!rep.degenerate && done.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t pts = 0;
        for (const auto* r : done) {
            if (!(r->sup_error > 0.0)) continue;
            const double x = std::log(r->eps), y = std::log(r->sup_error);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++pts;
        }
        if (pts >= 3) {
            const double nd = static_cast<double>(pts);
            rep.fitted_exponent = (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
        }
        double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
        for (const auto* r : done) {
            rmin = std::min(rmin, r->ratio_sqrt);
            rmax = std::max(rmax, r->ratio_sqrt);
        }
        if (rmin > 0.0) rep.ratio_spread = rmax / rmin;
    }
    return rep;
}

namespace {

// Worst relative drift of column x away from its initial value.
double rel_drift(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    const double scale = std::max(std::abs(x[0]), 1.0e-12);
    double worst = 0.0;
    for (double xi : x) worst = std::max(worst, std::abs(xi - x[0]));
    return worst / scale;
}

// Worst per-step increase of column x (0 when nonincreasing).
double worst_increase(const std::vector<double>& x) {
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j)
        worst = std::max(worst, x[j + 1] - x[j]);
    return worst;
}

std::vector<double> column(const Trajectory& t, double DiagnosticRow::* field) {
    std::vector<double> x;
    x.reserve(t.diagnostics.size());
    for (const auto& row : t.diagnostics) x.push_back(row.*field);
    return x;
}

} // namespace

ConservationReport conservation_suite(const Trajectory& traj) {
    const EquationParams& par = traj.params;
    ConservationReport rep;
    auto add = [&](std::string name, double drift, double tol) {
        ConservationCheck c;
        c.name = std::move(name);
        c.drift = drift;
        c.tolerance = tol;
        c.pass = drift <= tol;
        rep.all_pass = rep.all_pass && c.pass;
        rep.checks.push_back(std::move(c));
    };

    const bool hamiltonian = par.mu == 0.0 && par.b == 0.0;
    if (traj.effective && hamiltonian) {
        add("H1 conserved (rel)", rel_drift(column(traj, &DiagnosticRow::H1)), 1.0e-8);
        add("H2 conserved (rel)", rel_drift(column(traj, &DiagnosticRow::H2)), 1.0e-8);
        add("H_res conserved (rel)", rel_drift(column(traj, &DiagnosticRow::H_res)),
            1.0e-6);
    }
    if (!traj.effective && hamiltonian) {
        add("L2 conserved (rel)", rel_drift(column(traj, &DiagnosticRow::l2)), 1.0e-8);
        add("E_nls conserved (rel)", rel_drift(column(traj, &DiagnosticRow::E_nls)),
            1.0e-6);
    }
    if (!traj.effective && par.mu > 0.0 && par.b <= 0.0 && par.c <= 0.0) {
        add("L2 nonincreasing (per step)",
            worst_increase(column(traj, &DiagnosticRow::l2)), 1.0e-10);
        if (par.m == 1)
            add("E_flip nonincreasing (per step)",
                worst_increase(column(traj, &DiagnosticRow::E_flip)), 1.0e-8);
    }
    return rep;
}

double closed_form_check_1d(const FourierField& v, const ResonanceTable& tab) {
    const LatticeSpec& lat = *v.lattice;
    if (lat.d != 1) throw std::invalid_argument("closed_form_check_1d: needs d = 1");
    if (tab.n != 1) throw std::invalid_argument("closed_form_check_1d: needs n = 1");

    const FourierField r = resonant_monomial_sum(v, tab);
    double total = 0.0;
    for (const Complex& a : v.amps) total += std::norm(a);
    double worst = 0.0;
    for (std::size_t i = 0; i < lat.size; ++i) {
        const Complex expect =
            2.0 * v.amps[i] * total - v.amps[i] * std::norm(v.amps[i]);
        worst = std::max(worst, std::abs(r.amps[i] - expect));
    }
    return worst;
}

} // namespace cgl
