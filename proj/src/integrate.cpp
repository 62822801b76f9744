#include "cgl/integrate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cgl/errors.hpp"

namespace cgl {

void StepControl::validate() const {
    if (!(T > 0.0)) throw std::invalid_argument("control: T must be > 0");
    if (!(cfl_fraction > 0.0) || cfl_fraction > 1.0)
        throw std::invalid_argument("control: cfl_fraction must lie in (0, 1]");
    if (!(dtau_max > 0.0)) throw std::invalid_argument("control: dtau_max must be > 0");
    if (checkpoints < 1) throw std::invalid_argument("control: checkpoints must be >= 1");
    if (!(blowup_threshold > 0.0))
        throw std::invalid_argument("control: blowup_threshold must be > 0");
    if (max_steps == 0) throw std::invalid_argument("control: max_steps must be >= 1");
    for (double s : s_values)
        if (!std::isfinite(s)) throw std::invalid_argument("control: norm index not finite");
}

const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::blowup: return "blowup";
        case RunStatus::step_underflow: return "step_underflow";
    }
    return "unknown";
}

FourierField Trajectory::field_at(std::size_t i) const {
    FourierField v;
    v.lattice = lattice;
    v.amps = fields[i];
    return v;
}

namespace {

// One integrating-factor RK4 step.  Writing w(s) = e^{-g s} v(tau+s), plain
// RK4 on w and translation back to v gives
//   k1 = N(v)
//   k2 = N(Eh (v + h/2 k1))
//   k3 = N(Eh v + h/2 k2)
//   k4 = N(E1 v + h Eh k3)
//   v <- E1 v + h/6 (E1 k1 + 2 Eh (k2 + k3) + k4)
// with E1 = e^{g h}, Eh = e^{g h/2}.  Only decaying multipliers appear.
struct Ifrk4 {
    std::vector<Complex> g;
    std::vector<Complex> E1, Eh;
    double h_cached = -1.0;
    FourierField y, k1, k2, k3, k4;

    void init(const FourierField& v0, std::vector<Complex> diag) {
        g = std::move(diag);
        E1.resize(g.size());
        Eh.resize(g.size());
        y = k1 = k2 = k3 = k4 = v0;
    }

    void set_h(double h) {
        if (h == h_cached) return;
        for (std::size_t i = 0; i < g.size(); ++i) {
            E1[i] = std::exp(g[i] * h);
            Eh[i] = std::exp(g[i] * (0.5 * h));
        }
        h_cached = h;
    }

    template <typename N>
    void step(FourierField& v, double h, N&& nonlin) {
        set_h(h);
        const std::size_t m = v.amps.size();
        nonlin(v, k1);
        for (std::size_t i = 0; i < m; ++i)
            y.amps[i] = Eh[i] * (v.amps[i] + (0.5 * h) * k1.amps[i]);
        nonlin(y, k2);
        for (std::size_t i = 0; i < m; ++i)
            y.amps[i] = Eh[i] * v.amps[i] + (0.5 * h) * k2.amps[i];
        nonlin(y, k3);
        for (std::size_t i = 0; i < m; ++i)
            y.amps[i] = E1[i] * v.amps[i] + h * (Eh[i] * k3.amps[i]);
        nonlin(y, k4);
        for (std::size_t i = 0; i < m; ++i)
            v.amps[i] = E1[i] * v.amps[i] +
                        (h / 6.0) * (E1[i] * k1.amps[i] +
                                     2.0 * (Eh[i] * (k2.amps[i] + k3.amps[i])) +
                                     k4.amps[i]);
    }
};

bool state_sane(const FourierField& v, double threshold) {
    double n0 = 0.0;
    for (std::size_t i = 0; i < v.amps.size(); ++i) {
        const double re = v.amps[i].real(), im = v.amps[i].imag();
        if (!std::isfinite(re) || !std::isfinite(im)) return false;
        n0 += sobolev_weight(v.lattice->lambda[i], 0.0) * (re * re + im * im);
    }
    return std::sqrt(n0) <= threshold;
}

// Shared driver.  nonlin(in, out) evaluates the nonlinear part; extra(row, v)
// fills the flow-specific diagnostic entries.
template <typename N, typename Extra>
Trajectory run_ifrk4(const FourierField& v0, const EquationParams& par,
                     const StepControl& ctl, bool effective, double base_h,
                     std::vector<Complex> diag, N&& nonlin, Extra&& extra) {
    Trajectory traj;
    traj.lattice = v0.lattice;
    traj.params = par;
    traj.control = ctl;
    traj.effective = effective;
    traj.dtau_base = base_h;

    auto record = [&](const FourierField& v, double tau) {
        DiagnosticRow row;
        row.tau = tau;
        row.h_norms.reserve(ctl.s_values.size());
        for (double s : ctl.s_values) row.h_norms.push_back(h_norm(v, s));
        row.H1 = mass(v);
        row.H2 = quadratic_energy(v);
        row.l2 = l2_physical(v);
        row.E_nls = row.E_flip = row.H_res = std::numeric_limits<double>::quiet_NaN();
        extra(row, v);
        traj.times.push_back(tau);
        traj.fields.push_back(v.amps);
        traj.diagnostics.push_back(std::move(row));
    };

    FourierField v = v0;
    record(v, 0.0);

    if (base_h < 1.0e-14) {
        traj.status = RunStatus::step_underflow;
        traj.abort_tau = 0.0;
        return traj;
    }

    Ifrk4 rk;
    rk.init(v0, std::move(diag));

    const int ckpts = ctl.checkpoints;
    const double interval = ctl.T / static_cast<double>(ckpts);
    const auto nsub = static_cast<std::uint64_t>(
        std::ceil(interval / base_h - 1.0e-12));
    const std::uint64_t subs = nsub == 0 ? 1 : nsub;
    const double h = interval / static_cast<double>(subs);

    std::uint64_t steps = 0;
    for (int c = 0; c < ckpts; ++c) {
        const double t0 = ctl.T * static_cast<double>(c) / static_cast<double>(ckpts);
        const double t1 = ctl.T * static_cast<double>(c + 1) / static_cast<double>(ckpts);
        for (std::uint64_t s = 0; s < subs; ++s) {
            if (++steps > ctl.max_steps)
                throw ResourceError("integrate: step-count cap exceeded");
            rk.step(v, h, nonlin);
            const bool last = (s + 1 == subs);
            const double tau = last ? t1 : t0 + static_cast<double>(s + 1) * h;
            if (!state_sane(v, ctl.blowup_threshold)) {
                traj.status = RunStatus::blowup;
                traj.abort_tau = tau;
                traj.steps = steps;
                return traj;
            }
            if (last || ctl.record_every_step) record(v, tau);
        }
    }
    traj.steps = steps;
    return traj;
}

std::vector<Complex> full_diag(const LatticeSpec& lat, const EquationParams& par) {
    std::vector<Complex> g(lat.size);
    for (std::size_t i = 0; i < lat.size; ++i) {
        const double l = static_cast<double>(lat.lambda[i]);
        g[i] = Complex(-par.mu * std::pow(l, par.m), l / par.eps);
    }
    return g;
}

std::vector<Complex> effective_diag(const LatticeSpec& lat, const EquationParams& par) {
    std::vector<Complex> g(lat.size);
    for (std::size_t i = 0; i < lat.size; ++i) {
        const double l = static_cast<double>(lat.lambda[i]);
        g[i] = Complex(-par.mu * std::pow(l, par.m), 0.0);
    }
    return g;
}

} // namespace

Trajectory integrate_full(const FourierField& v0, const EquationParams& par,
                          const StepControl& ctl) {
    par.validate();
    ctl.validate();
    const LatticeSpec& lat = *v0.lattice;

    const DivisorStats stats = divisor_statistics(lat, par.max_order());
    double base_h = ctl.dtau_max;
    if (stats.max_freq > 0)
        base_h = std::min(base_h, ctl.cfl_fraction * par.eps /
                                      static_cast<double>(stats.max_freq));

    NonlinearityEvaluator ev(v0.lattice, par);
    auto nonlin = [&](const FourierField& in, FourierField& out) { ev.eval(in, out); };
    const double pot_scale = par.c * par.eps / (2.0 * par.q + 2.0);
    auto extra = [&](DiagnosticRow& row, const FourierField& v) {
        const double W = ev.potential_mean(v, par.q);
        row.E_nls = 0.5 * row.H2 + pot_scale * W;
        row.E_flip = 0.5 * row.H2 - pot_scale * W;
    };
    return run_ifrk4(v0, par, ctl, /*effective=*/false, base_h,
                     full_diag(lat, par), nonlin, extra);
}

Trajectory integrate_effective(const FourierField& a0, const EquationParams& par,
                               const StepControl& ctl, const ResonanceTable& tab_p,
                               const ResonanceTable& tab_q) {
    par.validate();
    ctl.validate();
    const LatticeSpec& lat = *a0.lattice;

    auto nonlin = [&](const FourierField& in, FourierField& out) {
        out = resonant_R_table(in, par, tab_p, tab_q);
    };
    auto extra = [&](DiagnosticRow& row, const FourierField& v) {
        row.H_res = hamiltonian_Hres(v, par.c, par.q, tab_q);
    };
    return run_ifrk4(a0, par, ctl, /*effective=*/true, ctl.dtau_max,
                     effective_diag(lat, par), nonlin, extra);
}

Trajectory at_uniform_checkpoints(const Trajectory& traj) {
    const int ckpts = traj.control.checkpoints;
    const double T = traj.control.T;
    Trajectory out;
    out.lattice = traj.lattice;
    out.params = traj.params;
    out.control = traj.control;
    out.control.record_every_step = false;
    out.effective = traj.effective;
    out.status = traj.status;
    out.steps = traj.steps;
    out.dtau_base = traj.dtau_base;
    out.abort_tau = traj.abort_tau;

    std::size_t pos = 0;
    for (int j = 0; j <= ckpts; ++j) {
        const double want = T * static_cast<double>(j) / static_cast<double>(ckpts);
        while (pos < traj.times.size() && traj.times[pos] != want) ++pos;
        if (pos == traj.times.size()) {
            if (traj.status != RunStatus::ok) break; // aborted run: keep prefix
            throw std::invalid_argument("at_uniform_checkpoints: instant missing");
        }
        out.times.push_back(traj.times[pos]);
        out.fields.push_back(traj.fields[pos]);
        out.diagnostics.push_back(traj.diagnostics[pos]);
    }
    return out;
}

ResidualReport residual_Y(const Trajectory& full, const ResonanceTable& tab_p,
                          const ResonanceTable& tab_q, double s1) {
    if (full.effective)
        throw std::invalid_argument("residual_Y: expects a full-flow trajectory");
    const EquationParams& par = full.params;
    const LatticeSpec& lat = *full.lattice;

    ResidualReport rep;
    rep.s1 = s1;
    if (full.times.empty()) return rep;

    NonlinearityEvaluator ev(full.lattice, par);
    FourierField cum = make_field(full.lattice);
    FourierField prev = make_field(full.lattice);
    FourierField scratch = make_field(full.lattice);

    // residual integrand at instant j, in the interaction frame
    auto integrand = [&](std::size_t j, FourierField& out) {
        const double tau = full.times[j];
        FourierField v = full.field_at(j);
        ev.eval(v, scratch);
        FourierField y = rotate_lambda(scratch, -tau / par.eps);
        FourierField a = rotate_lambda(v, -tau / par.eps);
        FourierField r = resonant_R_table(a, par, tab_p, tab_q);
        out.lattice = full.lattice;
        out.amps.resize(lat.size);
        for (std::size_t i = 0; i < lat.size; ++i)
            out.amps[i] = y.amps[i] - r.amps[i];
    };

    integrand(0, prev);
    rep.taus.push_back(full.times[0]);
    rep.cumulative.push_back(0.0);

    FourierField next = make_field(full.lattice);
    double maxspace = 0.0;
    for (std::size_t j = 1; j < full.times.size(); ++j) {
        integrand(j, next);
        const double dt = full.times[j] - full.times[j - 1];
        maxspace = std::max(maxspace, dt);
        for (std::size_t i = 0; i < lat.size; ++i)
            cum.amps[i] += (0.5 * dt) * (prev.amps[i] + next.amps[i]);
        rep.taus.push_back(full.times[j]);
        rep.cumulative.push_back(h_norm(cum, s1));
        prev.amps.swap(next.amps);
    }
    for (double c : rep.cumulative) rep.sup = std::max(rep.sup, c);

    const DivisorStats stats = divisor_statistics(lat, par.max_order());
    if (stats.max_freq > 0)
        rep.reliable = maxspace * static_cast<double>(stats.max_freq) / par.eps <= 0.5;
    return rep;
}

} // namespace cgl
