// Integrating-factor RK4 driver: linear exactness, checkpoint scheduling,
// convergence order, abort paths, and the averaging-residual accumulator.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "cgl/errors.hpp"
#include "cgl/integrate.hpp"

#include "testutil.hpp"

using namespace cgl;
using testutil::random_field;

namespace {

std::vector<int> kv(std::initializer_list<int> v) { return std::vector<int>(v); }

FourierField small_datum(std::shared_ptr<const LatticeSpec> lat) {
    auto v = make_field(lat);
    std::mt19937_64 rng(2024);
    for (auto& a : v.amps)
        a = Complex(testutil::uniform_sym(rng, 0.3), testutil::uniform_sym(rng, 0.3));
    return v;
}

} // namespace

TEST_CASE("step control validation") {
    StepControl ok;
    CHECK_NOTHROW(ok.validate());

    StepControl c = ok;
    c.T = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ok;
    c.cfl_fraction = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ok;
    c.dtau_max = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ok;
    c.checkpoints = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ok;
    c.blowup_threshold = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ok;
    c.max_steps = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    CHECK(std::string(run_status_name(RunStatus::ok)) == "ok");
    CHECK(std::string(run_status_name(RunStatus::blowup)) == "blowup");
    CHECK(std::string(run_status_name(RunStatus::step_underflow)) == "step_underflow");
}

TEST_CASE("linear runs reproduce the exact exponential at every checkpoint") {
    auto lat = build_lattice(1, 2);
    auto v0 = small_datum(lat);

    StepControl ctl;
    ctl.T = 1.0;
    ctl.checkpoints = 8;
    ctl.dtau_max = 1.0e-3;

    for (double mu : {0.0, 1.0}) {
        for (int m : {1, 2}) {
            EquationParams par;
            par.eps = 0.05;
            par.mu = mu;
            par.m = m;
            auto traj = integrate_full(v0, par, ctl);
            REQUIRE(traj.status == RunStatus::ok);
            REQUIRE(traj.times.size() == 9);
            double worst = 0.0;
            for (std::size_t j = 0; j < traj.times.size(); ++j) {
                const double tau = traj.times[j];
                for (std::size_t i = 0; i < lat->size; ++i) {
                    const double lam = static_cast<double>(lat->lambda[i]);
                    const Complex g(-mu * std::pow(lam, m), lam / par.eps);
                    const Complex want = std::exp(g * tau) * v0.amps[i];
                    worst = std::max(worst, std::abs(traj.fields[j][i] - want));
                }
            }
            INFO("mu=", mu, " m=", m);
            CHECK(worst < 1e-12);
        }
    }
}

TEST_CASE("checkpoint schedule is exact and the substep honors both caps") {
    auto lat = build_lattice(1, 2);
    auto v0 = small_datum(lat);
    EquationParams par;
    par.eps = 0.1;
    par.c = 1.0;

    StepControl ctl;
    ctl.T = 1.0;
    ctl.checkpoints = 16;
    ctl.cfl_fraction = 0.05;
    ctl.dtau_max = 1.0e-3;

    auto traj = integrate_full(v0, par, ctl);
    REQUIRE(traj.times.size() == 17);
    for (std::size_t j = 0; j < traj.times.size(); ++j)
        CHECK(traj.times[j] == ctl.T * static_cast<double>(j) / 16.0);

    // divisor extreme for this box is 8, so the rotation cap binds:
    // 0.05 * 0.1 / 8 = 6.25e-4 < dtau_max
    CHECK(traj.dtau_base == doctest::Approx(6.25e-4).epsilon(1e-14));

    // effective runs have no rotation cap; with power-of-two sizes the
    // substep equals dtau_max bitwise
    auto tab = build_resonance_table(*lat, 1);
    StepControl ectl;
    ectl.T = 1.0;
    ectl.checkpoints = 16;
    ectl.dtau_max = 0.0009765625; // 2^-10
    auto eff = integrate_effective(v0, par, ectl, tab, tab);
    CHECK(eff.dtau_base == 0.0009765625);
    CHECK(eff.effective);
    CHECK_FALSE(traj.effective);
}

TEST_CASE("single resonant mode rotates at twice its mass") {
    // one mode at k=0 with |a|^2 = 4: R_0 = 2 a M - a |a|^2 = 4 a, so
    // a(tau) = 2 e^{4 i c tau}
    auto lat = build_lattice(1, 1);
    auto tab = build_resonance_table(*lat, 1);
    auto a0 = make_field(lat);
    a0.amps[mode_index(*lat, kv({0}))] = 2.0;

    EquationParams par;
    par.c = 1.0;
    StepControl ctl;
    ctl.T = 1.0;
    ctl.checkpoints = 10;
    ctl.dtau_max = 5.0e-4;

    auto traj = integrate_effective(a0, par, ctl, tab, tab);
    REQUIRE(traj.status == RunStatus::ok);
    double worst = 0.0;
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
        const Complex want = 2.0 * std::exp(Complex(0.0, 4.0 * traj.times[j]));
        worst = std::max(worst, std::abs(traj.fields[j][1] - want));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("1d cubic effective flow freezes every action") {
    auto lat = build_lattice(1, 2);
    auto tab = build_resonance_table(*lat, 1);
    auto a0 = small_datum(lat);
    EquationParams par;
    par.c = 1.0;
    StepControl ctl;
    ctl.T = 1.0;
    ctl.checkpoints = 8;
    ctl.dtau_max = 1.0e-3;

    auto traj = integrate_effective(a0, par, ctl, tab, tab);
    auto I0 = actions(a0);
    double worst = 0.0;
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
        auto I = actions(traj.field_at(j));
        for (std::size_t i = 0; i < I.size(); ++i)
            worst = std::max(worst, std::abs(I[i] - I0[i]));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("zero right-hand side returns the datum bitwise") {
    auto lat = build_lattice(1, 2);
    auto tab = build_resonance_table(*lat, 1);
    auto a0 = small_datum(lat);
    EquationParams par; // mu = 0, b = c = 0
    StepControl ctl;
    ctl.T = 0.75;
    ctl.checkpoints = 3;
    auto traj = integrate_effective(a0, par, ctl, tab, tab);
    for (const auto& f : traj.fields)
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == a0.amps[i]);
}

TEST_CASE("fourth-order self-convergence") {
    SUBCASE("effective flow against the closed-form rotation") {
        auto lat = build_lattice(1, 1);
        auto tab = build_resonance_table(*lat, 1);
        auto a0 = make_field(lat);
        a0.amps[1] = 2.0;
        EquationParams par;
        par.c = 1.0;

        auto err_at = [&](double h) {
            StepControl ctl;
            ctl.T = 1.0;
            ctl.checkpoints = 1;
            ctl.dtau_max = h;
            auto traj = integrate_effective(a0, par, ctl, tab, tab);
            const Complex want = 2.0 * std::exp(Complex(0.0, 4.0));
            return std::abs(traj.fields.back()[1] - want);
        };
        const double e1 = err_at(1.0 / 32.0);
        const double e2 = err_at(1.0 / 64.0);
        CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
    }
    SUBCASE("full flow by Richardson comparison") {
        auto lat = build_lattice(1, 1);
        auto v0 = small_datum(lat);
        EquationParams par;
        par.eps = 1.0;
        par.c = 1.0;
        par.b = -0.2;
        par.mu = 0.5;

        auto run_at = [&](double h) {
            StepControl ctl;
            ctl.T = 0.5;
            ctl.checkpoints = 1;
            ctl.cfl_fraction = 1.0;
            ctl.dtau_max = h;
            return integrate_full(v0, par, ctl);
        };
        auto ref = run_at(1.0 / 2048.0);
        auto coarse = run_at(1.0 / 32.0);
        auto fine = run_at(1.0 / 64.0);
        double ec = 0.0, ef = 0.0;
        for (std::size_t i = 0; i < lat->size; ++i) {
            ec = std::max(ec, std::abs(coarse.fields.back()[i] - ref.fields.back()[i]));
            ef = std::max(ef, std::abs(fine.fields.back()[i] - ref.fields.back()[i]));
        }
        CHECK(ec / ef == doctest::Approx(16.0).epsilon(0.25));
    }
}

TEST_CASE("interaction picture preserves the recorded actions") {
    auto lat = build_lattice(1, 2);
    auto v = random_field(lat, 4);
    auto a = interaction_picture(v, 0.37, 0.05);
    auto Iv = actions(v);
    auto Ia = actions(a);
    for (std::size_t i = 0; i < Iv.size(); ++i)
        CHECK(Ia[i] == doctest::Approx(Iv[i]).epsilon(1e-14));
}

TEST_CASE("focusing blow-up aborts with the singularity located") {
    // K = 0 reduces to the scalar ODE y' = y^3, y(0) = 2, whose solution
    // y = 2/sqrt(1 - 8 tau) leaves any threshold just before tau = 1/8
    auto lat = build_lattice(1, 0);
    auto v0 = make_field(lat);
    v0.amps[0] = 2.0;
    EquationParams par;
    par.b = 1.0;
    StepControl ctl;
    ctl.T = 0.2;
    ctl.checkpoints = 10;
    ctl.dtau_max = 1.0e-4;

    auto traj = integrate_full(v0, par, ctl);
    CHECK(traj.status == RunStatus::blowup);
    CHECK(traj.abort_tau > 0.124);
    CHECK(traj.abort_tau < 0.126);
    REQUIRE(!traj.times.empty());
    CHECK(traj.times.back() <= traj.abort_tau);
    // recorded rows stay finite
    for (const auto& row : traj.diagnostics) CHECK(std::isfinite(row.H1));

    // reduction to checkpoints keeps the surviving prefix
    auto cut = at_uniform_checkpoints(traj);
    CHECK(cut.times.size() == 7); // 0.00, 0.02, ..., 0.12
    CHECK(cut.status == RunStatus::blowup);
}

TEST_CASE("vanishing step size is reported, not looped on") {
    auto lat = build_lattice(1, 1);
    auto v0 = small_datum(lat);
    EquationParams par;
    par.eps = 1.0e-16;
    par.c = 1.0;
    StepControl ctl;
    ctl.T = 1.0;
    auto traj = integrate_full(v0, par, ctl);
    CHECK(traj.status == RunStatus::step_underflow);
    CHECK(traj.steps == 0);
    REQUIRE(traj.times.size() == 1);
    CHECK(traj.times[0] == 0.0);
}

TEST_CASE("step-count cap throws a resource error") {
    auto lat = build_lattice(1, 1);
    auto v0 = small_datum(lat);
    EquationParams par;
    par.c = 1.0;
    StepControl ctl;
    ctl.T = 1.0;
    ctl.dtau_max = 1.0e-3;
    ctl.max_steps = 5;
    CHECK_THROWS_AS(integrate_full(v0, par, ctl), ResourceError);
}

TEST_CASE("dense recording reduces exactly to the checkpoint run") {
    auto lat = build_lattice(1, 2);
    auto tab = build_resonance_table(*lat, 1);
    auto v0 = small_datum(lat);
    EquationParams par;
    par.eps = 0.1;
    par.c = 1.0;
    StepControl ctl;
    ctl.T = 0.5;
    ctl.checkpoints = 4;
    ctl.dtau_max = 1.0e-3;

    StepControl dense = ctl;
    dense.record_every_step = true;

    auto sparse = integrate_full(v0, par, ctl);
    auto reduced = at_uniform_checkpoints(integrate_full(v0, par, dense));
    REQUIRE(reduced.times == sparse.times);
    for (std::size_t j = 0; j < sparse.times.size(); ++j)
        for (std::size_t i = 0; i < lat->size; ++i)
            CHECK(reduced.fields[j][i] == sparse.fields[j][i]);

    // a checkpoint count that does not divide the recorded schedule is
    // rejected rather than interpolated
    auto dense_run = integrate_effective(v0, par, dense, tab, tab);
    dense_run.control.checkpoints = 3; // wants tau = 1/6, never recorded
    CHECK_THROWS_AS(at_uniform_checkpoints(dense_run), std::invalid_argument);
}

TEST_CASE("diagnostics rows carry the regime-appropriate energies") {
    auto lat = build_lattice(1, 1);
    auto tab = build_resonance_table(*lat, 1);
    auto v0 = small_datum(lat);
    EquationParams par;
    par.eps = 0.1;
    par.c = 1.0;
    StepControl ctl;
    ctl.T = 0.25;
    ctl.checkpoints = 2;
    ctl.s_values = {0.0, 2.0};

    auto full = integrate_full(v0, par, ctl);
    const auto& row = full.diagnostics.front();
    REQUIRE(row.h_norms.size() == 2);
    CHECK(row.H1 == doctest::Approx(mass(v0)).epsilon(1e-14));
    CHECK(row.l2 == doctest::Approx(l2_physical(v0)).epsilon(1e-14));
    CHECK(row.h_norms[1] == doctest::Approx(h_norm(v0, 2.0)).epsilon(1e-14));
    CHECK(std::isfinite(row.E_nls));
    CHECK(std::isfinite(row.E_flip));
    CHECK(std::isnan(row.H_res));

    auto eff = integrate_effective(v0, par, ctl, tab, tab);
    const auto& erow = eff.diagnostics.front();
    CHECK(std::isfinite(erow.H_res));
    CHECK(std::isnan(erow.E_nls));
    CHECK(std::isnan(erow.E_flip));

    auto f0 = eff.field_at(0);
    CHECK(f0.lattice.get() == lat.get());
    CHECK(f0.amps == eff.fields[0]);
}

TEST_CASE("averaging residual") {
    auto lat = build_lattice(1, 2);
    auto tab = build_resonance_table(*lat, 1);
    auto v0 = small_datum(lat);

    EquationParams par;
    par.eps = 0.1;
    par.c = 1.0;

    StepControl ctl;
    ctl.T = 0.5;
    ctl.checkpoints = 8;
    ctl.cfl_fraction = 0.1; // recording step keeps dtau * omega / eps = 0.1
    ctl.dtau_max = 1.0e-3;
    ctl.record_every_step = true;

    SUBCASE("zero nonlinearity integrates to zero") {
        EquationParams lin;
        lin.eps = 0.1;
        auto traj = integrate_full(v0, lin, ctl);
        auto rep = residual_Y(traj, tab, tab, 2.0);
        CHECK(rep.sup == 0.0);
        CHECK(rep.cumulative.front() == 0.0);
        CHECK(rep.reliable);
    }
    SUBCASE("cubic run: starts at zero, reliable, sup attained") {
        auto traj = integrate_full(v0, par, ctl);
        auto rep = residual_Y(traj, tab, tab, 2.0);
        REQUIRE(rep.taus.size() == traj.times.size());
        CHECK(rep.taus.front() == 0.0);
        CHECK(rep.cumulative.front() == 0.0);
        CHECK(rep.sup > 0.0);
        CHECK(rep.sup == *std::max_element(rep.cumulative.begin(), rep.cumulative.end()));
        CHECK(rep.reliable);
        CHECK(rep.s1 == 2.0);
    }
    SUBCASE("checkpoint-only recording is flagged unreliable") {
        StepControl coarse = ctl;
        coarse.record_every_step = false;
        auto traj = integrate_full(v0, par, coarse);
        auto rep = residual_Y(traj, tab, tab, 2.0);
        CHECK_FALSE(rep.reliable);
    }
    SUBCASE("effective trajectories are rejected") {
        auto eff = integrate_effective(v0, par, ctl, tab, tab);
        CHECK_THROWS_AS(residual_Y(eff, tab, tab, 2.0), std::invalid_argument);
    }
}
