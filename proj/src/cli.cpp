#include "cgl/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "cgl/artifacts.hpp"
#include "cgl/errors.hpp"

namespace cgl {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string eps_tag(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eps);
    return buf;
}

void print_conservation(const char* label, const ConservationReport& rep) {
    if (rep.checks.empty()) {
        std::printf("%s: no invariants apply to this parameter regime\n", label);
        return;
    }
    for (const auto& c : rep.checks)
        std::printf("%s: %-32s drift %.3e  tol %.1e  %s\n", label, c.name.c_str(),
                    c.drift, c.tolerance, c.pass ? "ok" : "FAIL");
}

// Runs and exit codes both care about abnormal trajectories.
int status_exit(const Trajectory& traj) {
    if (traj.status == RunStatus::ok) return 0;
    std::fprintf(stderr, "run aborted (%s) at tau = %.6g; artifacts keep the last good state\n",
                 run_status_name(traj.status), traj.abort_tau);
    return 3;
}

} // namespace

std::string resolve_cache_dir(const RunConfig& cfg, const CliOptions& opt) {
    if (!opt.cache_dir.empty()) return opt.cache_dir;
    if (const char* env = std::getenv("CGLRES_CACHE"); env && *env) return env;
    if (!cfg.cache_dir.empty()) return cfg.cache_dir;
    return "cache";
}

std::string resolve_out_dir(const RunConfig& cfg, const CliOptions& opt) {
    return opt.out_dir.empty() ? cfg.out_dir : opt.out_dir;
}

int resolve_jobs(const RunConfig& cfg, const CliOptions& opt) {
    return opt.jobs > 0 ? opt.jobs : cfg.jobs;
}

int run_resonances(const RunConfig& cfg, const CliOptions& opt) {
    const auto lat = build_lattice(cfg.d, cfg.K);
    const std::string cache = resolve_cache_dir(cfg, opt);
    const std::string out = resolve_out_dir(cfg, opt);

    BuildOptions bopt;
    bopt.jobs = resolve_jobs(cfg, opt);

    std::vector<int> degrees = {cfg.p};
    if (cfg.q != cfg.p) degrees.push_back(cfg.q);
    for (int n : degrees) {
        const ResonanceTable tab = load_or_build(*lat, n, cache, bopt);
        std::printf("d=%d K=%d n=%d: targets %zu, tuples %llu, max_freq %lld, gap ",
                    tab.d, tab.K, tab.n, static_cast<std::size_t>(lat->size),
                    static_cast<unsigned long long>(tab.total()),
                    static_cast<long long>(tab.stats.max_freq));
        if (tab.stats.gap_is_infinite()) std::printf("inf\n");
        else std::printf("%lld\n", static_cast<long long>(tab.stats.gap));

        char name[64];
        std::snprintf(name, sizeof name, "resonance_counts_n%d.csv", n);
        write_counts_csv(join(out, name), *lat, tab, cfg.hash_hex, opt.force);
    }
    return 0;
}

int run_simulate(const RunConfig& cfg, const CliOptions& opt) {
    if (cfg.eps_list.size() != 1)
        throw ConfigError("simulate expects a single epsilon (compare handles ladders)");
    const auto lat = build_lattice(cfg.d, cfg.K);
    const FourierField v0 = cfg.build_datum(lat);
    const EquationParams par = cfg.params(cfg.eps_list[0]);
    const std::string out = resolve_out_dir(cfg, opt);

    int exit_code = 0;
    if (cfg.mode != SimMode::effective_only) {
        const Trajectory traj = integrate_full(v0, par, cfg.control);
        write_trajectory_ndjson(join(out, "full.ndjson"), traj, cfg.hash_hex,
                                /*include_fields=*/true, opt.force);
        write_diagnostics_csv(join(out, "full.csv"), traj, cfg.hash_hex, opt.force);
        if (cfg.conservation) {
            const ConservationReport rep = conservation_suite(traj);
            write_conservation_csv(join(out, "conservation_full.csv"), rep,
                                   cfg.hash_hex, opt.force);
            print_conservation("full", rep);
        }
        std::printf("full run: %s, %llu steps, dtau %.3e\n",
                    run_status_name(traj.status),
                    static_cast<unsigned long long>(traj.steps), traj.dtau_base);
        exit_code = std::max(exit_code, status_exit(traj));
    }
    if (cfg.mode != SimMode::full_only) {
        const std::string cache = resolve_cache_dir(cfg, opt);
        BuildOptions bopt;
        bopt.jobs = resolve_jobs(cfg, opt);
        const ResonanceTable tab_p = load_or_build(*lat, cfg.p, cache, bopt);
        const ResonanceTable tab_q =
            cfg.q == cfg.p ? tab_p : load_or_build(*lat, cfg.q, cache, bopt);
        const Trajectory traj = integrate_effective(v0, par, cfg.control, tab_p, tab_q);
        write_trajectory_ndjson(join(out, "effective.ndjson"), traj, cfg.hash_hex,
                                /*include_fields=*/true, opt.force);
        write_diagnostics_csv(join(out, "effective.csv"), traj, cfg.hash_hex,
                              opt.force);
        if (cfg.conservation) {
            const ConservationReport rep = conservation_suite(traj);
            write_conservation_csv(join(out, "conservation_effective.csv"), rep,
                                   cfg.hash_hex, opt.force);
            print_conservation("effective", rep);
        }
        std::printf("effective run: %s, %llu steps, dtau %.3e\n",
                    run_status_name(traj.status),
                    static_cast<unsigned long long>(traj.steps), traj.dtau_base);
        exit_code = std::max(exit_code, status_exit(traj));
    }
    return exit_code;
}

int run_compare(const RunConfig& cfg, const CliOptions& opt) {
    const auto lat = build_lattice(cfg.d, cfg.K);
    const FourierField v0 = cfg.build_datum(lat);
    const std::string out = resolve_out_dir(cfg, opt);
    const std::string cache = resolve_cache_dir(cfg, opt);

    BuildOptions bopt;
    bopt.jobs = resolve_jobs(cfg, opt);
    const ResonanceTable tab_p = load_or_build(*lat, cfg.p, cache, bopt);
    const ResonanceTable tab_q =
        cfg.q == cfg.p ? tab_p : load_or_build(*lat, cfg.q, cache, bopt);

    // The residual integral needs every accepted step of the full runs.
    StepControl ctl = cfg.control;
    if (cfg.residual) ctl.record_every_step = true;

    if (cfg.eps_list.size() == 1) {
        const EquationParams par = cfg.params(cfg.eps_list[0]);
        const Trajectory full = integrate_full(v0, par, ctl);
        const Trajectory eff = integrate_effective(v0, par, cfg.control, tab_p, tab_q);
        int code = std::max(status_exit(full), status_exit(eff));
        if (code == 0) {
            const ComparisonReport rep = compare_actions(full, eff, cfg.s1);
            write_comparison_csv(join(out, "comparison.csv"), rep, cfg.hash_hex,
                                 opt.force);
            std::printf("eps=%g: sup action error %.6e (s1=%g)\n", par.eps,
                        rep.sup_error, cfg.s1);
            if (cfg.residual) {
                const ResidualReport res = residual_Y(full, tab_p, tab_q, cfg.s1);
                write_residual_csv(join(out, "residual.csv"), res, cfg.hash_hex,
                                   opt.force);
                std::printf("eps=%g: residual sup %.6e (%s)\n", par.eps, res.sup,
                            res.reliable ? "reliable" : "recording too coarse");
            }
        }
        return code;
    }

    const LadderReport rep = epsilon_ladder(v0, cfg.params(cfg.eps_list[0]), ctl,
                                            tab_p, tab_q, cfg.eps_list, cfg.s1,
                                            resolve_jobs(cfg, opt));
    write_ladder_csv(join(out, "ladder.csv"), rep, cfg.hash_hex, opt.force);
    write_ladder_plot(join(out, "ladder_plot.dat"), rep, cfg.hash_hex, opt.force);

    bool partial = false;
    for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
        const LadderRung& r = rep.rungs[i];
        if (r.completed)
            std::printf("eps=%-8g sup_error %.6e  sup/sqrt(eps) %.6e\n", r.eps,
                        r.sup_error, r.ratio_sqrt);
        else {
            std::printf("eps=%-8g %s (ladder incomplete)\n", r.eps,
                        run_status_name(r.status));
            partial = true;
        }
        if (cfg.residual && r.completed) {
            const ResidualReport res = residual_Y(rep.fulls[i], tab_p, tab_q, cfg.s1);
            write_residual_csv(join(out, "residual_eps" + eps_tag(r.eps) + ".csv"),
                               res, cfg.hash_hex, opt.force);
            std::printf("eps=%-8g residual sup %.6e (%s)\n", r.eps, res.sup,
                        res.reliable ? "reliable" : "recording too coarse");
        }
    }
    std::printf("sup_error monotone decreasing: %s\n", rep.monotone ? "yes" : "no");
    if (rep.degenerate)
        std::printf("all sup_errors at noise floor; exponent fit skipped\n");
    else {
        std::printf("fitted exponent (log sup vs log eps): %.4f\n",
                    rep.fitted_exponent);
        std::printf("spread of sup/sqrt(eps) across rungs: %.4f\n", rep.ratio_spread);
    }
    return partial ? 3 : 0;
}

int run_conserve(const RunConfig& cfg, const CliOptions& opt) {
    if (cfg.eps_list.size() != 1)
        throw ConfigError("conserve expects a single epsilon");
    const auto lat = build_lattice(cfg.d, cfg.K);
    const FourierField v0 = cfg.build_datum(lat);
    const EquationParams par = cfg.params(cfg.eps_list[0]);
    const std::string out = resolve_out_dir(cfg, opt);

    int exit_code = 0;
    bool all_pass = true;
    if (cfg.mode != SimMode::effective_only) {
        const Trajectory traj = integrate_full(v0, par, cfg.control);
        exit_code = std::max(exit_code, status_exit(traj));
        const ConservationReport rep = conservation_suite(traj);
        write_conservation_csv(join(out, "conservation_full.csv"), rep, cfg.hash_hex,
                               opt.force);
        print_conservation("full", rep);
        all_pass = all_pass && rep.all_pass;
    }
    if (cfg.mode != SimMode::full_only) {
        const std::string cache = resolve_cache_dir(cfg, opt);
        BuildOptions bopt;
        bopt.jobs = resolve_jobs(cfg, opt);
        const ResonanceTable tab_p = load_or_build(*lat, cfg.p, cache, bopt);
        const ResonanceTable tab_q =
            cfg.q == cfg.p ? tab_p : load_or_build(*lat, cfg.q, cache, bopt);
        const Trajectory traj = integrate_effective(v0, par, cfg.control, tab_p, tab_q);
        exit_code = std::max(exit_code, status_exit(traj));
        const ConservationReport rep = conservation_suite(traj);
        write_conservation_csv(join(out, "conservation_effective.csv"), rep,
                               cfg.hash_hex, opt.force);
        print_conservation("effective", rep);
        all_pass = all_pass && rep.all_pass;
    }
    if (exit_code == 0 && !all_pass) exit_code = 1;
    return exit_code;
}

int dispatch(const std::string& command, const CliOptions& opt) {
    try {
        const RunConfig cfg = load_config(opt.config_path);
        cfg.validate();
        if (command == "resonances") return run_resonances(cfg, opt);
        if (command == "simulate") return run_simulate(cfg, opt);
        if (command == "compare") return run_compare(cfg, opt);
        if (command == "conserve") return run_conserve(cfg, opt);
        std::fprintf(stderr, "unknown command: %s\n", command.c_str());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const SerializationError& e) {
        std::fprintf(stderr, "artifact error: %s\n", e.what());
        return 2;
    } catch (const ResourceError& e) {
        std::fprintf(stderr, "resource error: %s\n", e.what());
        return 4;
    }
}

} // namespace cgl
