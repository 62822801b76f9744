#include "cgl/artifacts.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "cgl/errors.hpp"

namespace cgl {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string iso_utc_now() {
    const std::time_t tt =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm g{};
    gmtime_r(&tt, &g);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  g.tm_year + 1900, g.tm_mon + 1, g.tm_mday, g.tm_hour, g.tm_min,
                  g.tm_sec);
    return buf;
}

bool is_hex(char ch) {
    return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
}

// Extract the first 16-hex-digit run after the "config_hash" marker.
std::string embedded_hash(const std::string& head) {
    const auto pos = head.find("config_hash");
    if (pos == std::string::npos) return {};
    std::size_t i = pos + 11;
    while (i < head.size()) {
        if (is_hex(head[i])) {
            std::size_t j = i;
            while (j < head.size() && is_hex(head[j])) ++j;
            if (j - i >= 16) return head.substr(i, 16);
            i = j;
        }
        ++i;
    }
    return {};
}

std::ofstream open_artifact(const std::string& path, const std::string& hash,
                            bool force) {
    const fs::path p(path);
    if (fs::exists(p) && !force) {
        std::ifstream in(p, std::ios::binary);
        std::string head(8192, '\0');
        in.read(head.data(), static_cast<std::streamsize>(head.size()));
        head.resize(static_cast<std::size_t>(in.gcount()));
        if (embedded_hash(head) != hash)
            throw SerializationError(
                "refusing to overwrite " + path +
                ": existing artifact carries a different or missing config hash "
                "(use --force to replace it)");
    }
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw SerializationError("cannot write artifact: " + path);
    return out;
}

} // namespace

void write_trajectory_ndjson(const std::string& path, const Trajectory& traj,
                             const std::string& config_hash, bool include_fields,
                             bool force) {
    std::ofstream out = open_artifact(path, config_hash, force);

    ordered_json stamp{{"type", "timestamp"}, {"written_at", iso_utc_now()}};
    out << stamp.dump() << '\n';

    const LatticeSpec& lat = *traj.lattice;
    ordered_json man;
    man["type"] = "manifest";
    man["format"] = "trajectory/1";
    man["config_hash"] = config_hash;
    man["lattice"] = {{"d", lat.d}, {"K", lat.K}, {"ordering", "lex/1"}};
    man["params"] = {{"eps", traj.params.eps}, {"mu", traj.params.mu},
                     {"m", traj.params.m},     {"b", traj.params.b},
                     {"c", traj.params.c},     {"p", traj.params.p},
                     {"q", traj.params.q}};
    man["control"] = {{"T", traj.control.T},
                      {"cfl", traj.control.cfl_fraction},
                      {"dtau_max", traj.control.dtau_max},
                      {"checkpoints", traj.control.checkpoints},
                      {"record_every_step", traj.control.record_every_step},
                      {"s_values", traj.control.s_values},
                      {"blowup_threshold", traj.control.blowup_threshold},
                      {"max_steps", traj.control.max_steps}};
    man["effective"] = traj.effective;
    man["status"] = run_status_name(traj.status);
    man["steps"] = traj.steps;
    man["dtau_base"] = traj.dtau_base;
    man["abort_tau"] = traj.abort_tau;
    out << man.dump() << '\n';

    for (std::size_t j = 0; j < traj.times.size(); ++j) {
        const DiagnosticRow& row = traj.diagnostics[j];
        ordered_json rec;
        rec["type"] = "checkpoint";
        rec["tau"] = row.tau;
        rec["h_norms"] = row.h_norms;
        rec["H1"] = row.H1;
        rec["H2"] = row.H2;
        rec["l2"] = row.l2;
        rec["E_nls"] = row.E_nls;
        rec["E_flip"] = row.E_flip;
        rec["H_res"] = row.H_res;
        if (include_fields) {
            auto field = ordered_json::array();
            for (const Complex& a : traj.fields[j])
                field.push_back({a.real(), a.imag()});
            rec["field"] = std::move(field);
        }
        out << rec.dump() << '\n';
    }
}

void write_diagnostics_csv(const std::string& path, const Trajectory& traj,
                           const std::string& config_hash, bool force) {
    std::ofstream out = open_artifact(path, config_hash, force);
    out << "# config_hash=" << config_hash << '\n';
    out << "tau";
    for (double s : traj.control.s_values) out << ",h_s" << fmt(s);
    out << ",H1,H2,l2,E_nls,E_flip,H_res\n";
    for (const DiagnosticRow& row : traj.diagnostics) {
        out << fmt(row.tau);
        for (double h : row.h_norms) out << ',' << fmt(h);
        out << ',' << fmt(row.H1) << ',' << fmt(row.H2) << ',' << fmt(row.l2) << ','
            << fmt(row.E_nls) << ',' << fmt(row.E_flip) << ',' << fmt(row.H_res)
            << '\n';
    }
}

void write_comparison_csv(const std::string& path, const ComparisonReport& rep,
                          const std::string& config_hash, bool force) {
    std::ofstream out = open_artifact(path, config_hash, force);
    out << "# config_hash=" << config_hash << '\n';
    out << "# s1=" << fmt(rep.s1) << '\n';
    out << "# sup_error=" << fmt(rep.sup_error) << '\n';
    out << "tau,action_error\n";
    for (std::size_t j = 0; j < rep.taus.size(); ++j)
        out << fmt(rep.taus[j]) << ',' << fmt(rep.errors[j]) << '\n';
}

void write_ladder_csv(const std::string& path, const LadderReport& rep,
                      const std::string& config_hash, bool force) {
    std::ofstream out = open_artifact(path, config_hash, force);
    out << "# config_hash=" << config_hash << '\n';
    out << "# fitted_exponent=" << fmt(rep.fitted_exponent) << '\n';
    out << "# monotone=" << (rep.monotone ? "true" : "false") << '\n';
    out << "# degenerate=" << (rep.degenerate ? "true" : "false") << '\n';
    out << "# ratio_spread=" << fmt(rep.ratio_spread) << '\n';
    out << "epsilon,sup_error,ratio_sqrt_eps,status\n";
    for (const LadderRung& r : rep.rungs)
        out << fmt(r.eps) << ',' << fmt(r.sup_error) << ',' << fmt(r.ratio_sqrt)
            << ',' << run_status_name(r.status) << '\n';
}

void write_ladder_plot(const std::string& path, const LadderReport& rep,
                       const std::string& config_hash, bool force) {
    std::ofstream out = open_artifact(path, config_hash, force);
    out << "# config_hash=" << config_hash << '\n';
    out << "# log10_eps log10_sup_error\n";
    for (const LadderRung& r : rep.rungs) {
        if (!r.completed || !(r.sup_error > 0.0)) continue;
        out << fmt(std::log10(r.eps)) << ' ' << fmt(std::log10(r.sup_error)) << '\n';
    }
}

void write_residual_csv(const std::string& path, const ResidualReport& rep,
                        const std::string& config_hash, bool force) {
    std::ofstream out = open_artifact(path, config_hash, force);
    out << "# config_hash=" << config_hash << '\n';
    out << "# s1=" << fmt(rep.s1) << '\n';
    out << "# sup=" << fmt(rep.sup) << '\n';
    out << "# reliable=" << (rep.reliable ? "true" : "false") << '\n';
    out << "tau,cumulative_norm\n";
    for (std::size_t j = 0; j < rep.taus.size(); ++j)
        out << fmt(rep.taus[j]) << ',' << fmt(rep.cumulative[j]) << '\n';
}

void write_conservation_csv(const std::string& path, const ConservationReport& rep,
                            const std::string& config_hash, bool force) {
    std::ofstream out = open_artifact(path, config_hash, force);
    out << "# config_hash=" << config_hash << '\n';
    out << "check,drift,tolerance,pass\n";
    for (const ConservationCheck& c : rep.checks)
        out << c.name << ',' << fmt(c.drift) << ',' << fmt(c.tolerance) << ','
            << (c.pass ? "true" : "false") << '\n';
}

void write_counts_csv(const std::string& path, const LatticeSpec& lat,
                      const ResonanceTable& tab, const std::string& config_hash,
                      bool force) {
    std::ofstream out = open_artifact(path, config_hash, force);
    out << "# config_hash=" << config_hash << '\n';
    out << "# d=" << tab.d << " K=" << tab.K << " n=" << tab.n << '\n';
    out << "# total=" << tab.total() << '\n';
    out << "# max_freq=" << tab.stats.max_freq << '\n';
    out << "# gap=";
    if (tab.stats.gap_is_infinite()) out << "inf";
    else out << tab.stats.gap;
    out << '\n';
    out << "index,k,count\n";
    for (std::size_t i = 0; i < lat.size; ++i) {
        out << i << ',';
        const auto k = lat.mode(i);
        for (int a = 0; a < lat.d; ++a) out << (a ? " " : "") << k[a];
        out << ',' << tab.count(i) << '\n';
    }
}

} // namespace cgl
