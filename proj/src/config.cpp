#include "cgl/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cgl/errors.hpp"
#include "cgl/hash.hpp"
#include "cgl/lattice.hpp"

namespace cgl {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

struct Cursor {
    const std::string& origin;
    int line = 0;
    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
    }
};

double parse_double(const std::string& tok, const Cursor& at) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(tok, &used);
    } catch (const std::exception&) {
        at.fail("not a number: '" + tok + "'");
    }
    if (used != tok.size()) at.fail("trailing characters in number: '" + tok + "'");
    return x;
}

long long parse_int(const std::string& tok, const Cursor& at) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(tok, &used);
    } catch (const std::exception&) {
        at.fail("not an integer: '" + tok + "'");
    }
    if (used != tok.size()) at.fail("trailing characters in integer: '" + tok + "'");
    return x;
}

bool parse_bool(const std::string& tok, const Cursor& at) {
    if (tok == "true" || tok == "1") return true;
    if (tok == "false" || tok == "0") return false;
    at.fail("not a boolean (true/false): '" + tok + "'");
}

std::vector<double> parse_double_list(const std::string& value, const Cursor& at) {
    std::vector<double> out;
    for (const auto& tok : split_ws(value)) out.push_back(parse_double(tok, at));
    if (out.empty()) at.fail("empty value");
    return out;
}

} // namespace

EquationParams RunConfig::params(double eps) const {
    EquationParams par;
    par.eps = eps;
    par.mu = mu;
    par.m = m;
    par.b = b;
    par.c = c;
    par.p = p;
    par.q = q;
    return par;
}

FourierField RunConfig::build_datum(std::shared_ptr<const LatticeSpec> lat) const {
    FourierField v = make_field(lat);
    for (const auto& e : datum) v.amps[mode_index(*lat, e.k)] = e.amp;
    return v;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };

    if (d < 1) fail("d must be >= 1");
    if (K < 0) fail("K must be >= 0");
    double box = 1.0;
    for (int a = 0; a < d; ++a) box *= 2.0 * K + 1.0;
    if (box > double(std::size_t(1) << 24)) fail("lattice too large (over 2^24 modes)");

    if (eps_list.empty()) fail("epsilon list is empty");
    for (double e : eps_list)
        if (!(e > 0.0) || !std::isfinite(e)) fail("epsilon values must be positive");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (!(eps_list[i] > eps_list[i + 1]))
            fail("epsilon list must be strictly decreasing");

    if (mu < 0.0) fail("mu must be >= 0");
    if (m < 1 || p < 1 || q < 1) fail("m, p, q must be >= 1");

    if (datum.empty()) fail("no initial datum ([datum] has no mode lines)");
    for (const auto& e : datum) {
        if (static_cast<int>(e.k.size()) != d) fail("datum mode arity != d");
        for (int ka : e.k)
            if (ka < -K || ka > K) fail("datum mode outside the lattice box");
    }
    for (std::size_t i = 0; i < datum.size(); ++i)
        for (std::size_t j = i + 1; j < datum.size(); ++j)
            if (datum[i].k == datum[j].k) fail("duplicate datum mode");

    if (!(s1 <= s)) fail("requires s1 <= s");
    if (!(s1 > 0.5 * d)) fail("requires s1 > d/2");
    if (jobs < 1) fail("jobs must be >= 1");

    try {
        control.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    cfg.raw_text = text;
    cfg.hash = fnv1a64(text.data(), text.size());
    cfg.hash_hex = hex64(cfg.hash);

    // Datum lines are interpreted after the whole file is read, since they
    // need d and [lattice] may come later.
    std::vector<std::pair<int, std::vector<std::string>>> datum_lines;
    bool s_values_given = false;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    Cursor at{origin, 0};
    while (std::getline(in, raw)) {
        ++at.line;
        std::string line = raw;
        if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') at.fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "lattice" && section != "equation" && section != "datum" &&
                section != "control" && section != "run" && section != "output")
                at.fail("unknown section [" + section + "]");
            continue;
        }
        if (section.empty()) at.fail("content before any [section]");

        if (section == "datum") {
            auto toks = split_ws(line);
            if (toks.empty() || toks[0] != "mode")
                at.fail("datum lines look like: mode <k_1> ... <k_d> <re> <im>");
            datum_lines.emplace_back(at.line, std::move(toks));
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string::npos) at.fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) at.fail("empty key");
        if (value.empty()) at.fail("empty value for '" + key + "'");

        auto unknown = [&]() {
            at.fail("unknown key '" + key + "' in [" + section + "]");
        };

        if (section == "lattice") {
            if (key == "d") cfg.d = static_cast<int>(parse_int(value, at));
            else if (key == "K") cfg.K = static_cast<int>(parse_int(value, at));
            else unknown();
        } else if (section == "equation") {
            if (key == "epsilon") cfg.eps_list = parse_double_list(value, at);
            else if (key == "mu") cfg.mu = parse_double(value, at);
            else if (key == "b") cfg.b = parse_double(value, at);
            else if (key == "c") cfg.c = parse_double(value, at);
            else if (key == "m") cfg.m = static_cast<int>(parse_int(value, at));
            else if (key == "p") cfg.p = static_cast<int>(parse_int(value, at));
            else if (key == "q") cfg.q = static_cast<int>(parse_int(value, at));
            else unknown();
        } else if (section == "control") {
            if (key == "T") cfg.control.T = parse_double(value, at);
            else if (key == "cfl") cfg.control.cfl_fraction = parse_double(value, at);
            else if (key == "dtau_max") cfg.control.dtau_max = parse_double(value, at);
            else if (key == "checkpoints")
                cfg.control.checkpoints = static_cast<int>(parse_int(value, at));
            else if (key == "record_every_step")
                cfg.control.record_every_step = parse_bool(value, at);
            else if (key == "blowup_threshold")
                cfg.control.blowup_threshold = parse_double(value, at);
            else if (key == "max_steps") {
                const long long v = parse_int(value, at);
                if (v < 1) at.fail("max_steps must be >= 1");
                cfg.control.max_steps = static_cast<std::uint64_t>(v);
            } else if (key == "s_values") {
                cfg.control.s_values = parse_double_list(value, at);
                s_values_given = true;
            } else unknown();
        } else if (section == "run") {
            if (key == "mode") {
                if (value == "full") cfg.mode = SimMode::full_only;
                else if (value == "effective") cfg.mode = SimMode::effective_only;
                else if (value == "both") cfg.mode = SimMode::both;
                else at.fail("mode must be full, effective or both");
            } else if (key == "s") cfg.s = parse_double(value, at);
            else if (key == "s1") cfg.s1 = parse_double(value, at);
            else if (key == "residual") cfg.residual = parse_bool(value, at);
            else if (key == "conservation") cfg.conservation = parse_bool(value, at);
            else if (key == "jobs") cfg.jobs = static_cast<int>(parse_int(value, at));
            else unknown();
        } else if (section == "output") {
            if (key == "out_dir") cfg.out_dir = value;
            else if (key == "cache_dir") cfg.cache_dir = value;
            else unknown();
        }
    }

    for (auto& [line_no, toks] : datum_lines) {
        Cursor dat{origin, line_no};
        if (static_cast<int>(toks.size()) != cfg.d + 3)
            dat.fail("expected: mode <k_1> ... <k_d> <re> <im> (d = " +
                     std::to_string(cfg.d) + ")");
        DatumEntry e;
        for (int a = 0; a < cfg.d; ++a)
            e.k.push_back(static_cast<int>(parse_int(toks[1 + a], dat)));
        const double re = parse_double(toks[cfg.d + 1], dat);
        const double im = parse_double(toks[cfg.d + 2], dat);
        e.amp = Complex(re, im);
        cfg.datum.push_back(std::move(e));
    }

    if (!s_values_given) cfg.control.s_values = {cfg.s};
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace cgl
