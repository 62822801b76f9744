// Config parsing, CLI option resolution, artifact reruns, and the exit-code
// contract, driven through the in-process command entry points.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cgl/artifacts.hpp"
#include "cgl/cli.hpp"
#include "cgl/errors.hpp"

using namespace cgl;
namespace fs = std::filesystem;

namespace {

const char* kBaseConfig = R"(# comment lines and blanks are ignored

[lattice]
d = 1
K = 2

[equation]
epsilon = 0.1 0.05
mu = 0.25
m = 2
b = -0.5
c = 1.5
p = 1
q = 1

[datum]
mode 0 0.35 0.10
mode 1 0.25 -0.15
mode -1 0.20 0.05

[control]
T = 0.5
cfl = 0.2
dtau_max = 2e-3
checkpoints = 10
record_every_step = true
blowup_threshold = 1e5
max_steps = 1000000
s_values = 0 2

[run]
mode = effective
s = 2
s1 = 1.5
residual = true
conservation = true
jobs = 3

[output]
out_dir = some/out
cache_dir = some/cache
)";

RunConfig parse(const std::string& text) { return parse_config(text, "test.cfg"); }

// swap one line of the base config for another (empty: drop it)
std::string base_with(const std::string& from, const std::string& to) {
    std::string s = kBaseConfig;
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
}

fs::path temp_dir(const char* tag) {
    fs::path p = fs::temp_directory_path() / (std::string("cgl_clitest_") + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// NDJSON streams differ only in the isolated first line (the timestamp)
std::string drop_first_line(const std::string& s) {
    auto nl = s.find('\n');
    return nl == std::string::npos ? std::string() : s.substr(nl + 1);
}

} // namespace

TEST_CASE("full config round trip") {
    RunConfig cfg = parse(kBaseConfig);
    CHECK(cfg.d == 1);
    CHECK(cfg.K == 2);
    CHECK(cfg.eps_list == std::vector<double>{0.1, 0.05});
    CHECK(cfg.mu == 0.25);
    CHECK(cfg.m == 2);
    CHECK(cfg.b == -0.5);
    CHECK(cfg.c == 1.5);
    REQUIRE(cfg.datum.size() == 3);
    CHECK(cfg.datum[1].k == std::vector<int>{1});
    CHECK(cfg.datum[1].amp == Complex(0.25, -0.15));
    CHECK(cfg.control.T == 0.5);
    CHECK(cfg.control.cfl_fraction == 0.2);
    CHECK(cfg.control.dtau_max == 2e-3);
    CHECK(cfg.control.checkpoints == 10);
    CHECK(cfg.control.record_every_step);
    CHECK(cfg.control.blowup_threshold == 1e5);
    CHECK(cfg.control.max_steps == 1000000);
    CHECK(cfg.control.s_values == std::vector<double>{0.0, 2.0});
    CHECK(cfg.mode == SimMode::effective_only);
    CHECK(cfg.s == 2.0);
    CHECK(cfg.s1 == 1.5);
    CHECK(cfg.residual);
    CHECK(cfg.conservation);
    CHECK(cfg.jobs == 3);
    CHECK(cfg.out_dir == "some/out");
    CHECK(cfg.cache_dir == "some/cache");
    CHECK_NOTHROW(cfg.validate());

    auto par = cfg.params(0.05);
    CHECK(par.eps == 0.05);
    CHECK(par.mu == 0.25);
    CHECK(par.m == 2);
    CHECK(par.b == -0.5);
    CHECK(par.c == 1.5);

    auto lat = build_lattice(cfg.d, cfg.K);
    auto v0 = cfg.build_datum(lat);
    CHECK(v0.amps[mode_index(*lat, std::vector<int>{0})] == Complex(0.35, 0.10));
    CHECK(v0.amps[mode_index(*lat, std::vector<int>{-2})] == Complex(0.0, 0.0));
}

TEST_CASE("defaults fill everything but the datum") {
    RunConfig cfg = parse("[datum]\nmode 0 0.5 0\n[run]\ns = 1.5\ns1 = 1.5\n");
    CHECK(cfg.d == 1);
    CHECK(cfg.K == 1);
    CHECK(cfg.eps_list == std::vector<double>{0.1});
    CHECK(cfg.mode == SimMode::both);
    // s_values defaults to the report norm when not given
    CHECK(cfg.control.s_values == std::vector<double>{1.5});
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config hash is stable and content-sensitive") {
    RunConfig a = parse(kBaseConfig);
    RunConfig b = parse(kBaseConfig);
    CHECK(a.hash == b.hash);
    CHECK(a.hash_hex == b.hash_hex);
    CHECK(a.hash_hex.size() == 16);
    RunConfig c = parse(base_with("mu = 0.25", "mu = 0.26"));
    CHECK(c.hash != a.hash);
    CHECK(a.raw_text == kBaseConfig);
}

TEST_CASE("parse and validation failures carry ConfigError") {
    // parse-time: malformed structure
    CHECK_THROWS_AS(parse("x = 1\n"), ConfigError);                    // before section
    CHECK_THROWS_AS(parse("[lattice\nd = 1\n"), ConfigError);          // unterminated
    CHECK_THROWS_AS(parse("[nosuch]\na = 1\n"), ConfigError);          // unknown section
    CHECK_THROWS_AS(parse(base_with("mu = 0.25", "nu = 0.25")), ConfigError);
    CHECK_THROWS_AS(parse(base_with("mu = 0.25", "mu = abc")), ConfigError);
    CHECK_THROWS_AS(parse(base_with("mu = 0.25", "mu = 0.25x")), ConfigError);
    CHECK_THROWS_AS(parse(base_with("record_every_step = true",
                                    "record_every_step = yes")), ConfigError);
    CHECK_THROWS_AS(parse(base_with("mode = effective", "mode = fast")), ConfigError);
    CHECK_THROWS_AS(parse(base_with("max_steps = 1000000", "max_steps = 0")), ConfigError);
    CHECK_THROWS_AS(parse(base_with("mode 1 0.25 -0.15", "mode 1 2 0.25 -0.15")),
                    ConfigError); // arity != d

    // validate-time: cross-field rules
    auto bad = [](const std::string& text) {
        RunConfig cfg = parse(text);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    bad(base_with("mode 1 0.25 -0.15", "mode 9 0.25 -0.15"));  // outside box
    bad(base_with("mode 1 0.25 -0.15", "mode 0 0.25 -0.15"));  // duplicate
    bad(base_with("epsilon = 0.1 0.05", "epsilon = 0.05 0.1")); // rising
    bad(base_with("epsilon = 0.1 0.05", "epsilon = 0.1 -0.05"));
    bad(base_with("mu = 0.25", "mu = -1"));
    bad(base_with("p = 1", "p = 0"));
    bad(base_with("s1 = 1.5", "s1 = 2.5"));    // s1 > s
    bad(base_with("s1 = 1.5", "s1 = 0.4"));    // s1 <= d/2
    bad(base_with("jobs = 3", "jobs = 0"));
    bad(base_with("cfl = 0.2", "cfl = 1.3"));
    {
        RunConfig cfg = parse("[run]\ns = 2\n");
        CHECK_THROWS_AS(cfg.validate(), ConfigError); // no datum at all
    }
}

TEST_CASE("load_config reports unreadable paths") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/run.cfg"), ConfigError);
}

TEST_CASE("option resolution precedence") {
    RunConfig cfg = parse(kBaseConfig);
    CliOptions opt;

    // out: flag beats config
    CHECK(resolve_out_dir(cfg, opt) == "some/out");
    opt.out_dir = "/explicit";
    CHECK(resolve_out_dir(cfg, opt) == "/explicit");

    // jobs: flag beats config
    CHECK(resolve_jobs(cfg, opt) == 3);
    opt.jobs = 8;
    CHECK(resolve_jobs(cfg, opt) == 8);

    // cache: flag, then environment, then config, then ./cache
    unsetenv("CGLRES_CACHE");
    CHECK(resolve_cache_dir(cfg, opt) == "some/cache");
    setenv("CGLRES_CACHE", "/from/env", 1);
    CHECK(resolve_cache_dir(cfg, opt) == "/from/env");
    opt.cache_dir = "/from/flag";
    CHECK(resolve_cache_dir(cfg, opt) == "/from/flag");
    unsetenv("CGLRES_CACHE");

    RunConfig bare = parse("[datum]\nmode 0 0.5 0\n");
    CliOptions none;
    CHECK(resolve_cache_dir(bare, none) == "cache");
}

TEST_CASE("simulate writes its artifact set and reruns byte-identically") {
    auto dir = temp_dir("simulate");
    const std::string text =
        "[lattice]\nd = 1\nK = 2\n"
        "[equation]\nepsilon = 0.1\nc = 1\n"
        "[datum]\nmode 0 0.35 0.10\nmode 1 0.25 -0.15\n"
        "[control]\nT = 0.25\ncfl = 0.1\ndtau_max = 1e-3\ncheckpoints = 4\n"
        "[run]\nmode = both\ns = 2\ns1 = 1.5\nconservation = true\n";
    RunConfig cfg = parse(text);
    cfg.validate();

    CliOptions opt;
    opt.out_dir = (dir / "out").string();
    opt.cache_dir = (dir / "cache").string();
    REQUIRE(run_simulate(cfg, opt) == 0);

    for (const char* name : {"full.ndjson", "full.csv", "effective.ndjson",
                             "effective.csv", "conservation_full.csv",
                             "conservation_effective.csv"})
        CHECK(fs::exists(dir / "out" / name));

    // capture, rerun, compare
    auto full1 = read_file(dir / "out" / "full.ndjson");
    auto csv1 = read_file(dir / "out" / "full.csv");
    auto eff1 = read_file(dir / "out" / "effective.ndjson");
    REQUIRE(run_simulate(cfg, opt) == 0);
    CHECK(read_file(dir / "out" / "full.csv") == csv1);
    CHECK(drop_first_line(read_file(dir / "out" / "full.ndjson")) ==
          drop_first_line(full1));
    CHECK(drop_first_line(read_file(dir / "out" / "effective.ndjson")) ==
          drop_first_line(eff1));

    // the hash comment is the first CSV line
    CHECK(csv1.substr(0, 14 + 16) == "# config_hash=" + cfg.hash_hex);

    SUBCASE("a different config refuses to overwrite unless forced") {
        RunConfig other = parse(text + "\n# tweaked\n");
        other.validate();
        CHECK(other.hash != cfg.hash);
        CHECK_THROWS_AS(run_simulate(other, opt), SerializationError);

        CliOptions forced = opt;
        forced.force = true;
        CHECK(run_simulate(other, forced) == 0);
        CHECK(read_file(dir / "out" / "full.csv").substr(0, 30) ==
              "# config_hash=" + other.hash_hex);
    }
    fs::remove_all(dir);
}

TEST_CASE("simulate insists on a single epsilon") {
    RunConfig cfg = parse(kBaseConfig); // two epsilons, mode=effective
    cfg.validate();
    CliOptions opt;
    opt.out_dir = (temp_dir("multi") / "out").string();
    opt.cache_dir = opt.out_dir + "/cache";
    CHECK_THROWS_AS(run_simulate(cfg, opt), ConfigError);
}

TEST_CASE("resonance counts artifact") {
    auto dir = temp_dir("counts");
    RunConfig cfg = parse("[lattice]\nd = 1\nK = 1\n[datum]\nmode 0 0.5 0\n");
    cfg.validate();
    CliOptions opt;
    opt.out_dir = (dir / "out").string();
    opt.cache_dir = (dir / "cache").string();
    REQUIRE(run_resonances(cfg, opt) == 0);

    auto text = read_file(dir / "out" / "resonance_counts_n1.csv");
    // d=1, K=1 cubic: 5 resonant tuples per target
    CHECK(text.find("index,k,count") != std::string::npos);
    CHECK(text.find("0,-1,5") != std::string::npos);
    CHECK(text.find("1,0,5") != std::string::npos);
    CHECK(text.find("2,1,5") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("exit-code contract through dispatch") {
    auto dir = temp_dir("dispatch");

    SUBCASE("missing config file is a usage error") {
        CliOptions opt;
        opt.config_path = (dir / "absent.cfg").string();
        CHECK(dispatch("simulate", opt) == 2);
    }
    SUBCASE("unknown command") {
        CliOptions opt;
        opt.config_path = (dir / "min.cfg").string();
        write_file(dir / "min.cfg", "[datum]\nmode 0 0.5 0\n");
        CHECK(dispatch("frobnicate", opt) == 2);
    }
    SUBCASE("invalid config exits 2") {
        write_file(dir / "bad.cfg", "[run]\ns1 = 9\n[datum]\nmode 0 0.5 0\n");
        CliOptions opt;
        opt.config_path = (dir / "bad.cfg").string();
        CHECK(dispatch("simulate", opt) == 2);
    }
    SUBCASE("blow-up exits 3 with the surviving prefix written") {
        write_file(dir / "blow.cfg",
                   "[lattice]\nd = 1\nK = 0\n"
                   "[equation]\nepsilon = 0.1\nb = 1\n"
                   "[datum]\nmode 0 2.0 0\n"
                   "[control]\nT = 0.2\ndtau_max = 1e-4\ncheckpoints = 10\n"
                   "[run]\nmode = full\ns = 2\ns1 = 2\n");
        CliOptions opt;
        opt.config_path = (dir / "blow.cfg").string();
        opt.out_dir = (dir / "blow_out").string();
        opt.cache_dir = (dir / "cache").string();
        CHECK(dispatch("simulate", opt) == 3);
        CHECK(fs::exists(dir / "blow_out" / "full.ndjson"));
    }
    SUBCASE("step budget exits 4") {
        write_file(dir / "steps.cfg",
                   "[lattice]\nd = 1\nK = 1\n"
                   "[equation]\nepsilon = 0.1\nc = 1\n"
                   "[datum]\nmode 0 0.5 0\n"
                   "[control]\nT = 1\ndtau_max = 1e-3\nmax_steps = 5\n"
                   "[run]\nmode = full\ns = 2\ns1 = 2\n");
        CliOptions opt;
        opt.config_path = (dir / "steps.cfg").string();
        opt.out_dir = (dir / "steps_out").string();
        opt.cache_dir = (dir / "cache").string();
        CHECK(dispatch("simulate", opt) == 4);
    }
    SUBCASE("failed conservation check exits 1") {
        // deliberately coarse stepping: RK4 drift far above the tolerances
        write_file(dir / "coarse.cfg",
                   "[lattice]\nd = 1\nK = 1\n"
                   "[equation]\nepsilon = 0.1\nc = 1\n"
                   "[datum]\nmode 0 2.0 0\nmode 1 0 1.5\n"
                   "[control]\nT = 1\ncfl = 1.0\ndtau_max = 0.2\ncheckpoints = 5\n"
                   "[run]\nmode = full\ns = 2\ns1 = 2\n");
        CliOptions opt;
        opt.config_path = (dir / "coarse.cfg").string();
        opt.out_dir = (dir / "coarse_out").string();
        opt.cache_dir = (dir / "cache").string();
        CHECK(dispatch("conserve", opt) == 1);
    }
    SUBCASE("clean single-epsilon compare exits 0") {
        write_file(dir / "cmp.cfg",
                   "[lattice]\nd = 1\nK = 2\n"
                   "[equation]\nepsilon = 0.1\nc = 1\n"
                   "[datum]\nmode 0 0.35 0.10\nmode 1 0.25 -0.15\n"
                   "[control]\nT = 0.25\ncfl = 0.1\ndtau_max = 1e-3\ncheckpoints = 4\n"
                   "[run]\nmode = both\ns = 2\ns1 = 1.5\n");
        CliOptions opt;
        opt.config_path = (dir / "cmp.cfg").string();
        opt.out_dir = (dir / "cmp_out").string();
        opt.cache_dir = (dir / "cache").string();
        CHECK(dispatch("compare", opt) == 0);
        CHECK(fs::exists(dir / "cmp_out" / "comparison.csv"));
    }
    fs::remove_all(dir);
}
