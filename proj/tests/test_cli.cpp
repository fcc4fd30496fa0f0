#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "jmgtlab/commands.hpp"
#include "jmgtlab/config.hpp"

using namespace jmgtlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("jmgtlab_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

fs::path write_config(const TempDir& dir, const std::string& body) {
    fs::path p = dir.path / "test.cfg";
    std::ofstream f(p);
    f << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("config parsing") {
    TempDir dir;

    SECTION("empty file yields the validated defaults") {
        auto path = write_config(dir, "");
        ExperimentConfig cfg = parse_config(path.string());
        REQUIRE(cfg.modes == 16);
        REQUIRE(cfg.tau_count == 8);
        REQUIRE(cfg.padding == 1.5);
    }
    SECTION("comments and blank lines are ignored") {
        auto path = write_config(dir, "# heading\n\n  dt = 0.5e-3  # inline comment\n");
        REQUIRE(parse_config(path.string()).dt == 0.5e-3);
    }
    SECTION("unknown keys are rejected with key and line") {
        auto path = write_config(dir, "dt = 1e-3\nbogus_key = 2\n");
        try {
            parse_config(path.string());
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            REQUIRE(msg.find("bogus_key") != std::string::npos);
            REQUIRE(msg.find("line 2") != std::string::npos);
        }
    }
    SECTION("type mismatches name the key") {
        auto path = write_config(dir, "modes = many\n");
        try {
            parse_config(path.string());
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(std::string(e.what()).find("modes") != std::string::npos);
        }
    }
    SECTION("violated invariants are configuration errors") {
        auto path = write_config(dir, "tau_count = -1\n");
        try {
            parse_config(path.string());
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            REQUIRE(std::string(e.what()).find("tau_count") != std::string::npos);
        }
    }
    SECTION("flags override file keys") {
        auto path = write_config(dir, "dt = 1e-2\n");
        ExperimentConfig cfg = parse_config(path.string(), {{"dt", "1e-3"}});
        REQUIRE(cfg.dt == 1e-3);
    }
    SECTION("missing file is a configuration error") {
        REQUIRE_THROWS_AS(parse_config((dir.path / "nope.cfg").string()), ConfigError);
    }
}

TEST_CASE("config echo round-trips") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.dt = 3.5e-4;
    cfg.modes = 24;
    cfg.profile = "mode1";
    cfg.amplitude = 0.125;
    auto path = write_config(dir, config_echo(cfg));
    ExperimentConfig back = parse_config(path.string());
    REQUIRE(config_echo(back) == config_echo(cfg));
}

TEST_CASE("simulate command") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.modes = 4;
    cfg.T = 0.0;

    SECTION("T = 0 produces a one-row energy CSV") {
        CommandResult res = cmd_simulate(cfg, dir.path);
        REQUIRE(res.exit_code == 0);
        const std::string csv = slurp(dir.path / "energy.csv");
        REQUIRE(csv.rfind("t,E0,E1,E,calE,frakE,h0tau,h1tau,h2tau\n", 0) == 0);
        REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 2); // header + one row
    }
    SECTION("manifest echoes a reparseable config") {
        cmd_simulate(cfg, dir.path);
        ExperimentConfig back = parse_config((dir.path / "manifest.txt").string());
        REQUIRE(config_echo(back) == config_echo(cfg));
    }
    SECTION("numerical failure maps to exit code 2") {
        cfg.T = 1.0;
        cfg.dt = 1e-2;
        cfg.blowup_ceiling = 1e-9;
        CommandResult res = cmd_simulate(cfg, dir.path);
        REQUIRE(res.exit_code == 2);
    }
    SECTION("jmgt runs report the stabilizability frontier") {
        cfg.T = 1.0;
        cfg.dt = 1e-2;
        cfg.stride = 10;
        CommandResult res = cmd_simulate(cfg, dir.path);
        REQUIRE(res.exit_code == 0);
        REQUIRE(res.summary.find("stabilizability") != std::string::npos);
    }
    SECTION("westervelt solver path writes the same schema") {
        cfg.solver = "westervelt";
        cfg.T = 0.1;
        cfg.dt = 1e-2;
        cfg.stride = 10;
        CommandResult res = cmd_simulate(cfg, dir.path);
        REQUIRE(res.exit_code == 0);
        REQUIRE(slurp(dir.path / "energy.csv").rfind("t,E0,E1,E,calE,frakE", 0) == 0);
    }
}

TEST_CASE("sweep command determinism") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.modes = 8;
    cfg.T = 0.5;
    cfg.dt = 1e-2;
    cfg.stride = 5;
    cfg.tau_count = 2;
    cmd_sweep_tau(cfg, dir.path / "a");
    cmd_sweep_tau(cfg, dir.path / "b");
    const std::string a = slurp(dir.path / "a" / "sweep.csv");
    const std::string b = slurp(dir.path / "b" / "sweep.csv");
    REQUIRE_FALSE(a.empty());
    REQUIRE(a == b);
    REQUIRE(a.rfind("tau,sup_err_sq,uttt_integral,omega,r_squared,flag\n", 0) == 0);
}

TEST_CASE("threshold command schema") {
    TempDir dir;
    ExperimentConfig cfg;
    cfg.modes = 8;
    cfg.k = 0.0;
    cfg.T = 1.0;
    cfg.dt = 1e-2;
    cfg.stride = 5;
    cfg.threshold_ceiling = 0.02;
    CommandResult res = cmd_threshold(cfg, dir.path);
    REQUIRE(res.exit_code == 0);
    const std::string csv = slurp(dir.path / "threshold.csv");
    REQUIRE(csv.rfind("iter,amplitude,h0tau_norm,decayed\n", 0) == 0);
}

TEST_CASE("17-digit serialization round-trips doubles") {
    const double values[] = {1.0 / 3.0, 6.02214076e23, -2.5e-17, 0.1};
    for (double v : values) {
        const std::string s = format_double(v);
        REQUIRE(std::stod(s) == v);
    }
}
