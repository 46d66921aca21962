#include "pil/config.hpp"
#include "pil/error.hpp"
#include "pil/runner.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pil;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pil_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidConfig);
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("config parsing") {
    SUBCASE("empty text gives defaults") {
        const Settings s = parse_config_text("");
        CHECK(s.exp1.lambda_grid.size() == 10);
        CHECK(s.exp3.rho_grid.size() == 20);
        CHECK(s.seed == 1);
    }
    SUBCASE("two-point lambda sweep") {
        const Settings s = parse_config_text("exp1.lambda_grid = [1e-3, 1]\n");
        CHECK(s.exp1.lambda_grid == std::vector<double>{1e-3, 1.0});
    }
    SUBCASE("range syntax") {
        const Settings s = parse_config_text("[exp3]\nrho_grid = [0.1 .. 1.8 : 20]  # sweep\n");
        REQUIRE(s.exp3.rho_grid.size() == 20);
        for (int i = 0; i < 20; ++i) CHECK(s.exp3.rho_grid[i] == doctest::Approx(0.1 + i * (1.7 / 19)).epsilon(1e-14));
        CHECK(s.exp3.rho_grid.back() == 1.8);
        const auto lg = parse_list("[1e-3 .. 10 : 5 log]");
        CHECK(lg[2] == doctest::Approx(0.1));
    }
    SUBCASE("errors name the key or the valid range") {
        CHECK(config_error("exp1.nonsense = 1").find("exp1.nonsense") != std::string::npos);
        CHECK(config_error("[exp3]\nleak = 1.5").find("(0, 1]") != std::string::npos);
        CHECK(config_error("exp2.bits = 3\nexp2.bits = 4").find("duplicate") != std::string::npos);
        CHECK(config_error("[nowhere]").find("nowhere") != std::string::npos);
        CHECK(config_error("exp1.lambda_grid = [1, 0.5]").find("increasing") != std::string::npos);
    }
    SUBCASE("seed propagates to every experiment") {
        const Settings s = parse_config_text("seed = 9");
        CHECK(s.exp1.seed == 9);
        CHECK(s.exp4.seed == 9);
    }
    SUBCASE("resolved echo covers every key") {
        const Settings s = parse_config_text("");
        const auto j = resolved(s, {"exp2"});
        CHECK(j.at("exp2").at("bits") == 16);
        CHECK(j.at("exp2").size() == 13);
    }
}

TEST_CASE("csv formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::nan("")) == "nan");
    ExperimentResult r;
    r.experiment = "x";
    r.columns = {"a", "b"};
    r.rows.push_back({1.5, std::string("p,q")});
    CHECK(to_csv(r) == "a,b\n1.5,\"p,q\"\n");
}

TEST_CASE("exp4 with seed 7 twice is byte-identical") {
    const fs::path a = scratch("exp4_a"), b = scratch("exp4_b");
    std::ostringstream log;
    RunOptions o;
    o.subcommand = "exp4";
    o.seed = 7;
    o.quiet = true;
    o.out_dir = a.string();
    REQUIRE(run(o, log) == kExitOk);
    o.out_dir = b.string();
    REQUIRE(run(o, log) == kExitOk);
    CHECK(slurp(a / "exp4.csv") == slurp(b / "exp4.csv"));
    CHECK(slurp(a / "exp4.json") == slurp(b / "exp4.json"));
    CHECK(fs::exists(a / "manifest.json"));
}

TEST_CASE("gates subcommand reports all seven gates") {
    const fs::path d = scratch("gates");
    std::ostringstream log;
    RunOptions o;
    o.subcommand = "gates";
    o.out_dir = d.string();
    o.quiet = true;
    CHECK(run(o, log) == kExitOk);
    const std::string csv = slurp(d / "gates.csv");
    for (const char* g : {"NOT,", "AND,", "OR,", "NAND,", "NOR,", "XOR,", "FLIPFLOP,"})
        CHECK(csv.find(std::string("\n") + g) != std::string::npos);
}

TEST_CASE("corrupted channel preset fails the checks") {
    const fs::path d = scratch("corrupt");
    fs::create_directories(d);
    const fs::path cfg = d / "c.cfg";
    std::ofstream(cfg) << "[checks]\nchannel_preset = corrupted\ntur_ensembles = 3\nchannels = 3\n";
    std::ostringstream log;
    RunOptions o;
    o.subcommand = "checks";
    o.config_path = cfg.string();
    o.out_dir = (d / "out").string();
    o.quiet = true;
    CHECK(run(o, log) == kExitCheck);
    const std::string csv = slurp(d / "out" / "checks.csv");
    CHECK(csv.find("trace_bound/gaussian_snr_1,") != std::string::npos);
    CHECK(slurp(d / "out" / "checks.json").find("trace_bound") != std::string::npos);
}

TEST_CASE("config errors exit 2 with an error summary") {
    const fs::path d = scratch("bad");
    fs::create_directories(d);
    std::ofstream(d / "bad.cfg") << "exp1.bogus = 1\n";
    std::ostringstream log;
    RunOptions o;
    o.subcommand = "exp1";
    o.config_path = (d / "bad.cfg").string();
    o.out_dir = (d / "out").string();
    CHECK(run(o, log) == kExitConfig);
    CHECK(slurp(d / "out" / "error.json").find("exp1.bogus") != std::string::npos);
}
