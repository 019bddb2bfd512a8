#include "doctest.h"
#include "trapant/config.hpp"
#include "trapant/errors.hpp"

using namespace trapant;
using namespace trapant::config;

namespace {

const char* kFull = R"(# full example
[geometry]
config = A
length_scale = 1.5
short_pin_offset_mm = 5 ; inline comment
trap_position_fraction = 0.8
ground = wire-grid
grid_pitch_mm = 25

[trap]
cap_pf = 9.1
cap_tol_pf = 0.05
ind1_nh = 6.8
ind1_tol_pct = 2
ind2_nh = 6.8
ind2_tol_pct = 2
tolerance_scale = 0.5

[sweep]
f_lo_mhz = 850
f_hi_mhz = 950
step_mhz = 0.5

[bands]
low = 865, 870

[analysis]
mc_samples = 10
mc_seed = 99
mc_distribution = corner-weighted
threads = 2

[output]
prefix = run1
touchstone = false
)";

void expect_error(const std::string& text, const std::string& fragment) {
    CAPTURE(text);
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains(fragment.c_str()), ConfigError);
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("full configuration") {
    const auto c = parse_config(std::string(kFull));
    CHECK(c.antenna.config == geometry::TrapPlacement::A);
    CHECK(c.antenna.length_scale == 1.5);
    CHECK(c.antenna.short_pin_offset == doctest::Approx(5e-3));
    CHECK(c.ground.model == geometry::GroundModel::wire_grid);
    CHECK(c.ground.grid_pitch == doctest::Approx(25e-3));
    REQUIRE(c.trap);
    CHECK(c.trap->cap.tol_abs == doctest::Approx(0.05e-12));
    CHECK(c.trap->ind1.tol_rel == doctest::Approx(0.02));
    const auto t = c.require_trap();
    CHECK(t.ind1.tol_rel == doctest::Approx(0.01));
    CHECK(t.cap.tol_abs == doctest::Approx(0.025e-12));
    CHECK(c.sweep.grid().size() == 201);
    CHECK(c.sweep.grid().back() == doctest::Approx(950e6));
    REQUIRE(c.bands.size() == 1);
    CHECK(c.bands[0].f_hi == 870e6);
    CHECK(c.analysis.mc_samples == 10);
    CHECK(c.analysis.mc_seed == 99);
    CHECK(c.analysis.mc_distribution == tolerance::Distribution::corner_weighted);
    CHECK(c.solver_options().threads == 2);
    CHECK(c.output.prefix == "run1");
    CHECK_FALSE(c.output.touchstone);
    CHECK(c.output.csv);
    CHECK(c.source_hash.size() == 16);
    const auto mesh = c.build_mesh();
    CHECK(mesh.ground == geometry::GroundModel::wire_grid);
    CHECK(mesh.loads.size() == 1);
}

TEST_CASE("defaults") {
    const auto c = parse_config(std::string("[sweep]\nstep_mhz = 1\n"));
    CHECK_FALSE(c.trap);
    CHECK_THROWS_AS(c.require_trap(), ConfigError);
    CHECK(c.bands.size() == 2);
    CHECK(c.sweep.f_lo == 840e6);
    CHECK(c.analysis.threshold_db == -10.0);
    CHECK(c.output.prefix == "trapant");
}

TEST_CASE("hash follows the text") {
    const auto a = parse_config(std::string("[sweep]\nstep_mhz = 1\n"));
    const auto b = parse_config(std::string("[sweep]\nstep_mhz = 2\n"));
    CHECK(a.source_hash != b.source_hash);
    CHECK(a.source_hash == parse_config(std::string("[sweep]\nstep_mhz = 1\n")).source_hash);
}

TEST_CASE("errors carry line numbers") {
    expect_error("[trap]\ncap_pf = 9.1\nind1_nh = 6.8\n", "missing required field trap.ind2_nh");
    expect_error("[sweep]\nbogus = 1\n", "line 2: unknown key 'bogus'");
    expect_error("[sweep]\nstep_mhz = 1\nstep_mhz = 2\n", "line 3: duplicate key");
    expect_error("step_mhz = 1\n", "outside any section");
    expect_error("[nowhere]\n", "unknown section");
    expect_error("[sweep]\nstep_mhz = fast\n", "expected a number");
    expect_error("[sweep]\nstep_mhz\n", "expected 'key = value'");
    expect_error("[sweep\n", "malformed section header");
    expect_error("[bands]\nlow = 865\n", "expected 'lo, hi'");
    expect_error("[bands]\nlow = 870, 865\n", "low");
    expect_error("[analysis]\nmc_samples = 0\n", "mc_samples");
    expect_error("[analysis]\nmc_distribution = gaussian\n", "gaussian");
    expect_error("[geometry]\nground = lava\n", "lava");
    expect_error("[geometry]\ntrap_position_fraction = 1.2\n", "trap_position_fraction");
    expect_error("[trap]\ncap_pf = 9.1\ncap_tol_pf = 0.05\ncap_tol_pct = 1\nind1_nh = 6.8\nind2_nh = 6.8\n",
                 "either an absolute or a percentage");
    expect_error("[trap]\ncap_pf = -9.1\nind1_nh = 6.8\nind2_nh = 6.8\n", "[trap]");
    expect_error("[output]\nprefix = ../x\n", "plain file name");
    expect_error("[output]\ncsv = maybe\n", "true or false");
    expect_error("[sweep]\nf_lo_mhz = 900\nf_hi_mhz = 800\n", "sweep");
    CHECK_THROWS_AS(load_config("/nonexistent/file.conf"), ConfigError);
}

TEST_CASE("config error exposes the line") {
    try {
        parse_config(std::string("[sweep]\n\n# c\nbogus = 1\n"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 4);
    }
}

}  // TEST_SUITE
