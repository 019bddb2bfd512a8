#include <cmath>

#include "doctest.h"
#include "trapant/circuit.hpp"
#include "trapant/config.hpp"
#include "trapant/solver.hpp"

using namespace trapant;

namespace {

struct Calibrated {
    config::RunConfig cfg = config::load_config(std::string(TRAPANT_CONFIG_DIR) + "/ifa_b.conf");
    solver::Solver s{cfg.build_mesh(), cfg.solver_options()};
};

// Largest |I| beyond the trap, and |I| on the segment that feeds into it.
std::pair<double, double> extension_and_entry(const Calibrated& c, double f) {
    const auto& mesh = c.s.mesh();
    const auto far = solver::far_side_of_trap(mesh, c.s.basis().topology());
    const auto r = c.s.solve(f);
    const auto mag = solver::current_distribution(r, c.s.basis(), mesh);
    const auto& trap = mesh.segments[std::size_t(mesh.loads.begin()->first)];
    double ext = 0.0, entry = -1.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        if (far[i]) ext = std::max(ext, mag[i]);
        else if (geometry::norm(mesh.segments[i].end - trap.start) < 1e-12) entry = mag[i];
    }
    return {ext, entry};
}

}  // namespace

TEST_SUITE("calibrated") {

TEST_CASE("trap blocks the extension at its resonance") {
    const Calibrated c;
    const double f0 = circuit::trap_resonance(c.cfg.require_trap());
    const double iso = solver::trap_isolation(c.s, f0);
    CAPTURE(iso);
    CHECK(iso >= 20.0);
}

TEST_CASE("extension current follows the band") {
    const Calibrated c;
    const auto sw = c.s.sweep(c.cfg.sweep.grid());
    const auto dips = solver::find_resonances(sw, -10.0);
    REQUIRE(dips.size() == 2);
    const auto [ext_hi, entry_hi] = extension_and_entry(c, dips[1].f_dip);
    const auto [ext_lo, entry_lo] = extension_and_entry(c, dips[0].f_dip);
    CAPTURE(ext_hi);
    CAPTURE(entry_hi);
    CAPTURE(ext_lo);
    CAPTURE(entry_lo);
    REQUIRE(entry_hi >= 0.0);
    CHECK(ext_hi <= entry_hi);
    CHECK(ext_lo > 10.0 * ext_hi);
    CHECK(solver::trap_isolation(c.s, dips[1].f_dip) > solver::trap_isolation(c.s, dips[0].f_dip));
}

}  // TEST_SUITE
