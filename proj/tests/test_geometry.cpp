#include <cmath>
#include <set>

#include "doctest.h"
#include "trapant/constants.hpp"
#include "trapant/errors.hpp"
#include "trapant/geometry.hpp"

using namespace trapant;
using namespace trapant::geometry;

namespace {

SegmentMesh ifa(TrapPlacement cfg, GroundModel g = GroundModel::infinite_image, double scale = 1.5) {
    AntennaParams p;
    p.config = cfg;
    p.length_scale = scale;
    GroundSpec gr;
    gr.model = g;
    return build_ifa_mesh(p, {}, gr, circuit::TrapSpec::reference());
}

bool close(Vec3 a, Vec3 b) { return norm(a - b) < 1e-12; }

int node_degree(const SegmentMesh& m, Vec3 p) {
    int n = 0;
    for (const auto& s : m.segments) n += close(s.start, p) + close(s.end, p);
    return n;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("effective permittivity scale") {
    SubstrateSpec s;
    CHECK(effective_permittivity_scale(s) == doctest::Approx(1.0 / std::sqrt(2.65)));
    s.eps_r = 1.0;
    CHECK(effective_permittivity_scale(s) == 1.0);
    s.eps_r = 0.5;
    CHECK_THROWS_AS(effective_permittivity_scale(s), DomainError);
}

TEST_CASE("enum names round trip") {
    for (auto g : {GroundModel::free_space, GroundModel::infinite_image, GroundModel::wire_grid})
        CHECK(ground_model_from_string(to_string(g)) == g);
    for (auto p : {TrapPlacement::A, TrapPlacement::B}) CHECK(trap_placement_from_string(to_string(p)) == p);
    CHECK_THROWS_AS(ground_model_from_string("lava"), ValidationError);
    CHECK_THROWS_AS(trap_placement_from_string("C"), ValidationError);
}

TEST_CASE("dipole builder") {
    const auto m = build_dipole(0.5, 1e-3, 10);
    CHECK(m.segments.size() == 10);
    CHECK(m.feed_segment == 5);
    CHECK(m.total_length() == doctest::Approx(0.5));
    CHECK(m.segments[5].start.z == doctest::Approx(0.0));
    CHECK(m.ground == GroundModel::free_space);
    CHECK_THROWS_AS(build_dipole(0.5, 1e-3, 9), DomainError);
    const auto mono = build_monopole(0.25, 1e-3, 8);
    CHECK(mono.ground == GroundModel::infinite_image);
    CHECK(mono.segments[0].start.z == 0.0);
}

TEST_CASE("IFA over an image plane, both configurations") {
    for (auto cfg : {TrapPlacement::A, TrapPlacement::B}) {
        const auto m = ifa(cfg);
        CAPTURE(to_string(cfg));
        CHECK(validate_mesh(m, 1e9).ok());
        CHECK(m.length_scale == 1.5);
        REQUIRE(m.loads.size() == 1);
        const auto& feed = m.segments[std::size_t(m.feed_segment)];
        CHECK(feed.start.z == 0.0);
        CHECK(feed.start.x == doctest::Approx(4e-3 * 1.5));
        CHECK(feed.radius == doctest::Approx(0.65e-3 / 4.0));
        for (const auto& s : m.segments) {
            CHECK(s.start.z >= 0.0);
            CHECK(s.end.z >= 0.0);
            CHECK(s.length() <= c0 / 1e9 / 20.0 * (1 + 1e-12));
        }
        const int trap = m.loads.begin()->first;
        const auto& ts = m.segments[std::size_t(trap)];
        const double trap_x = 0.95 * 59.4e-3 * 1.5;
        CHECK(ts.start.x == doctest::Approx(trap_x));
        if (cfg == TrapPlacement::A) {
            CHECK(ts.direction().x == doctest::Approx(1.0));
            CHECK(ts.start.z == doctest::Approx(11e-3 * 1.5));
        } else {
            CHECK(ts.direction().z == doctest::Approx(-1.0));
            // Trap node sits halfway down the branch.
            CHECK(ts.start.z == doctest::Approx(1.5 * (11e-3 - 2e-3)));
        }
    }
}

TEST_CASE("default length scale follows the substrate") {
    AntennaParams p;
    const auto m = build_ifa_mesh(p, {}, {}, circuit::TrapSpec::reference());
    CHECK(m.length_scale == doctest::Approx(std::sqrt(2.65)));
}

TEST_CASE("wire length scales linearly with the length scale") {
    for (auto cfg : {TrapPlacement::A, TrapPlacement::B}) {
        const double l1 = ifa(cfg, GroundModel::infinite_image, 1.0).total_length();
        const double l2 = ifa(cfg, GroundModel::infinite_image, 1.7).total_length();
        CHECK(l2 == doctest::Approx(1.7 * l1).epsilon(1e-12));
    }
}

TEST_CASE("segment counts per straight run are powers of two") {
    AntennaParams p;
    p.length_scale = 1.0;
    p.footprint_length = 0.2;  // long arm forces subdivision
    const auto m = build_ifa_mesh(p, {}, {}, circuit::TrapSpec::reference(), 1.0 / 20.0, 1e9);
    // Group collinear consecutive segments of equal length.
    std::size_t i = 0;
    while (i < m.segments.size()) {
        std::size_t j = i + 1;
        while (j < m.segments.size() && close(m.segments[j].start, m.segments[j - 1].end) &&
               norm(m.segments[j].direction() - m.segments[i].direction()) < 1e-9 &&
               std::abs(m.segments[j].length() - m.segments[i].length()) < 1e-12)
            ++j;
        const std::size_t n = j - i;
        CHECK((n & (n - 1)) == 0);
        i = j;
    }
}

TEST_CASE("coplanar wire-grid ground") {
    const auto m = ifa(TrapPlacement::B, GroundModel::wire_grid);
    CHECK(validate_mesh(m, 1e9).ok());
    CHECK(m.ground == GroundModel::wire_grid);
    bool below = false;
    for (const auto& s : m.segments) {
        CHECK(s.start.y == 0.0);
        CHECK(s.end.y == 0.0);
        below = below || s.end.z < 0.0;
    }
    CHECK(below);
    // Short pin and feed both land on the grid edge.
    CHECK(node_degree(m, {0, 0, 0}) >= 2);
    CHECK(node_degree(m, {4e-3 * 1.5, 0, 0}) >= 3);
    // Ground extent is size * scale, centred under the arm.
    double xmin = 1e9, xmax = -1e9, zmin = 1e9;
    for (const auto& s : m.segments)
        for (Vec3 v : {s.start, s.end}) {
            if (v.z > 0.0) continue;
            xmin = std::min(xmin, v.x);
            xmax = std::max(xmax, v.x);
            zmin = std::min(zmin, v.z);
        }
    CHECK(xmax - xmin == doctest::Approx(0.1 * 1.5));
    CHECK(zmin == doctest::Approx(-0.1 * 1.5));
    CHECK(0.5 * (xmin + xmax) == doctest::Approx(0.5 * 59.4e-3 * 1.5));
}

TEST_CASE("explicit grid pitch") {
    AntennaParams p;
    p.length_scale = 1.0;
    GroundSpec gr;
    gr.model = GroundModel::wire_grid;
    gr.grid_pitch = 20e-3;
    const auto m = build_ifa_mesh(p, {}, gr, circuit::TrapSpec::reference());
    std::set<long> zs;
    for (const auto& s : m.segments)
        if (s.start.z <= 0.0 && s.end.z <= 0.0 && std::abs(s.start.z - s.end.z) < 1e-12)
            zs.insert(std::lround(s.start.z * 1e6));
    CHECK(zs.size() == 6);  // 100 mm / 20 mm pitch, both edges included
}

TEST_CASE("parameter validation") {
    const auto trap = circuit::TrapSpec::reference();
    AntennaParams p;
    p.trap_position_fraction = 1.0;
    CHECK_THROWS_AS(build_ifa_mesh(p, {}, {}, trap), ValidationError);
    p = {};
    p.extension_length = 2e-3;
    p.branch_drop = 3e-3;
    CHECK_THROWS_AS(build_ifa_mesh(p, {}, {}, trap), ValidationError);
    p = {};
    p.branch_drop = 20e-3;
    p.extension_length = 30e-3;
    CHECK_THROWS_AS(build_ifa_mesh(p, {}, {}, trap), ValidationError);
    p = {};
    p.short_pin_offset = 70e-3;
    CHECK_THROWS_AS(build_ifa_mesh(p, {}, {}, trap), ValidationError);
    CHECK_THROWS_AS(build_ifa_mesh({}, {}, {}, trap, 0.5), ValidationError);
    SubstrateSpec s;
    s.eps_r = 0.9;
    CHECK_THROWS_AS(build_ifa_mesh({}, s, {}, trap), ValidationError);
    GroundSpec g;
    g.size_x = 0.0;
    CHECK_THROWS_AS(build_ifa_mesh({}, {}, g, trap), ValidationError);
}

TEST_CASE("mesh validation flags each defect") {
    auto base = build_dipole(0.15, 1e-3, 10);
    CHECK(validate_mesh(base, 1e9).ok());

    auto m = base;
    m.segments.push_back(m.segments[2]);
    auto d = validate_mesh(m, 1e9);
    CHECK_FALSE(d.find("overlap")->passed);

    m = base;
    m.segments[0].radius = 0.01;
    CHECK_FALSE(validate_mesh(m, 1e9).find("radius_ratio")->passed);

    m = build_dipole(0.5, 1e-3, 2);
    CHECK_FALSE(validate_mesh(m, 1e9).find("electrical_length")->passed);

    m = base;
    m.segments.push_back({{0.1, 0, 0}, {0.11, 0, 0}, 1e-3});
    CHECK_FALSE(validate_mesh(m, 1e9).find("connectivity")->passed);

    m = base;
    m.feed_segment = 99;
    CHECK_FALSE(validate_mesh(m, 1e9).find("feed_index")->passed);

    m = base;
    m.loads.emplace(42, cplx(1.0, 0.0));
    CHECK_FALSE(validate_mesh(m, 1e9).find("load_index")->passed);

    m = base;
    m.ground = GroundModel::infinite_image;
    const auto* below = validate_mesh(m, 1e9).find("below_ground");
    CHECK_FALSE(below->passed);
    CHECK_FALSE(below->offending.empty());

    m = base;
    m.segments.push_back({{1.5e-3, 0, -0.05}, {1.5e-3, 0, 0.05}, 1e-3});
    CHECK_FALSE(validate_mesh(m, 1e9).find("proximity")->passed);

    const auto summary = validate_mesh(m, 1e9).summary();
    CHECK(summary.find("FAIL") != std::string::npos);
}

TEST_CASE("topology of the IFA") {
    const auto m = ifa(TrapPlacement::B);
    const auto t = Topology::build(m);
    CHECK(t.start_node.size() == m.segments.size());
    int grounded = 0;
    for (std::size_t n = 0; n < t.nodes.size(); ++n) grounded += t.grounded[n];
    CHECK(grounded == 2);  // short pin and feed foot
    // Arm/branch junction has three segments.
    bool t_junction = false;
    for (std::size_t n = 0; n < t.nodes.size(); ++n) t_junction = t_junction || t.degree(int(n)) == 3;
    CHECK(t_junction);
}

TEST_CASE("effective permittivity closed forms") {
    SubstrateSpec s;
    s.eps_r = 7.0;
    CHECK(effective_permittivity_scale(s) == 0.5);
    s.eps_r = 4.3;
    CHECK(effective_permittivity_scale(s) == doctest::Approx(0.6143).epsilon(1e-4));
}

TEST_CASE("arm length and degenerate trap position") {
    const auto m = ifa(TrapPlacement::B);
    double arm = 0.0;
    const double h = 11e-3 * 1.5;
    for (const auto& s : m.segments)
        if (std::abs(s.start.z - h) < 1e-12 && std::abs(s.end.z - h) < 1e-12) arm += s.length();
    CHECK(arm == doctest::Approx(59.4e-3 * 1.5).epsilon(1e-12));
    AntennaParams p;
    p.trap_position_fraction = 0.0;
    CHECK_THROWS_AS(build_ifa_mesh(p, {}, {}, circuit::TrapSpec::reference()), ValidationError);
}

TEST_CASE("A and B with equal totals have equal conductor length") {
    AntennaParams b;
    b.config = TrapPlacement::B;
    b.trap_position_fraction = 0.6;
    b.extension_length = 10e-3;
    b.branch_drop = 4e-3;
    AntennaParams a = b;
    a.config = TrapPlacement::A;
    a.trap_position_fraction = 0.9;
    // A: s_a * arm + ext_a = arm + ext_b.
    a.extension_length = b.footprint_length * (1.0 - a.trap_position_fraction) + b.extension_length;
    const auto trap = circuit::TrapSpec::reference();
    const auto ma = build_ifa_mesh(a, {}, {}, trap), mb = build_ifa_mesh(b, {}, {}, trap);
    CHECK(ma.total_length() == doctest::Approx(mb.total_length()).epsilon(1e-12));
    CHECK(ma.loads.begin()->first != mb.loads.begin()->first);
}

TEST_CASE("stretched segment is named") {
    auto m = build_dipole(0.15, 1e-3, 10);
    m.segments[9].end.z = m.segments[9].start.z + c0 / 1e9 / 5.0;
    const auto report = validate_mesh(m, 1e9);
    const auto* c = report.find("electrical_length");
    REQUIRE(c);
    CHECK_FALSE(c->passed);
    CHECK(c->offending == std::vector<int>{9});
}

}  // TEST_SUITE
