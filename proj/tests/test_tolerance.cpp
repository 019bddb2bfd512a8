#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "trapant/errors.hpp"
#include "trapant/geometry.hpp"
#include "trapant/tolerance.hpp"

using namespace trapant;
using namespace trapant::tolerance;

namespace {

geometry::SegmentMesh small_ifa(geometry::TrapPlacement cfg = geometry::TrapPlacement::B) {
    geometry::AntennaParams p;
    p.config = cfg;
    p.length_scale = 1.5;
    return geometry::build_ifa_mesh(p, {}, {}, circuit::TrapSpec::reference());
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (double f = lo; f <= hi + 1.0; f += step) g.push_back(f);
    return g;
}

ToleranceReport synthetic(double worst) {
    ToleranceReport r;
    r.bands = default_bands();
    for (const auto& k : circuit::CornerAssignment::canonical())
        r.corners.push_back({k.name(), {{worst - 3.0, 868e6, -20.0}, {worst, 915e6, -25.0}}});
    return r;
}

}  // namespace

TEST_SUITE("tolerance") {

TEST_CASE("default bands and validation") {
    const auto b = default_bands();
    REQUIRE(b.size() == 2);
    CHECK(b[0].f_lo == 865e6);
    CHECK(b[0].f_hi == 870e6);
    CHECK(b[1].f_lo == 902e6);
    CHECK(b[1].f_hi == 928e6);
    CHECK_THROWS_AS((BandSpec{"x", 900e6, 900e6}).validate(), ValidationError);
    CHECK_THROWS_AS((BandSpec{"x", -1.0, 900e6}).validate(), ValidationError);
}

TEST_CASE("band edges are merged into the grid") {
    const auto g = grid(860e6, 930e6, 3e6);
    const auto m = merge_band_edges(g, default_bands());
    for (double e : {865e6, 870e6, 902e6, 928e6}) CHECK(std::find(m.begin(), m.end(), e) != m.end());
    for (std::size_t i = 1; i < m.size(); ++i) CHECK(m[i] > m[i - 1]);
    // Edges already on the grid are not duplicated.
    const auto g2 = grid(860e6, 930e6, 1e6);
    CHECK(merge_band_edges(g2, default_bands()).size() == g2.size());
}

TEST_CASE("deviation draws follow the documented generator") {
    const auto d = sample_deviations(50, 42, Distribution::uniform);
    std::mt19937_64 rng(42);
    auto u = [&] { return double(rng() >> 11) / 9007199254740992.0; };
    for (const auto& x : d) {
        CHECK(x.ind1 == 2.0 * u() - 1.0);
        CHECK(x.ind2 == 2.0 * u() - 1.0);
        CHECK(x.cap == 2.0 * u() - 1.0);
    }
    const auto c = sample_deviations(50, 42, Distribution::corner_weighted);
    rng.seed(42);
    for (const auto& x : c) {
        CHECK(x.ind1 == std::sin(3.141592653589793 * (u() - 0.5)));
        CHECK(x.ind2 == std::sin(3.141592653589793 * (u() - 0.5)));
        CHECK(x.cap == std::sin(3.141592653589793 * (u() - 0.5)));
    }
}

TEST_CASE("deviation draws are bounded and reproducible") {
    const auto a = sample_deviations(4000, 9, Distribution::uniform);
    const auto b = sample_deviations(4000, 9, Distribution::uniform);
    const auto w = sample_deviations(4000, 9, Distribution::corner_weighted);
    int edge_u = 0, edge_w = 0;
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ind1 == b[i].ind1);
        for (double v : {a[i].ind1, a[i].ind2, a[i].cap, w[i].ind1, w[i].ind2, w[i].cap}) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
        edge_u += std::abs(a[i].cap) > 0.9;
        edge_w += std::abs(w[i].cap) > 0.9;
        mean += a[i].ind1;
    }
    CHECK(std::abs(mean / 4000.0) < 0.05);
    CHECK(edge_w > 2 * edge_u);
    CHECK(sample_deviations(3, 10, Distribution::uniform)[0].ind1 != a[0].ind1);
}

TEST_CASE("distribution names") {
    CHECK(distribution_from_string(to_string(Distribution::uniform)) == Distribution::uniform);
    CHECK(to_string(Distribution::corner_weighted) == "corner-weighted");
    CHECK_THROWS_AS(distribution_from_string("gaussian"), ValidationError);
}

TEST_CASE("pass/fail judgement on constructed reports") {
    auto r = synthetic(-10.0);
    CHECK(pass_fail(r, -10.0));  // inclusive threshold
    CHECK(r.margin_db() == doctest::Approx(0.0));
    r = synthetic(-9.99);
    CHECK_FALSE(pass_fail(r, -10.0));
    CHECK(r.worst_rl(1) == doctest::Approx(-9.99));
    CHECK(r.worst_rl(0) == doctest::Approx(-12.99));
    r.corners[3].bands[0].dip_f = 871e6;
    CHECK(r.max_dip_shift(0) == doctest::Approx(3e6));
    CHECK(r.max_dip_shift(1) == 0.0);
    r.complete = false;
    CHECK_THROWS_AS(pass_fail(r), ValidationError);
    r = synthetic(-15.0);
    r.corners.pop_back();
    CHECK_THROWS_AS(pass_fail(r), ValidationError);
}

TEST_CASE("zero-tolerance corners equal the nominal bit for bit") {
    const auto mesh = small_ifa();
    const auto trap = circuit::TrapSpec::reference().with_tolerance_scale(0.0);
    const auto r = corner_analysis(mesh, trap, default_bands(), grid(840e6, 950e6, 2e6));
    REQUIRE(r.complete);
    REQUIRE(r.corners.size() == 5);
    for (std::size_t c = 1; c < 5; ++c)
        for (std::size_t b = 0; b < 2; ++b) {
            CHECK(r.corners[c].bands[b].worst_rl_db == r.corners[0].bands[b].worst_rl_db);
            CHECK(r.corners[c].bands[b].dip_f == r.corners[0].bands[b].dip_f);
        }
    CHECK(r.max_dip_shift(0) == 0.0);
    CHECK(r.verdict == pass_fail(r));
}

TEST_CASE("corner analysis agrees with direct sweeps") {
    const auto mesh = small_ifa();
    const auto trap = circuit::TrapSpec::reference();
    const auto g = grid(840e6, 950e6, 2e6);
    const auto r = corner_analysis(mesh, trap, default_bands(), g);
    REQUIRE(r.complete);
    const solver::Solver s(mesh);
    const auto merged = merge_band_edges(g, default_bands());
    const auto corner = circuit::CornerAssignment::canonical()[2];
    const auto sweep = s.sweep(merged, corner.deviation());
    double worst = -1e9;
    for (const auto& x : sweep)
        if (x.f >= 902e6 && x.f <= 928e6) worst = std::max(worst, x.rl_db());
    CHECK(r.corners[2].corner == corner.name());
    CHECK(r.corners[2].bands[1].worst_rl_db == doctest::Approx(worst).epsilon(1e-9));
}

TEST_CASE("Monte Carlo is reproducible and stays inside the corner envelope") {
    const auto mesh = small_ifa();
    const auto trap = circuit::TrapSpec::reference();
    const auto g = grid(840e6, 950e6, 2e6);
    const auto a = monte_carlo(mesh, trap, default_bands(), g, 25, 5);
    const auto b = monte_carlo(mesh, trap, default_bands(), g, 25, 5);
    REQUIRE(a.complete);
    REQUIRE(a.monte_carlo);
    CHECK(to_json(a) == to_json(b));
    for (std::size_t k = 0; k < 2; ++k) {
        double lo = 1e12, hi = -1e12;
        for (const auto& c : a.corners) {
            lo = std::min(lo, c.bands[k].dip_f);
            hi = std::max(hi, c.bands[k].dip_f);
        }
        CHECK(a.monte_carlo->dip_min[k] >= lo - 1.0);
        CHECK(a.monte_carlo->dip_max[k] <= hi + 1.0);
        CHECK(a.monte_carlo->worst_rl[k] <= a.worst_rl(k) + 1e-9);
    }
    CHECK(a.monte_carlo->pass_rate >= 0.0);
    CHECK(a.monte_carlo->pass_rate <= 1.0);
    CHECK_THROWS_AS(monte_carlo(mesh, trap, default_bands(), g, 0, 5), DomainError);
}

TEST_CASE("analysis input checks") {
    const auto mesh = small_ifa();
    const auto trap = circuit::TrapSpec::reference();
    const std::vector<BandSpec> outside{{"x", 800e6, 810e6}};
    CHECK_THROWS_AS(corner_analysis(mesh, trap, outside, grid(840e6, 950e6, 5e6)), ValidationError);
    CHECK_THROWS_AS(corner_analysis(mesh, trap, {}, grid(840e6, 950e6, 5e6)), ValidationError);
    auto unloaded = mesh;
    unloaded.loads.clear();
    CHECK_THROWS_AS(corner_analysis(unloaded, trap, default_bands(), grid(840e6, 950e6, 5e6)), ValidationError);
}

TEST_CASE("comparison rejects untuned designs") {
    const Design a{"A", small_ifa(geometry::TrapPlacement::A), circuit::TrapSpec::reference()};
    const Design b{"B", small_ifa(), circuit::TrapSpec::reference()};
    const std::vector<BandSpec> far{{"edge", 946e6, 950e6}};
    CHECK_THROWS_AS(compare_configs(a, b, far, grid(840e6, 950e6, 2e6)), SynthesisError);
}

TEST_CASE("JSON report layout") {
    auto r = synthetic(-12.0);
    r.corners[1].bands[0].dip_f = std::nan("");
    r.verdict = pass_fail(r);
    const auto j = nlohmann::json::parse(to_json(r));
    CHECK(j["verdict"] == "pass");
    CHECK(j["corners"].size() == 5);
    CHECK(j["corners"][0]["corner"] == "nominal");
    CHECK(j["corners"][1]["bands"][0]["dip_hz"].is_null());
    CHECK(j["margin_db"].get<double>() == doctest::Approx(2.0));
    CHECK(j["bands"][1]["f_hi_hz"].get<double>() == 928e6);
    CHECK(to_json(r) == to_json(r));
    CHECK(to_string(Thesis::b_smaller) == "B smaller");
}

TEST_CASE("pass/fail is monotone in the threshold") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-25.0, -2.0);
    for (int i = 0; i < 100; ++i) {
        ToleranceReport r = synthetic(-12.0);
        for (auto& c : r.corners)
            for (auto& b : c.bands) b.worst_rl_db = u(rng);
        bool was = false;
        for (double thr = -30.0; thr <= 0.0; thr += 0.5) {
            const bool now = pass_fail(r, thr);
            CHECK((!was || now));
            was = now;
        }
    }
    CHECK(pass_fail(synthetic(-12.0)));
    auto one = synthetic(-12.0);
    one.corners[2].bands[1].worst_rl_db = -9.5;
    CHECK_FALSE(pass_fail(one));
}

TEST_CASE("unattainable threshold fails") {
    const auto r = corner_analysis(small_ifa(), circuit::TrapSpec::reference(), default_bands(),
                                   grid(840e6, 950e6, 5e6), {-40.0, {}});
    REQUIRE(r.complete);
    CHECK_FALSE(r.verdict);
    CHECK(r.threshold_db == -40.0);
}

TEST_CASE("single zero-tolerance sample equals the nominal corner") {
    const auto trap = circuit::TrapSpec::reference().with_tolerance_scale(0.0);
    const auto r = monte_carlo(small_ifa(), trap, default_bands(), grid(840e6, 950e6, 5e6), 1, 3);
    REQUIRE(r.monte_carlo);
    for (std::size_t b = 0; b < 2; ++b) {
        CHECK(r.monte_carlo->dip_min[b] == r.corners[0].bands[b].dip_f);
        CHECK(r.monte_carlo->worst_rl[b] == r.corners[0].bands[b].worst_rl_db);
    }
}

}  // TEST_SUITE
