#include <cmath>

#include "doctest.h"
#include "trapant/quadrature.hpp"

using namespace trapant;

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n = 1; n <= 16; ++n) {
        const auto r = gauss_legendre(n);
        REQUIRE(r.nodes.size() == std::size_t(n));
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
            const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
            CAPTURE(n);
            CAPTURE(p);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("nodes are symmetric and ordered, weights positive") {
    const auto r = gauss_legendre(9);
    for (int i = 0; i < 9; ++i) {
        CHECK(r.weights[i] > 0.0);
        CHECK(r.nodes[i] == doctest::Approx(-r.nodes[8 - i]).epsilon(1e-14));
        if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
    CHECK(r.nodes[4] == doctest::Approx(0.0));
}

TEST_CASE("unit-interval rule") {
    const auto r = gauss_legendre01(6);
    double w = 0.0, m = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        CHECK(r.nodes[i] > 0.0);
        CHECK(r.nodes[i] < 1.0);
        w += r.weights[i];
        m += r.weights[i] * std::exp(r.nodes[i]);
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
}

}  // TEST_SUITE
