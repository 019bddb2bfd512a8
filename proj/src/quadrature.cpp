#include "trapant/quadrature.hpp"

#include <cmath>

#include "trapant/constants.hpp"
#include "trapant/errors.hpp"

namespace trapant {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("Gauss-Legendre order must be >= 1");
    GaussRule r;
    r.nodes.resize(std::size_t(n));
    r.weights.resize(std::size_t(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[std::size_t(i)] = -x;
        r.nodes[std::size_t(n - 1 - i)] = x;
        r.weights[std::size_t(i)] = w;
        r.weights[std::size_t(n - 1 - i)] = w;
    }
    if (n % 2) r.nodes[std::size_t(n / 2)] = 0.0;
    return r;
}

GaussRule gauss_legendre01(int n) {
    GaussRule r = gauss_legendre(n);
    for (auto& x : r.nodes) x = 0.5 * (x + 1.0);
    for (auto& w : r.weights) w *= 0.5;
    return r;
}

}  // namespace trapant
