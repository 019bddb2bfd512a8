#pragma once

#include <vector>

namespace trapant {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
GaussRule gauss_legendre(int n);

/// Same rule mapped to [0, 1].
GaussRule gauss_legendre01(int n);

}  // namespace trapant
