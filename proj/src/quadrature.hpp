#pragma once

#include <vector>

namespace kcov::detail {

struct TriangleNode {
    double u, v, weight;
};

/// Degree-7 rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
/// Conical product of 5-point and 4-point Gauss-Legendre rules.
const std::vector<TriangleNode>& triangle_rule();

struct LineNode {
    double x, weight;
};

/// Gauss-Legendre nodes on [0, 1] (weights sum to 1).
std::vector<LineNode> gauss_legendre(int n);

}  // namespace kcov::detail
