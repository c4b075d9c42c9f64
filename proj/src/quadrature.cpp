#include "quadrature.hpp"

#include <cmath>
#include <numbers>

namespace kcov::detail {

std::vector<LineNode> gauss_legendre(int n) {
    std::vector<LineNode> nodes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Map from [-1, 1] to [0, 1].
        nodes[static_cast<std::size_t>(i)] = {0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)};
    }
    return nodes;
}

const std::vector<TriangleNode>& triangle_rule() {
    static const std::vector<TriangleNode> rule = [] {
        std::vector<TriangleNode> r;
        const auto radial = gauss_legendre(5);
        const auto angular = gauss_legendre(4);
        for (const auto& s : radial)
            for (const auto& t : angular)
                r.push_back({s.x * (1.0 - t.x), s.x * t.x, s.weight * t.weight * s.x});
        return r;
    }();
    return rule;
}

}  // namespace kcov::detail
