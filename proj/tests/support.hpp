#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "kcov/geometry.hpp"

namespace kcov::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline std::vector<Point> random_points(std::mt19937_64& rng, int n, double lo, double hi) {
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) pts.push_back({uniform(rng, lo, hi), uniform(rng, lo, hi)});
    return pts;
}

/// Random convex polygon: hull of random points on a circle.
inline ConvexPolygon random_convex(std::mt19937_64& rng, Point c, double r, int count) {
    std::vector<double> angles;
    for (int i = 0; i < count; ++i) angles.push_back(uniform(rng, 0.0, 6.283185307179586));
    std::sort(angles.begin(), angles.end());
    std::vector<Point> v;
    for (double a : angles) v.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    return ConvexPolygon(v);
}

/// Midpoint rule over the bounding box of `poly` with res x res samples.
template <class Phi, class F>
double midpoint_integral(const ConvexPolygon& poly, int res, Phi phi, F f) {
    const auto b = poly.bounds();
    const double hx = (b.max_x - b.min_x) / res;
    const double hy = (b.max_y - b.min_y) / res;
    double sum = 0.0;
    for (int iy = 0; iy < res; ++iy) {
        const double y = b.min_y + (iy + 0.5) * hy;
        for (int ix = 0; ix < res; ++ix) {
            const Point q{b.min_x + (ix + 0.5) * hx, y};
            if (poly.contains(q)) sum += phi(q) * f(q);
        }
    }
    return sum * hx * hy;
}

}  // namespace kcov::testing
