#include "kcov/geometry.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

#include "quadrature.hpp"

namespace kcov {

namespace {

double signed_area(const std::vector<Point>& v) {
    double a = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) a += cross(v[i], v[(i + 1) % n]);
    return 0.5 * a;
}

// Distance from b to the line through a and c (or to a when a == c).
double offset_from_chord(Point a, Point b, Point c) {
    const Point ac = c - a;
    const double len = norm(ac);
    if (len <= kVertexMergeTol) return distance(a, b);
    return std::abs(cross(ac, b - a)) / len;
}

std::vector<Point> merge_vertices(std::vector<Point> v) {
    bool changed = true;
    while (changed && v.size() >= 3) {
        changed = false;
        std::vector<Point> out;
        out.reserve(v.size());
        for (const Point& p : v) {
            if (out.empty() || distance(out.back(), p) > kVertexMergeTol) out.push_back(p);
        }
        while (out.size() > 1 && distance(out.front(), out.back()) <= kVertexMergeTol) out.pop_back();
        if (out.size() != v.size()) changed = true;
        v = std::move(out);
        if (v.size() < 3) break;
        for (std::size_t i = 0; i < v.size() && v.size() >= 3; ++i) {
            const std::size_t n = v.size();
            const Point a = v[(i + n - 1) % n];
            const Point c = v[(i + 1) % n];
            if (offset_from_chord(a, v[i], c) <= kVertexMergeTol) {
                v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
    return v;
}

struct Triangle {
    Point a, b, c;
};

template <class Fn>
void for_each_fan_triangle(const ConvexPolygon& poly, Fn&& fn) {
    const auto& v = poly.vertices();
    for (std::size_t i = 1; i + 1 < v.size(); ++i) fn(Triangle{v[0], v[i], v[i + 1]});
}

// Fixed-order quadrature of f over a triangle: the triangle is cut into m^2
// congruent pieces, m chosen from the smallest density length scale, and each
// piece is integrated with the degree-7 conical product rule.
template <class Fn>
double integrate_triangle(const Triangle& t, double length_scale, Fn&& f) {
    const double edge = std::max({distance(t.a, t.b), distance(t.b, t.c), distance(t.c, t.a)});
    int m = static_cast<int>(std::ceil(2.0 * edge / length_scale));
    m = std::clamp(m, 1, 64);
    const Point e1 = (1.0 / m) * (t.b - t.a);
    const Point e2 = (1.0 / m) * (t.c - t.a);
    auto node = [&](int i, int j) { return t.a + static_cast<double>(i) * e1 + static_cast<double>(j) * e2; };
    const auto& rule = detail::triangle_rule();
    double total = 0.0;
    auto piece = [&](Point a, Point b, Point c) {
        const double jac = std::abs(cross(b - a, c - a));  // twice the area
        double s = 0.0;
        for (const auto& n : rule) s += n.weight * f(a + n.u * (b - a) + n.v * (c - a));
        total += jac * s;
    };
    for (int i = 0; i < m; ++i) {
        for (int j = 0; i + j < m; ++j) {
            piece(node(i, j), node(i + 1, j), node(i, j + 1));
            if (i + j < m - 1) piece(node(i + 1, j), node(i + 1, j + 1), node(i, j + 1));
        }
    }
    return total;
}

template <class Fn>
double integrate_polygon(const ConvexPolygon& poly, const DensityField& phi, Fn&& f) {
    double total = 0.0;
    const double scale = phi.min_sigma();
    for_each_fan_triangle(poly, [&](const Triangle& t) {
        total += integrate_triangle(t, scale, [&](Point q) { return f(q) * phi(q); });
    });
    return total;
}

// Closed-form second moments of a uniform polygon about the origin.
struct AreaMoments {
    double area = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
};

AreaMoments area_moments(const std::vector<Point>& v, Point shift) {
    AreaMoments m;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        const Point a = v[i] - shift;
        const Point b = v[(i + 1) % n] - shift;
        const double c = cross(a, b);
        m.area += c;
        m.sx += (a.x + b.x) * c;
        m.sy += (a.y + b.y) * c;
        m.sxx += (a.x * a.x + a.x * b.x + b.x * b.x) * c;
        m.syy += (a.y * a.y + a.y * b.y + b.y * b.y) * c;
    }
    m.area *= 0.5;
    m.sx /= 6.0;
    m.sy /= 6.0;
    m.sxx /= 12.0;
    m.syy /= 12.0;
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexPolygon

ConvexPolygon::ConvexPolygon(std::vector<Point> vertices) {
    if (vertices.size() < 3) return;
    if (signed_area(vertices) < 0.0) std::reverse(vertices.begin(), vertices.end());
    vertices = merge_vertices(std::move(vertices));
    if (vertices.size() < 3 || signed_area(vertices) <= 0.0) return;
    vertices_ = std::move(vertices);
}

ConvexPolygon ConvexPolygon::rectangle(double x0, double y0, double x1, double y1) {
    return ConvexPolygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

double ConvexPolygon::area() const { return signed_area(vertices_); }

double ConvexPolygon::perimeter() const {
    double p = 0.0;
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) p += distance(vertices_[i], vertices_[(i + 1) % n]);
    return p;
}

double ConvexPolygon::diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        for (std::size_t j = i + 1; j < vertices_.size(); ++j) d = std::max(d, distance(vertices_[i], vertices_[j]));
    return d;
}

bool ConvexPolygon::contains(Point q, double tol) const {
    if (vertices_.empty()) return false;
    return inside_margin(q) >= -tol;
}

double ConvexPolygon::inside_margin(Point q) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
        const Point a = vertices_[i];
        const Point e = vertices_[(i + 1) % n] - a;
        m = std::min(m, cross(e, q - a) / norm(e));
    }
    return m;
}

ConvexPolygon::Box ConvexPolygon::bounds() const {
    Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Point& p : vertices_) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

// ---------------------------------------------------------------------------
// DensityField

DensityField DensityField::uniform(double value) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw std::invalid_argument("uniform density must be finite and >= 0");
    DensityField f;
    f.kind_ = Uniform{value};
    return f;
}

DensityField DensityField::gaussian_mixture(Mixture components) {
    if (components.empty()) throw std::invalid_argument("gaussian mixture needs at least one component");
    for (const auto& c : components) {
        if (!(c.sigma > 0.0) || !(c.weight > 0.0))
            throw std::invalid_argument("gaussian component needs sigma > 0 and weight > 0");
    }
    DensityField f;
    f.kind_ = std::move(components);
    return f;
}

double DensityField::operator()(Point q) const {
    if (const auto* u = std::get_if<Uniform>(&kind_)) return u->value;
    double v = 0.0;
    for (const auto& c : std::get<Mixture>(kind_)) {
        const double s2 = c.sigma * c.sigma;
        v += c.weight * std::exp(-squared_distance(q, c.mean) / (2.0 * s2));
    }
    return v;
}

double DensityField::uniform_value() const { return std::get<Uniform>(kind_).value; }

const DensityField::Mixture& DensityField::components() const { return std::get<Mixture>(kind_); }

double DensityField::min_sigma() const {
    if (is_uniform()) return std::numeric_limits<double>::infinity();
    double s = std::numeric_limits<double>::infinity();
    for (const auto& c : components()) s = std::min(s, c.sigma);
    return s;
}

// ---------------------------------------------------------------------------
// GridRegion

std::size_t GridRegion::count() const {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
}

std::vector<Point> GridRegion::extreme_corners() const {
    std::vector<Point> pts;
    for (int iy = 0; iy < ny; ++iy) {
        int lo = -1, hi = -1;
        for (int ix = 0; ix < nx; ++ix) {
            if (marked(ix, iy)) {
                if (lo < 0) lo = ix;
                hi = ix;
            }
        }
        if (lo < 0) continue;
        const double y0 = origin.y + iy * cell_size;
        const double y1 = origin.y + (iy + 1) * cell_size;
        const double x0 = origin.x + lo * cell_size;
        const double x1 = origin.x + (hi + 1) * cell_size;
        pts.insert(pts.end(), {{x0, y0}, {x0, y1}, {x1, y0}, {x1, y1}});
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Integration

Point Moments::centroid() const {
    if (!(mass > 0.0)) throw GeometryError("degenerate region");
    return {mx / mass, my / mass};
}

Moments moments(const ConvexPolygon& region, const DensityField& phi) {
    if (region.empty()) return {};
    if (phi.is_uniform()) {
        const double rho = phi.uniform_value();
        const AreaMoments a = area_moments(region.vertices(), {});
        return {rho * a.area, rho * a.sx, rho * a.sy};
    }
    // Moments are taken about the first vertex to limit cancellation.
    const Point ref = region.vertices().front();
    Moments m;
    m.mass = integrate_polygon(region, phi, [](Point) { return 1.0; });
    const double dx = integrate_polygon(region, phi, [&](Point q) { return q.x - ref.x; });
    const double dy = integrate_polygon(region, phi, [&](Point q) { return q.y - ref.y; });
    m.mx = dx + ref.x * m.mass;
    m.my = dy + ref.y * m.mass;
    return m;
}

Moments moments(std::span<const ConvexPolygon> regions, const DensityField& phi) {
    Moments total;
    for (const auto& r : regions) total += moments(r, phi);
    return total;
}

double mass(const ConvexPolygon& region, const DensityField& phi) {
    if (region.empty()) return 0.0;
    if (phi.is_uniform()) return phi.uniform_value() * region.area();
    return integrate_polygon(region, phi, [](Point) { return 1.0; });
}

Point centroid(const ConvexPolygon& region, const DensityField& phi) { return moments(region, phi).centroid(); }

double polar_moment(const ConvexPolygon& region, Point center, const DensityField& phi) {
    if (region.empty()) return 0.0;
    if (phi.is_uniform()) {
        const AreaMoments a = area_moments(region.vertices(), center);
        return phi.uniform_value() * (a.sxx + a.syy);
    }
    return integrate_polygon(region, phi, [&](Point q) { return squared_distance(q, center); });
}

double mass(const GridRegion& region, const DensityField& phi) {
    const double area = region.cell_size * region.cell_size;
    double m = 0.0;
    for (int iy = 0; iy < region.ny; ++iy)
        for (int ix = 0; ix < region.nx; ++ix)
            if (region.marked(ix, iy)) m += phi(region.cell_center(ix, iy)) * area;
    return m;
}

Point centroid(const GridRegion& region, const DensityField& phi) {
    const double area = region.cell_size * region.cell_size;
    Moments m;
    for (int iy = 0; iy < region.ny; ++iy) {
        for (int ix = 0; ix < region.nx; ++ix) {
            if (!region.marked(ix, iy)) continue;
            const Point c = region.cell_center(ix, iy);
            const double w = phi(c) * area;
            m.mass += w;
            m.mx += w * c.x;
            m.my += w * c.y;
        }
    }
    return m.centroid();
}

double polar_moment(const GridRegion& region, Point center, const DensityField& phi) {
    const double area = region.cell_size * region.cell_size;
    double j = 0.0;
    for (int iy = 0; iy < region.ny; ++iy) {
        for (int ix = 0; ix < region.nx; ++ix) {
            if (!region.marked(ix, iy)) continue;
            const Point c = region.cell_center(ix, iy);
            j += phi(c) * area * squared_distance(c, center);
        }
    }
    return j;
}

// ---------------------------------------------------------------------------
// Clipping

ConvexPolygon clip(const ConvexPolygon& poly, const Halfspace& hs) {
    if (poly.empty()) return {};
    const Point n = hs.o - hs.p;
    const double len = norm(n);
    if (len == 0.0) throw std::invalid_argument("halfspace needs p != o");
    const Point mid = 0.5 * (hs.p + hs.o);
    // Signed distance to the bisector, positive on o's side.
    auto side = [&](Point q) { return dot(q - mid, n) / len; };

    const auto& v = poly.vertices();
    std::vector<Point> out;
    out.reserve(v.size() + 1);
    bool all_inside = true;
    for (std::size_t i = 0, cnt = v.size(); i < cnt; ++i) {
        const Point a = v[i];
        const Point b = v[(i + 1) % cnt];
        const double sa = side(a);
        const double sb = side(b);
        const bool ina = sa <= kVertexMergeTol;
        if (ina) out.push_back(a);
        else all_inside = false;
        if ((sa < -kVertexMergeTol && sb > kVertexMergeTol) || (sa > kVertexMergeTol && sb < -kVertexMergeTol)) {
            const double t = sa / (sa - sb);
            out.push_back(a + t * (b - a));
        }
    }
    if (all_inside) return poly;
    return ConvexPolygon(std::move(out));
}

// ---------------------------------------------------------------------------
// Minimum enclosing circle

namespace {

ClosedBall circle_two(Point a, Point b) { return {0.5 * (a + b), 0.5 * distance(a, b)}; }

ClosedBall circle_three(Point a, Point b, Point c) {
    const Point ab = b - a;
    const Point ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    if (std::abs(d) <= 1e-18 * std::max(1.0, dot(ab, ab) * dot(ac, ac))) {
        ClosedBall best = circle_two(a, b);
        for (const ClosedBall& cand : {circle_two(a, c), circle_two(b, c)})
            if (cand.radius > best.radius) best = cand;
        return best;
    }
    const double ab2 = dot(ab, ab);
    const double ac2 = dot(ac, ac);
    const Point off{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
    return {a + off, norm(off)};
}

bool outside(const ClosedBall& c, Point p) { return distance(c.center, p) > c.radius * (1.0 + 1e-12) + 1e-12; }

}  // namespace

ClosedBall min_enclosing_circle(std::span<const Point> points) {
    if (points.empty()) throw std::invalid_argument("min_enclosing_circle needs at least one point");
    std::vector<Point> pts(points.begin(), points.end());
    // Fixed-seed Fisher-Yates keeps the expected linear time and the result deterministic.
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    for (std::size_t i = pts.size(); i > 1; --i) std::swap(pts[i - 1], pts[rng() % i]);

    ClosedBall c{pts[0], 0.0};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (!outside(c, pts[i])) continue;
        c = {pts[i], 0.0};
        for (std::size_t j = 0; j < i; ++j) {
            if (!outside(c, pts[j])) continue;
            c = circle_two(pts[i], pts[j]);
            for (std::size_t l = 0; l < j; ++l)
                if (outside(c, pts[l])) c = circle_three(pts[i], pts[j], pts[l]);
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// to-ball-boundary

Point project_to_ball(Point p, const ClosedBall& ball) {
    const double d = distance(p, ball.center);
    if (d <= ball.radius) return p;
    return ball.center + (ball.radius / d) * (p - ball.center);
}

Point tbb(Point p, double delta, Point q, double r) {
    if (p == q) return p;
    const Point proj = project_to_ball(p, {q, r});
    if (distance(p, proj) >= delta) {
        const Point dir = q - p;
        return p + (delta / norm(dir)) * dir;
    }
    return proj;
}

}  // namespace kcov
