#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace kcov {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline double squared_distance(Point a, Point b) {
    const Point d = a - b;
    return d.x * d.x + d.y * d.y;
}

class GeometryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Tolerance used to merge duplicate and collinear polygon vertices.
inline constexpr double kVertexMergeTol = 1e-9;

/// Counter-clockwise convex polygon. Zero vertices encodes the empty set.
class ConvexPolygon {
  public:
    ConvexPolygon() = default;

    /// Normalizes orientation to CCW and merges near-duplicate and collinear
    /// vertices. Inputs that collapse to zero area become the empty polygon.
    explicit ConvexPolygon(std::vector<Point> vertices);

    static ConvexPolygon rectangle(double x0, double y0, double x1, double y1);

    const std::vector<Point>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    bool empty() const { return vertices_.empty(); }

    double area() const;
    double perimeter() const;
    double diameter() const;
    bool contains(Point q, double tol = 0.0) const;
    /// Signed distance to the boundary: positive inside, negative outside
    /// (outside values are a lower bound in magnitude near corners).
    double inside_margin(Point q) const;

    struct Box {
        double min_x, min_y, max_x, max_y;
    };
    Box bounds() const;

  private:
    std::vector<Point> vertices_;
};

struct ClosedBall {
    Point center;
    double radius = 0.0;
};

/// Points at least as close to p as to o.
struct Halfspace {
    Point p;
    Point o;
};

struct GaussianBump {
    Point mean;
    double sigma = 1.0;
    double weight = 1.0;
};

/// Density over the domain: a constant, or an unnormalized Gaussian mixture
/// phi(q) = sum_i w_i exp(-|q - mu_i|^2 / (2 sigma_i^2)).
class DensityField {
  public:
    struct Uniform {
        double value = 1.0;
    };
    using Mixture = std::vector<GaussianBump>;

    DensityField() = default;
    static DensityField uniform(double value = 1.0);
    static DensityField gaussian_mixture(Mixture components);

    double operator()(Point q) const;
    bool is_uniform() const { return std::holds_alternative<Uniform>(kind_); }
    double uniform_value() const;
    const Mixture& components() const;
    double min_sigma() const;

  private:
    std::variant<Uniform, Mixture> kind_ = Uniform{};
};

/// Boolean mask over an axis-aligned grid of square cells.
struct GridRegion {
    Point origin;
    double cell_size = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<std::uint8_t> mask;

    std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx + ix; }
    Point cell_center(int ix, int iy) const {
        return {origin.x + (ix + 0.5) * cell_size, origin.y + (iy + 0.5) * cell_size};
    }
    bool marked(int ix, int iy) const { return mask[index(ix, iy)] != 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    /// Corner points of marked cells sufficient for hull-type queries: the
    /// outer corners of the first and last marked cell on every row.
    std::vector<Point> extreme_corners() const;
};

double mass(const ConvexPolygon& region, const DensityField& phi);
double mass(const GridRegion& region, const DensityField& phi);

/// Throws GeometryError("degenerate region") when the mass is zero.
Point centroid(const ConvexPolygon& region, const DensityField& phi);
Point centroid(const GridRegion& region, const DensityField& phi);

/// Integral of |q - center|^2 phi(q) over the region.
double polar_moment(const ConvexPolygon& region, Point center, const DensityField& phi);
double polar_moment(const GridRegion& region, Point center, const DensityField& phi);

/// Mass together with first moments; the composition helpers below work on these.
struct Moments {
    double mass = 0.0;
    double mx = 0.0;
    double my = 0.0;

    Moments& operator+=(const Moments& o) {
        mass += o.mass;
        mx += o.mx;
        my += o.my;
        return *this;
    }
    /// Throws GeometryError("degenerate region") when mass is zero.
    Point centroid() const;
};

Moments moments(const ConvexPolygon& region, const DensityField& phi);
Moments moments(std::span<const ConvexPolygon> regions, const DensityField& phi);

ConvexPolygon clip(const ConvexPolygon& poly, const Halfspace& hs);

/// Smallest circle enclosing all points. Throws std::invalid_argument on empty input.
ClosedBall min_enclosing_circle(std::span<const Point> points);

/// To-ball-boundary map: step at most delta from p toward q, stopping on the
/// boundary of B(q, r). Points inside the ball stay put.
Point tbb(Point p, double delta, Point q, double r);

/// Orthogonal projection onto a closed ball.
Point project_to_ball(Point p, const ClosedBall& ball);

}  // namespace kcov
