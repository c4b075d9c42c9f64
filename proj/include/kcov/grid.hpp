#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kcov/geometry.hpp"

namespace kcov {

/// Discretization of the domain's bounding box shared by every uncertain-cell
/// computation of one simulation. Cell weights are phi(center) * h^2.
struct GridFrame {
    Point origin;
    double cell_size = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> weight;
    /// Cell lies entirely inside the domain.
    std::vector<std::uint8_t> inner;
    /// Cell may intersect the domain (conservative superset).
    std::vector<std::uint8_t> outer;
    /// Cell center lies inside the domain.
    std::vector<std::uint8_t> center_inside;
    /// Per block of kGridBlock x kGridBlock cells (row-major over blocks):
    /// moments of the inner and of the outer cells, summed in row-major order.
    std::vector<Moments> block_inner;
    std::vector<Moments> block_outer;

    int blocks_x() const;
    int blocks_y() const;

    std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    Point cell_center(int ix, int iy) const {
        return {origin.x + (ix + 0.5) * cell_size, origin.y + (iy + 0.5) * cell_size};
    }
    /// Half the cell diagonal: the largest distance from a cell center to any point of the cell.
    double margin() const;
    GridRegion region(std::vector<std::uint8_t> mask) const;
};

/// Side length, in cells, of the blocks that classification skips through.
inline constexpr int kGridBlock = 8;

/// Square cells with h = max(width, height) / resolution over the domain's bounding box.
GridFrame make_grid_frame(const ConvexPolygon& domain, const DensityField& phi, int resolution);

/// Weighted moments of a mask under the frame's cell weights, summed in row-major order.
Moments mask_moments(const GridFrame& frame, std::span<const std::uint8_t> mask);

/// Outer corners of the first and last marked cell on each row.
std::vector<Point> mask_extreme_corners(const GridFrame& frame, std::span<const std::uint8_t> mask);

/// Sites as structure-of-arrays, the layout the classification kernels consume.
struct SiteArrays {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> r;

    std::size_t size() const { return x.size(); }
    void push_back(Point p, double radius) {
        x.push_back(p.x);
        y.push_back(p.y);
        r.push_back(radius);
    }
};

enum class KernelIsa { scalar, avx2 };

bool isa_available(KernelIsa isa);
/// Widest instruction set usable on this machine; KCOV_SIMD=scalar forces the reference kernel.
KernelIsa preferred_isa();
const char* isa_name(KernelIsa isa);

/// Marks, per cell, membership in the owner's guaranteed (g) and
/// dual-guaranteed (dg) dominant cells. Classification happens at cell
/// corners with u_j = d_j + r_j and l_j = d_j - r_j:
///   a corner lies in gV_I when I = {j : u_j <= U_k} has exactly k members,
///   contains the owner, and l_j >= U_k for every j outside I (U_k is the
///   k-th smallest u);
///   the owner is certainly outranked at a corner by {j : u_j < l_owner}.
/// Each pairwise condition describes a convex set, so a cell whose four
/// corners share the same I lies entirely in gV_I (g), and a cell whose
/// corners share k certainly-closer agents lies entirely outside the true
/// dominant cell (not dg). g is further restricted to inner cells, dg to
/// outer cells. Requires sites.size() > k.
/// Optionally also returns the moments of both masks (block order, so equal to
/// mask_moments only up to rounding).
void classify_cells(const GridFrame& frame, const SiteArrays& sites, int owner, int k, std::span<std::uint8_t> g,
                    std::span<std::uint8_t> dg, KernelIsa isa, Moments* g_moments = nullptr,
                    Moments* dg_moments = nullptr);

}  // namespace kcov
