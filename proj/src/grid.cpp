#include "kcov/grid.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "kernels.hpp"

namespace kcov {

int GridFrame::blocks_x() const { return (nx + kGridBlock - 1) / kGridBlock; }
int GridFrame::blocks_y() const { return (ny + kGridBlock - 1) / kGridBlock; }

double GridFrame::margin() const { return cell_size / std::sqrt(2.0); }

GridRegion GridFrame::region(std::vector<std::uint8_t> mask) const {
    GridRegion r;
    r.origin = origin;
    r.cell_size = cell_size;
    r.nx = nx;
    r.ny = ny;
    r.mask = std::move(mask);
    return r;
}

GridFrame make_grid_frame(const ConvexPolygon& domain, const DensityField& phi, int resolution) {
    if (domain.empty()) throw std::invalid_argument("grid frame needs a non-empty domain");
    if (resolution < 1) throw std::invalid_argument("grid resolution must be positive");
    const auto box = domain.bounds();
    const double w = box.max_x - box.min_x;
    const double hgt = box.max_y - box.min_y;
    GridFrame f;
    f.origin = {box.min_x, box.min_y};
    f.cell_size = std::max(w, hgt) / resolution;
    f.nx = std::max(1, static_cast<int>(std::ceil(w / f.cell_size - 1e-9)));
    f.ny = std::max(1, static_cast<int>(std::ceil(hgt / f.cell_size - 1e-9)));
    const std::size_t n = f.cells();
    f.weight.resize(n);
    f.inner.resize(n);
    f.outer.resize(n);
    f.center_inside.resize(n);
    const double area = f.cell_size * f.cell_size;
    const double m = f.margin();
    for (int iy = 0; iy < f.ny; ++iy) {
        for (int ix = 0; ix < f.nx; ++ix) {
            const std::size_t c = static_cast<std::size_t>(iy) * f.nx + ix;
            const Point center = f.cell_center(ix, iy);
            const double x0 = f.origin.x + ix * f.cell_size;
            const double y0 = f.origin.y + iy * f.cell_size;
            const double x1 = x0 + f.cell_size;
            const double y1 = y0 + f.cell_size;
            bool all_corners = true;
            for (Point corner : {Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}})
                all_corners = all_corners && domain.contains(corner, kVertexMergeTol);
            const double margin_in = domain.inside_margin(center);
            f.weight[c] = phi(center) * area;
            f.inner[c] = all_corners ? 1 : 0;
            f.outer[c] = margin_in >= -m ? 1 : 0;
            f.center_inside[c] = margin_in >= 0.0 ? 1 : 0;
        }
    }
    f.block_inner.resize(static_cast<std::size_t>(f.blocks_x()) * f.blocks_y());
    f.block_outer.resize(f.block_inner.size());
    for (int by = 0; by < f.blocks_y(); ++by) {
        for (int bx = 0; bx < f.blocks_x(); ++bx) {
            Moments in, out;
            for (int iy = by * kGridBlock; iy < std::min(f.ny, (by + 1) * kGridBlock); ++iy) {
                for (int ix = bx * kGridBlock; ix < std::min(f.nx, (bx + 1) * kGridBlock); ++ix) {
                    const std::size_t c = static_cast<std::size_t>(iy) * f.nx + ix;
                    const Point center = f.cell_center(ix, iy);
                    const double w = f.weight[c];
                    if (f.inner[c]) in += Moments{w, w * center.x, w * center.y};
                    if (f.outer[c]) out += Moments{w, w * center.x, w * center.y};
                }
            }
            f.block_inner[static_cast<std::size_t>(by) * f.blocks_x() + bx] = in;
            f.block_outer[static_cast<std::size_t>(by) * f.blocks_x() + bx] = out;
        }
    }
    return f;
}

Moments mask_moments(const GridFrame& frame, std::span<const std::uint8_t> mask) {
    if (mask.size() != frame.cells()) throw std::invalid_argument("mask_moments: mask size does not match the grid");
    Moments m;
    for (int iy = 0; iy < frame.ny; ++iy) {
        const double cy = frame.origin.y + (iy + 0.5) * frame.cell_size;
        const std::size_t row = static_cast<std::size_t>(iy) * frame.nx;
        const std::uint8_t* mrow = mask.data() + row;
        const double* wrow = frame.weight.data() + row;
        int lo = 0;
        int hi = frame.nx;
        while (lo < hi && !mrow[lo]) ++lo;
        while (hi > lo && !mrow[hi - 1]) --hi;
        if (lo == hi) continue;
        // Four interleaved partial sums, combined in a fixed order.
        double rm[4] = {0.0, 0.0, 0.0, 0.0};
        double rx[4] = {0.0, 0.0, 0.0, 0.0};
        for (int ix = lo; ix < hi; ++ix) {
            const double w = mrow[ix] ? wrow[ix] : 0.0;
            const double cx = frame.origin.x + (ix + 0.5) * frame.cell_size;
            rm[ix & 3] += w;
            rx[ix & 3] += w * cx;
        }
        const double mass = (rm[0] + rm[1]) + (rm[2] + rm[3]);
        m.mass += mass;
        m.mx += (rx[0] + rx[1]) + (rx[2] + rx[3]);
        m.my += mass * cy;
    }
    return m;
}

std::vector<Point> mask_extreme_corners(const GridFrame& frame, std::span<const std::uint8_t> mask) {
    std::vector<Point> pts;
    for (int iy = 0; iy < frame.ny; ++iy) {
        const std::uint8_t* row = mask.data() + static_cast<std::size_t>(iy) * frame.nx;
        int lo = 0;
        while (lo < frame.nx && !row[lo]) ++lo;
        if (lo == frame.nx) continue;
        int hi = frame.nx - 1;
        while (!row[hi]) --hi;
        const double y0 = frame.origin.y + iy * frame.cell_size;
        const double y1 = frame.origin.y + (iy + 1) * frame.cell_size;
        const double x0 = frame.origin.x + lo * frame.cell_size;
        const double x1 = frame.origin.x + (hi + 1) * frame.cell_size;
        pts.insert(pts.end(), {{x0, y0}, {x0, y1}, {x1, y0}, {x1, y1}});
    }
    return pts;
}

bool isa_available(KernelIsa isa) {
    switch (isa) {
        case KernelIsa::scalar:
            return true;
        case KernelIsa::avx2:
#if defined(KCOV_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

KernelIsa preferred_isa() {
    static const KernelIsa isa = [] {
        if (const char* env = std::getenv("KCOV_SIMD"); env && std::strcmp(env, "scalar") == 0) return KernelIsa::scalar;
        return isa_available(KernelIsa::avx2) ? KernelIsa::avx2 : KernelIsa::scalar;
    }();
    return isa;
}

const char* isa_name(KernelIsa isa) { return isa == KernelIsa::avx2 ? "avx2" : "scalar"; }

namespace {

void run_classification(const detail::ClassifyArgs& args, KernelIsa isa) {
    const int n = args.sites;
    const int k = args.k;
#if defined(KCOV_HAVE_AVX2)
    if (isa == KernelIsa::avx2 && isa_available(KernelIsa::avx2) && n <= detail::kSimdMaxSites &&
        k <= detail::kSimdMaxOrder) {
        detail::classify_with(args, detail::corner_run_avx2);
        return;
    }
#endif
    detail::classify_with(args, detail::corner_run_scalar);
}

}  // namespace

void classify_cells(const GridFrame& frame, const SiteArrays& sites, int owner, int k, std::span<std::uint8_t> g,
                    std::span<std::uint8_t> dg, KernelIsa isa, Moments* g_moments, Moments* dg_moments) {
    const int n = static_cast<int>(sites.size());
    if (k < 1 || n <= k) throw std::invalid_argument("classify_cells needs 1 <= k < number of sites");
    if (owner < 0 || owner >= n) throw std::invalid_argument("classify_cells: owner out of range");
    if (g.size() != frame.cells() || dg.size() != frame.cells())
        throw std::invalid_argument("classify_cells: mask size does not match the grid");

    Moments gm, dgm;
    const detail::ClassifyArgs args{frame.origin.x, frame.origin.y, frame.cell_size, frame.nx, frame.ny,
                                    sites.x.data(), sites.y.data(), sites.r.data(), n, owner, k,
                                    frame.inner.data(), frame.outer.data(), frame.weight.data(),
                                    frame.block_inner.data(), frame.block_outer.data(), g.data(), dg.data(),
                                    &gm, &dgm};
    run_classification(args, isa);
    if (g_moments) *g_moments = gm;
    if (dg_moments) *dg_moments = dgm;
}
}  // namespace kcov
