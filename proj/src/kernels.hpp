#pragma once

#include <cstdint>

#include "kcov/geometry.hpp"
#include "kcov/grid.hpp"

namespace kcov::detail {

// Flat argument block shared by every classification kernel.
struct ClassifyArgs {
    double origin_x, origin_y, h;
    int nx, ny;
    const double* sx;
    const double* sy;
    const double* sr;
    int sites;
    int owner;
    int k;
    const std::uint8_t* inner;
    const std::uint8_t* outer;
    const double* weight;
    const Moments* block_inner;  // per kGridBlock block
    const Moments* block_outer;
    std::uint8_t* g;
    std::uint8_t* dg;
    Moments* g_moments;
    Moments* dg_moments;
};

// Classification of the (nx+1) x (ny+1) grid corners, corner (ix, iy) at
// (origin_x + ix*h, origin_y + iy*h). Per corner, `words` 64-bit words of:
//   gset    the index I of the guaranteed k-order cell holding the corner,
//           or all zero when no such cell contains the owner;
//   closer  the agents certainly closer to the corner than the owner.
struct CornerGrid {
    std::uint64_t* gset;
    std::uint64_t* closer;
    int words;
    int stride;  // nx + 1

    std::uint64_t* gset_at(int ix, int iy) const {
        return gset + (static_cast<std::size_t>(iy) * stride + ix) * words;
    }
    std::uint64_t* closer_at(int ix, int iy) const {
        return closer + (static_cast<std::size_t>(iy) * stride + ix) * words;
    }
};

// Fills corners [ix_begin, ix_end) of corner row iy.
using CornerRunFn = void (*)(const ClassifyArgs&, int iy, int ix_begin, int ix_end, const CornerGrid&);

inline constexpr int kSimdMaxSites = 64;
inline constexpr int kSimdMaxOrder = 16;
inline constexpr int kBlock = kGridBlock;

void corner_run_scalar(const ClassifyArgs& a, int iy, int ix_begin, int ix_end, const CornerGrid& out);
#if defined(KCOV_HAVE_AVX2)
// Requires sites <= kSimdMaxSites (one word per corner) and k <= kSimdMaxOrder.
void corner_run_avx2(const ClassifyArgs& a, int iy, int ix_begin, int ix_end, const CornerGrid& out);
#endif

// Block-skipping driver shared by every kernel; `run` evaluates corners.
void classify_with(const ClassifyArgs& a, CornerRunFn run);

}  // namespace kcov::detail
