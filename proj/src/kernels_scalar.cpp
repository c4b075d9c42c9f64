#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels.hpp"

namespace kcov::detail {

void corner_run_scalar(const ClassifyArgs& a, int iy, int ix_begin, int ix_end, const CornerGrid& out) {
    const double cy = a.origin_y + iy * a.h;
    // Also called once per coarse corner, so keep the buffers between calls.
    thread_local std::vector<double> u, l, scratch;
    u.resize(static_cast<std::size_t>(a.sites));
    l.resize(static_cast<std::size_t>(a.sites));
    for (int ix = ix_begin; ix < ix_end; ++ix) {
        const double cx = a.origin_x + ix * a.h;
        for (int j = 0; j < a.sites; ++j) {
            const double dx = cx - a.sx[j];
            const double dy = cy - a.sy[j];
            const double d = std::sqrt(dx * dx + dy * dy);
            u[j] = d + a.sr[j];
            l[j] = d - a.sr[j];
        }
        scratch.assign(u.begin(), u.end());
        std::nth_element(scratch.begin(), scratch.begin() + (a.k - 1), scratch.end());
        const double uk = scratch[static_cast<std::size_t>(a.k - 1)];
        const double lo_owner = l[a.owner];

        std::uint64_t* gset = out.gset_at(ix, iy);
        std::uint64_t* closer = out.closer_at(ix, iy);
        std::fill(gset, gset + out.words, 0);
        std::fill(closer, closer + out.words, 0);
        int members = 0;
        bool separated = true;
        for (int j = 0; j < a.sites; ++j) {
            const std::uint64_t bit = std::uint64_t{1} << (j % 64);
            if (u[j] <= uk) {
                ++members;
                gset[j / 64] |= bit;
            } else if (l[j] < uk) {
                separated = false;
            }
            if (u[j] < lo_owner) closer[j / 64] |= bit;
        }
        const bool valid = separated && members == a.k && u[a.owner] <= uk;
        if (!valid) std::fill(gset, gset + out.words, 0);
    }
}

namespace {

enum class BlockState : std::uint8_t { mixed, inside, outside };

// Same nonzero guaranteed index at all four corners: by convexity of every
// pairwise condition, the whole rectangle lies in that guaranteed cell.
bool same_guaranteed_cell(const CornerGrid& cg, int x0, int y0, int x1, int y1) {
    const std::uint64_t* c[4] = {cg.gset_at(x0, y0), cg.gset_at(x1, y0), cg.gset_at(x0, y1), cg.gset_at(x1, y1)};
    bool any = false;
    for (int t = 0; t < cg.words; ++t) {
        if (c[0][t] != c[1][t] || c[0][t] != c[2][t] || c[0][t] != c[3][t]) return false;
        any = any || c[0][t] != 0;
    }
    return any;
}

// At least k agents certainly closer than the owner at all four corners, hence
// everywhere in the rectangle.
bool outranked(const CornerGrid& cg, int k, int x0, int y0, int x1, int y1) {
    const std::uint64_t* c[4] = {cg.closer_at(x0, y0), cg.closer_at(x1, y0), cg.closer_at(x0, y1),
                                 cg.closer_at(x1, y1)};
    int common = 0;
    for (int t = 0; t < cg.words && common < k; ++t) {
        std::uint64_t bits = c[0][t] & c[1][t] & c[2][t] & c[3][t];
        while (bits != 0 && common < k) {
            bits &= bits - 1;
            ++common;
        }
    }
    return common >= k;
}

}  // namespace

void classify_with(const ClassifyArgs& a, CornerRunFn run) {
    const int words = (a.sites + 63) / 64;
    const std::size_t corners = static_cast<std::size_t>(a.nx + 1) * static_cast<std::size_t>(a.ny + 1);
    thread_local std::vector<std::uint64_t> gbuf;
    thread_local std::vector<std::uint64_t> cbuf;
    if (gbuf.size() < corners * words) gbuf.resize(corners * words);
    if (cbuf.size() < corners * words) cbuf.resize(corners * words);
    const CornerGrid cg{gbuf.data(), cbuf.data(), words, a.nx + 1};

    const int nbx = (a.nx + kBlock - 1) / kBlock;
    const int nby = (a.ny + kBlock - 1) / kBlock;
    auto lo_x = [&](int bx) { return bx * kBlock; };
    auto hi_x = [&](int bx) { return std::min(a.nx, (bx + 1) * kBlock); };
    auto lo_y = [&](int by) { return by * kBlock; };
    auto hi_y = [&](int by) { return std::min(a.ny, (by + 1) * kBlock); };

    // Coarse pass over the block corners.
    for (int by = 0; by <= nby; ++by) {
        const int iy = by < nby ? lo_y(by) : a.ny;
        for (int bx = 0; bx <= nbx; ++bx) {
            const int ix = bx < nbx ? lo_x(bx) : a.nx;
            run(a, iy, ix, ix + 1, cg);
        }
    }
    std::vector<BlockState> state(static_cast<std::size_t>(nbx) * nby);
    for (int by = 0; by < nby; ++by) {
        for (int bx = 0; bx < nbx; ++bx) {
            const int x0 = lo_x(bx), x1 = hi_x(bx), y0 = lo_y(by), y1 = hi_y(by);
            BlockState s = BlockState::mixed;
            if (same_guaranteed_cell(cg, x0, y0, x1, y1)) s = BlockState::inside;
            else if (outranked(cg, a.k, x0, y0, x1, y1)) s = BlockState::outside;
            state[static_cast<std::size_t>(by) * nbx + bx] = s;
        }
    }

    // Fine pass: every corner of a mixed block, evaluated in maximal runs.
    std::vector<std::uint8_t> needed(static_cast<std::size_t>(a.nx) + 1);
    for (int iy = 0; iy <= a.ny; ++iy) {
        std::fill(needed.begin(), needed.end(), 0);
        const int by_hi = std::min(iy / kBlock, nby - 1);
        const int by_lo = (iy % kBlock == 0 && iy > 0) ? iy / kBlock - 1 : by_hi;
        for (int by = by_lo; by <= by_hi; ++by) {
            if (iy < lo_y(by) || iy > hi_y(by)) continue;
            for (int bx = 0; bx < nbx; ++bx) {
                if (state[static_cast<std::size_t>(by) * nbx + bx] != BlockState::mixed) continue;
                std::fill(needed.begin() + lo_x(bx), needed.begin() + hi_x(bx) + 1, 1);
            }
        }
        for (int ix = 0; ix <= a.nx;) {
            if (!needed[ix]) {
                ++ix;
                continue;
            }
            int end = ix;
            while (end <= a.nx && needed[end]) ++end;
            run(a, iy, ix, end, cg);
            ix = end;
        }
    }

    Moments gm, dgm;
    for (int by = 0; by < nby; ++by) {
        for (int bx = 0; bx < nbx; ++bx) {
            const std::size_t b = static_cast<std::size_t>(by) * nbx + bx;
            const BlockState s = state[b];
            const int x0 = lo_x(bx), x1 = hi_x(bx);
            if (s != BlockState::mixed) {
                for (int iy = lo_y(by); iy < hi_y(by); ++iy) {
                    const std::size_t c = static_cast<std::size_t>(iy) * a.nx + x0;
                    const std::size_t len = static_cast<std::size_t>(x1 - x0);
                    if (s == BlockState::inside) {
                        std::copy_n(a.inner + c, len, a.g + c);
                        std::copy_n(a.outer + c, len, a.dg + c);
                    } else {
                        std::fill_n(a.g + c, len, 0);
                        std::fill_n(a.dg + c, len, 0);
                    }
                }
                if (s == BlockState::inside) {
                    gm += a.block_inner[b];
                    dgm += a.block_outer[b];
                }
                continue;
            }
            for (int iy = lo_y(by); iy < hi_y(by); ++iy) {
                const double cy = a.origin_y + (iy + 0.5) * a.h;
                for (int ix = x0; ix < x1; ++ix) {
                    const std::size_t c = static_cast<std::size_t>(iy) * a.nx + ix;
                    const bool in_g = a.inner[c] && same_guaranteed_cell(cg, ix, iy, ix + 1, iy + 1);
                    const bool in_dg = a.outer[c] && !outranked(cg, a.k, ix, iy, ix + 1, iy + 1);
                    a.g[c] = in_g ? 1 : 0;
                    a.dg[c] = in_dg ? 1 : 0;
                    const double w = a.weight[c];
                    const Moments cell{w, w * (a.origin_x + (ix + 0.5) * a.h), w * cy};
                    if (in_g) gm += cell;
                    if (in_dg) dgm += cell;
                }
            }
        }
    }
    *a.g_moments = gm;
    *a.dg_moments = dgm;
}

}  // namespace kcov::detail
