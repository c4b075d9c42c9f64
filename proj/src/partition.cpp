#include "kcov/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace kcov {

CellIndex::CellIndex(std::vector<AgentId> ids) : ids_(std::move(ids)) {
    if (ids_.empty()) throw std::invalid_argument("cell index needs at least one id");
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (ids_[i] < 0) throw std::invalid_argument("cell index ids must be non-negative");
        if (i > 0 && ids_[i] <= ids_[i - 1]) throw std::invalid_argument("cell index ids must be strictly increasing");
    }
}

bool CellIndex::contains(AgentId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

void for_each_combination(int n, int k, const std::function<void(const std::vector<AgentId>&)>& fn) {
    if (k < 1 || k > n) return;
    std::vector<AgentId> c(static_cast<std::size_t>(k));
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        fn(c);
        int i = k - 1;
        while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return;
        ++c[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
}

std::vector<Point> separate_coincident(std::span<const Point> positions) {
    std::vector<Point> out(positions.begin(), positions.end());
    for (std::size_t j = 1; j < out.size(); ++j) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (std::size_t i = 0; i < j; ++i) {
                if (distance(out[i], out[j]) <= 1e-9) {
                    out[j].x += 1e-7;
                    moved = true;
                }
            }
        }
    }
    return out;
}

namespace {

ConvexPolygon cell_from_members(const std::vector<char>& member, std::span<const Point> sites,
                                const ConvexPolygon& domain) {
    ConvexPolygon cell = domain;
    for (std::size_t a = 0; a < sites.size() && !cell.empty(); ++a) {
        if (!member[a]) continue;
        for (std::size_t b = 0; b < sites.size() && !cell.empty(); ++b) {
            if (member[b]) continue;
            cell = clip(cell, Halfspace{sites[a], sites[b]});
        }
    }
    return cell;
}

std::vector<char> membership(const std::vector<AgentId>& ids, std::size_t n) {
    std::vector<char> m(n, 0);
    for (AgentId id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= n) throw std::invalid_argument("cell index id out of range");
        m[static_cast<std::size_t>(id)] = 1;
    }
    return m;
}

}  // namespace

ConvexPolygon korder_cell(const CellIndex& index, std::span<const Point> positions, const ConvexPolygon& domain) {
    const auto sites = separate_coincident(positions);
    return cell_from_members(membership(index.ids(), sites.size()), sites, domain);
}

KOrderDiagram korder_diagram(std::span<const Point> positions, int k, const ConvexPolygon& domain) {
    const int n = static_cast<int>(positions.size());
    if (k < 1 || k > n) throw std::invalid_argument("korder_diagram needs 1 <= k <= n");
    const auto sites = separate_coincident(positions);
    KOrderDiagram d;
    d.k = k;
    for_each_combination(n, k, [&](const std::vector<AgentId>& ids) {
        d.cells.emplace_back(CellIndex(ids), cell_from_members(membership(ids, sites.size()), sites, domain));
    });
    return d;
}

DominantCell dominant_cell(AgentId agent, std::span<const Point> positions, int k, const ConvexPolygon& domain) {
    const int n = static_cast<int>(positions.size());
    if (k < 1 || k > n) throw std::invalid_argument("dominant_cell needs 1 <= k <= n");
    if (agent < 0 || agent >= n) throw std::invalid_argument("dominant_cell: agent out of range");
    const auto sites = separate_coincident(positions);
    std::vector<AgentId> others;
    for (AgentId j = 0; j < n; ++j)
        if (j != agent) others.push_back(j);

    DominantCell w;
    w.agent = agent;
    auto add = [&](std::vector<AgentId> ids) {
        ids.push_back(agent);
        std::sort(ids.begin(), ids.end());
        ConvexPolygon cell = cell_from_members(membership(ids, sites.size()), sites, domain);
        if (!cell.empty()) w.polygons.push_back(std::move(cell));
    };
    if (k == 1) {
        add({});
    } else {
        for_each_combination(n - 1, k - 1, [&](const std::vector<AgentId>& pick) {
            std::vector<AgentId> ids;
            for (AgentId p : pick) ids.push_back(others[static_cast<std::size_t>(p)]);
            add(std::move(ids));
        });
    }
    return w;
}

CellIndex brute_force_classify(Point q, std::span<const Point> positions, int k) {
    const int n = static_cast<int>(positions.size());
    if (k < 1 || k > n) throw std::invalid_argument("brute_force_classify needs 1 <= k <= n");
    std::vector<AgentId> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> d(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = distance(q, positions[static_cast<std::size_t>(j)]);
    std::stable_sort(order.begin(), order.end(), [&](AgentId a, AgentId b) {
        return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)];
    });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return CellIndex(std::move(order));
}

GridRegion rasterize_dominant_cell(AgentId agent, std::span<const Point> positions, int k, const GridFrame& frame) {
    const auto sites = separate_coincident(positions);
    std::vector<std::uint8_t> mask(frame.cells(), 0);
    const Point own = sites[static_cast<std::size_t>(agent)];
    for (int iy = 0; iy < frame.ny; ++iy) {
        for (int ix = 0; ix < frame.nx; ++ix) {
            const std::size_t c = static_cast<std::size_t>(iy) * frame.nx + ix;
            if (!frame.center_inside[c]) continue;
            const Point q = frame.cell_center(ix, iy);
            const double d_own = distance(q, own);
            int ahead = 0;
            for (int j = 0; j < static_cast<int>(sites.size()); ++j) {
                if (j == agent) continue;
                const double dj = distance(q, sites[static_cast<std::size_t>(j)]);
                if (dj < d_own || (dj == d_own && j < agent)) ++ahead;
            }
            mask[c] = ahead <= k - 1 ? 1 : 0;
        }
    }
    return frame.region(std::move(mask));
}

UncertainCells uncertain_cells(AgentId agent, std::span<const UncertainSite> sites, int k, const GridFrame& frame,
                               KernelIsa isa) {
    const int n = static_cast<int>(sites.size());
    if (agent < 0 || agent >= n) throw std::invalid_argument("uncertain_cells: agent out of range");
    if (k < 1) throw std::invalid_argument("uncertain_cells needs k >= 1");
    std::vector<std::uint8_t> g(frame.cells());
    std::vector<std::uint8_t> dg(frame.cells());
    UncertainCells out;
    if (n <= k) {
        // Every point needs all n agents: both cells are the whole domain.
        g = frame.inner;
        dg = frame.outer;
        out.guaranteed_moments = mask_moments(frame, g);
        out.dual_moments = mask_moments(frame, dg);
    } else {
        SiteArrays arr;
        for (const auto& s : sites) arr.push_back(s.center, s.radius);
        classify_cells(frame, arr, agent, k, g, dg, isa, &out.guaranteed_moments, &out.dual_moments);
    }
    const auto corners = mask_extreme_corners(frame, dg);
    if (!corners.empty()) out.dual_circumradius = min_enclosing_circle(corners).radius;
    out.guaranteed = frame.region(std::move(g));
    out.dual = frame.region(std::move(dg));
    return out;
}

GridRegion guaranteed_dominant_cell(AgentId agent, std::span<const UncertainSite> sites, int k,
                                    const GridFrame& frame) {
    return uncertain_cells(agent, sites, k, frame).guaranteed;
}

GridRegion dual_guaranteed_dominant_cell(AgentId agent, std::span<const UncertainSite> sites, int k,
                                         const GridFrame& frame) {
    return uncertain_cells(agent, sites, k, frame).dual;
}

namespace {

double bound_from(double cr, double mass_g, double mass_dg) {
    if (!(mass_dg > 0.0)) throw GeometryError("degenerate dual-guaranteed cell");
    return std::max(0.0, 2.0 * cr * (1.0 - mass_g / mass_dg));
}

}  // namespace

double bnd(const GridRegion& guaranteed, const GridRegion& dual, const DensityField& phi) {
    const double mass_dg = mass(dual, phi);
    if (!(mass_dg > 0.0)) throw GeometryError("degenerate dual-guaranteed cell");
    const auto corners = dual.extreme_corners();
    const double cr = min_enclosing_circle(corners).radius;
    return bound_from(cr, mass(guaranteed, phi), mass_dg);
}

double bnd(const UncertainCells& cells) {
    return bound_from(cells.dual_circumradius, cells.guaranteed_moments.mass, cells.dual_moments.mass);
}

}  // namespace kcov
