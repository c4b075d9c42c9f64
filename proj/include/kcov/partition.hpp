#pragma once

#include <compare>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "kcov/geometry.hpp"
#include "kcov/grid.hpp"

namespace kcov {

/// Agents are numbered 0..n-1 in code; file formats print them 1-based.
using AgentId = int;

/// Strictly increasing k-tuple of agent ids naming one k-order cell.
class CellIndex {
  public:
    CellIndex() = default;
    /// Throws std::invalid_argument unless ids are strictly increasing and non-negative.
    explicit CellIndex(std::vector<AgentId> ids);

    const std::vector<AgentId>& ids() const { return ids_; }
    std::size_t order() const { return ids_.size(); }
    bool contains(AgentId id) const;

    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;

  private:
    std::vector<AgentId> ids_;
};

/// Last-known position with its uncertainty radius.
struct UncertainSite {
    Point center;
    double radius = 0.0;
};

struct KOrderDiagram {
    int k = 0;
    /// Every k-subset in lexicographic order; cells may be empty.
    std::vector<std::pair<CellIndex, ConvexPolygon>> cells;
};

/// Exact dominant region: the non-empty k-order cells whose index contains the agent.
struct DominantCell {
    AgentId agent = 0;
    std::vector<ConvexPolygon> polygons;
};

/// Calls fn(ids) for every strictly increasing k-subset of {0..n-1}, lexicographically.
void for_each_combination(int n, int k, const std::function<void(const std::vector<AgentId>&)>& fn);

/// Sites closer than 1e-9 m to an earlier site are shifted 1e-7 m in +x.
std::vector<Point> separate_coincident(std::span<const Point> positions);

ConvexPolygon korder_cell(const CellIndex& index, std::span<const Point> positions, const ConvexPolygon& domain);
KOrderDiagram korder_diagram(std::span<const Point> positions, int k, const ConvexPolygon& domain);
DominantCell dominant_cell(AgentId agent, std::span<const Point> positions, int k, const ConvexPolygon& domain);

/// Brute-force k-nearest classification: the sorted ids of the k sites
/// nearest to q, distance ties broken toward the lower id.
CellIndex brute_force_classify(Point q, std::span<const Point> positions, int k);

/// Cells whose center has the agent among its k nearest sites (ties toward
/// the lower id), restricted to cells whose center lies in the domain.
GridRegion rasterize_dominant_cell(AgentId agent, std::span<const Point> positions, int k, const GridFrame& frame);

/// Guaranteed and dual-guaranteed dominant cells of one agent with the
/// summaries the motion law needs.
struct UncertainCells {
    GridRegion guaranteed;
    GridRegion dual;
    Moments guaranteed_moments;
    Moments dual_moments;
    /// Circumradius of the dual cell's marked-cell corners; 0 when empty.
    double dual_circumradius = 0.0;
};

/// Both cells from one kernel pass. Cells are classified from their corners
/// (see classify_cells), so the guaranteed mask under-approximates and the
/// dual mask over-approximates the exact sets cell by cell.
UncertainCells uncertain_cells(AgentId agent, std::span<const UncertainSite> sites, int k, const GridFrame& frame,
                               KernelIsa isa = preferred_isa());

GridRegion guaranteed_dominant_cell(AgentId agent, std::span<const UncertainSite> sites, int k,
                                    const GridFrame& frame);
GridRegion dual_guaranteed_dominant_cell(AgentId agent, std::span<const UncertainSite> sites, int k,
                                         const GridFrame& frame);

/// 2 * cr(dgW) * (1 - M(gW) / M(dgW)). Throws GeometryError("degenerate
/// dual-guaranteed cell") when dgW has no mass.
double bnd(const GridRegion& guaranteed, const GridRegion& dual, const DensityField& phi);
double bnd(const UncertainCells& cells);

}  // namespace kcov
