#pragma once

#include "stfem/boundary.hpp"
#include "stfem/geometry.hpp"
#include "stfem/mesh.hpp"
#include "stfem/parallel.hpp"

#include <vector>

namespace stfem {

/// Conservative bbox prefilter over boundary edges, built in one
/// preprocessing pass (the restrict() query of the cell loop).
class BoundaryRestriction {
public:
    BoundaryRestriction(const OrientedBoundary& boundary, double bucket_size);
    /// Superset of the edges meeting `box`; sorted edge ids.
    std::vector<int> edges_near(const BBox& box) const;

private:
    BucketGrid grid_;
};

/// Portion of one directed boundary edge inside a cell; s0/s1 are the
/// parameters on the full edge (for Dirichlet-data interpolation).
struct BoundarySegment {
    Vec2 a, b;
    int edge = -1;
    double s0 = 0.0, s1 = 1.0;
};

std::vector<CellClass> classify_cells(const CartesianMesh& mesh, const OrientedBoundary& boundary,
                                      ExecMode mode = ExecMode::Serial);

/// Convex pieces tiling cell ∩ Ω. Interior cells come back unchanged,
/// exterior ones empty. Splits the cell along every restricted boundary
/// edge line and keeps the pieces whose centroid passes the oriented side
/// test; checks measure conservation and orientation coherence.
struct CellCap {
    std::vector<ConvexPolygon> inside;
    std::vector<ConvexPolygon> outside;
    std::vector<BoundarySegment> segments;
};

CellCap cell_cap(const ConvexPolygon& cell, const OrientedBoundary& boundary,
                 const std::vector<int>& edge_candidates, double eps_snap);

std::vector<ConvexPolygon> cell_cap_interior(const ConvexPolygon& cell,
                                             const OrientedBoundary& boundary,
                                             const std::vector<int>& edge_candidates,
                                             double eps_snap);

/// Per-cell cut data for every active cell of a mesh (id-aligned with
/// `active.active`); the geometry side of the quadrature build.
struct CutCellGeometry {
    int cell = -1;
    std::vector<ConvexPolygon> inside;
    std::vector<BoundarySegment> segments;
    double measure = 0.0;
};

std::vector<CutCellGeometry> build_cut_geometry(const ActiveMesh& active,
                                                const OrientedBoundary& boundary,
                                                ExecMode mode = ExecMode::Serial);

struct IndexedCell {
    int id = -1;
    ConvexPolygon poly;
};

/// Intersection cell: convex pieces of (current cell ∩ previous deformed
/// cell ∩ Ω) with both parent ids.
struct PolyCell {
    std::vector<ConvexPolygon> pieces;
    int parent_current = -1;
    int parent_previous = -1;
    double measure = 0.0;
};

struct IntersectionMesh {
    std::vector<PolyCell> cells;
    double total_measure = 0.0;
};

/// Triple intersection current ∩ previous ∩ Ω. Previous cells must be
/// straight-sided and convex (P1-deformed simplices). Throws a coverage
/// error when part of a current cell's domain fraction is met by no
/// previous cell.
IntersectionMesh intersect_triple(const std::vector<IndexedCell>& current,
                                  const std::vector<IndexedCell>& previous_deformed,
                                  const OrientedBoundary& boundary,
                                  ExecMode mode = ExecMode::Serial);

} // namespace stfem
