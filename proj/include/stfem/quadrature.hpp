#pragma once

#include "stfem/cut.hpp"
#include "stfem/fe.hpp"
#include "stfem/mesh.hpp"
#include "stfem/parallel.hpp"

#include <array>
#include <vector>

namespace stfem {

/// Rule on the unit triangle (0,0),(1,0),(0,1), exact to the given degree;
/// positive weights (Duffy-collapsed tensor Gauss).
void triangle_rule(int degree, std::vector<Vec2>& points, std::vector<double>& weights);

struct QPoint {
    Vec2 x;
    double w = 0.0;
};

enum class FacetKind { UnfittedDirichlet, FittedDirichlet, FittedNeumann };

struct FacetQPoint {
    Vec2 x;
    double w = 0.0;        // arc-length weight
    Vec2 normal;           // outward spatial unit normal (reference configuration)
    double h_cell = 0.0;   // cell diameter feeding the Nitsche penalty
    FacetKind kind = FacetKind::UnfittedDirichlet;
    int boundary_edge = -1;   // for unfitted facets
    double edge_param = 0.0;  // parameter on the full boundary edge
};

/// Spatial rules per active cell; the temporal Gauss rule is shared and
/// tensorized in the assembly loops. Volume points double as the rule for
/// the initial/end faces.
struct CellQuadrature {
    int cell = -1;
    std::vector<QPoint> interior;
    std::vector<FacetQPoint> facets;
    double measure = 0.0;
};

enum class SideBC { Dirichlet, Neumann, None };

struct CutQuadrature {
    std::vector<CellQuadrature> cells;  // aligned with active.active
    std::vector<double> t_nodes;        // on the slab [t0, t1]
    std::vector<double> t_weights;      // sum to tau
    double t0 = 0.0, t1 = 1.0;
    int p = 1, q = 1;
    int dropped_pieces = 0;  // zero-measure pieces skipped (diagnostic)
};

/// Spatial rules exact to degree 2p+2 on each convex piece (simplex-fan
/// decomposition), facet rules on cut boundary segments and on fitted
/// artificial-boundary faces, temporal Gauss exact to degree 2q+1.
CutQuadrature build_quadrature(const ActiveMesh& active,
                               const std::vector<CutCellGeometry>& cut_geometry, int p, int q,
                               double t0, double t1,
                               const std::array<SideBC, 4>& side_bc = {SideBC::Dirichlet,
                                                                       SideBC::Dirichlet,
                                                                       SideBC::Dirichlet,
                                                                       SideBC::Dirichlet},
                               ExecMode mode = ExecMode::Serial);

} // namespace stfem
