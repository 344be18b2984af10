#include "stfem/quadrature.hpp"
#include "stfem/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stfem {

void triangle_rule(int degree, std::vector<Vec2>& points, std::vector<double>& weights) {
    const int n = std::max(1, (degree + 2 + 1) / 2);  // ceil((degree+2)/2)
    std::vector<double> gp, gw;
    gauss_legendre(n, gp, gw);
    points.clear();
    weights.clear();
    // Duffy collapse of the unit square onto the unit triangle
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double u = gp[std::size_t(i)], v = gp[std::size_t(j)];
            points.push_back({u * (1.0 - v), v});
            weights.push_back(gw[std::size_t(i)] * gw[std::size_t(j)] * (1.0 - v));
        }
    }
}

namespace {

/// Map a unit-triangle rule onto physical triangle (a,b,c).
void append_triangle_points(const Vec2& a, const Vec2& b, const Vec2& c,
                            const std::vector<Vec2>& rp, const std::vector<double>& rw,
                            std::vector<QPoint>& out) {
    const double area2 = cross(b - a, c - a);  // = 2 |T|
    for (std::size_t k = 0; k < rp.size(); ++k) {
        const Vec2 x = a + (b - a) * rp[k].x + (c - a) * rp[k].y;
        out.push_back({x, rw[k] * area2});
    }
}

} // namespace

CutQuadrature build_quadrature(const ActiveMesh& active,
                               const std::vector<CutCellGeometry>& cut_geometry, int p, int q,
                               double t0, double t1, const std::array<SideBC, 4>& side_bc,
                               ExecMode mode) {
    if (cut_geometry.size() != active.active.size())
        config_error("cut geometry does not match the active cell list");
    const CartesianMesh& mesh = *active.mesh;

    CutQuadrature quad;
    quad.p = p;
    quad.q = q;
    quad.t0 = t0;
    quad.t1 = t1;
    {
        std::vector<double> tp, tw;
        gauss_legendre(q + 1, tp, tw);  // exact to degree 2q+1
        const double tau = t1 - t0;
        for (std::size_t k = 0; k < tp.size(); ++k) {
            quad.t_nodes.push_back(t0 + tau * tp[k]);
            quad.t_weights.push_back(tau * tw[k]);
        }
    }

    std::vector<Vec2> tri_p;
    std::vector<double> tri_w;
    triangle_rule(2 * p + 2, tri_p, tri_w);
    std::vector<double> seg_p, seg_w;
    gauss_legendre(p + 2, seg_p, seg_w);  // exact to degree 2p+3 on segments

    // fitted boundary faces grouped by cell
    std::vector<std::vector<CartesianMesh::FittedFace>> fitted(static_cast<std::size_t>(mesh.num_cells()));
    for (const auto& f : mesh.boundary_faces()) fitted[std::size_t(f.cell)].push_back(f);

    quad.cells.resize(cut_geometry.size());
    std::vector<int> dropped(cut_geometry.size(), 0);
    for_each_index(mode, std::ptrdiff_t(cut_geometry.size()), [&](std::ptrdiff_t k) {
        const CutCellGeometry& g = cut_geometry[std::size_t(k)];
        CellQuadrature& cq = quad.cells[std::size_t(k)];
        cq.cell = g.cell;
        const double h = mesh.cell_diameter(g.cell);
        const double snap = 1e-10 * h;

        for (const ConvexPolygon& piece : g.inside) {
            const double a = signed_area(piece);
            if (a <= snap * snap) {
                ++dropped[std::size_t(k)];
                continue;
            }
            cq.measure += a;
            if (piece.size() == 3) {
                append_triangle_points(piece[0], piece[1], piece[2], tri_p, tri_w, cq.interior);
            } else {
                for (const ConvexPolygon& tri : fan_triangulate(piece))
                    append_triangle_points(tri[0], tri[1], tri[2], tri_p, tri_w, cq.interior);
            }
        }

        // unfitted boundary segments: outward normal is the right perp of
        // the directed edge (interior on the left)
        for (const BoundarySegment& s : g.segments) {
            const Vec2 d = s.b - s.a;
            const double len = norm(d);
            if (len <= snap) continue;
            const Vec2 n = Vec2{d.y, -d.x} * (1.0 / len);
            for (std::size_t i = 0; i < seg_p.size(); ++i) {
                FacetQPoint fp;
                fp.x = s.a + d * seg_p[i];
                fp.w = seg_w[i] * len;
                fp.normal = n;
                fp.h_cell = h;
                fp.kind = FacetKind::UnfittedDirichlet;
                fp.boundary_edge = s.edge;
                fp.edge_param = s.s0 + (s.s1 - s.s0) * seg_p[i];
                cq.facets.push_back(fp);
            }
        }

        // fitted artificial-boundary faces, restricted to the domain part
        for (const auto& face : fitted[std::size_t(g.cell)]) {
            const SideBC bc = side_bc[std::size_t(face.side)];
            if (bc == SideBC::None) continue;
            const Vec2 d = face.b - face.a;
            const double len = norm(d);
            const Vec2 n = Vec2{d.y, -d.x} * (1.0 / len);
            auto emit = [&](double u0, double u1) {
                if ((u1 - u0) * len <= snap) return;
                for (std::size_t i = 0; i < seg_p.size(); ++i) {
                    FacetQPoint fp;
                    fp.x = face.a + d * (u0 + (u1 - u0) * seg_p[i]);
                    fp.w = seg_w[i] * (u1 - u0) * len;
                    fp.normal = n;
                    fp.h_cell = h;
                    fp.kind = bc == SideBC::Dirichlet ? FacetKind::FittedDirichlet
                                                      : FacetKind::FittedNeumann;
                    cq.facets.push_back(fp);
                }
            };
            if (active.cls[std::size_t(g.cell)] == CellClass::Interior) {
                emit(0.0, 1.0);
            } else {
                // face ∩ Ω through the interior pieces (disjoint, so emit per piece)
                for (const ConvexPolygon& piece : g.inside) {
                    auto iv = clip_segment_to_convex(face.a, face.b, piece, snap);
                    if (iv) emit(iv->first, iv->second);
                }
            }
        }
    });
    for (int dcount : dropped) quad.dropped_pieces += dcount;

    // invariants, asserted on every build: positive weights summing to the
    // cut measure per cell (times tau through the factored temporal rule)
    for (const CellQuadrature& cq : quad.cells) {
        double wsum = 0.0;
        for (const QPoint& qp : cq.interior) {
            if (qp.w <= 0.0) geometry_error("nonpositive quadrature weight");
            wsum += qp.w;
        }
        const double scale = std::max(cq.measure, mesh.cell_bbox(cq.cell).diameter());
        if (std::abs(wsum - cq.measure) > 1e-12 * scale)
            geometry_error("quadrature weights do not sum to the cut measure of cell " +
                           std::to_string(cq.cell));
    }
    return quad;
}

} // namespace stfem
