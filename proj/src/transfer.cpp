#include "stfem/transfer.hpp"
#include "stfem/errors.hpp"
#include "stfem/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace stfem {

std::array<double, 3> TransferTriangle::barycentric(const Vec2& x) const {
    const Vec2& a = deformed[0];
    const Vec2& b = deformed[1];
    const Vec2& c = deformed[2];
    const double den = cross(b - a, c - a);
    const double l1 = cross(x - a, c - a) / den;
    const double l2 = cross(b - a, x - a) / den;
    return {1.0 - l1 - l2, l1, l2};
}

Vec2 TransferTriangle::pull_back(const Vec2& x) const {
    const auto l = barycentric(x);
    return undeformed[0] * l[0] + undeformed[1] * l[1] + undeformed[2] * l[2];
}

std::vector<TransferTriangle> build_transfer_mesh(const ActiveMesh& active,
                                                  const DeformationField& field, double t_end) {
    const CartesianMesh& mesh = *active.mesh;
    std::vector<TransferTriangle> tris;
    tris.reserve(active.extended.size() * 2);
    for (int c : active.extended) {
        const ConvexPolygon poly = mesh.cell_polygon(c);
        auto push = [&](const Vec2& a, const Vec2& b, const Vec2& d) {
            TransferTriangle t;
            t.prev_cell = c;
            t.undeformed = {a, b, d};
            t.deformed = {field.map(c, a, t_end), field.map(c, b, t_end),
                          field.map(c, d, t_end)};
            if (cross(t.deformed[1] - t.deformed[0], t.deformed[2] - t.deformed[0]) <= 0.0)
                solver_error("non-bijective map: deformed transfer simplex of cell " +
                             std::to_string(c) + " is inverted");
            tris.push_back(t);
        };
        if (poly.size() == 3) push(poly[0], poly[1], poly[2]);
        else {
            push(poly[0], poly[1], poly[2]);
            push(poly[0], poly[2], poly[3]);
        }
    }
    return tris;
}

std::vector<IndexedCell> deformed_cells(const std::vector<TransferTriangle>& tris) {
    std::vector<IndexedCell> cells(tris.size());
    for (std::size_t k = 0; k < tris.size(); ++k) {
        cells[k].id = int(k);
        cells[k].poly = {tris[k].deformed[0], tris[k].deformed[1], tris[k].deformed[2]};
    }
    return cells;
}

JumpCoupling jump_coupling(const SpaceTimeSpace& current, const SpaceTimeSpace& previous,
                           const std::vector<double>& previous_coeffs,
                           const std::vector<TransferTriangle>& transfer,
                           const IntersectionMesh& intersection, ExecMode mode) {
    const SpatialSpace& spat = current.spatial();
    const int nsp = spat.nodes_per_cell();
    const int nt = current.nt();
    const double t_interface = current.t_begin();
    if (std::abs(previous.t_end() - t_interface) > 1e-12 * std::max(1.0, std::abs(t_interface)))
        config_error("jump coupling: slabs do not share the interface time");

    std::vector<double> tv0(static_cast<std::size_t>(nt));
    current.temporal().values(0.0, tv0.data());

    std::vector<Vec2> tri_p;
    std::vector<double> tri_w;
    triangle_rule(2 * spat.order() + 2, tri_p, tri_w);

    struct Staged {
        std::vector<int> dofs;
        std::vector<double> rhs;
        std::vector<double> mass;
        double transferred = 0.0;
        std::string error;
    };
    std::vector<Staged> staged(intersection.cells.size());

    for_each_index(mode, std::ptrdiff_t(intersection.cells.size()), [&](std::ptrdiff_t k) {
        const PolyCell& pc = intersection.cells[std::size_t(k)];
        Staged& out = staged[std::size_t(k)];
        out.rhs.assign(static_cast<std::size_t>(nsp), 0.0);
        out.mass.assign(std::size_t(nsp) * std::size_t(nsp), 0.0);
        const TransferTriangle& tri = transfer[std::size_t(pc.parent_previous)];
        const ConvexPolygon cur_poly = spat.mesh().cell_polygon(pc.parent_current);
        const double snap = 1e-8 * spat.mesh().cell_diameter(pc.parent_current);

        std::vector<double> sv(static_cast<std::size_t>(nsp));
        for (const ConvexPolygon& piece : pc.pieces) {
            std::vector<ConvexPolygon> fans =
                piece.size() == 3 ? std::vector<ConvexPolygon>{piece} : fan_triangulate(piece);
            for (const ConvexPolygon& f : fans) {
                const double area2 = cross(f[1] - f[0], f[2] - f[0]);
                for (std::size_t qk = 0; qk < tri_p.size(); ++qk) {
                    const Vec2 x = f[0] + (f[1] - f[0]) * tri_p[qk].x + (f[2] - f[0]) * tri_p[qk].y;
                    const double w = tri_w[qk] * area2;

                    // psi^+ containment: the point must lie in the current cell
                    if (!point_in_convex(cur_poly, x, -snap)) {
                        out.error = "transfer geometry error: quadrature point outside the "
                                    "current parent of intersection cell " + std::to_string(k);
                        return;
                    }
                    // psi^-: affine pullback through the transfer simplex
                    const auto bary = tri.barycentric(x);
                    const double slack = 1e-8;
                    if (bary[0] < -slack || bary[1] < -slack || bary[2] < -slack) {
                        out.error = "transfer geometry error: quadrature point outside the "
                                    "previous parent of intersection cell " + std::to_string(k);
                        return;
                    }
                    const Vec2 x_prev = tri.pull_back(x);
                    const double uprev = previous.value(previous_coeffs, tri.prev_cell, x_prev,
                                                        previous.t_end());
                    spat.eval(pc.parent_current, x, sv.data(), nullptr);
                    out.transferred += w * uprev;
                    for (int i = 0; i < nsp; ++i) {
                        out.rhs[std::size_t(i)] += w * sv[std::size_t(i)] * uprev;
                        for (int j = 0; j < nsp; ++j)
                            out.mass[std::size_t(i * nsp + j)] +=
                                w * sv[std::size_t(i)] * sv[std::size_t(j)];
                    }
                }
            }
        }
        current.cell_active_nodes(pc.parent_current, out.dofs);
    });

    JumpCoupling out;
    out.rhs = Eigen::VectorXd::Zero(current.num_dofs());
    std::vector<Eigen::Triplet<double>> trips;
    for (const Staged& s : staged) {
        if (!s.error.empty()) geometry_error(s.error);
        if (s.dofs.empty()) continue;
        out.transferred_mass += s.transferred;
        const int ncell = int(s.dofs.size());
        for (int i = 0; i < ncell; ++i)
            for (int l = 0; l < nt; ++l) {
                const int gi = current.dof(s.dofs[std::size_t(i)], 0, l);
                out.rhs[gi] += s.rhs[std::size_t(i)] * tv0[std::size_t(l)];
                for (int j = 0; j < ncell; ++j)
                    for (int m = 0; m < nt; ++m)
                        trips.emplace_back(gi, current.dof(s.dofs[std::size_t(j)], 0, m),
                                           s.mass[std::size_t(i * nsp + j)] * tv0[std::size_t(l)] *
                                               tv0[std::size_t(m)]);
            }
    }
    out.init_mass.resize(current.num_dofs(), current.num_dofs());
    out.init_mass.setFromTriplets(trips.begin(), trips.end());
    return out;
}

} // namespace stfem
