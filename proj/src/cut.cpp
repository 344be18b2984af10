#include "stfem/cut.hpp"
#include "stfem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace stfem {

namespace {

BBox edge_bbox(const OrientedBoundary& b, int e) {
    BBox box;
    box.expand(b.edge_start(e));
    box.expand(b.edge_end(e));
    return box;
}

bool segment_meets_convex(const Vec2& a, const Vec2& b, const ConvexPolygon& poly, double eps) {
    if (point_in_convex(poly, a, -eps) || point_in_convex(poly, b, -eps)) return true;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i)
        if (segments_intersect(a, b, poly[i], poly[(i + 1) % n], eps)) return true;
    return false;
}

} // namespace

BoundaryRestriction::BoundaryRestriction(const OrientedBoundary& boundary, double bucket_size) {
    BBox domain = boundary.bounds();
    domain.inflate(bucket_size);
    grid_ = BucketGrid(domain, bucket_size);
    for (int e = 0; e < boundary.num_edges(); ++e) grid_.insert(e, edge_bbox(boundary, e));
}

std::vector<int> BoundaryRestriction::edges_near(const BBox& box) const {
    return grid_.query(box);
}

std::vector<CellClass> classify_cells(const CartesianMesh& mesh, const OrientedBoundary& boundary,
                                      ExecMode mode) {
    const int nc = mesh.num_cells();
    std::vector<CellClass> cls(static_cast<std::size_t>(nc), CellClass::Exterior);
    const double bucket = std::max(mesh.min_cell_size(), 1e-12);
    BoundaryRestriction restriction(boundary, bucket);

    // boundary vertices colliding with mesh vertices defeat the side tests
    {
        const auto& xs = mesh.xcoords();
        const auto& ys = mesh.ycoords();
        for (const Vec2& v : boundary.vertices()) {
            auto nearest = [](const std::vector<double>& c, double x) {
                auto it = std::lower_bound(c.begin(), c.end(), x);
                double d = 1e300;
                if (it != c.end()) d = std::min(d, std::abs(*it - x));
                if (it != c.begin()) d = std::min(d, std::abs(*(it - 1) - x));
                return d;
            };
            const double dx = nearest(xs, v.x), dy = nearest(ys, v.y);
            const double snap = 1e-10 * mesh.cell_diameter(0);
            if (dx < snap && dy < snap) {
                int i = int(std::upper_bound(xs.begin(), xs.end(), v.x) - xs.begin()) - 1;
                int j = int(std::upper_bound(ys.begin(), ys.end(), v.y) - ys.begin()) - 1;
                i = std::clamp(i, 0, mesh.nx() - 1);
                j = std::clamp(j, 0, mesh.ny() - 1);
                geometry_error("tolerance error: boundary vertex (" + std::to_string(v.x) + ", " +
                               std::to_string(v.y) + ") coincides with a mesh vertex near cell " +
                               std::to_string(mesh.cell_index(i, j)));
            }
        }
    }

    std::vector<char> cut(static_cast<std::size_t>(nc), 0);
    for_each_index(mode, nc, [&](std::ptrdiff_t c) {
        const ConvexPolygon poly = mesh.cell_polygon(int(c));
        const double snap = 1e-10 * mesh.cell_diameter(int(c));
        BBox box = bbox_of(poly);
        box.inflate(snap);
        for (int e : restriction.edges_near(box)) {
            if (segment_meets_convex(boundary.edge_start(e), boundary.edge_end(e), poly, snap)) {
                cut[std::size_t(c)] = 1;
                break;
            }
        }
    });

    // flood fill from side-test seeds next to cut cells, then per component
    std::vector<signed char> label(static_cast<std::size_t>(nc), -1);  // 0 exterior, 1 interior
    std::vector<int> nbrs;
    std::deque<int> queue;
    auto seed = [&](int c) {
        if (cut[std::size_t(c)] || label[std::size_t(c)] != -1) return;
        const SideTest st = boundary.side_of(mesh.cell_center(c));
        if (st.distance < 1e-10 * mesh.cell_diameter(c))
            geometry_error("tolerance error: ambiguous side test at centroid of cell " +
                           std::to_string(c));
        label[std::size_t(c)] = st.inside ? 1 : 0;
        queue.push_back(c);
    };
    for (int c = 0; c < nc; ++c) {
        if (!cut[std::size_t(c)]) continue;
        mesh.face_neighbors(c, nbrs);
        for (int nb : nbrs) seed(nb);
    }
    auto drain = [&]() {
        while (!queue.empty()) {
            const int c = queue.front();
            queue.pop_front();
            mesh.face_neighbors(c, nbrs);
            for (int nb : nbrs) {
                if (cut[std::size_t(nb)]) continue;
                if (label[std::size_t(nb)] == -1) {
                    label[std::size_t(nb)] = label[std::size_t(c)];
                    queue.push_back(nb);
                }
            }
        }
    };
    drain();
    for (int c = 0; c < nc; ++c) {
        if (!cut[std::size_t(c)] && label[std::size_t(c)] == -1) {
            seed(c);
            drain();
        }
    }
    for (int c = 0; c < nc; ++c) {
        if (cut[std::size_t(c)]) cls[std::size_t(c)] = CellClass::Cut;
        else cls[std::size_t(c)] = label[std::size_t(c)] == 1 ? CellClass::Interior
                                                              : CellClass::Exterior;
    }
    return cls;
}

CellCap cell_cap(const ConvexPolygon& cell, const OrientedBoundary& boundary,
                 const std::vector<int>& edge_candidates, double eps_snap) {
    CellCap cap;
    const double diam = diameter(cell);

    // boundary portions actually inside the cell
    for (int e : edge_candidates) {
        const Vec2 a = boundary.edge_start(e), b = boundary.edge_end(e);
        auto iv = clip_segment_to_convex(a, b, cell, eps_snap);
        if (!iv) continue;
        const auto [t0, t1] = *iv;
        if ((t1 - t0) * norm(b - a) <= eps_snap) continue;
        cap.segments.push_back({a + (b - a) * t0, a + (b - a) * t1, e, t0, t1});
    }

    // wide candidate set for the local side tests (nearest feature of a
    // point in the cell is within one diameter once the cell is cut)
    std::vector<int> wide = edge_candidates;

    if (cap.segments.empty()) {
        const SideTest st = boundary.side_of(centroid(cell), wide.empty() ? std::vector<int>{} : wide);
        if (st.inside) cap.inside.push_back(cell);
        else cap.outside.push_back(cell);
        return cap;
    }

    // split by the (deduplicated) lines carrying the boundary segments
    std::vector<HalfPlane> lines;
    for (const BoundarySegment& s : cap.segments) {
        const HalfPlane h = HalfPlane::from_edge(s.a, s.b);
        bool dup = false;
        for (const HalfPlane& g : lines) {
            if (std::abs(dot(g.normal, h.normal)) > 1.0 - 1e-12 &&
                std::abs(std::abs(g.offset * dot(g.normal, h.normal)) - std::abs(h.offset)) <
                    eps_snap &&
                std::abs(g.offset - dot(g.normal, h.normal) * h.offset) < eps_snap) {
                dup = true;
                break;
            }
        }
        if (!dup) lines.push_back(h);
    }
    std::vector<ConvexPolygon> pieces{cell};
    for (const HalfPlane& h : lines) {
        std::vector<ConvexPolygon> next;
        const HalfPlane hneg{-h.normal, -h.offset};
        for (const ConvexPolygon& p : pieces) {
            ConvexPolygon lo = clip_convex_by_halfplane(p, h, eps_snap);
            ConvexPolygon hi = clip_convex_by_halfplane(p, hneg, eps_snap);
            if (!lo.empty()) next.push_back(std::move(lo));
            if (!hi.empty()) next.push_back(std::move(hi));
        }
        pieces.swap(next);
    }

    double in_area = 0.0, out_area = 0.0;
    for (ConvexPolygon& p : pieces) {
        const SideTest st = boundary.side_of(centroid(p), wide);
        if (st.inside) {
            in_area += signed_area(p);
            cap.inside.push_back(std::move(p));
        } else {
            out_area += signed_area(p);
            cap.outside.push_back(std::move(p));
        }
    }

    const double cell_area = signed_area(cell);
    if (std::abs(in_area + out_area - cell_area) > 1e-10 * cell_area)
        geometry_error("invalid geometry: cut pieces of a cell do not conserve its measure");

    // orientation coherence: interior must sit on the left of every segment
    const double probe = 1e-7 * diam;
    for (const BoundarySegment& s : cap.segments) {
        const Vec2 mid = (s.a + s.b) * 0.5;
        const Vec2 n = perp(s.b - s.a) * (1.0 / norm(s.b - s.a));  // left normal
        const bool left_in = boundary.side_of(mid + n * probe, wide).inside;
        const bool right_in = boundary.side_of(mid - n * probe, wide).inside;
        if (!left_in || right_in)
            geometry_error("invalid geometry: inconsistent boundary orientation at edge " +
                           std::to_string(s.edge));
    }
    return cap;
}

std::vector<ConvexPolygon> cell_cap_interior(const ConvexPolygon& cell,
                                             const OrientedBoundary& boundary,
                                             const std::vector<int>& edge_candidates,
                                             double eps_snap) {
    return cell_cap(cell, boundary, edge_candidates, eps_snap).inside;
}

std::vector<CutCellGeometry> build_cut_geometry(const ActiveMesh& active,
                                                const OrientedBoundary& boundary,
                                                ExecMode mode) {
    const CartesianMesh& mesh = *active.mesh;
    const double bucket = std::max(mesh.min_cell_size(), 1e-12);
    BoundaryRestriction restriction(boundary, bucket);
    std::vector<CutCellGeometry> out(active.active.size());
    for_each_index(mode, std::ptrdiff_t(active.active.size()), [&](std::ptrdiff_t k) {
        const int c = active.active[std::size_t(k)];
        CutCellGeometry& g = out[std::size_t(k)];
        g.cell = c;
        const ConvexPolygon poly = mesh.cell_polygon(c);
        const double snap = 1e-10 * mesh.cell_diameter(c);
        if (active.cls[std::size_t(c)] == CellClass::Interior) {
            g.inside.push_back(poly);
            g.measure = signed_area(poly);
            return;
        }
        BBox wide = bbox_of(poly);
        wide.inflate(1.01 * mesh.cell_diameter(c));
        CellCap cap = cell_cap(poly, boundary, restriction.edges_near(wide), snap);
        g.inside = std::move(cap.inside);
        g.segments = std::move(cap.segments);
        for (const ConvexPolygon& p : g.inside) g.measure += signed_area(p);
    });
    return out;
}

IntersectionMesh intersect_triple(const std::vector<IndexedCell>& current,
                                  const std::vector<IndexedCell>& previous_deformed,
                                  const OrientedBoundary& boundary, ExecMode mode) {
    // restriction grids: one preprocessing pass before the cell loop
    double bucket = 1e300;
    BBox domain;
    for (const IndexedCell& c : current) {
        const BBox b = bbox_of(c.poly);
        domain.expand(b.lo);
        domain.expand(b.hi);
        bucket = std::min(bucket, std::max(b.hi.x - b.lo.x, b.hi.y - b.lo.y));
    }
    if (current.empty()) geometry_error("intersect_triple: empty current mesh");
    domain.inflate(bucket);
    BucketGrid prev_grid(domain, bucket);
    for (std::size_t k = 0; k < previous_deformed.size(); ++k)
        prev_grid.insert(int(k), bbox_of(previous_deformed[k].poly));
    BoundaryRestriction restriction(boundary, bucket);

    std::vector<std::vector<PolyCell>> staged(current.size());
    std::vector<std::string> cell_error(current.size());
    for_each_index(mode, std::ptrdiff_t(current.size()), [&](std::ptrdiff_t k) {
        const IndexedCell& cur = current[std::size_t(k)];
        const double snap = 1e-10 * diameter(cur.poly);
        BBox box = bbox_of(cur.poly);
        BBox wide = box;
        wide.inflate(1.01 * diameter(cur.poly));

        // line 5: K ∩ int(B); interior cells skip the cap (line 9 branch)
        const std::vector<int> edges = restriction.edges_near(box);
        std::vector<ConvexPolygon> pieces;
        bool is_cut = false;
        if (!edges.empty()) {
            CellCap cap = cell_cap(cur.poly, boundary, restriction.edges_near(wide), snap);
            is_cut = !cap.segments.empty();
            pieces = std::move(cap.inside);
        } else {
            if (boundary.side_of(centroid(cur.poly)).inside) pieces.push_back(cur.poly);
        }
        (void)is_cut;
        if (pieces.empty()) return;

        double domain_area = 0.0;
        for (const ConvexPolygon& p : pieces) domain_area += signed_area(p);

        double covered = 0.0;
        std::vector<int> prev_ids = prev_grid.query(box);
        for (int pk : prev_ids) {
            const IndexedCell& prev = previous_deformed[std::size_t(pk)];
            PolyCell out;
            out.parent_current = cur.id;
            out.parent_previous = prev.id;
            for (const ConvexPolygon& p : pieces) {
                ConvexPolygon q = clip_convex_by_convex(p, prev.poly, snap);
                if (q.size() >= 3) {
                    const double a = signed_area(q);
                    if (a > snap * snap) {
                        out.measure += a;
                        out.pieces.push_back(std::move(q));
                    }
                }
            }
            if (!out.pieces.empty()) {
                covered += out.measure;
                staged[std::size_t(k)].push_back(std::move(out));
            }
        }
        if (covered < domain_area - 1e-8 * std::max(domain_area, signed_area(cur.poly)))
            cell_error[std::size_t(k)] =
                "coverage error: cell " + std::to_string(cur.id) +
                " has domain area uncovered by the deformed previous mesh (extended active mesh too small)";
    });

    for (const std::string& err : cell_error)
        if (!err.empty()) geometry_error(err);

    IntersectionMesh mesh;
    for (std::vector<PolyCell>& cells : staged) {
        std::sort(cells.begin(), cells.end(), [](const PolyCell& a, const PolyCell& b) {
            return a.parent_previous < b.parent_previous;
        });
        for (PolyCell& c : cells) {
            mesh.total_measure += c.measure;
            mesh.cells.push_back(std::move(c));
        }
    }
    return mesh;
}

} // namespace stfem
