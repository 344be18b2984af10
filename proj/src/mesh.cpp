#include "stfem/mesh.hpp"
#include "stfem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace stfem {

double grading_map(double xhat, double x0, double alpha) {
    if (xhat <= 0.0) return 0.0;
    if (xhat >= 1.0) return 1.0;
    if (xhat < x0) return x0 * std::pow(xhat / x0, alpha);
    return 1.0 - (1.0 - x0) * std::pow((1.0 - xhat) / (1.0 - x0), alpha);
}

CartesianMesh CartesianMesh::build(const Vec2& origin, const Vec2& lengths, int nx, int ny,
                                   const std::array<Grading, 2>& grading) {
    if (nx < 1 || ny < 1) config_error("invalid parameter: mesh counts must be >= 1");
    for (const Grading& g : grading) {
        if (!g.enabled) continue;
        if (g.alpha <= 0.0) config_error("invalid parameter: grading alpha must be positive");
        if (g.alpha > 1.0) config_error("invalid parameter: grading alpha must be <= 1");
        if (g.x0 <= 0.0 || g.x0 >= 1.0)
            config_error("invalid parameter: grading x0 must lie in (0, 1)");
    }
    if (lengths.x <= 0.0 || lengths.y <= 0.0)
        config_error("invalid parameter: mesh lengths must be positive");

    CartesianMesh m;
    m.nx_ = nx;
    m.ny_ = ny;
    m.origin_ = origin;
    m.lengths_ = lengths;
    auto fill = [](std::vector<double>& c, int n, double o, double L, const Grading& g) {
        c.resize(std::size_t(n) + 1);
        for (int k = 0; k <= n; ++k) {
            const double xh = double(k) / double(n);
            c[std::size_t(k)] = o + L * (g.enabled ? grading_map(xh, g.x0, g.alpha) : xh);
        }
        c.front() = o;
        c.back() = o + L;  // extent preserved exactly
    };
    fill(m.xc_, nx, origin.x, lengths.x, grading[0]);
    fill(m.yc_, ny, origin.y, lengths.y, grading[1]);
    for (int k = 0; k < nx; ++k)
        if (m.xc_[std::size_t(k) + 1] <= m.xc_[std::size_t(k)])
            config_error("grading produced non-increasing x coordinates");
    for (int k = 0; k < ny; ++k)
        if (m.yc_[std::size_t(k) + 1] <= m.yc_[std::size_t(k)])
            config_error("grading produced non-increasing y coordinates");
    return m;
}

CartesianMesh CartesianMesh::simplexified() const {
    CartesianMesh m = *this;
    m.simplex_ = true;
    return m;
}

void CartesianMesh::cell_location(int c, int& i, int& j, int& tri) const {
    if (simplex_) {
        tri = c % 2;
        const int q = c / 2;
        i = q % nx_;
        j = q / nx_;
    } else {
        tri = -1;
        i = c % nx_;
        j = c / nx_;
    }
}

int CartesianMesh::cell_index(int i, int j, int tri) const {
    const int q = j * nx_ + i;
    return simplex_ ? 2 * q + tri : q;
}

ConvexPolygon CartesianMesh::cell_polygon(int c) const {
    int i, j, tri;
    cell_location(c, i, j, tri);
    const Vec2 A{xc_[std::size_t(i)], yc_[std::size_t(j)]};
    const Vec2 B{xc_[std::size_t(i) + 1], yc_[std::size_t(j)]};
    const Vec2 C{xc_[std::size_t(i) + 1], yc_[std::size_t(j) + 1]};
    const Vec2 D{xc_[std::size_t(i)], yc_[std::size_t(j) + 1]};
    if (tri == 0) return {A, B, C};
    if (tri == 1) return {A, C, D};
    return {A, B, C, D};
}

BBox CartesianMesh::cell_bbox(int c) const { return bbox_of(cell_polygon(c)); }

double CartesianMesh::cell_diameter(int c) const {
    int i, j, tri;
    cell_location(c, i, j, tri);
    const double hx = xc_[std::size_t(i) + 1] - xc_[std::size_t(i)];
    const double hy = yc_[std::size_t(j) + 1] - yc_[std::size_t(j)];
    return std::sqrt(hx * hx + hy * hy);
}

void CartesianMesh::face_neighbors(int c, std::vector<int>& out) const {
    out.clear();
    int i, j, tri;
    cell_location(c, i, j, tri);
    if (!simplex_) {
        if (i > 0) out.push_back(cell_index(i - 1, j));
        if (i + 1 < nx_) out.push_back(cell_index(i + 1, j));
        if (j > 0) out.push_back(cell_index(i, j - 1));
        if (j + 1 < ny_) out.push_back(cell_index(i, j + 1));
        return;
    }
    if (tri == 0) {
        out.push_back(cell_index(i, j, 1));                       // across the diagonal
        if (j > 0) out.push_back(cell_index(i, j - 1, 1));        // bottom
        if (i + 1 < nx_) out.push_back(cell_index(i + 1, j, 1));  // right
    } else {
        out.push_back(cell_index(i, j, 0));
        if (j + 1 < ny_) out.push_back(cell_index(i, j + 1, 0));  // top
        if (i > 0) out.push_back(cell_index(i - 1, j, 0));        // left
    }
    std::sort(out.begin(), out.end());
}

std::vector<CartesianMesh::FittedFace> CartesianMesh::boundary_faces() const {
    std::vector<FittedFace> faces;
    auto X = [&](int i) { return xc_[std::size_t(i)]; };
    auto Y = [&](int j) { return yc_[std::size_t(j)]; };
    for (int j = 0; j < ny_; ++j) {
        // left column, side xmin: CCW segment runs downward (D->A)
        faces.push_back({cell_index(0, j, simplex_ ? 1 : 0), 0,
                         {X(0), Y(j + 1)}, {X(0), Y(j)}});
        faces.push_back({cell_index(nx_ - 1, j, 0), 1,
                         {X(nx_), Y(j)}, {X(nx_), Y(j + 1)}});
    }
    for (int i = 0; i < nx_; ++i) {
        faces.push_back({cell_index(i, 0, 0), 2, {X(i), Y(0)}, {X(i + 1), Y(0)}});
        faces.push_back({cell_index(i, ny_ - 1, simplex_ ? 1 : 0), 3,
                         {X(i + 1), Y(ny_)}, {X(i), Y(ny_)}});
    }
    std::sort(faces.begin(), faces.end(),
              [](const FittedFace& a, const FittedFace& b) {
                  return a.cell != b.cell ? a.cell < b.cell : a.side < b.side;
              });
    return faces;
}

std::vector<double> CartesianMesh::node_coords(int p, int direction) const {
    const std::vector<double>& c = direction == 0 ? xc_ : yc_;
    const int n = direction == 0 ? nx_ : ny_;
    std::vector<double> out(static_cast<std::size_t>(p) * std::size_t(n) + 1);
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < p; ++a)
            out[std::size_t(k * p + a)] =
                c[std::size_t(k)] + (double(a) / p) * (c[std::size_t(k) + 1] - c[std::size_t(k)]);
    out.back() = c.back();
    return out;
}

BBox CartesianMesh::bounds() const {
    BBox b;
    b.expand(origin_);
    b.expand(origin_ + lengths_);
    return b;
}

double CartesianMesh::min_cell_size() const {
    double h = 1e300;
    for (int k = 0; k < nx_; ++k) h = std::min(h, xc_[std::size_t(k) + 1] - xc_[std::size_t(k)]);
    for (int k = 0; k < ny_; ++k) h = std::min(h, yc_[std::size_t(k) + 1] - yc_[std::size_t(k)]);
    return h;
}

TimePartition TimePartition::uniform(double t_end, int slabs, double t_begin) {
    if (slabs < 1) config_error("invalid parameter: number of time slabs must be >= 1");
    if (t_end <= t_begin) config_error("invalid parameter: time interval must be positive");
    std::vector<double> bp(static_cast<std::size_t>(slabs) + 1);
    for (int n = 0; n <= slabs; ++n)
        bp[std::size_t(n)] = t_begin + (t_end - t_begin) * double(n) / double(slabs);
    bp.back() = t_end;
    return TimePartition(std::move(bp));
}

TimePartition::TimePartition(std::vector<double> breakpoints) : bp_(std::move(breakpoints)) {
    if (bp_.size() < 2) config_error("time partition needs at least one slab");
    for (std::size_t i = 0; i + 1 < bp_.size(); ++i)
        if (bp_[i + 1] <= bp_[i])
            config_error("time breakpoints must be strictly increasing");
}

double TimePartition::max_tau() const {
    double m = 0.0;
    for (int n = 0; n < num_slabs(); ++n) m = std::max(m, tau(n));
    return m;
}

ActiveMesh make_active_mesh(std::shared_ptr<const CartesianMesh> mesh,
                            std::vector<CellClass> classification) {
    if (int(classification.size()) != mesh->num_cells())
        config_error("classification size does not match cell count");
    ActiveMesh am;
    am.mesh = std::move(mesh);
    am.cls = std::move(classification);
    const int nc = am.mesh->num_cells();
    am.active_flag.assign(std::size_t(nc), 0);
    am.extended_flag.assign(std::size_t(nc), 0);
    for (int c = 0; c < nc; ++c) {
        if (am.cls[std::size_t(c)] != CellClass::Exterior) {
            am.active.push_back(c);
            am.active_flag[std::size_t(c)] = 1;
            am.extended_flag[std::size_t(c)] = 1;
        }
    }
    am.extended = am.active;
    if (am.active.empty()) config_error("configuration error: active mesh is empty");
    return am;
}

ActiveMesh extend_active(const ActiveMesh& am,
                         const std::function<Vec2(int donor, const Vec2&)>& phi_end,
                         const OrientedBoundary& next_boundary) {
    const CartesianMesh& mesh = *am.mesh;
    if (next_boundary.has_enclosing_loop()) {
        const BBox mb = mesh.bounds();
        BBox bb = next_boundary.bounds();
        const double tol = 1e-12 * mb.diameter();
        if (bb.lo.x < mb.lo.x - tol || bb.lo.y < mb.lo.y - tol || bb.hi.x > mb.hi.x + tol ||
            bb.hi.y > mb.hi.y + tol)
            geometry_error("artificial domain too small: next-slab boundary leaves the background mesh");
    }

    // conservative bbox-vs-domain overlap: a corner inside, a boundary
    // vertex contained, or a boundary segment genuinely crossing the box
    auto bbox_meets_domain = [&](const BBox& b) {
        const Polygon corners{{b.lo.x, b.lo.y}, {b.hi.x, b.lo.y}, {b.hi.x, b.hi.y}, {b.lo.x, b.hi.y}};
        for (const Vec2& c : corners)
            if (next_boundary.inside(c)) return true;
        if (next_boundary.inside(Vec2{0.5 * (b.lo.x + b.hi.x), 0.5 * (b.lo.y + b.hi.y)})) return true;
        for (const Vec2& v : next_boundary.vertices())
            if (b.contains(v)) return true;
        const double eps = 1e-12 * b.diameter();
        for (int e = 0; e < next_boundary.num_edges(); ++e) {
            const Vec2 a = next_boundary.edge_start(e);
            const Vec2 q = next_boundary.edge_end(e);
            if (b.contains(a) || b.contains(q)) return true;
            for (std::size_t k = 0; k < 4; ++k)
                if (segments_intersect(a, q, corners[k], corners[(k + 1) % 4], eps)) return true;
        }
        return false;
    };

    ActiveMesh out = am;
    std::deque<int> frontier;
    std::vector<int> donor(static_cast<std::size_t>(mesh.num_cells()), -1);
    std::vector<int> nbrs;
    // donors stay in the original extended set: the deformation polynomial
    // is only defined there, candidates evaluate through extension
    auto push_neighbors = [&](int c, int root_donor) {
        mesh.face_neighbors(c, nbrs);
        for (int nb : nbrs) {
            if (out.is_extended(nb) || donor[std::size_t(nb)] >= 0) continue;
            donor[std::size_t(nb)] = root_donor;
            frontier.push_back(nb);
        }
    };
    for (int c : out.extended) push_neighbors(c, c);
    while (!frontier.empty()) {
        const int c = frontier.front();
        frontier.pop_front();
        BBox db;
        const ConvexPolygon poly = mesh.cell_polygon(c);
        for (const Vec2& v : poly) db.expand(phi_end(donor[std::size_t(c)], v));
        // margin absorbs the extrapolation error of the donor evaluation
        db.inflate(0.1 * mesh.cell_diameter(c));
        if (!bbox_meets_domain(db)) continue;
        out.extended_flag[std::size_t(c)] = 1;
        out.extended.push_back(c);
        push_neighbors(c, donor[std::size_t(c)]);
    }
    std::sort(out.extended.begin(), out.extended.end());
    return out;
}

} // namespace stfem
