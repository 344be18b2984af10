#include "stfem/boundary.hpp"
#include "stfem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stfem {

BucketGrid::BucketGrid(const BBox& domain, double target_cell_size) : domain_(domain) {
    const double lx = std::max(domain.hi.x - domain.lo.x, 1e-300);
    const double ly = std::max(domain.hi.y - domain.lo.y, 1e-300);
    nx_ = std::max(1, int(std::ceil(lx / target_cell_size)));
    ny_ = std::max(1, int(std::ceil(ly / target_cell_size)));
    hx_ = lx / nx_;
    hy_ = ly / ny_;
    buckets_.resize(std::size_t(nx_) * std::size_t(ny_));
}

void BucketGrid::bucket_range(const BBox& b, int& i0, int& i1, int& j0, int& j1) const {
    auto clampi = [](int v, int lo, int hi) { return std::max(lo, std::min(v, hi)); };
    i0 = clampi(int(std::floor((b.lo.x - domain_.lo.x) / hx_)), 0, nx_ - 1);
    i1 = clampi(int(std::floor((b.hi.x - domain_.lo.x) / hx_)), 0, nx_ - 1);
    j0 = clampi(int(std::floor((b.lo.y - domain_.lo.y) / hy_)), 0, ny_ - 1);
    j1 = clampi(int(std::floor((b.hi.y - domain_.lo.y) / hy_)), 0, ny_ - 1);
}

void BucketGrid::insert(int id, const BBox& b) {
    int i0, i1, j0, j1;
    bucket_range(b, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
            buckets_[std::size_t(j) * std::size_t(nx_) + std::size_t(i)].push_back(id);
}

std::vector<int> BucketGrid::query(const BBox& b) const {
    if (!b.overlaps(domain_)) return {};
    int i0, i1, j0, j1;
    bucket_range(b, i0, i1, j0, j1);
    std::vector<int> out;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            const auto& bk = buckets_[std::size_t(j) * std::size_t(nx_) + std::size_t(i)];
            out.insert(out.end(), bk.begin(), bk.end());
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

OrientedBoundary::OrientedBoundary(std::vector<Vec2> vertices,
                                   std::vector<std::array<int, 2>> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    build_topology();
}

void OrientedBoundary::build_topology() {
    const int nv = num_vertices();
    out_edge_.assign(std::size_t(nv), -1);
    in_edge_.assign(std::size_t(nv), -1);
    for (int e = 0; e < num_edges(); ++e) {
        const auto [a, b] = edges_[std::size_t(e)];
        if (a < 0 || a >= nv || b < 0 || b >= nv)
            geometry_error("invalid geometry: edge references vertex out of range");
        if (out_edge_[std::size_t(a)] != -1)
            geometry_error("invalid geometry: vertex " + std::to_string(a) +
                           " has more than one outgoing edge");
        if (in_edge_[std::size_t(b)] != -1)
            geometry_error("invalid geometry: vertex " + std::to_string(b) +
                           " has more than one incoming edge");
        out_edge_[std::size_t(a)] = e;
        in_edge_[std::size_t(b)] = e;
    }
    loops_.clear();
    std::vector<char> seen(static_cast<std::size_t>(nv), 0);
    for (int v0 = 0; v0 < nv; ++v0) {
        if (seen[std::size_t(v0)]) continue;
        if (out_edge_[std::size_t(v0)] == -1) continue;  // caught by validate()
        std::vector<int> loop;
        int v = v0;
        do {
            loop.push_back(v);
            seen[std::size_t(v)] = 1;
            const int e = out_edge_[std::size_t(v)];
            if (e == -1) geometry_error("invalid geometry: open polyline (vertex " +
                                        std::to_string(v) + " has no outgoing edge)");
            v = edges_[std::size_t(e)][1];
        } while (v != v0 && loop.size() <= std::size_t(nv));
        if (v != v0) geometry_error("invalid geometry: boundary loop does not close");
        loops_.push_back(std::move(loop));
    }
}

void OrientedBoundary::validate() const {
    const int nv = num_vertices();
    if (nv < 3 || num_edges() < 3)
        geometry_error("degenerate input: boundary needs at least 3 vertices and edges");
    for (int v = 0; v < nv; ++v) {
        if (out_edge_[std::size_t(v)] == -1 || in_edge_[std::size_t(v)] == -1)
            geometry_error("invalid geometry: vertex " + std::to_string(v) +
                           " is not on a closed loop");
    }
    // simplicity: non-adjacent edges must not intersect
    const double eps = 1e-12 * bounds().diameter();
    for (int e = 0; e < num_edges(); ++e) {
        for (int f = e + 1; f < num_edges(); ++f) {
            const auto& E = edges_[std::size_t(e)];
            const auto& F = edges_[std::size_t(f)];
            if (E[0] == F[1] || E[1] == F[0]) continue;  // consecutive edges share a vertex
            if (segments_intersect(edge_start(e), edge_end(e), edge_start(f), edge_end(f), eps))
                geometry_error("invalid geometry: boundary edges " + std::to_string(e) + " and " +
                               std::to_string(f) + " intersect (loops must be simple)");
        }
    }
    for (const auto& loop : loops_) {
        Polygon poly;
        for (int v : loop) poly.push_back(vertices_[std::size_t(v)]);
        if (poly.size() < 3 || std::abs(signed_area(poly)) < eps * eps)
            geometry_error("invalid geometry: boundary loop with vanishing area");
    }
}

double OrientedBoundary::enclosed_area() const {
    double a = 0.0;
    for (int e = 0; e < num_edges(); ++e) a += cross(edge_start(e), edge_end(e));
    return 0.5 * a;
}

bool OrientedBoundary::has_enclosing_loop() const {
    for (const auto& loop : loops_) {
        Polygon poly;
        for (int v : loop) poly.push_back(vertices_[std::size_t(v)]);
        if (poly.size() >= 3 && signed_area(poly) > 0.0) return true;
    }
    return false;
}

BBox OrientedBoundary::bounds() const {
    BBox b;
    for (const Vec2& v : vertices_) b.expand(v);
    return b;
}

OrientedBoundary OrientedBoundary::with_vertices(std::vector<Vec2> vertices) const {
    if (vertices.size() != vertices_.size())
        geometry_error("vertex count mismatch in boundary update");
    return OrientedBoundary(std::move(vertices), edges_);
}

namespace {

double point_segment_param(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double dd = dot(d, d);
    if (dd == 0.0) return 0.0;
    return std::clamp(dot(p - a, d) / dd, 0.0, 1.0);
}

} // namespace

SideTest OrientedBoundary::side_of(const Vec2& p, const std::vector<int>& candidates) const {
    SideTest best;
    best.distance = 1e300;
    double best_t = 0.0;
    auto consider = [&](int e) {
        const Vec2 a = edge_start(e), b = edge_end(e);
        const double t = point_segment_param(p, a, b);
        const Vec2 q = a + (b - a) * t;
        const double d2 = norm2(p - q);
        if (d2 < best.distance * best.distance * (1.0 - 1e-14) || best.nearest_edge < 0) {
            best.distance = std::sqrt(d2);
            best.nearest_edge = e;
            best_t = t;
        }
    };
    if (candidates.empty())
        for (int e = 0; e < num_edges(); ++e) consider(e);
    else
        for (int e : candidates) consider(e);
    if (best.nearest_edge < 0) { best.inside = false; return best; }

    const int e = best.nearest_edge;
    const Vec2 a = edge_start(e), b = edge_end(e);
    const double vertex_snap = 1e-9;
    if (best_t > vertex_snap && best_t < 1.0 - vertex_snap) {
        best.inside = cross(b - a, p - a) > 0.0;
        return best;
    }
    // nearest feature is a vertex: sector test against its two incident edges
    const int v = best_t <= vertex_snap ? edges_[std::size_t(e)][0] : edges_[std::size_t(e)][1];
    const int e_in = in_edge_[std::size_t(v)];
    const int e_out = out_edge_[std::size_t(v)];
    const Vec2 pv = vertices_[std::size_t(v)];
    const Vec2 din = edge_end(e_in) - edge_start(e_in);
    const Vec2 dout = edge_end(e_out) - edge_start(e_out);
    const double ci = cross(din, p - pv);
    const double co = cross(dout, p - pv);
    if (cross(din, dout) >= 0.0)
        best.inside = ci > 0.0 && co > 0.0;  // convex corner of the interior
    else
        best.inside = ci > 0.0 || co > 0.0;  // reflex corner
    return best;
}

OrientedBoundary read_boundary(std::istream& in, const std::string& name) {
    int line_no = 0;
    std::string line;
    auto next_line = [&]() -> std::string {
        while (std::getline(in, line)) {
            ++line_no;
            const auto pos = line.find_first_not_of(" \t\r\n");
            if (pos == std::string::npos) continue;
            if (line[pos] == '#') continue;
            return line;
        }
        config_error(name + ": unexpected end of file at line " + std::to_string(line_no));
    };

    std::istringstream header(next_line());
    int nv = 0, ne = 0;
    if (!(header >> nv >> ne) || nv < 0 || ne < 0)
        config_error(name + ": line " + std::to_string(line_no) + ": expected `NV NE`");
    std::vector<Vec2> vertices;
    vertices.resize(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i) {
        std::istringstream ls(next_line());
        if (!(ls >> vertices[std::size_t(i)].x >> vertices[std::size_t(i)].y))
            config_error(name + ": line " + std::to_string(line_no) + ": expected `x y`");
    }
    std::vector<std::array<int, 2>> edges;
    edges.resize(static_cast<std::size_t>(ne));
    for (int i = 0; i < ne; ++i) {
        std::istringstream ls(next_line());
        if (!(ls >> edges[std::size_t(i)][0] >> edges[std::size_t(i)][1]))
            config_error(name + ": line " + std::to_string(line_no) + ": expected `i j`");
        for (int k : {0, 1})
            if (edges[std::size_t(i)][std::size_t(k)] < 0 ||
                edges[std::size_t(i)][std::size_t(k)] >= nv)
                config_error(name + ": line " + std::to_string(line_no) +
                             ": vertex index out of range");
    }
    return OrientedBoundary(std::move(vertices), std::move(edges));
}

OrientedBoundary read_boundary_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) config_error("cannot open boundary file `" + path + "`");
    return read_boundary(f, path);
}

void write_boundary(std::ostream& out, const OrientedBoundary& b) {
    out << b.num_vertices() << " " << b.num_edges() << "\n";
    out.precision(17);
    for (const Vec2& v : b.vertices()) out << v.x << " " << v.y << "\n";
    for (const auto& e : b.edges()) out << e[0] << " " << e[1] << "\n";
}

OrientedBoundary make_box_boundary(const Vec2& lo, const Vec2& hi) {
    return OrientedBoundary({{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}},
                            {{{0, 1}}, {{1, 2}}, {{2, 3}}, {{3, 0}}});
}

OrientedBoundary make_hole_boundary(const Vec2& lo, const Vec2& hi) {
    return OrientedBoundary({{lo.x, lo.y}, {lo.x, hi.y}, {hi.x, hi.y}, {hi.x, lo.y}},
                            {{{0, 1}}, {{1, 2}}, {{2, 3}}, {{3, 0}}});
}

} // namespace stfem
