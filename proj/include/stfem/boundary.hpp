#pragma once

#include "stfem/geometry.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace stfem {

/// Uniform-bucket acceleration grid over item bounding boxes; conservative
/// superset queries for the restrict() preprocessing pass.
class BucketGrid {
public:
    BucketGrid() = default;
    BucketGrid(const BBox& domain, double target_cell_size);

    void insert(int id, const BBox& b);
    /// Ids whose bbox bucket range overlaps `b`; sorted, deduplicated.
    std::vector<int> query(const BBox& b) const;

private:
    BBox domain_;
    int nx_ = 0, ny_ = 0;
    double hx_ = 1.0, hy_ = 1.0;
    std::vector<std::vector<int>> buckets_;

    void bucket_range(const BBox& b, int& i0, int& i1, int& j0, int& j1) const;
};

struct SideTest {
    bool inside = false;
    double distance = 0.0;  // to the nearest boundary feature
    int nearest_edge = -1;
};

/// Explicit closed polyline boundary; the interior lies to the left of each
/// directed edge. Loops may enclose the domain (CCW, positive shoelace) or
/// describe holes carved from the ambient box (CW, negative shoelace).
class OrientedBoundary {
public:
    OrientedBoundary() = default;
    OrientedBoundary(std::vector<Vec2> vertices, std::vector<std::array<int, 2>> edges);

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    int num_vertices() const { return int(vertices_.size()); }
    int num_edges() const { return int(edges_.size()); }

    Vec2 edge_start(int e) const { return vertices_[std::size_t(edges_[std::size_t(e)][0])]; }
    Vec2 edge_end(int e) const { return vertices_[std::size_t(edges_[std::size_t(e)][1])]; }

    /// Closed-loop and simplicity checks; throws invalid-geometry on failure.
    void validate() const;

    /// Shoelace sum over directed edges. Positive and equal to the domain
    /// area for enclosing boundaries; -hole area for hole-type boundaries.
    double enclosed_area() const;

    /// True when some loop runs counterclockwise (boundary encloses a
    /// bounded region rather than carving holes from the ambient box).
    bool has_enclosing_loop() const;

    BBox bounds() const;

    /// Same topology, new vertex positions.
    OrientedBoundary with_vertices(std::vector<Vec2> vertices) const;

    /// Nearest-oriented-edge side test over the given candidate edges
    /// (all edges when `candidates` is empty).
    SideTest side_of(const Vec2& p, const std::vector<int>& candidates = {}) const;
    bool inside(const Vec2& p) const { return side_of(p).inside; }

    /// Vertex indices in loop order, one list per closed loop.
    const std::vector<std::vector<int>>& loops() const { return loops_; }

private:
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::vector<int>> loops_;
    std::vector<int> out_edge_;  // per vertex
    std::vector<int> in_edge_;

    void build_topology();
};

/// Plain text format: `NV NE`, then NV lines `x y`, then NE lines `i j`
/// (0-based directed edges). Throws config errors with line numbers.
OrientedBoundary read_boundary(std::istream& in, const std::string& name = "<stream>");
OrientedBoundary read_boundary_file(const std::string& path);
void write_boundary(std::ostream& out, const OrientedBoundary& b);

/// Axis-aligned CCW rectangle loop (encloses its interior).
OrientedBoundary make_box_boundary(const Vec2& lo, const Vec2& hi);
/// Axis-aligned CW rectangle loop (hole: interior of the domain is outside).
OrientedBoundary make_hole_boundary(const Vec2& lo, const Vec2& hi);

} // namespace stfem
