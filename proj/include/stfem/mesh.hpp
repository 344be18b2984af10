#pragma once

#include "stfem/boundary.hpp"
#include "stfem/geometry.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace stfem {

enum class CellClass : unsigned char { Interior, Cut, Exterior };

/// Per-direction mesh grading toward an attraction point:
///   phi(x) = x0 (x/x0)^alpha          for x <  x0
///   phi(x) = 1 - (1-x0)((1-x)/(1-x0))^alpha  otherwise
/// with 0 < x0 < 1 and 0 < alpha <= 1; alpha = 1 is the identity.
struct Grading {
    double x0 = 0.5;
    double alpha = 1.0;
    bool enabled = false;
};

double grading_map(double xhat, double x0, double alpha);

/// Background partition of the artificial box: axis-aligned rectangles, or
/// two triangles per rectangle when simplexified (consistent diagonals,
/// lower triangle (A,B,C) then upper (A,C,D), both CCW).
class CartesianMesh {
public:
    static CartesianMesh build(const Vec2& origin, const Vec2& lengths, int nx, int ny,
                               const std::array<Grading, 2>& grading = {});

    /// Same vertices, each rectangle split into 2 triangles.
    CartesianMesh simplexified() const;

    bool is_simplex() const { return simplex_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    const Vec2& origin() const { return origin_; }
    const Vec2& lengths() const { return lengths_; }
    const std::vector<double>& xcoords() const { return xc_; }
    const std::vector<double>& ycoords() const { return yc_; }

    int num_cells() const { return simplex_ ? 2 * nx_ * ny_ : nx_ * ny_; }
    int num_rects() const { return nx_ * ny_; }

    /// Rectangle index and triangle-within-rectangle (0 lower, 1 upper; -1 for quads).
    void cell_location(int c, int& i, int& j, int& tri) const;
    int cell_index(int i, int j, int tri = 0) const;

    ConvexPolygon cell_polygon(int c) const;
    BBox cell_bbox(int c) const;
    double cell_diameter(int c) const;
    Vec2 cell_center(int c) const { return centroid(cell_polygon(c)); }

    /// Face-adjacent neighbor cell ids (quads: up to 4; triangles: up to 3).
    void face_neighbors(int c, std::vector<int>& out) const;

    /// Faces of the artificial-domain boundary. `side`: 0 xmin, 1 xmax,
    /// 2 ymin, 3 ymax. The segment a->b runs CCW around the cell, so the
    /// outward normal is the right-hand perp.
    struct FittedFace {
        int cell;
        int side;
        Vec2 a, b;
    };
    std::vector<FittedFace> boundary_faces() const;

    /// Lattice node coordinates for order-p Lagrange spaces (size p*n+1).
    std::vector<double> node_coords(int p, int direction) const;

    BBox bounds() const;
    double min_cell_size() const;

private:
    int nx_ = 0, ny_ = 0;
    Vec2 origin_, lengths_;
    std::vector<double> xc_, yc_;
    bool simplex_ = false;
};

/// Strictly increasing time-slab breakpoints t^1 < ... < t^{N+1}.
class TimePartition {
public:
    static TimePartition uniform(double t_end, int slabs, double t_begin = 0.0);
    explicit TimePartition(std::vector<double> breakpoints);

    int num_slabs() const { return int(bp_.size()) - 1; }
    double t_begin(int n) const { return bp_[std::size_t(n)]; }
    double t_end(int n) const { return bp_[std::size_t(n) + 1]; }
    double tau(int n) const { return t_end(n) - t_begin(n); }
    double max_tau() const;
    const std::vector<double>& breakpoints() const { return bp_; }

private:
    std::vector<double> bp_;
};

/// Background mesh plus cut classification: active set (everything not
/// exterior) and the extended set used for inter-slab coverage.
struct ActiveMesh {
    std::shared_ptr<const CartesianMesh> mesh;
    std::vector<CellClass> cls;
    std::vector<int> active;    // sorted cell ids, cls != Exterior
    std::vector<int> extended;  // sorted superset of `active`

    bool is_active(int c) const { return active_flag[std::size_t(c)] != 0; }
    bool is_extended(int c) const { return extended_flag[std::size_t(c)] != 0; }
    std::vector<char> active_flag, extended_flag;
};

/// Drop exterior cells; throws a configuration error when nothing remains.
ActiveMesh make_active_mesh(std::shared_ptr<const CartesianMesh> mesh,
                            std::vector<CellClass> classification);

/// Grow the extended set with artificial cells whose deformed image
/// (conservative bounding box of deformed vertices) meets the next-slab
/// domain. `phi_end(donor, x)` evaluates the end-of-slab deformation map
/// using the polynomial of `donor`, an already-extended cell adjacent to
/// the candidate, so the ring expansion matches the on-demand aggregate
/// extension.
ActiveMesh extend_active(const ActiveMesh& am,
                         const std::function<Vec2(int donor, const Vec2&)>& phi_end,
                         const OrientedBoundary& next_boundary);

} // namespace stfem
