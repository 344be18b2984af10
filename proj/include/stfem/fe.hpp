#pragma once

#include "stfem/mesh.hpp"
#include "stfem/vec.hpp"

#include <array>
#include <memory>
#include <vector>

namespace stfem {

/// Gauss-Legendre rule on [0,1], exact to degree 2n-1.
void gauss_legendre(int n, std::vector<double>& points, std::vector<double>& weights);

/// Gauss-Lobatto node locations on [0,1] (q+1 nodes, q in [1,3]).
std::vector<double> gauss_lobatto_nodes(int q);

/// Nodal Lagrange basis on the reference interval [0,1]. Order q = 0 is the
/// constant on the midpoint node; q >= 1 uses Gauss-Lobatto nodes so both
/// slab endpoints carry a node.
class ScalarBasis1D {
public:
    explicit ScalarBasis1D(int q);

    int order() const { return q_; }
    int count() const { return int(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }

    void values(double t, double* vals) const;
    void derivatives(double t, double* ders) const;

private:
    int q_;
    std::vector<double> nodes_;
};

/// Nodal Lagrange basis on a reference cell (unit square, tensor monomials;
/// or unit triangle, total-degree monomials), realized through an inverted
/// Vandermonde so values, gradients and second derivatives share one path.
class RefBasis {
public:
    static const RefBasis& rect(int p);
    static const RefBasis& tri(int p);

    int order() const { return p_; }
    int count() const { return int(nodes_.size()); }
    const std::vector<Vec2>& nodes() const { return nodes_; }

    void values(const Vec2& xi, double* vals) const;
    void gradients(const Vec2& xi, Vec2* grads) const;
    /// Second derivatives (dxx, dxy, dyy) per shape function.
    void hessians(const Vec2& xi, std::array<double, 3>* hess) const;

private:
    RefBasis(int p, bool tri);
    int p_;
    std::vector<Vec2> nodes_;
    std::vector<std::array<int, 2>> monomials_;
    std::vector<double> coeff_;  // coeff_[m * n + i]: weight of monomial m in basis i

    friend class SpatialSpace;
};

/// Affine cell geometry x = v0 + J xi.
struct CellGeom {
    Vec2 v0;
    Mat2 jac;
    Mat2 jac_inv;
    double det = 1.0;

    Vec2 to_physical(const Vec2& xi) const { return v0 + jac.apply(xi); }
    Vec2 to_reference(const Vec2& x) const { return jac_inv.apply(x - v0); }
};

/// C0 Lagrange space of order p on the background mesh, scalar or
/// vector-valued; nodes live on the p-refined lattice so cells share DOFs
/// on shared faces.
class SpatialSpace {
public:
    SpatialSpace(std::shared_ptr<const CartesianMesh> mesh, int p, int ncomp = 1);

    const CartesianMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const CartesianMesh> mesh_ptr() const { return mesh_; }
    int order() const { return p_; }
    int ncomp() const { return ncomp_; }

    int num_lattice_nodes() const { return int(nodes_x_.size() * nodes_y_.size()); }
    int nodes_per_cell() const;
    Vec2 node_position(int node) const;
    bool node_on_artificial_boundary(int node) const;
    /// Side (0 xmin, 1 xmax, 2 ymin, 3 ymax) membership of a lattice node.
    bool node_on_side(int node, int side) const;

    void cell_nodes(int c, std::vector<int>& out) const;
    CellGeom cell_geometry(int c) const;
    const RefBasis& cell_basis(int c) const;

    /// Shape values and physical-space gradients at a physical point of a cell.
    void eval(int c, const Vec2& x, double* vals, Vec2* grads) const;
    /// Physical-space second derivatives (dxx, dxy, dyy).
    void eval_hessians(int c, const Vec2& x, std::array<double, 3>* hess) const;

private:
    std::shared_ptr<const CartesianMesh> mesh_;
    int p_;
    int ncomp_;
    std::vector<double> nodes_x_, nodes_y_;
};

/// Space-time tensor space on one slab over the extended cell set of an
/// active mesh: spatial order p (C0), temporal order q (DG across slabs).
/// DOF layout: ((active_node * ncomp + comp) * (q+1) + tnode).
class SpaceTimeSpace {
public:
    SpaceTimeSpace(SpatialSpace spatial, int q, double t_begin, double t_end,
                   const ActiveMesh& active);

    const SpatialSpace& spatial() const { return spatial_; }
    const ScalarBasis1D& temporal() const { return temporal_; }
    const ActiveMesh& active() const { return *active_; }
    double t_begin() const { return t0_; }
    double t_end() const { return t1_; }
    double tau() const { return t1_ - t0_; }
    double t_ref(double t) const { return (t - t0_) / (t1_ - t0_); }

    int num_active_nodes() const { return int(active_nodes_.size()); }
    const std::vector<int>& active_nodes() const { return active_nodes_; }
    int active_index(int lattice_node) const { return node_to_active_[std::size_t(lattice_node)]; }

    int nt() const { return temporal_.count(); }
    int ncomp() const { return spatial_.ncomp(); }
    int num_dofs() const { return num_active_nodes() * ncomp() * nt(); }
    int dof(int active_node, int comp, int tnode) const {
        return (active_node * ncomp() + comp) * nt() + tnode;
    }

    /// Active-node indices of a cell's spatial nodes.
    void cell_active_nodes(int c, std::vector<int>& out) const;

    /// Value of one component of a coefficient vector at (cell, x, t); the
    /// cell's polynomial is used even for x outside the cell (extension).
    double value(const std::vector<double>& coeffs, int cell, const Vec2& x, double t,
                 int comp = 0) const;
    Vec2 gradient(const std::vector<double>& coeffs, int cell, const Vec2& x, double t,
                  int comp = 0) const;
    double time_derivative(const std::vector<double>& coeffs, int cell, const Vec2& x, double t,
                           int comp = 0) const;

private:
    SpatialSpace spatial_;
    ScalarBasis1D temporal_;
    double t0_, t1_;
    std::shared_ptr<const ActiveMesh> active_;
    std::vector<int> active_nodes_;    // sorted lattice node ids
    std::vector<int> node_to_active_;  // lattice -> active index or -1
};

} // namespace stfem
