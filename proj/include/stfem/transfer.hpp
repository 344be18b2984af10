#pragma once

#include "stfem/cut.hpp"
#include "stfem/deformation.hpp"
#include "stfem/fe.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <vector>

namespace stfem {

/// One straight-sided simplex of the deformed previous mesh: P1 restriction
/// of the end-of-slab map (vertex displacements only), exactly invertible.
struct TransferTriangle {
    int prev_cell = -1;  // background cell carrying the solution polynomial
    std::array<Vec2, 3> undeformed;
    std::array<Vec2, 3> deformed;

    /// Pull a physical point of the deformed triangle back to the
    /// undeformed configuration (affine, exact).
    Vec2 pull_back(const Vec2& x) const;
    /// Barycentric coordinates on the deformed triangle.
    std::array<double, 3> barycentric(const Vec2& x) const;
};

/// Simplex split of the extended active cells, vertices pushed through the
/// deformation at t_end. Throws on inverted (non-CCW) deformed triangles.
std::vector<TransferTriangle> build_transfer_mesh(const ActiveMesh& active,
                                                  const DeformationField& field, double t_end);

std::vector<IndexedCell> deformed_cells(const std::vector<TransferTriangle>& tris);

struct JumpCoupling {
    Eigen::VectorXd rhs;                      // b_i += ∫ v_i(t^n) u^{n-1}(t^n)
    Eigen::SparseMatrix<double> init_mass;    // consistency block over the intersection mesh
    double transferred_mass = 0.0;            // ∫ u^{n-1}(t^n) over the intersection mesh
};

/// Inter-slab DG coupling over the intersection mesh: at each quadrature
/// point the previous solution is evaluated through psi^- (affine pullback
/// of the transfer triangle, then the previous cell's polynomial) and the
/// current test functions through psi^+. Both parent containments are
/// verified to the snapping tolerance.
JumpCoupling jump_coupling(const SpaceTimeSpace& current, const SpaceTimeSpace& previous,
                           const std::vector<double>& previous_coeffs,
                           const std::vector<TransferTriangle>& transfer,
                           const IntersectionMesh& intersection,
                           ExecMode mode = ExecMode::Serial);

} // namespace stfem
