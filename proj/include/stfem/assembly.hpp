#pragma once

#include "stfem/aggregation.hpp"
#include "stfem/deformation.hpp"
#include "stfem/fe.hpp"
#include "stfem/parallel.hpp"
#include "stfem/quadrature.hpp"

#include <Eigen/SparseCore>

#include <functional>

namespace stfem {

using ScalarField = std::function<double(const Vec2&, double)>;
using VectorField = std::function<Vec2(const Vec2&, double)>;

/// Convection-diffusion model data on the physical (deformed) domain.
struct ModelProblem {
    double mu = 1.0;
    VectorField advection;  // empty = zero
    ScalarField source;     // f
    ScalarField dirichlet;  // u_D
    ScalarField neumann;    // g_N (empty = zero)
    std::function<double(const Vec2&)> initial;  // u_0
    double nitsche_c0 = 10.0;
};

struct AssembleOptions {
    bool time_term = true;  // v dt^n u |J|
    bool init_mass = true;  // v(t^n) u(t^n) |J_Omega|
    bool ah = true;         // diffusion + advection + Nitsche
    bool rhs = true;        // source, Neumann, Nitsche data
    ExecMode mode = ExecMode::Serial;
};

struct SlabSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    double min_det_fx = 1e300;           // over volume quadrature points
    double neumann_upwind_min = 1e300;   // min of w.n_x + n_t over Neumann points
};

/// All terms of the pulled-back slab forms: transported time derivative,
/// initial-face mass, diffusion/advection with transported gradients,
/// Nitsche consistency/symmetry/penalty with the transported normal and
/// surface measure factor, and the composed data terms on the right side.
/// The previous-slab coupling enters separately (transfer module).
SlabSystem assemble_slab(const ModelProblem& problem, const SpaceTimeSpace& space,
                         const DeformationField& field, const CutQuadrature& quad,
                         const AssembleOptions& options = {});

/// Space-time mass matrix with the initial-face Jacobian factor.
Eigen::SparseMatrix<double> assemble_spacetime_mass(const SpaceTimeSpace& space,
                                                    const DeformationField& field,
                                                    const CutQuadrature& quad,
                                                    ExecMode mode = ExecMode::Serial);

/// First-slab coupling: b_i = ∫ v_i(t^n) u0 |J_Omega^n| over the initial face.
Eigen::VectorXd initial_value_rhs(const SpaceTimeSpace& space, const DeformationField& field,
                                  const CutQuadrature& quad,
                                  const std::function<double(const Vec2&)>& u0);

/// Same-mesh coupling for transfer-skipped slabs: previous end values read
/// off the shared reference mesh, weighted by the chained |J_Omega^n|.
Eigen::VectorXd direct_jump_rhs(const SpaceTimeSpace& space, const DeformationField& field,
                                const CutQuadrature& quad, const SpaceTimeSpace& previous,
                                const std::vector<double>& previous_coeffs);

struct ConditionNumbers {
    double mass = 0.0;
    double stiffness = 0.0;
    bool mass_singular = false;
    bool stiffness_singular = false;
};

/// Exact 1-norm condition numbers of the constrained mass and stiffness
/// matrices (stiffness = the a_h block applied to extended basis pairs),
/// via explicit dense inverses. Singular matrices report infinity.
ConditionNumbers condition_numbers(const ModelProblem& problem, const SpaceTimeSpace& space,
                                   const DeformationField& field, const CutQuadrature& quad,
                                   const AggregationMap& aggregates,
                                   ExecMode mode = ExecMode::Serial);

/// kappa_1 of a dense-ified sparse matrix; infinity when singular.
double condition_number_1norm(const Eigen::SparseMatrix<double>& m, bool* singular = nullptr);

} // namespace stfem
