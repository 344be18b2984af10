#pragma once

#include "stfem/assembly.hpp"
#include "stfem/cut.hpp"
#include "stfem/deformation.hpp"
#include "stfem/fe.hpp"
#include "stfem/quadrature.hpp"
#include "stfem/transfer.hpp"

#include <array>
#include <functional>

namespace stfem {

/// Closed-form solution with the derivatives needed by the DG norms.
struct ExactSolution {
    ScalarField value;
    std::function<Vec2(const Vec2&, double)> gradient;
    std::function<std::array<double, 3>(const Vec2&, double)> hessian;  // (xx, xy, yy)
    ScalarField time_derivative;
};

/// Accumulated DG error norm pieces: end-face L2, inter-slab jumps, and the
/// time integral of the broken V norm (gradient + Nitsche boundary + scaled
/// broken-H2 terms). All terms are nonnegative and only ever grow.
struct NormReport {
    double c_mu = 1.0;
    double endface_l2_sq = 0.0;
    double jump_sq = 0.0;
    double vnorm_integral = 0.0;
    double grad_term = 0.0;     // pieces of vnorm_integral, for diagnostics
    double nitsche_term = 0.0;
    double h2_term = 0.0;
    double final_l2 = 0.0;
    double final_h1 = 0.0;

    double dg_error() const {
        return std::sqrt(endface_l2_sq + jump_sq + c_mu * vnorm_integral);
    }
};

/// One slab's contribution to the V-norm time integral.
void accumulate_vnorm(NormReport& report, const SpaceTimeSpace& space,
                      const std::vector<double>& coeffs, const DeformationField& field,
                      const CutQuadrature& quad, const ExactSolution& exact, double mu,
                      double nitsche_c0);

/// i = 1 jump: ||u0 - u_h(t^1)|| over the first slab's initial face.
void accumulate_jump_initial(NormReport& report, const SpaceTimeSpace& space,
                             const std::vector<double>& coeffs, const DeformationField& field,
                             const CutQuadrature& quad,
                             const std::function<double(const Vec2&)>& u0);

/// i >= 2 jump through the intersection mesh.
void accumulate_jump_transfer(NormReport& report, const SpaceTimeSpace& current,
                              const std::vector<double>& cur_coeffs,
                              const SpaceTimeSpace& previous,
                              const std::vector<double>& prev_coeffs,
                              const std::vector<TransferTriangle>& transfer,
                              const IntersectionMesh& intersection);

/// Same-mesh jump for transfer-skipped slabs.
void accumulate_jump_direct(NormReport& report, const SpaceTimeSpace& current,
                            const std::vector<double>& cur_coeffs,
                            const SpaceTimeSpace& previous,
                            const std::vector<double>& prev_coeffs,
                            const DeformationField& field, const CutQuadrature& quad);

/// Final-time end-face errors (also fills endface_l2_sq).
void finalize_endface(NormReport& report, const SpaceTimeSpace& space,
                      const std::vector<double>& coeffs, const DeformationField& field,
                      const CutQuadrature& quad, const ExactSolution& exact);

} // namespace stfem
