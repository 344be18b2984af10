#include "stfem/norms.hpp"
#include "stfem/errors.hpp"

#include <cmath>

namespace stfem {

namespace {

/// u_h value/gradient/hessian at one space-time point, physical derivatives.
struct DiscreteEval {
    double value = 0.0;
    Vec2 grad;            // reference-configuration gradient
    std::array<double, 3> hess{0.0, 0.0, 0.0};
};

DiscreteEval eval_uh(const SpaceTimeSpace& space, const std::vector<double>& coeffs, int cell,
                     const Vec2& x, double t, bool with_hess) {
    const SpatialSpace& spat = space.spatial();
    const int nsp = spat.nodes_per_cell();
    const int nt = space.nt();
    std::vector<double> sv(static_cast<std::size_t>(nsp));
    std::vector<Vec2> sg(static_cast<std::size_t>(nsp));
    std::vector<std::array<double, 3>> sh;
    spat.eval(cell, x, sv.data(), sg.data());
    if (with_hess) {
        sh.resize(static_cast<std::size_t>(nsp));
        spat.eval_hessians(cell, x, sh.data());
    }
    std::vector<double> tv(static_cast<std::size_t>(nt));
    space.temporal().values(space.t_ref(t), tv.data());
    std::vector<int> an;
    space.cell_active_nodes(cell, an);
    DiscreteEval out;
    for (int i = 0; i < nsp; ++i) {
        double ci = 0.0;
        for (int l = 0; l < nt; ++l)
            ci += coeffs[std::size_t(space.dof(an[std::size_t(i)], 0, l))] * tv[std::size_t(l)];
        out.value += ci * sv[std::size_t(i)];
        out.grad += sg[std::size_t(i)] * ci;
        if (with_hess)
            for (int k = 0; k < 3; ++k) out.hess[std::size_t(k)] += ci * sh[std::size_t(i)][std::size_t(k)];
    }
    return out;
}

} // namespace

void accumulate_vnorm(NormReport& report, const SpaceTimeSpace& space,
                      const std::vector<double>& coeffs, const DeformationField& field,
                      const CutQuadrature& quad, const ExactSolution& exact, double mu,
                      double nitsche_c0) {
    if (!exact.value || !exact.gradient || !exact.hessian)
        config_error("error norms need value, gradient and hessian callbacks");
    const int p = space.spatial().order();
    for (std::size_t ti = 0; ti < quad.t_nodes.size(); ++ti) {
        const double t = quad.t_nodes[ti];
        const double wt = quad.t_weights[ti];
        double grad_term = 0.0, nitsche_term = 0.0, h2_term = 0.0;
        for (const CellQuadrature& cq : quad.cells) {
            const double h = space.spatial().mesh().cell_diameter(cq.cell);
            const double beta = nitsche_c0 * p * p * mu / h;
            for (const QPoint& qp : cq.interior) {
                const DeformEval d = field.eval(cq.cell, qp.x, t);
                const DiscreteEval uh = eval_uh(space, coeffs, cq.cell, qp.x, t, true);
                const double jac = std::abs(d.det);
                // physical gradient of u_h via the transported gradient
                const Vec2 gh = d.fx.solve_transposed(uh.grad);
                const Vec2 ge = exact.gradient(d.phi, t) - gh;
                grad_term += qp.w * wt * jac * mu * dot(ge, ge);
                // broken H2 seminorm; u_h hessian transported as in the
                // affine case (exact for rigid and P1 maps)
                const Mat2 Ainv = d.fx.inverse();
                const Mat2 Href{uh.hess[0], uh.hess[1], uh.hess[1], uh.hess[2]};
                const Mat2 Hh = Ainv.transpose() * Href * Ainv;
                const auto He = exact.hessian(d.phi, t);
                const double exx = He[0] - Hh.a;
                const double exy = He[1] - 0.5 * (Hh.b + Hh.c);
                const double eyy = He[2] - Hh.d;
                h2_term += qp.w * wt * jac * mu * h * h *
                           (exx * exx + 2.0 * exy * exy + eyy * eyy);
            }
            for (const FacetQPoint& fq : cq.facets) {
                if (fq.kind == FacetKind::FittedNeumann) continue;
                const DeformEval d = field.eval(cq.cell, fq.x, t);
                const DiscreteEval uh = eval_uh(space, coeffs, cq.cell, fq.x, t, false);
                const double e = exact.value(d.phi, t) - uh.value;
                // spatial line measure of the deformed facet
                const Vec2 that = perp(fq.normal);
                const double stretch = norm(d.fx.apply(that));
                nitsche_term += fq.w * wt * stretch * beta * e * e;
            }
        }
        report.grad_term += grad_term;
        report.nitsche_term += nitsche_term;
        report.h2_term += h2_term;
        report.vnorm_integral += grad_term + nitsche_term + h2_term;
    }
}

void accumulate_jump_initial(NormReport& report, const SpaceTimeSpace& space,
                             const std::vector<double>& coeffs, const DeformationField& field,
                             const CutQuadrature& quad,
                             const std::function<double(const Vec2&)>& u0) {
    double acc = 0.0;
    for (const CellQuadrature& cq : quad.cells) {
        for (const QPoint& qp : cq.interior) {
            const DeformEval d0 = field.eval(cq.cell, qp.x, quad.t0);
            const DiscreteEval uh = eval_uh(space, coeffs, cq.cell, qp.x, quad.t0, false);
            const double j = uh.value - u0(d0.phi);
            acc += qp.w * std::abs(d0.det) * j * j;
        }
    }
    report.jump_sq += acc;
}

void accumulate_jump_transfer(NormReport& report, const SpaceTimeSpace& current,
                              const std::vector<double>& cur_coeffs,
                              const SpaceTimeSpace& previous,
                              const std::vector<double>& prev_coeffs,
                              const std::vector<TransferTriangle>& transfer,
                              const IntersectionMesh& intersection) {
    std::vector<Vec2> tri_p;
    std::vector<double> tri_w;
    triangle_rule(2 * current.spatial().order() + 2, tri_p, tri_w);
    double acc = 0.0;
    for (const PolyCell& pc : intersection.cells) {
        const TransferTriangle& tri = transfer[std::size_t(pc.parent_previous)];
        for (const ConvexPolygon& piece : pc.pieces) {
            const std::vector<ConvexPolygon> fans =
                piece.size() == 3 ? std::vector<ConvexPolygon>{piece} : fan_triangulate(piece);
            for (const ConvexPolygon& f : fans) {
                const double area2 = cross(f[1] - f[0], f[2] - f[0]);
                for (std::size_t k = 0; k < tri_p.size(); ++k) {
                    const Vec2 x = f[0] + (f[1] - f[0]) * tri_p[k].x + (f[2] - f[0]) * tri_p[k].y;
                    const double ucur =
                        current.value(cur_coeffs, pc.parent_current, x, current.t_begin());
                    const double uprev = previous.value(prev_coeffs, tri.prev_cell,
                                                        tri.pull_back(x), previous.t_end());
                    acc += tri_w[k] * area2 * (ucur - uprev) * (ucur - uprev);
                }
            }
        }
    }
    report.jump_sq += acc;
}

void accumulate_jump_direct(NormReport& report, const SpaceTimeSpace& current,
                            const std::vector<double>& cur_coeffs,
                            const SpaceTimeSpace& previous,
                            const std::vector<double>& prev_coeffs,
                            const DeformationField& field, const CutQuadrature& quad) {
    double acc = 0.0;
    for (const CellQuadrature& cq : quad.cells) {
        for (const QPoint& qp : cq.interior) {
            const DeformEval d0 = field.eval(cq.cell, qp.x, quad.t0);
            const double ucur = current.value(cur_coeffs, cq.cell, qp.x, current.t_begin());
            const double uprev = previous.value(prev_coeffs, cq.cell, qp.x, previous.t_end());
            acc += qp.w * std::abs(d0.det) * (ucur - uprev) * (ucur - uprev);
        }
    }
    report.jump_sq += acc;
}

void finalize_endface(NormReport& report, const SpaceTimeSpace& space,
                      const std::vector<double>& coeffs, const DeformationField& field,
                      const CutQuadrature& quad, const ExactSolution& exact) {
    double l2 = 0.0, h1 = 0.0;
    const double t1 = quad.t1;
    for (const CellQuadrature& cq : quad.cells) {
        for (const QPoint& qp : cq.interior) {
            const DeformEval d = field.eval(cq.cell, qp.x, t1);
            const DiscreteEval uh = eval_uh(space, coeffs, cq.cell, qp.x, t1, false);
            const double jac = std::abs(d.det);
            const double e = exact.value(d.phi, t1) - uh.value;
            const Vec2 ge = exact.gradient(d.phi, t1) - d.fx.solve_transposed(uh.grad);
            l2 += qp.w * jac * e * e;
            h1 += qp.w * jac * dot(ge, ge);
        }
    }
    report.endface_l2_sq = l2;
    report.final_l2 = std::sqrt(l2);
    report.final_h1 = std::sqrt(h1);
}

} // namespace stfem
