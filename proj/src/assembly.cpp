#include "stfem/assembly.hpp"
#include "stfem/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace stfem {

namespace {

struct CellContribution {
    std::vector<int> dofs;
    std::vector<double> matrix;  // row-major nloc x nloc
    std::vector<double> rhs;
    double min_det = 1e300;
    double upwind_min = 1e300;
};

} // namespace

SlabSystem assemble_slab(const ModelProblem& problem, const SpaceTimeSpace& space,
                         const DeformationField& field, const CutQuadrature& quad,
                         const AssembleOptions& opt) {
    if (quad.cells.size() != space.active().active.size())
        config_error("quadrature/space mismatch: cell counts differ");
    for (std::size_t k = 0; k < quad.cells.size(); ++k)
        if (quad.cells[k].cell != space.active().active[k])
            config_error("quadrature/space mismatch: active cell lists differ");
    const SpatialSpace& spat = space.spatial();
    const int nsp = spat.nodes_per_cell();
    const int nt = space.nt();
    const int nloc = nsp * nt;
    const int p = spat.order();
    const double mu = problem.mu;
    const double t0 = quad.t0;

    std::vector<double> tv0(static_cast<std::size_t>(nt));
    space.temporal().values(0.0, tv0.data());

    std::vector<CellContribution> staged(quad.cells.size());

    for_each_index(opt.mode, std::ptrdiff_t(quad.cells.size()), [&](std::ptrdiff_t k) {
        const CellQuadrature& cq = quad.cells[std::size_t(k)];
        CellContribution& out = staged[std::size_t(k)];
        out.matrix.assign(std::size_t(nloc) * std::size_t(nloc), 0.0);
        out.rhs.assign(std::size_t(nloc), 0.0);

        std::vector<double> sv(static_cast<std::size_t>(nsp));
        std::vector<Vec2> sg(static_cast<std::size_t>(nsp));
        std::vector<Vec2> gt(static_cast<std::size_t>(nsp));  // transported gradients
        std::vector<double> tv(static_cast<std::size_t>(nt));
        std::vector<double> td(static_cast<std::size_t>(nt));
        auto loc = [&](int i, int l) { return i * nt + l; };
        const double inv_tau = 1.0 / space.tau();

        for (std::size_t ti = 0; ti < quad.t_nodes.size(); ++ti) {
            const double t = quad.t_nodes[ti];
            const double wt = quad.t_weights[ti];
            space.temporal().values(space.t_ref(t), tv.data());
            space.temporal().derivatives(space.t_ref(t), td.data());

            for (const QPoint& qp : cq.interior) {
                spat.eval(cq.cell, qp.x, sv.data(), sg.data());
                const DeformEval d = field.eval(cq.cell, qp.x, t);
                out.min_det = std::min(out.min_det, d.det);
                const double jac = std::abs(d.det);
                const double w = qp.w * wt * jac;
                for (int i = 0; i < nsp; ++i) gt[std::size_t(i)] = d.fx.solve_transposed(sg[std::size_t(i)]);

                Vec2 adv{0.0, 0.0};
                if (opt.ah && problem.advection) adv = problem.advection(d.phi, t);

                for (int i = 0; i < nsp; ++i) {
                    for (int j = 0; j < nsp; ++j) {
                        const double diff = opt.ah ? mu * dot(gt[std::size_t(i)], gt[std::size_t(j)]) : 0.0;
                        const double conv =
                            opt.ah && problem.advection
                                ? sv[std::size_t(i)] * dot(adv, gt[std::size_t(j)])
                                : 0.0;
                        const double wdotgj = dot(d.w, gt[std::size_t(j)]);
                        for (int l = 0; l < nt; ++l) {
                            for (int m = 0; m < nt; ++m) {
                                double val = (diff + conv) * tv[std::size_t(l)] * tv[std::size_t(m)];
                                if (opt.time_term) {
                                    // dt^n (phi_j theta_m) = phi_j theta_m' / tau
                                    //                        - (w . grad phi_j) theta_m
                                    const double dtn = sv[std::size_t(j)] * td[std::size_t(m)] *
                                                           inv_tau -
                                                       wdotgj * tv[std::size_t(m)];
                                    val += sv[std::size_t(i)] * tv[std::size_t(l)] * dtn;
                                }
                                out.matrix[std::size_t(loc(i, l) * nloc + loc(j, m))] += w * val;
                            }
                        }
                    }
                    if (opt.rhs && problem.source) {
                        const double f = problem.source(d.phi, t);
                        for (int l = 0; l < nt; ++l)
                            out.rhs[std::size_t(loc(i, l))] +=
                                w * sv[std::size_t(i)] * tv[std::size_t(l)] * f;
                    }
                }
            }

            if (opt.ah || opt.rhs) {
                for (const FacetQPoint& fq : cq.facets) {
                    spat.eval(cq.cell, fq.x, sv.data(), sg.data());
                    const DeformEval d = field.eval(cq.cell, fq.x, t);
                    const Vec3 nhat{fq.normal, 0.0};
                    const Vec3 n = transport_normal(d, nhat);
                    const double sfac = surface_measure_factor(d, nhat);
                    const double w = fq.w * wt * sfac;
                    for (int i = 0; i < nsp; ++i)
                        gt[std::size_t(i)] = d.fx.solve_transposed(sg[std::size_t(i)]);

                    if (fq.kind == FacetKind::FittedNeumann) {
                        if (problem.advection) {
                            const Vec2 adv = problem.advection(d.phi, t);
                            out.upwind_min = std::min(out.upwind_min, dot(adv, n.xy) + n.t);
                        } else {
                            out.upwind_min = std::min(out.upwind_min, n.t);
                        }
                        if (opt.rhs && problem.neumann) {
                            const double g = problem.neumann(d.phi, t);
                            for (int i = 0; i < nsp; ++i)
                                for (int l = 0; l < nt; ++l)
                                    out.rhs[std::size_t(loc(i, l))] +=
                                        w * sv[std::size_t(i)] * tv[std::size_t(l)] * g;
                        }
                        continue;
                    }

                    const double beta_f = problem.nitsche_c0 * p * p * mu / fq.h_cell;
                    if (opt.ah) {
                        for (int i = 0; i < nsp; ++i) {
                            const double flux_i = mu * dot(n.xy, gt[std::size_t(i)]);
                            for (int j = 0; j < nsp; ++j) {
                                const double flux_j = mu * dot(n.xy, gt[std::size_t(j)]);
                                const double val = beta_f * sv[std::size_t(i)] * sv[std::size_t(j)] -
                                                   sv[std::size_t(i)] * flux_j -
                                                   flux_i * sv[std::size_t(j)];
                                for (int l = 0; l < nt; ++l)
                                    for (int m = 0; m < nt; ++m)
                                        out.matrix[std::size_t(loc(i, l) * nloc + loc(j, m))] +=
                                            w * val * tv[std::size_t(l)] * tv[std::size_t(m)];
                            }
                        }
                    }
                    if (opt.rhs && problem.dirichlet) {
                        const double ud = problem.dirichlet(d.phi, t);
                        for (int i = 0; i < nsp; ++i) {
                            const double flux_i = mu * dot(n.xy, gt[std::size_t(i)]);
                            const double r = (beta_f * sv[std::size_t(i)] - flux_i) * ud;
                            for (int l = 0; l < nt; ++l)
                                out.rhs[std::size_t(loc(i, l))] += w * r * tv[std::size_t(l)];
                        }
                    }
                }
            }
        }

        if (opt.init_mass) {
            for (const QPoint& qp : cq.interior) {
                spat.eval(cq.cell, qp.x, sv.data(), nullptr);
                const DeformEval d0 = field.eval(cq.cell, qp.x, t0);
                const double w = qp.w * std::abs(d0.det);  // |J_Omega^n|
                for (int i = 0; i < nsp; ++i)
                    for (int j = 0; j < nsp; ++j) {
                        const double m = w * sv[std::size_t(i)] * sv[std::size_t(j)];
                        for (int l = 0; l < nt; ++l)
                            for (int ml = 0; ml < nt; ++ml)
                                out.matrix[std::size_t(loc(i, l) * nloc + loc(j, ml))] +=
                                    m * tv0[std::size_t(l)] * tv0[std::size_t(ml)];
                    }
            }
        }

        space.cell_active_nodes(cq.cell, out.dofs);
    });

    // deterministic merge in cell-id order
    SlabSystem sys;
    sys.rhs = Eigen::VectorXd::Zero(space.num_dofs());
    std::vector<Eigen::Triplet<double>> trips;
    for (const CellContribution& c : staged) {
        sys.min_det_fx = std::min(sys.min_det_fx, c.min_det);
        sys.neumann_upwind_min = std::min(sys.neumann_upwind_min, c.upwind_min);
        const int ncell = int(c.dofs.size());
        for (int i = 0; i < ncell; ++i)
            for (int l = 0; l < nt; ++l) {
                const int gi = space.dof(c.dofs[std::size_t(i)], 0, l);
                sys.rhs[gi] += c.rhs[std::size_t(i * nt + l)];
                for (int j = 0; j < ncell; ++j)
                    for (int m = 0; m < nt; ++m) {
                        const double v = c.matrix[std::size_t((i * nt + l) * nloc + (j * nt + m))];
                        if (v != 0.0)
                            trips.emplace_back(gi, space.dof(c.dofs[std::size_t(j)], 0, m), v);
                    }
            }
    }
    sys.matrix.resize(space.num_dofs(), space.num_dofs());
    sys.matrix.setFromTriplets(trips.begin(), trips.end());
    if (sys.min_det_fx <= 0.0)
        solver_error("non-bijective map: det F_x <= 0 at a volume quadrature point");
    return sys;
}

Eigen::SparseMatrix<double> assemble_spacetime_mass(const SpaceTimeSpace& space,
                                                    const DeformationField& field,
                                                    const CutQuadrature& quad, ExecMode mode) {
    const SpatialSpace& spat = space.spatial();
    const int nsp = spat.nodes_per_cell();
    const int nt = space.nt();
    const int nloc = nsp * nt;
    const double t0 = quad.t0;

    std::vector<CellContribution> staged(quad.cells.size());
    for_each_index(mode, std::ptrdiff_t(quad.cells.size()), [&](std::ptrdiff_t k) {
        const CellQuadrature& cq = quad.cells[std::size_t(k)];
        CellContribution& out = staged[std::size_t(k)];
        out.matrix.assign(std::size_t(nloc) * std::size_t(nloc), 0.0);
        std::vector<double> sv(static_cast<std::size_t>(nsp));
        std::vector<double> tv(static_cast<std::size_t>(nt));
        for (std::size_t ti = 0; ti < quad.t_nodes.size(); ++ti) {
            const double wt = quad.t_weights[ti];
            space.temporal().values(space.t_ref(quad.t_nodes[ti]), tv.data());
            for (const QPoint& qp : cq.interior) {
                spat.eval(cq.cell, qp.x, sv.data(), nullptr);
                // the initial-face Jacobian weights the space-time mass
                const double jom = std::abs(field.eval(cq.cell, qp.x, t0).det);
                const double w = qp.w * wt * jom;
                for (int i = 0; i < nsp; ++i)
                    for (int j = 0; j < nsp; ++j) {
                        const double m = w * sv[std::size_t(i)] * sv[std::size_t(j)];
                        for (int l = 0; l < nt; ++l)
                            for (int ml = 0; ml < nt; ++ml)
                                out.matrix[std::size_t((i * nt + l) * nloc + (j * nt + ml))] +=
                                    m * tv[std::size_t(l)] * tv[std::size_t(ml)];
                    }
            }
        }
        space.cell_active_nodes(cq.cell, out.dofs);
    });

    std::vector<Eigen::Triplet<double>> trips;
    for (const CellContribution& c : staged) {
        const int ncell = int(c.dofs.size());
        for (int i = 0; i < ncell; ++i)
            for (int l = 0; l < nt; ++l)
                for (int j = 0; j < ncell; ++j)
                    for (int m = 0; m < nt; ++m) {
                        const double v = c.matrix[std::size_t((i * nt + l) * nloc + (j * nt + m))];
                        if (v != 0.0)
                            trips.emplace_back(space.dof(c.dofs[std::size_t(i)], 0, l),
                                               space.dof(c.dofs[std::size_t(j)], 0, m), v);
                    }
    }
    Eigen::SparseMatrix<double> out(space.num_dofs(), space.num_dofs());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

Eigen::VectorXd initial_value_rhs(const SpaceTimeSpace& space, const DeformationField& field,
                                  const CutQuadrature& quad,
                                  const std::function<double(const Vec2&)>& u0) {
    const SpatialSpace& spat = space.spatial();
    const int nsp = spat.nodes_per_cell();
    const int nt = space.nt();
    std::vector<double> tv0(static_cast<std::size_t>(nt));
    space.temporal().values(0.0, tv0.data());
    std::vector<double> sv(static_cast<std::size_t>(nsp));
    std::vector<int> an;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs());
    for (const CellQuadrature& cq : quad.cells) {
        space.cell_active_nodes(cq.cell, an);
        for (const QPoint& qp : cq.interior) {
            spat.eval(cq.cell, qp.x, sv.data(), nullptr);
            const DeformEval d0 = field.eval(cq.cell, qp.x, quad.t0);
            const double w = qp.w * std::abs(d0.det) * u0(d0.phi);
            for (int i = 0; i < nsp; ++i)
                for (int l = 0; l < nt; ++l)
                    rhs[space.dof(an[std::size_t(i)], 0, l)] +=
                        w * sv[std::size_t(i)] * tv0[std::size_t(l)];
        }
    }
    return rhs;
}

Eigen::VectorXd direct_jump_rhs(const SpaceTimeSpace& space, const DeformationField& field,
                                const CutQuadrature& quad, const SpaceTimeSpace& previous,
                                const std::vector<double>& previous_coeffs) {
    const SpatialSpace& spat = space.spatial();
    const int nsp = spat.nodes_per_cell();
    const int nt = space.nt();
    std::vector<double> tv0(static_cast<std::size_t>(nt));
    space.temporal().values(0.0, tv0.data());
    std::vector<double> sv(static_cast<std::size_t>(nsp));
    std::vector<int> an;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(space.num_dofs());
    for (const CellQuadrature& cq : quad.cells) {
        space.cell_active_nodes(cq.cell, an);
        for (const QPoint& qp : cq.interior) {
            spat.eval(cq.cell, qp.x, sv.data(), nullptr);
            const DeformEval d0 = field.eval(cq.cell, qp.x, quad.t0);
            const double uprev =
                previous.value(previous_coeffs, cq.cell, qp.x, previous.t_end());
            const double w = qp.w * std::abs(d0.det) * uprev;
            for (int i = 0; i < nsp; ++i)
                for (int l = 0; l < nt; ++l)
                    rhs[space.dof(an[std::size_t(i)], 0, l)] +=
                        w * sv[std::size_t(i)] * tv0[std::size_t(l)];
        }
    }
    return rhs;
}

double condition_number_1norm(const Eigen::SparseMatrix<double>& m, bool* singular) {
    Eigen::MatrixXd dense = Eigen::MatrixXd(m);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
    if (singular) *singular = !lu.isInvertible();
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd inv = lu.inverse();
    const double nm = dense.cwiseAbs().colwise().sum().maxCoeff();
    const double ni = inv.cwiseAbs().colwise().sum().maxCoeff();
    return nm * ni;
}

ConditionNumbers condition_numbers(const ModelProblem& problem, const SpaceTimeSpace& space,
                                   const DeformationField& field, const CutQuadrature& quad,
                                   const AggregationMap& aggregates, ExecMode mode) {
    ConditionNumbers out;
    const Eigen::SparseMatrix<double> C = constraint_prolongation(aggregates, space);

    Eigen::SparseMatrix<double> mass = assemble_spacetime_mass(space, field, quad, mode);
    Eigen::SparseMatrix<double> mass_red = C.transpose() * mass * C;
    out.mass = condition_number_1norm(mass_red, &out.mass_singular);

    AssembleOptions opt;
    opt.time_term = false;
    opt.init_mass = false;
    opt.ah = true;
    opt.rhs = false;
    opt.mode = mode;
    SlabSystem ah = assemble_slab(problem, space, field, quad, opt);
    Eigen::SparseMatrix<double> ah_red = C.transpose() * ah.matrix * C;
    out.stiffness = condition_number_1norm(ah_red, &out.stiffness_singular);
    return out;
}

} // namespace stfem
