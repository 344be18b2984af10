#include "stfem/deformation.hpp"
#include "stfem/errors.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

namespace stfem {

namespace {

struct StrongValue {
    int reduced_dof;
    double value;
};

/// Eliminate prescribed reduced DOFs symmetrically (known columns move to
/// the right-hand side, unit diagonal on the constrained rows).
void eliminate(Eigen::SparseMatrix<double>& A, Eigen::VectorXd& b,
               const std::vector<StrongValue>& strong) {
    std::vector<char> fixed(static_cast<std::size_t>(A.rows()), 0);
    Eigen::VectorXd value = Eigen::VectorXd::Zero(A.rows());
    for (const StrongValue& s : strong) {
        fixed[std::size_t(s.reduced_dof)] = 1;
        value[s.reduced_dof] = s.value;
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(std::size_t(A.nonZeros()));
    for (int k = 0; k < A.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            const int r = int(it.row()), c = int(it.col());
            if (fixed[std::size_t(r)]) continue;
            if (fixed[std::size_t(c)]) {
                b[r] -= it.value() * value[c];
                continue;
            }
            trips.emplace_back(r, c, it.value());
        }
    }
    for (int r = 0; r < A.rows(); ++r) {
        if (fixed[std::size_t(r)]) {
            trips.emplace_back(r, r, 1.0);
            b[r] = value[r];
        }
    }
    Eigen::SparseMatrix<double> out(A.rows(), A.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    A.swap(out);
}

} // namespace

DeformationField solve_extension(const ElasticExtensionProblem& problem,
                                 std::shared_ptr<const SpaceTimeSpace> vector_space,
                                 const AggregationMap& aggregates, const CutQuadrature& quad,
                                 const SlabDirichletData& data,
                                 const std::vector<double>* initial_displacement) {
    const SpaceTimeSpace& sp = *vector_space;
    if (sp.ncomp() != 2) config_error("elastic extension needs a 2-component space");
    if (sp.temporal().order() < 1)
        config_error("elastic extension requires temporal order q >= 1");
    const SpatialSpace& spat = sp.spatial();
    const int nsp = spat.nodes_per_cell();
    const int nt = sp.nt();
    const double lam = problem.lambda, mu = problem.mu;
    const int p = spat.order();

    std::vector<double> tv(static_cast<std::size_t>(nt));
    std::vector<double> sv(static_cast<std::size_t>(nsp));
    std::vector<Vec2> sg(static_cast<std::size_t>(nsp));
    std::vector<int> an;

    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sp.num_dofs());

    const int nloc = nsp * 2 * nt;
    std::vector<double> local(static_cast<std::size_t>(nloc) * std::size_t(nloc));
    std::vector<double> local_rhs(static_cast<std::size_t>(nloc));
    auto loc = [&](int i, int a, int l) { return (i * 2 + a) * nt + l; };

    for (const CellQuadrature& cq : quad.cells) {
        std::fill(local.begin(), local.end(), 0.0);
        std::fill(local_rhs.begin(), local_rhs.end(), 0.0);
        const double tau_d = problem.nitsche_c0 * p * p * mu /
                             spat.mesh().cell_diameter(cq.cell);

        for (std::size_t ti = 0; ti < quad.t_nodes.size(); ++ti) {
            const double t = quad.t_nodes[ti];
            const double wt = quad.t_weights[ti];
            sp.temporal().values(sp.t_ref(t), tv.data());

            for (const QPoint& qp : cq.interior) {
                spat.eval(cq.cell, qp.x, sv.data(), sg.data());
                const double w = qp.w * wt;
                for (int i = 0; i < nsp; ++i) {
                    for (int j = 0; j < nsp; ++j) {
                        const double gg = dot(sg[std::size_t(i)], sg[std::size_t(j)]);
                        const double gi[2] = {sg[std::size_t(i)].x, sg[std::size_t(i)].y};
                        const double gj[2] = {sg[std::size_t(j)].x, sg[std::size_t(j)].y};
                        for (int a = 0; a < 2; ++a)
                            for (int b = 0; b < 2; ++b) {
                                const double k = mu * ((a == b ? gg : 0.0) + gi[b] * gj[a]) +
                                                 lam * gi[a] * gj[b];
                                for (int l = 0; l < nt; ++l)
                                    for (int m = 0; m < nt; ++m)
                                        local[std::size_t(loc(i, a, l) * nloc + loc(j, b, m))] +=
                                            w * k * tv[std::size_t(l)] * tv[std::size_t(m)];
                            }
                    }
                }
            }

            for (const FacetQPoint& fq : cq.facets) {
                if (fq.kind != FacetKind::UnfittedDirichlet) continue;
                spat.eval(cq.cell, fq.x, sv.data(), sg.data());
                const double w = fq.w * wt;
                const Vec2 n = fq.normal;
                const Vec2 ud = data.at_edge(fq.boundary_edge, fq.edge_param, t);
                const double nv[2] = {n.x, n.y};
                const double udv[2] = {ud.x, ud.y};
                for (int i = 0; i < nsp; ++i) {
                    const double ndgi = dot(n, sg[std::size_t(i)]);
                    const double gi[2] = {sg[std::size_t(i)].x, sg[std::size_t(i)].y};
                    for (int j = 0; j < nsp; ++j) {
                        const double ndgj = dot(n, sg[std::size_t(j)]);
                        const double gj[2] = {sg[std::size_t(j)].x, sg[std::size_t(j)].y};
                        for (int a = 0; a < 2; ++a) {
                            for (int b = 0; b < 2; ++b) {
                                double k = (a == b) ? tau_d * sv[std::size_t(i)] * sv[std::size_t(j)]
                                                    : 0.0;
                                // - v . sigma(u) n
                                k -= sv[std::size_t(i)] *
                                     (mu * ((a == b ? ndgj : 0.0) + nv[b] * gj[a]) +
                                      lam * nv[a] * gj[b]);
                                // - (sigma(v) n) . u
                                k -= sv[std::size_t(j)] *
                                     (mu * ((a == b ? ndgi : 0.0) + nv[a] * gi[b]) +
                                      lam * nv[b] * gi[a]);
                                for (int l = 0; l < nt; ++l)
                                    for (int m = 0; m < nt; ++m)
                                        local[std::size_t(loc(i, a, l) * nloc + loc(j, b, m))] +=
                                            w * k * tv[std::size_t(l)] * tv[std::size_t(m)];
                            }
                        }
                    }
                    // rhs: tau v . u_D - (sigma(v) n) . u_D
                    for (int a = 0; a < 2; ++a) {
                        double r = tau_d * sv[std::size_t(i)] * udv[a];
                        for (int c = 0; c < 2; ++c)
                            r -= udv[c] * (mu * ((c == a ? ndgi : 0.0) + nv[a] * gi[c]) +
                                           lam * nv[c] * gi[a]);
                        for (int l = 0; l < nt; ++l)
                            local_rhs[std::size_t(loc(i, a, l))] += w * r * tv[std::size_t(l)];
                    }
                }
            }
        }

        sp.cell_active_nodes(cq.cell, an);
        for (int i = 0; i < nsp; ++i)
            for (int a = 0; a < 2; ++a)
                for (int l = 0; l < nt; ++l) {
                    const int gi = sp.dof(an[std::size_t(i)], a, l);
                    rhs[gi] += local_rhs[std::size_t(loc(i, a, l))];
                    for (int j = 0; j < nsp; ++j)
                        for (int b = 0; b < 2; ++b)
                            for (int m = 0; m < nt; ++m) {
                                const double v =
                                    local[std::size_t(loc(i, a, l) * nloc + loc(j, b, m))];
                                if (v != 0.0)
                                    trips.emplace_back(gi, sp.dof(an[std::size_t(j)], b, m), v);
                            }
                }
    }

    Eigen::SparseMatrix<double> A(sp.num_dofs(), sp.num_dofs());
    A.setFromTriplets(trips.begin(), trips.end());

    ReducedSystem red = constrain_system(A, rhs, aggregates, sp);
    const ReducedNumbering rn = reduced_numbering(aggregates, sp);

    // strong values: zero on the artificial boundary, carried (or zero)
    // displacement on the initial time layer; slaved nodes inherit through
    // the aggregation masters
    std::vector<StrongValue> strong;
    for (int a = 0; a < sp.num_active_nodes(); ++a) {
        const int node = sp.active_nodes()[std::size_t(a)];
        const bool on_art = spat.node_on_artificial_boundary(node);
        const int r = rn.of_active_node[std::size_t(a)];
        if (on_art && r < 0)
            solver_error("elastic extension: artificial-boundary node is aggregation-constrained");
        if (r < 0) continue;
        for (int comp = 0; comp < 2; ++comp) {
            if (on_art) {
                for (int l = 0; l < nt; ++l)
                    strong.push_back({rn.dof(sp, a, comp, l), 0.0});
            } else {
                const double v0 = initial_displacement
                                      ? (*initial_displacement)[std::size_t(a * 2 + comp)]
                                      : 0.0;
                strong.push_back({rn.dof(sp, a, comp, 0), v0});
            }
        }
    }
    eliminate(red.matrix, red.rhs, strong);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(red.matrix);
    if (lu.info() != Eigen::Success)
        solver_error("elastic extension: sparse factorization failed");
    Eigen::VectorXd x_red = lu.solve(red.rhs);
    Eigen::VectorXd x_full = red.prolongation * x_red;

    std::vector<double> coeffs(static_cast<std::size_t>(sp.num_dofs()));
    for (int i = 0; i < sp.num_dofs(); ++i) coeffs[std::size_t(i)] = x_full[i];

    DeformationField field = DeformationField::discrete(vector_space, std::move(coeffs));
    for (const CellQuadrature& cq : quad.cells)
        for (double t : quad.t_nodes)
            for (const QPoint& qp : cq.interior) {
                const DeformEval d = field.eval(cq.cell, qp.x, t);
                if (d.det <= 0.0)
                    solver_error("non-bijective map: det F_x <= 0 in cell " +
                                 std::to_string(cq.cell) +
                                 "; a smaller time-slab size restores bijectivity");
            }
    return field;
}

} // namespace stfem
