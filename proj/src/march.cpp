#include "stfem/march.hpp"
#include "stfem/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace stfem {

namespace {

/// Copy coefficients between spaces sharing the lattice numbering (the
/// target may cover more cells); new nodes start at zero and are filled by
/// the extension operator.
std::vector<double> remap_coeffs(const SpaceTimeSpace& from, const std::vector<double>& coeffs,
                                 const SpaceTimeSpace& to) {
    std::vector<double> out(static_cast<std::size_t>(to.num_dofs()), 0.0);
    const int nt = from.nt();
    const int ncomp = from.ncomp();
    for (int a = 0; a < to.num_active_nodes(); ++a) {
        const int node = to.active_nodes()[std::size_t(a)];
        const int fa = from.active_index(node);
        if (fa < 0) continue;
        for (int c = 0; c < ncomp; ++c)
            for (int l = 0; l < nt; ++l)
                out[std::size_t(to.dof(a, c, l))] = coeffs[std::size_t(from.dof(fa, c, l))];
    }
    return out;
}

template <class F>
auto staged(int slab, const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), "slab " + std::to_string(slab + 1) + ": " + stage + ": " + e.what());
    }
}

} // namespace

MarchResult march(const MarchSetup& setup) {
    if (!setup.mesh) config_error("march: no background mesh");
    setup.boundary.validate();
    const CartesianMesh& mesh = *setup.mesh;
    const int N = setup.time.num_slabs();
    const bool elastic = setup.deformation.mode == DeformationSetup::Mode::Elastic;

    MarchResult res;
    res.norms.c_mu = setup.c_mu;

    // anchor configuration (reset on every non-skipped slab)
    double t_anchor = 0.0;
    OrientedBoundary bnd;
    ActiveMesh am;
    std::vector<CutCellGeometry> cutgeo;
    AggregationMap agg;

    // previous-slab state for the coupling
    std::shared_ptr<const SpaceTimeSpace> prev_space;
    std::vector<double> prev_coeffs;
    DeformationField prev_field = DeformationField::identity();  // for elastic chaining
    std::vector<TransferTriangle> transfer;
    bool skip_next = false;

    for (int n = 0; n < N; ++n) {
        const double t0 = setup.time.t_begin(n);
        const double t1 = setup.time.t_end(n);
        const bool skip = skip_next;
        skip_next = false;

        if (!skip) {
            staged(n, "classify", [&] {
                t_anchor = t0;
                bnd = boundary_at(setup.boundary, setup.motion, t0);
                am = make_active_mesh(setup.mesh, classify_cells(mesh, bnd, setup.mode));
                cutgeo = build_cut_geometry(am, bnd, setup.mode);
                return 0;
            });
        }

        CutQuadrature quad = staged(n, "quadrature", [&] {
            return build_quadrature(am, cutgeo, setup.p, setup.q, t0, t1, setup.side_bc,
                                    setup.mode);
        });
        auto space = std::make_shared<SpaceTimeSpace>(SpatialSpace(setup.mesh, setup.p, 1),
                                                      setup.q, t0, t1, am);
        if (!skip)
            agg = staged(n, "aggregate", [&] { return build_aggregates(am, space->spatial()); });

        // intersection with the deformed previous mesh (normal transfer path)
        IntersectionMesh imesh;
        if (n > 0 && !skip) {
            imesh = staged(n, "intersect", [&] {
                std::vector<IndexedCell> current;
                current.reserve(am.active.size());
                for (int c : am.active) current.push_back({c, mesh.cell_polygon(c)});
                return intersect_triple(current, deformed_cells(transfer), bnd, setup.mode);
            });
            double area = 0.0;
            for (const CutCellGeometry& g : cutgeo) area += g.measure;
            if (std::abs(imesh.total_measure - area) > 1e-9 * area)
                geometry_error("slab " + std::to_string(n + 1) +
                               ": intersection mesh does not tile the domain");
        }

        // deformation for this slab
        DeformationField field = staged(n, "deformation", [&]() -> DeformationField {
            if (!elastic) {
                std::optional<BlendRegion> blend;
                if (setup.deformation.blend && setup.motion.kind != MotionKind::None) {
                    const BBox bb = bnd.bounds();
                    BlendRegion br;
                    br.center = (bb.lo + bb.hi) * 0.5;
                    br.halfwidth = (bb.hi - bb.lo) * 0.5;
                    br.inner = setup.deformation.blend_inner;
                    br.outer = setup.deformation.blend_outer;
                    for (const Vec2& v : bnd.vertices()) {
                        const Vec2 end = setup.motion.relative_position(v, t_anchor, t1);
                        if (norm(end - v) > br.inner)
                            geometry_error("blend inner margin smaller than the slab motion");
                    }
                    blend = br;
                }
                return DeformationField::prescribed(setup.motion, t_anchor, blend);
            }
            auto vec_space = std::make_shared<SpaceTimeSpace>(SpatialSpace(setup.mesh, setup.p, 2),
                                                              setup.q, t0, t1, am);
            std::vector<double> init;
            const std::vector<double>* init_ptr = nullptr;
            if (skip && prev_field.is_discrete()) {
                const SpaceTimeSpace& pv = *prev_field.space();
                const std::vector<double>& pc = prev_field.coefficients();
                init.assign(std::size_t(vec_space->num_active_nodes()) * 2, 0.0);
                const int nt = pv.nt();
                for (int a = 0; a < vec_space->num_active_nodes(); ++a) {
                    const int node = vec_space->active_nodes()[std::size_t(a)];
                    const int pa = pv.active_index(node);
                    if (pa < 0) continue;
                    for (int c = 0; c < 2; ++c)
                        init[std::size_t(a * 2 + c)] = pc[std::size_t(pv.dof(pa, c, nt - 1))];
                }
                init_ptr = &init;
            }
            const SlabDirichletData data =
                dirichlet_data(setup.boundary, setup.motion, t_anchor);
            return solve_extension(setup.deformation.elastic, vec_space, agg, quad, data,
                                   init_ptr);
        });

        // assemble, couple, reduce, solve
        SlabSystem sys = staged(n, "assemble", [&] {
            AssembleOptions opt;
            opt.mode = setup.mode;
            return assemble_slab(setup.problem, *space, field, quad, opt);
        });
        Eigen::VectorXd rhs = sys.rhs;
        staged(n, "couple", [&] {
            if (n == 0) {
                if (!setup.problem.initial) config_error("model problem without initial data");
                rhs += initial_value_rhs(*space, field, quad, setup.problem.initial);
            } else if (skip) {
                rhs += direct_jump_rhs(*space, field, quad, *prev_space, prev_coeffs);
            } else {
                rhs += jump_coupling(*space, *prev_space, prev_coeffs, transfer, imesh, setup.mode)
                           .rhs;
            }
            return 0;
        });

        ReducedSystem red = constrain_system(sys.matrix, rhs, agg, *space);
        std::vector<double> coeffs(static_cast<std::size_t>(space->num_dofs()));
        staged(n, "solve", [&] {
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(red.matrix);
            if (lu.info() != Eigen::Success)
                solver_error("sparse factorization failed (" +
                             std::to_string(red.matrix.rows()) + " reduced dofs)");
            const Eigen::VectorXd x_red = lu.solve(red.rhs);
            const Eigen::VectorXd x = red.prolongation * x_red;
            for (int i = 0; i < space->num_dofs(); ++i) coeffs[std::size_t(i)] = x[i];
            return 0;
        });

        // record
        SlabRecord rec;
        rec.index = n;
        rec.t0 = t0;
        rec.t1 = t1;
        rec.space = space;
        rec.coeffs = coeffs;
        rec.field = field;
        rec.skipped_transfer = skip;
        rec.reduced_dofs = int(red.matrix.rows());
        for (int c : am.active) {
            if (am.cls[std::size_t(c)] == CellClass::Interior) ++rec.n_interior;
            else if (am.cls[std::size_t(c)] == CellClass::Cut) ++rec.n_cut;
        }
        rec.n_active = int(am.active.size());
        rec.n_extended = int(am.extended.size());
        for (const CutCellGeometry& g : cutgeo) rec.domain_area += g.measure;
        if (setup.cond == CondSlabs::All || (setup.cond == CondSlabs::First && n == 0)) {
            rec.cond = staged(n, "condition", [&] {
                return condition_numbers(setup.problem, *space, field, quad, agg, setup.mode);
            });
        }
        if (skip) ++res.transfer_skips;

        // norms
        if (setup.exact) {
            staged(n, "norms", [&] {
                accumulate_vnorm(res.norms, *space, coeffs, field, quad, *setup.exact,
                                 setup.problem.mu, setup.problem.nitsche_c0);
                if (n == 0)
                    accumulate_jump_initial(res.norms, *space, coeffs, field, quad,
                                            setup.problem.initial);
                else if (skip)
                    accumulate_jump_direct(res.norms, *space, coeffs, *prev_space, prev_coeffs,
                                           field, quad);
                else
                    accumulate_jump_transfer(res.norms, *space, coeffs, *prev_space, prev_coeffs,
                                             transfer, imesh);
                if (n == N - 1) finalize_endface(res.norms, *space, coeffs, field, quad, *setup.exact);
                return 0;
            });
            res.has_norms = true;
        }

        // prepare the next slab
        if (n + 1 < N) {
            staged(n, "extend", [&] {
                if (setup.transfer_skip_threshold > 0.0 && setup.q >= 1) {
                    double defmag = 0.0;
                    for (int c : am.active)
                        defmag = std::max(defmag, field.max_displacement_gradient(
                                                      c, mesh.cell_polygon(c), t1));
                    if (defmag < setup.transfer_skip_threshold) skip_next = true;
                }
                if (skip_next) {
                    prev_space = space;
                    prev_coeffs = coeffs;
                    prev_field = field;
                    return 0;
                }
                const OrientedBoundary next_bnd =
                    boundary_at(setup.boundary, setup.motion, setup.time.t_begin(n + 1));
                ActiveMesh am_ext = extend_active(
                    am, [&](int donor, const Vec2& v) { return field.map(donor, v, t1); },
                    next_bnd);
                if (am_ext.extended.size() != am.extended.size()) {
                    AggregationMap agg_ext = build_aggregates(am_ext, space->spatial());
                    auto space_ext = std::make_shared<SpaceTimeSpace>(
                        SpatialSpace(setup.mesh, setup.p, 1), setup.q, t0, t1, am_ext);
                    std::vector<double> coeffs_ext = remap_coeffs(*space, coeffs, *space_ext);
                    extension_apply(agg_ext, *space_ext, coeffs_ext);
                    prev_space = space_ext;
                    prev_coeffs = std::move(coeffs_ext);
                    if (field.is_discrete()) {
                        auto vec_ext = std::make_shared<SpaceTimeSpace>(
                            SpatialSpace(setup.mesh, setup.p, 2), setup.q, t0, t1, am_ext);
                        std::vector<double> vec_coeffs =
                            remap_coeffs(*field.space(), field.coefficients(), *vec_ext);
                        extension_apply(agg_ext, *vec_ext, vec_coeffs);
                        DeformationField fext =
                            DeformationField::discrete(vec_ext, std::move(vec_coeffs));
                        transfer = build_transfer_mesh(am_ext, fext, t1);
                        prev_field = std::move(fext);
                    } else {
                        transfer = build_transfer_mesh(am_ext, field, t1);
                        prev_field = field;
                    }
                } else {
                    prev_space = space;
                    prev_coeffs = coeffs;
                    transfer = build_transfer_mesh(am, field, t1);
                    prev_field = field;
                }
                return 0;
            });
        }
        res.slabs.push_back(std::move(rec));
    }
    return res;
}

} // namespace stfem
