#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stfem/deformation.hpp"
#include "stfem/errors.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace stfem;

namespace {

BoundaryMotion translation(const Vec2& v) {
    BoundaryMotion m;
    m.kind = MotionKind::Translation;
    m.velocity = v;
    return m;
}

BoundaryMotion rotation(const Vec2& center, double omega, const Vec2& amp = {0, 0},
                        double omega_osc = 0.0) {
    BoundaryMotion m;
    m.kind = MotionKind::RigidRotationOscillation;
    m.center = center;
    m.omega = omega;
    m.amplitude = amp;
    m.omega_osc = omega_osc;
    return m;
}

} // namespace

TEST_CASE("time ramp: continuity, derivative, zero initial velocity") {
    const double gamma = 2.0, ta = 0.125;
    CHECK(time_ramp(0.0, gamma, ta) == 0.0);
    CHECK(time_ramp(ta - 1e-12, gamma, ta) ==
          doctest::Approx(time_ramp(ta + 1e-12, gamma, ta)).epsilon(1e-9));
    CHECK(time_ramp_derivative(0.0, gamma, ta) == 0.0);
    CHECK(time_ramp_derivative(ta, gamma, ta) == doctest::Approx(1.0).epsilon(1e-12));
    // derivative matches finite differences
    for (double t : {0.03, 0.1, 0.5}) {
        const double fd =
            (time_ramp(t + 1e-7, gamma, ta) - time_ramp(t - 1e-7, gamma, ta)) / 2e-7;
        CHECK(time_ramp_derivative(t, gamma, ta) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("motion catalog: identity at t = 0") {
    const Vec2 x{0.7, -0.3};
    for (const BoundaryMotion& m :
         {translation({0.2, 0.0}), rotation({0.5, 0.5}, M_PI / 2, {0, 0.2}, M_PI / 2)}) {
        const Vec2 d = m.position(x, 0.0) - x;
        CHECK(norm(d) < 1e-15);
    }
    // ramped rotation has zero initial velocity
    BoundaryMotion m = rotation({0.5, 0.5}, M_PI / 2, {0, 0.2}, M_PI / 2);
    m.ramp_enabled = true;
    m.ramp_gamma = 2.0;
    m.ramp_ta = 0.125;
    CHECK(norm(m.velocity_at(x, 0.0)) == 0.0);
    // without the ramp the initial velocity is nonzero
    CHECK(norm(rotation({0.5, 0.5}, M_PI / 2, {0, 0.2}, M_PI / 2).velocity_at(x, 0.0)) > 0.0);
}

TEST_CASE("motion velocity matches finite differences") {
    BoundaryMotion m = rotation({1.5, 1.5}, M_PI / 2, {0.0, 0.2}, M_PI / 2);
    m.ramp_enabled = true;
    const Vec2 x{2.0, 1.0};
    for (double t : {0.05, 0.2, 0.8}) {
        const Vec2 fd = (m.position(x, t + 1e-7) - m.position(x, t - 1e-7)) * (0.5 / 1e-7);
        const Vec2 v = m.velocity_at(x, t);
        CHECK(norm(v - fd) < 1e-6);
    }
}

TEST_CASE("dirichlet data vanishes at the slab start") {
    const OrientedBoundary b = make_hole_boundary({1, 1}, {2, 2});
    const SlabDirichletData data = dirichlet_data(b, translation({0.2, 0.0}), 0.375);
    for (int v = 0; v < b.num_vertices(); ++v) CHECK(norm(data.at_vertex(v, 0.375)) < 1e-15);
}

TEST_CASE("dirichlet data of the translation is 0.2 (t - t_n)") {
    const OrientedBoundary b = make_hole_boundary({1, 1}, {2, 2});
    const double tn = 0.25;
    const SlabDirichletData data = dirichlet_data(b, translation({0.2, 0.0}), tn);
    for (double t : {0.25, 0.3, 0.375}) {
        const Vec2 d = data.at_edge(2, 0.37, t);
        CHECK(d.x == doctest::Approx(0.2 * (t - tn)).epsilon(1e-14));
        CHECK(d.y == 0.0);
    }
}

TEST_CASE("rigid rotation data preserves distances to the center") {
    const OrientedBoundary b = make_hole_boundary({1, 1}, {2, 2});
    const Vec2 c{1.5, 1.5};
    const BoundaryMotion m = rotation(c, M_PI / 2);
    const double tn = 0.2;
    const SlabDirichletData data = dirichlet_data(b, m, tn);
    const OrientedBoundary bn = boundary_at(b, m, tn);
    for (int v = 0; v < b.num_vertices(); ++v) {
        const Vec2 x = bn.vertices()[std::size_t(v)];
        for (double t : {0.25, 0.45}) {
            const Vec2 moved = x + data.at_vertex(v, t);
            CHECK(norm(moved - c) == doctest::Approx(norm(x - c)).epsilon(1e-13));
        }
    }
}

TEST_CASE("pullback gradients: identity map") {
    DeformEval d;
    d.phi = {0.3, 0.4};
    d.fx = Mat2::identity();
    d.w = {0, 0};
    d.det = 1.0;
    const PulledGradient g = pullback_gradients(d, {1.5, -2.0}, 0.7);
    CHECK(g.grad_x.x == 1.5);
    CHECK(g.grad_x.y == -2.0);
    CHECK(g.dt == 0.7);
}

TEST_CASE("pullback gradients recover the ALE derivative under rigid translation") {
    // u(x, t) = 3 x^2 y - 2 y t + t^2; uhat(xhat, t) = u(xhat + c(t - t0), t)
    const Vec2 c{0.4, -0.7};
    const double t0 = 0.2;
    auto u = [](const Vec2& x, double t) {
        return 3 * x.x * x.x * x.y - 2 * x.y * t + t * t;
    };
    auto du_dx = [](const Vec2& x, double t) {
        return Vec2{6 * x.x * x.y, 3 * x.x * x.x - 2 * t};
    };
    auto du_dt = [](const Vec2& x, double) { return -2 * x.y; };
    (void)u;
    oracle::Rng rng(15);
    for (int k = 0; k < 100; ++k) {
        const Vec2 xhat{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double t = rng.uniform(0.2, 0.9);
        const Vec2 x = xhat + c * (t - t0);
        DeformEval d;
        d.phi = x;
        d.fx = Mat2::identity();
        d.w = c;
        d.det = 1.0;
        // reference derivatives of uhat by the chain rule
        const Vec2 ghat = du_dx(x, t);
        const double dhat_t = du_dt(x, t) + 2 * t + dot(du_dx(x, t), c);
        const PulledGradient g = pullback_gradients(d, ghat, dhat_t);
        CHECK(std::abs(g.dt - (du_dt(x, t) + 2 * t)) < 1e-12);
        CHECK(norm(g.grad_x - ghat) < 1e-12);
    }
}

TEST_CASE("pullback gradients: isotropic scaling") {
    DeformEval d;
    d.fx = Mat2{2.0, 0.0, 0.0, 2.0};
    d.w = {0, 0};
    d.det = 4.0;
    const PulledGradient g = pullback_gradients(d, {1.0, 3.0}, 0.0);
    CHECK(g.grad_x.x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.grad_x.y == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("transport normal: identity and rotation") {
    DeformEval ident;
    const Vec3 n = transport_normal(ident, {{1.0, 0.0}, 0.0});
    CHECK(n.xy.x == doctest::Approx(1.0));
    CHECK(n.t == 0.0);

    // time-constant rotation: the spatial normal rotates, unit length
    const double th = 0.7;
    DeformEval rot;
    rot.fx = Mat2::rotation(th);
    rot.w = {0, 0};
    rot.det = 1.0;
    const Vec2 nh{std::cos(0.2), std::sin(0.2)};
    const Vec3 nt = transport_normal(rot, {nh, 0.0});
    CHECK(norm(nt.xy) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(nt.xy.x == doctest::Approx(std::cos(0.2 + th)).epsilon(1e-13));
    CHECK(nt.xy.y == doctest::Approx(std::sin(0.2 + th)).epsilon(1e-13));
}

TEST_CASE("transported spatial normal is never longer than 1") {
    oracle::Rng rng(8);
    for (int k = 0; k < 200; ++k) {
        DeformEval d;
        d.fx = Mat2{1.0 + rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                    rng.uniform(-0.3, 0.3), 1.0 + rng.uniform(-0.3, 0.3)};
        d.w = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        d.det = d.fx.det();
        if (std::abs(d.det) < 0.2) continue;
        const double a = rng.uniform(0.0, 2 * M_PI);
        const Vec3 n = transport_normal(d, {{std::cos(a), std::sin(a)}, 0.0});
        CHECK(norm(n.xy) <= 1.0 + 1e-14);
        CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-13));
        // equality iff no temporal component
        if (std::abs(n.t) < 1e-14) CHECK(norm(n.xy) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("surface measure factor: identity, rotation, translation") {
    DeformEval ident;
    CHECK(surface_measure_factor(ident, {{1, 0}, 0}) == doctest::Approx(1.0).epsilon(1e-15));

    DeformEval rot;
    rot.fx = Mat2::rotation(0.9);
    rot.det = 1.0;
    CHECK(surface_measure_factor(rot, {{0.6, 0.8}, 0.0}) == doctest::Approx(1.0).epsilon(1e-13));

    // translation with velocity c: lateral factor sqrt(1 + (c . n)^2)
    DeformEval tr;
    tr.w = {0.5, -0.2};
    const Vec2 n{1.0, 0.0};
    CHECK(surface_measure_factor(tr, {n, 0.0}) ==
          doctest::Approx(std::sqrt(1.0 + 0.25)).epsilon(1e-13));
}

TEST_CASE("surface measure factor matches a brute-force facet area") {
    // anisotropic stretch diag(2, 1), static in time; lateral facet with the
    // reference normal along the stretched axis
    DeformEval d;
    d.fx = Mat2{2.0, 0.0, 0.0, 1.0};
    d.w = {0.0, 0.0};
    d.det = 2.0;
    // reference facet: segment x = const, y in [0, L], extruded over [0, T]:
    // reference area L*T; deformed: the segment maps to length L (y keeps
    // scale 1), so the deformed area is L*T -> factor 1... but with the
    // normal along x the tangent is y: |F t| = 1, J sqrt(n C^-1 n) must be
    // det(F) * |F^-T n| = 2 * 0.5 = 1
    CHECK(surface_measure_factor(d, {{1.0, 0.0}, 0.0}) == doctest::Approx(1.0).epsilon(1e-13));
    // normal along y: tangent x stretches by 2: factor 2
    CHECK(surface_measure_factor(d, {{0.0, 1.0}, 0.0}) == doctest::Approx(2.0).epsilon(1e-13));
    // brute force for a slanted normal
    oracle::Rng rng(12);
    for (int k = 0; k < 20; ++k) {
        const double a = rng.uniform(0, 2 * M_PI);
        const Vec2 nh{std::cos(a), std::sin(a)};
        const Vec2 th = perp(nh);
        // deformed tangent length x time extrusion (time scale 1)
        const double expected = norm(d.fx.apply(th));
        CHECK(surface_measure_factor(d, {nh, 0.0}) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("space-time determinant equals the spatial block determinant") {
    oracle::Rng rng(44);
    for (int k = 0; k < 100; ++k) {
        DeformEval d;
        d.fx = Mat2{1 + rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4),
                    1 + rng.uniform(-0.4, 0.4)};
        d.w = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        d.det = d.fx.det();
        // generic 3x3 determinant of [[F, w], [0, 1]]
        const double det3 = d.fx.a * (d.fx.d * 1.0 - d.w.y * 0.0) -
                            d.fx.b * (d.fx.c * 1.0 - d.w.y * 0.0) +
                            d.w.x * (d.fx.c * 0.0 - d.fx.d * 0.0);
        CHECK(det3 == doctest::Approx(d.det).epsilon(1e-14));
    }
}

TEST_CASE("blend region: plateau, decay, and gradient") {
    BlendRegion b;
    b.center = {1.5, 1.5};
    b.halfwidth = {0.5, 0.5};
    b.inner = 0.2;
    b.outer = 0.6;
    CHECK(b.weight({1.5, 1.5}) == 1.0);
    CHECK(b.weight({2.1, 1.5}) == 1.0);   // d = 0.1 < inner
    CHECK(b.weight({2.7, 1.5}) == 0.0);   // d = 0.7 > outer
    CHECK(b.weight({2.4, 1.5}) > 0.0);
    CHECK(b.weight({2.4, 1.5}) < 1.0);
    oracle::Rng rng(19);
    for (int k = 0; k < 50; ++k) {
        const Vec2 x{rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
        const double h = 1e-6;
        const Vec2 g = b.weight_gradient(x);
        const double fdx = (b.weight({x.x + h, x.y}) - b.weight({x.x - h, x.y})) / (2 * h);
        const double fdy = (b.weight({x.x, x.y + h}) - b.weight({x.x, x.y - h})) / (2 * h);
        CHECK(std::abs(g.x - fdx) < 1e-6);
        CHECK(std::abs(g.y - fdy) < 1e-6);
    }
}

TEST_CASE("prescribed blended field: rigid at the boundary, F consistent with FD") {
    BoundaryMotion m = translation({0.2, 0.0});
    BlendRegion blend;
    blend.center = {1.5, 1.5};
    blend.halfwidth = {0.5, 0.5};
    const DeformationField field = DeformationField::prescribed(m, 0.25, blend);
    // boundary points (on the hole box, d = 0) move rigidly
    const DeformEval on_b = field.eval(0, {1.0, 1.3}, 0.375);
    CHECK(on_b.phi.x == doctest::Approx(1.0 + 0.2 * 0.125).epsilon(1e-14));
    oracle::Rng rng(99);
    for (int k = 0; k < 60; ++k) {
        const Vec2 x{rng.uniform(0.2, 2.8), rng.uniform(0.2, 2.8)};
        const double t = rng.uniform(0.25, 0.5);
        const DeformEval d = field.eval(0, x, t);
        const double h = 1e-6;
        const Vec2 dx1 = (field.map(0, {x.x + h, x.y}, t) - field.map(0, {x.x - h, x.y}, t)) *
                         (0.5 / h);
        const Vec2 dy1 = (field.map(0, {x.x, x.y + h}, t) - field.map(0, {x.x, x.y - h}, t)) *
                         (0.5 / h);
        const Vec2 dt1 = (field.map(0, x, t + h) - field.map(0, x, t - h)) * (0.5 / h);
        CHECK(std::abs(d.fx.a - dx1.x) < 1e-6);
        CHECK(std::abs(d.fx.c - dx1.y) < 1e-6);
        CHECK(std::abs(d.fx.b - dy1.x) < 1e-6);
        CHECK(std::abs(d.fx.d - dy1.y) < 1e-6);
        CHECK(norm(d.w - dt1) < 1e-6);
        CHECK(d.det > 0.0);
    }
}

TEST_CASE("elastic extension: zero data gives the identity map") {
    auto mesh = std::make_shared<CartesianMesh>(CartesianMesh::build({0, 0}, {3, 3}, 6, 6));
    const OrientedBoundary hole = make_hole_boundary({1.1, 1.1}, {1.9, 1.9});
    const ActiveMesh am = make_active_mesh(mesh, classify_cells(*mesh, hole));
    const auto cutgeo = build_cut_geometry(am, hole);
    const CutQuadrature quad = build_quadrature(am, cutgeo, 1, 1, 0.0, 0.125);
    const SpatialSpace scalar(mesh, 1);
    const AggregationMap agg = build_aggregates(am, scalar);
    auto vec = std::make_shared<SpaceTimeSpace>(SpatialSpace(mesh, 1, 2), 1, 0.0, 0.125, am);
    const SlabDirichletData data = dirichlet_data(hole, BoundaryMotion{}, 0.0);
    const DeformationField field = solve_extension({}, vec, agg, quad, data);
    for (const double c : field.coefficients()) CHECK(std::abs(c) < 1e-11);
    const DeformEval d = field.eval(am.active[5], mesh->cell_center(am.active[5]), 0.07);
    CHECK(d.det == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("elastic extension tracks a translation; boundary mismatch decreases with h") {
    const BoundaryMotion m = translation({0.2, 0.0});
    double last = 1e300;
    for (int n : {6, 12, 24}) {
        auto mesh = std::make_shared<CartesianMesh>(CartesianMesh::build({0, 0}, {3, 3}, n, n));
        const OrientedBoundary hole = make_hole_boundary({1.1, 1.1}, {1.9, 1.9});
        const ActiveMesh am = make_active_mesh(mesh, classify_cells(*mesh, hole));
        const auto cutgeo = build_cut_geometry(am, hole);
        const double tau = 0.125;
        const CutQuadrature quad = build_quadrature(am, cutgeo, 1, 1, 0.0, tau);
        const AggregationMap agg = build_aggregates(am, SpatialSpace(mesh, 1));
        auto vec = std::make_shared<SpaceTimeSpace>(SpatialSpace(mesh, 1, 2), 1, 0.0, tau, am);
        const SlabDirichletData data = dirichlet_data(hole, m, 0.0);
        const DeformationField field = solve_extension({}, vec, agg, quad, data);
        // L2 boundary mismatch of the displacement at the slab end
        double mismatch = 0.0, length = 0.0;
        for (const auto& cq : quad.cells)
            for (const FacetQPoint& fq : cq.facets) {
                if (fq.kind != FacetKind::UnfittedDirichlet) continue;
                const DeformEval d = field.eval(cq.cell, fq.x, tau);
                const Vec2 ud = data.at_edge(fq.boundary_edge, fq.edge_param, tau);
                mismatch += fq.w * norm2(d.phi - fq.x - ud);
                length += fq.w;
            }
        mismatch = std::sqrt(mismatch / length);
        CHECK(mismatch < last);
        last = mismatch;
        // the slab-start layer stays the identity: J_Omega = 1 exactly
        const DeformEval d0 = field.eval(am.active[0], mesh->cell_center(am.active[0]), 0.0);
        CHECK(d0.det == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("discrete field gradients match finite differences of the map") {
    auto mesh = std::make_shared<CartesianMesh>(CartesianMesh::build({0, 0}, {3, 3}, 8, 8));
    const OrientedBoundary hole = make_hole_boundary({1.1, 1.1}, {1.9, 1.9});
    const ActiveMesh am = make_active_mesh(mesh, classify_cells(*mesh, hole));
    const auto cutgeo = build_cut_geometry(am, hole);
    const double tau = 0.125;
    const CutQuadrature quad = build_quadrature(am, cutgeo, 2, 1, 0.0, tau);
    const AggregationMap agg = build_aggregates(am, SpatialSpace(mesh, 2));
    auto vec = std::make_shared<SpaceTimeSpace>(SpatialSpace(mesh, 2, 2), 1, 0.0, tau, am);
    const SlabDirichletData data = dirichlet_data(hole, translation({0.2, 0.1}), 0.0);
    const DeformationField field = solve_extension({}, vec, agg, quad, data);
    oracle::Rng rng(3);
    for (int k = 0; k < 25; ++k) {
        const int cell = am.active[std::size_t(rng.uniform(0, double(am.active.size())))];
        const BBox bb = mesh->cell_bbox(cell);
        const Vec2 x{rng.uniform(bb.lo.x + 0.01, bb.hi.x - 0.01),
                     rng.uniform(bb.lo.y + 0.01, bb.hi.y - 0.01)};
        const double t = rng.uniform(0.01, tau - 0.01);
        const DeformEval d = field.eval(cell, x, t);
        const double h = 1e-6;
        const Vec2 dx1 =
            (field.map(cell, {x.x + h, x.y}, t) - field.map(cell, {x.x - h, x.y}, t)) * (0.5 / h);
        const Vec2 dt1 = (field.map(cell, x, t + h) - field.map(cell, x, t - h)) * (0.5 / h);
        CHECK(std::abs(d.fx.a - dx1.x) < 1e-6);
        CHECK(std::abs(d.fx.c - dx1.y) < 1e-6);
        CHECK(norm(d.w - dt1) < 1e-6);
    }
}

TEST_CASE("elastic extension requires q >= 1") {
    auto mesh = std::make_shared<CartesianMesh>(CartesianMesh::build({0, 0}, {3, 3}, 4, 4));
    const OrientedBoundary hole = make_hole_boundary({1.1, 1.1}, {1.9, 1.9});
    const ActiveMesh am = make_active_mesh(mesh, classify_cells(*mesh, hole));
    const auto cutgeo = build_cut_geometry(am, hole);
    const CutQuadrature quad = build_quadrature(am, cutgeo, 1, 0, 0.0, 0.125);
    const AggregationMap agg = build_aggregates(am, SpatialSpace(mesh, 1));
    auto vec = std::make_shared<SpaceTimeSpace>(SpatialSpace(mesh, 1, 2), 0, 0.0, 0.125, am);
    const SlabDirichletData data = dirichlet_data(hole, translation({0.2, 0.0}), 0.0);
    CHECK_THROWS_AS(solve_extension({}, vec, agg, quad, data), Error);
}

TEST_CASE("volume consistency: integral of J equals the deformed simplex volume") {
    auto mesh = std::make_shared<CartesianMesh>(
        CartesianMesh::build({0, 0}, {3, 3}, 8, 8).simplexified());
    const OrientedBoundary hole = make_hole_boundary({1.1, 1.1}, {1.9, 1.9});
    const ActiveMesh am = make_active_mesh(mesh, classify_cells(*mesh, hole));
    const auto cutgeo = build_cut_geometry(am, hole);
    const double tau = 0.125;
    const CutQuadrature quad = build_quadrature(am, cutgeo, 1, 1, 0.0, tau);
    const AggregationMap agg = build_aggregates(am, SpatialSpace(mesh, 1));
    auto vec = std::make_shared<SpaceTimeSpace>(SpatialSpace(mesh, 1, 2), 1, 0.0, tau, am);
    const SlabDirichletData data = dirichlet_data(hole, translation({0.2, 0.1}), 0.0);
    const DeformationField field = solve_extension({}, vec, agg, quad, data);
    // P1 displacement on simplices: det F is constant per cell, so the
    // space-time volume of the deformed slab is exactly the weighted sum of
    // deformed triangle areas at the temporal Gauss times -- but only over
    // the fully interior cells (cut pieces deform with the same map)
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < quad.cells.size(); ++k) {
        const CellQuadrature& cq = quad.cells[k];
        for (std::size_t ti = 0; ti < quad.t_nodes.size(); ++ti) {
            const double wt = quad.t_weights[ti];
            for (const QPoint& qp : cq.interior)
                lhs += wt * qp.w * field.eval(cq.cell, qp.x, quad.t_nodes[ti]).det;
            // deformed piece areas via mapped vertices
            for (const ConvexPolygon& piece : cutgeo[k].inside) {
                ConvexPolygon moved = piece;
                for (Vec2& v : moved) v = field.map(cq.cell, v, quad.t_nodes[ti]);
                rhs += wt * signed_area(moved);
            }
        }
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
}
