#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Serial is the reference implementation; the OpenMP drivers stage per-cell
// results and merge them in cell order, so outputs must be bit-identical.

#include "stfem/assembly.hpp"
#include "stfem/cut.hpp"
#include "stfem/manufactured.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

using namespace stfem;

namespace {

struct Scene {
    std::shared_ptr<CartesianMesh> mesh;
    OrientedBoundary boundary;
};

Scene make_scene() {
    Scene s;
    s.mesh = std::make_shared<CartesianMesh>(CartesianMesh::build({0, 0}, {3, 3}, 24, 24));
    oracle::Rng rng(64);
    const Polygon loop = oracle::random_star_polygon(rng, {1.47, 1.53}, 0.45, 0.8, 17);
    s.boundary = oracle::boundary_from_loop(loop, true);  // clockwise: hole
    return s;
}

} // namespace

TEST_CASE("classification is identical in serial and OpenMP") {
    Scene s = make_scene();
    const auto serial = classify_cells(*s.mesh, s.boundary, ExecMode::Serial);
    const auto parallel = classify_cells(*s.mesh, s.boundary, ExecMode::OpenMP);
    CHECK(serial == parallel);
}

TEST_CASE("cut geometry is bit-identical in serial and OpenMP") {
    Scene s = make_scene();
    const ActiveMesh am = make_active_mesh(s.mesh, classify_cells(*s.mesh, s.boundary));
    const auto a = build_cut_geometry(am, s.boundary, ExecMode::Serial);
    const auto b = build_cut_geometry(am, s.boundary, ExecMode::OpenMP);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].cell == b[k].cell);
        CHECK(a[k].measure == b[k].measure);  // exact equality
        REQUIRE(a[k].inside.size() == b[k].inside.size());
        for (std::size_t i = 0; i < a[k].inside.size(); ++i) {
            REQUIRE(a[k].inside[i].size() == b[k].inside[i].size());
            for (std::size_t v = 0; v < a[k].inside[i].size(); ++v) {
                CHECK(a[k].inside[i][v].x == b[k].inside[i][v].x);
                CHECK(a[k].inside[i][v].y == b[k].inside[i][v].y);
            }
        }
    }
}

TEST_CASE("triple intersection is bit-identical in serial and OpenMP") {
    Scene s = make_scene();
    const ActiveMesh am = make_active_mesh(s.mesh, classify_cells(*s.mesh, s.boundary));
    std::vector<IndexedCell> current;
    for (int c : am.active) current.push_back({c, s.mesh->cell_polygon(c)});
    std::vector<IndexedCell> previous;
    const double h = 3.0 / 24.0;
    const CartesianMesh padded =
        CartesianMesh::build({-h, -h}, {3 + 2 * h, 3 + 2 * h}, 26, 26);
    for (int c = 0; c < padded.num_cells(); ++c) {
        ConvexPolygon poly = padded.cell_polygon(c);
        for (Vec2& v : poly) v += Vec2{0.4 * h, -0.23 * h};
        previous.push_back({c, poly});
    }
    const IntersectionMesh a = intersect_triple(current, previous, s.boundary, ExecMode::Serial);
    const IntersectionMesh b = intersect_triple(current, previous, s.boundary, ExecMode::OpenMP);
    CHECK(a.total_measure == b.total_measure);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        CHECK(a.cells[k].parent_current == b.cells[k].parent_current);
        CHECK(a.cells[k].parent_previous == b.cells[k].parent_previous);
        CHECK(a.cells[k].measure == b.cells[k].measure);
    }
}

TEST_CASE("slab assembly is bit-identical in serial and OpenMP") {
    Scene s = make_scene();
    const ActiveMesh am = make_active_mesh(s.mesh, classify_cells(*s.mesh, s.boundary));
    const auto cutgeo = build_cut_geometry(am, s.boundary);
    const CutQuadrature quad = build_quadrature(am, cutgeo, 1, 1, 0.0, 0.125);
    const SpaceTimeSpace space(SpatialSpace(s.mesh, 1), 1, 0.0, 0.125, am);
    ManufacturedSolution mfg;
    mfg.advection = {0.2, 0.1};
    const ModelProblem mp = mfg.problem();
    BoundaryMotion motion;
    motion.kind = MotionKind::Translation;
    motion.velocity = {0.15, 0.1};
    BlendRegion blend;
    blend.center = {1.47, 1.53};
    blend.halfwidth = {0.8, 0.8};
    const DeformationField field = DeformationField::prescribed(motion, 0.0, blend);
    AssembleOptions sa, pa;
    pa.mode = ExecMode::OpenMP;
    const SlabSystem a = assemble_slab(mp, space, field, quad, sa);
    const SlabSystem b = assemble_slab(mp, space, field, quad, pa);
    CHECK((a.rhs - b.rhs).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Eigen::MatrixXd(a.matrix) - Eigen::MatrixXd(b.matrix)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadrature build is bit-identical in serial and OpenMP") {
    Scene s = make_scene();
    const ActiveMesh am = make_active_mesh(s.mesh, classify_cells(*s.mesh, s.boundary));
    const auto cutgeo = build_cut_geometry(am, s.boundary);
    const CutQuadrature a = build_quadrature(am, cutgeo, 2, 1, 0.0, 1.0,
                                             {SideBC::Dirichlet, SideBC::Dirichlet,
                                              SideBC::Dirichlet, SideBC::Dirichlet},
                                             ExecMode::Serial);
    const CutQuadrature b = build_quadrature(am, cutgeo, 2, 1, 0.0, 1.0,
                                             {SideBC::Dirichlet, SideBC::Dirichlet,
                                              SideBC::Dirichlet, SideBC::Dirichlet},
                                             ExecMode::OpenMP);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        REQUIRE(a.cells[k].interior.size() == b.cells[k].interior.size());
        for (std::size_t i = 0; i < a.cells[k].interior.size(); ++i) {
            CHECK(a.cells[k].interior[i].x.x == b.cells[k].interior[i].x.x);
            CHECK(a.cells[k].interior[i].w == b.cells[k].interior[i].w);
        }
        REQUIRE(a.cells[k].facets.size() == b.cells[k].facets.size());
    }
}
