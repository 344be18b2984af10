#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stfem/errors.hpp"
#include "stfem/manufactured.hpp"
#include "stfem/march.hpp"
#include "oracles.hpp"

#include <Eigen/SparseLU>

using namespace stfem;

namespace {

MarchSetup base_setup(int n, int slabs, int p, int q) {
    MarchSetup s;
    s.mesh = std::make_shared<CartesianMesh>(CartesianMesh::build({0, 0}, {3, 3}, n, n));
    s.time = TimePartition::uniform(1.0, slabs);
    s.boundary = make_hole_boundary({1, 1}, {2, 2});
    s.p = p;
    s.q = q;
    return s;
}

} // namespace

TEST_CASE("one zero-motion slab equals a direct fixed-domain solve") {
    MarchSetup s = base_setup(8, 1, 1, 1);
    ManufacturedSolution mfg;
    s.problem = mfg.problem();
    const ExactSolution exact = mfg.exact();
    s.exact = &exact;
    s.motion.kind = MotionKind::None;
    const MarchResult res = march(s);
    REQUIRE(res.slabs.size() == 1);

    // direct solve with the same spaces
    const ActiveMesh& am = res.slabs[0].space->active();
    const auto cutgeo = build_cut_geometry(am, s.boundary);
    const CutQuadrature quad = build_quadrature(am, cutgeo, 1, 1, 0.0, 1.0);
    const AggregationMap agg = build_aggregates(am, res.slabs[0].space->spatial());
    SlabSystem sys =
        assemble_slab(s.problem, *res.slabs[0].space, DeformationField::identity(), quad);
    Eigen::VectorXd rhs = sys.rhs + initial_value_rhs(*res.slabs[0].space,
                                                      DeformationField::identity(), quad,
                                                      s.problem.initial);
    ReducedSystem red = constrain_system(sys.matrix, rhs, agg, *res.slabs[0].space);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(red.matrix);
    REQUIRE(lu.info() == Eigen::Success);
    const Eigen::VectorXd x = red.prolongation * lu.solve(red.rhs).eval();
    for (int i = 0; i < x.size(); ++i)
        CHECK(res.slabs[0].coeffs[std::size_t(i)] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("constant solution is preserved across ten moving slabs") {
    MarchSetup s = base_setup(8, 10, 1, 1);
    s.problem.mu = 1.0;
    s.problem.dirichlet = [](const Vec2&, double) { return 1.0; };
    s.problem.initial = [](const Vec2&) { return 1.0; };
    s.motion.kind = MotionKind::Translation;
    s.motion.velocity = {0.2, 0.0};
    ExactSolution one;
    one.value = [](const Vec2&, double) { return 1.0; };
    one.gradient = [](const Vec2&, double) { return Vec2{0, 0}; };
    one.hessian = [](const Vec2&, double) { return std::array<double, 3>{0, 0, 0}; };
    one.time_derivative = [](const Vec2&, double) { return 0.0; };
    s.exact = &one;
    const MarchResult res = march(s);
    REQUIRE(res.slabs.size() == 10);
    for (const SlabRecord& rec : res.slabs)
        for (double c : rec.coeffs) CHECK(std::abs(c - 1.0) < 1e-8);
    CHECK(res.norms.dg_error() < 1e-8);
}

TEST_CASE("transfer-skip path also preserves constants and reports skips") {
    MarchSetup s = base_setup(8, 10, 1, 1);
    s.problem.dirichlet = [](const Vec2&, double) { return 1.0; };
    s.problem.initial = [](const Vec2&) { return 1.0; };
    s.motion.kind = MotionKind::Translation;
    s.motion.velocity = {0.2, 0.0};
    s.transfer_skip_threshold = 0.8;  // generous: the rigid core has grad u = 0
    const MarchResult res = march(s);
    CHECK(res.transfer_skips > 0);
    for (const SlabRecord& rec : res.slabs)
        for (double c : rec.coeffs) CHECK(std::abs(c - 1.0) < 1e-8);
}

TEST_CASE("elastic deformation mode marches and keeps the initial layer fixed") {
    MarchSetup s = base_setup(8, 2, 1, 1);
    ManufacturedSolution mfg;
    s.problem = mfg.problem();
    s.motion.kind = MotionKind::Translation;
    s.motion.velocity = {0.2, 0.0};
    s.deformation.mode = DeformationSetup::Mode::Elastic;
    const MarchResult res = march(s);
    REQUIRE(res.slabs.size() == 2);
    for (const SlabRecord& rec : res.slabs) {
        CHECK(rec.field.is_discrete());
        // J_Omega = 1 exactly at the slab's initial time
        const ActiveMesh& am = rec.space->active();
        for (int k = 0; k < 5; ++k) {
            const int cell = am.active[std::size_t(k * 7 % am.active.size())];
            const DeformEval d = rec.field.eval(cell, am.mesh->cell_center(cell), rec.t0);
            CHECK(d.det == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("manufactured error decreases fourfold when h and tau halve (p=q=1)") {
    ManufacturedSolution mfg;
    const ExactSolution exact = mfg.exact();
    double coarse = 0.0;
    for (int n : {8, 16}) {
        MarchSetup s = base_setup(n, n, 1, 1);
        s.problem = mfg.problem();
        s.exact = &exact;
        s.motion.kind = MotionKind::Translation;
        s.motion.velocity = {0.2, 0.0};
        const MarchResult res = march(s);
        REQUIRE(res.has_norms);
        if (n == 8) coarse = res.norms.final_l2;
        else {
            const double ratio = coarse / res.norms.final_l2;
            CHECK(ratio > 2.5);  // asymptotically 4; loose at this size
            CHECK(ratio < 8.0);
        }
    }
}

TEST_CASE("stage errors carry the slab index and stage name") {
    MarchSetup s = base_setup(6, 2, 1, 1);  // grid-aligned hole: classify must fail
    ManufacturedSolution mfg;
    s.problem = mfg.problem();
    try {
        march(s);
        FAIL("expected a tolerance error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("slab 1") != std::string::npos);
        CHECK(msg.find("classify") != std::string::npos);
    }
}

TEST_CASE("march rejects missing initial data") {
    MarchSetup s = base_setup(4, 1, 1, 1);
    s.problem.dirichlet = [](const Vec2&, double) { return 0.0; };
    CHECK_THROWS_AS(march(s), Error);
}

TEST_CASE("reproducibility: identical setups give bit-identical results") {
    ManufacturedSolution mfg;
    const ExactSolution exact = mfg.exact();
    std::array<MarchResult, 2> results;
    for (int run = 0; run < 2; ++run) {
        MarchSetup s = base_setup(6, 3, 1, 1);
        s.boundary = make_hole_boundary({1.03, 1.03}, {1.97, 1.97});
        s.problem = mfg.problem();
        s.exact = &exact;
        s.motion.kind = MotionKind::Translation;
        s.motion.velocity = {0.2, 0.0};
        results[std::size_t(run)] = march(s);
    }
    REQUIRE(results[0].slabs.size() == results[1].slabs.size());
    for (std::size_t k = 0; k < results[0].slabs.size(); ++k) {
        const auto& a = results[0].slabs[k].coeffs;
        const auto& b = results[1].slabs[k].coeffs;
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    CHECK(results[0].norms.dg_error() == results[1].norms.dg_error());
}
