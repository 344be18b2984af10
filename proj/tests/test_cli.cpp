#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stfem/config.hpp"
#include "stfem/errors.hpp"
#include "stfem/io.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace stfem;
using nlohmann::json;

namespace {

json base_config() {
    return json{{"mesh", {{"origin", {0.0, 0.0}}, {"lengths", {3.0, 3.0}}, {"counts", {8, 8}}}},
                {"time", {{"t_end", 1.0}, {"slabs", 8}}},
                {"boundary", {{"hole", {{"lo", {1.0, 1.0}}, {"hi", {2.0, 2.0}}}}}},
                {"motion", {{"kind", "translation"}, {"velocity", {0.2, 0.0}}}},
                {"problem", {{"kind", "manufactured"}, {"mu", 1.0}}},
                {"discretization", {{"p", 1}, {"q", 1}}}};
}

} // namespace

TEST_CASE("config round trip through the resolver") {
    const RunConfig cfg = parse_config(base_config());
    const RunConfig cfg2 = parse_config(resolved_json(cfg));
    CHECK(resolved_json(cfg).dump() == resolved_json(cfg2).dump());
}

TEST_CASE("unknown keys are rejected") {
    json j = base_config();
    j["mesh"]["typo_key"] = 1;
    CHECK_THROWS_AS(parse_config(j), Error);
    json j2 = base_config();
    j2["surprise"] = true;
    CHECK_THROWS_AS(parse_config(j2), Error);
}

TEST_CASE("zero-slab configs are rejected by schema validation") {
    json j = base_config();
    j["time"]["slabs"] = 0;
    try {
        parse_config(j);
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        CHECK(e.exit_code() == 2);
    }
}

TEST_CASE("manufactured solution value at the reference point") {
    ManufacturedSolution mfg;  // alpha = 0.5, L = 3, T = 1
    CHECK(mfg.value({0.75, 0.75}, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("manufactured source matches finite differences of the equation") {
    ManufacturedSolution mfg;
    mfg.advection = {0.4, -0.3};
    oracle::Rng rng(55);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 x{rng.uniform(0.2, 2.8), rng.uniform(0.2, 2.8)};
        const double t = rng.uniform(0.05, 0.95);
        const double h = 1e-6;
        const double h2 = 1e-4;  // second differences need a larger step
        const double dt =
            (mfg.value(x, t + h) - mfg.value(x, t - h)) / (2 * h);
        const double lap = (mfg.value({x.x + h2, x.y}, t) - 2 * mfg.value(x, t) +
                            mfg.value({x.x - h2, x.y}, t)) / (h2 * h2) +
                           (mfg.value({x.x, x.y + h2}, t) - 2 * mfg.value(x, t) +
                            mfg.value({x.x, x.y - h2}, t)) / (h2 * h2);
        const Vec2 grad{(mfg.value({x.x + h, x.y}, t) - mfg.value({x.x - h, x.y}, t)) / (2 * h),
                        (mfg.value({x.x, x.y + h}, t) - mfg.value({x.x, x.y - h}, t)) / (2 * h)};
        const double f_fd = dt + dot(mfg.advection, grad) - mfg.mu * lap;
        CHECK(std::abs(mfg.source(x, t) - f_fd) < 1e-6);
    }
}

TEST_CASE("manufactured derivatives are consistent") {
    ManufacturedSolution mfg;
    oracle::Rng rng(56);
    for (int k = 0; k < 100; ++k) {
        const Vec2 x{rng.uniform(0.2, 2.8), rng.uniform(0.2, 2.8)};
        const double t = rng.uniform(0.05, 0.95);
        const double h = 1e-6;
        const Vec2 g = mfg.gradient(x, t);
        CHECK(std::abs(g.x - (mfg.value({x.x + h, x.y}, t) - mfg.value({x.x - h, x.y}, t)) /
                                 (2 * h)) < 1e-7);
        const auto H = mfg.hessian(x, t);
        CHECK(std::abs(H[1] - (mfg.gradient({x.x, x.y + h}, t).x -
                               mfg.gradient({x.x, x.y - h}, t).x) / (2 * h)) < 1e-6);
    }
}

TEST_CASE("norm CSV has the fixed column order") {
    CHECK(norm_csv_header() == "n_cells,h,tau,p,q,dg_err,l2_err,h1_err,cond_M,cond_A");
    NormRow row;
    row.n_cells = 8;
    row.h = 0.375;
    row.tau = 0.125;
    row.p = 1;
    row.q = 2;
    row.dg_err = 0.5;
    const std::string line = norm_csv_line(row);
    CHECK(line.substr(0, 2) == "8,");
    int commas = 0;
    for (char c : line)
        if (c == ',') ++commas;
    CHECK(commas == 9);
}

TEST_CASE("log-log slope recovers a known power") {
    std::vector<double> h{0.5, 0.25, 0.125};
    std::vector<double> e;
    for (double x : h) e.push_back(3.0 * x * x);
    CHECK(log_log_slope(h, e) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("build_run wires the manufactured problem and runs a coarse case") {
    RunConfig cfg = parse_config(base_config());
    cfg.nx = cfg.ny = 4;
    cfg.slabs = 4;
    cfg.cond = CondSlabs::None;
    RunObjects run = build_run(cfg);
    REQUIRE(run.setup.exact != nullptr);
    const MarchResult res = march(run.setup);
    REQUIRE(res.slabs.size() == 4);
    CHECK(res.has_norms);
    CHECK(std::isfinite(res.norms.dg_error()));
    CHECK(res.norms.dg_error() > 0.0);
    CHECK(std::isfinite(res.norms.final_l2));
}

TEST_CASE("boundary construction variants") {
    RunConfig cfg = parse_config(base_config());
    // hole only: negative shoelace sum (domain bounded by the box)
    RunObjects run = build_run(cfg);
    CHECK(run.setup.boundary.enclosed_area() == doctest::Approx(-1.0));
    // box plus hole: positive total equal to the domain area
    cfg.box = {{Vec2{0.0, 0.0}, Vec2{3.0, 3.0}}};
    RunObjects run2 = build_run(cfg);
    CHECK(run2.setup.boundary.enclosed_area() == doctest::Approx(8.0));
}

TEST_CASE("constant problem kind preserves its value through a run") {
    json j = base_config();
    j["problem"] = {{"kind", "constant"}, {"constant_value", 2.5}};
    j["mesh"]["counts"] = {6, 6};
    j["boundary"] = {{"hole", {{"lo", {1.03, 1.03}}, {"hi", {1.97, 1.97}}}}};
    j["time"]["slabs"] = 3;
    RunConfig cfg = parse_config(j);
    cfg.cond = CondSlabs::None;
    RunObjects run = build_run(cfg);
    const MarchResult res = march(run.setup);
    for (const SlabRecord& rec : res.slabs)
        for (double c : rec.coeffs) CHECK(std::abs(c - 2.5) < 1e-8);
}
