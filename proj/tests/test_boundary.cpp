#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stfem/boundary.hpp"
#include "stfem/errors.hpp"
#include "oracles.hpp"

#include <sstream>

using namespace stfem;

TEST_CASE("boundary file round trip") {
    const OrientedBoundary b = make_hole_boundary({1, 1}, {2, 2});
    std::stringstream ss;
    write_boundary(ss, b);
    const OrientedBoundary b2 = read_boundary(ss);
    REQUIRE(b2.num_vertices() == b.num_vertices());
    REQUIRE(b2.num_edges() == b.num_edges());
    CHECK(b2.enclosed_area() == doctest::Approx(b.enclosed_area()).epsilon(1e-15));
}

TEST_CASE("boundary file errors carry line numbers") {
    std::stringstream ss("3 3\n0 0\n1 0\nbad line\n0 1\n1 2\n2 0\n");
    try {
        read_boundary(ss, "test");
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
}

TEST_CASE("validate rejects open polylines") {
    CHECK_THROWS_AS(OrientedBoundary({{0, 0}, {1, 0}, {1, 1}}, {{{0, 1}}, {{1, 2}}}), Error);
}

TEST_CASE("validate rejects duplicated outgoing edges") {
    CHECK_THROWS_AS(OrientedBoundary({{0, 0}, {1, 0}, {1, 1}}, {{{0, 1}}, {{0, 2}}, {{1, 2}}}),
                    Error);
}

TEST_CASE("validate rejects crossing loops") {
    // two triangles sharing interior space with crossing edges
    OrientedBoundary b({{0, 0}, {2, 0}, {2, 2}, {1, -1}, {3, 1}, {1, 1}},
                       {{{0, 1}}, {{1, 2}}, {{2, 0}}, {{3, 4}}, {{4, 5}}, {{5, 3}}});
    CHECK_THROWS_AS(b.validate(), Error);
}

TEST_CASE("enclosed area signs: enclosing box, hole, and box-plus-hole") {
    const OrientedBoundary box = make_box_boundary({0, 0}, {3, 3});
    box.validate();
    CHECK(box.enclosed_area() == doctest::Approx(9.0));
    CHECK(box.has_enclosing_loop());

    const OrientedBoundary hole = make_hole_boundary({1, 1}, {2, 2});
    hole.validate();
    CHECK(hole.enclosed_area() == doctest::Approx(-1.0));
    CHECK(!hole.has_enclosing_loop());

    // combined boundary: positive total equal to the domain area
    std::vector<Vec2> v = box.vertices();
    std::vector<std::array<int, 2>> e = box.edges();
    for (const Vec2& x : hole.vertices()) v.push_back(x);
    for (auto ed : hole.edges()) e.push_back({ed[0] + 4, ed[1] + 4});
    const OrientedBoundary both(v, e);
    both.validate();
    CHECK(both.enclosed_area() == doctest::Approx(8.0));
    CHECK(both.has_enclosing_loop());
}

TEST_CASE("side test: enclosing loop") {
    const OrientedBoundary box = make_box_boundary({0, 0}, {1, 1});
    CHECK(box.inside({0.5, 0.5}));
    CHECK(box.inside({0.01, 0.99}));
    CHECK(!box.inside({1.5, 0.5}));
    CHECK(!box.inside({-0.2, -0.2}));  // vertex sector, convex corner
    CHECK(!box.inside({1.3, 1.3}));
}

TEST_CASE("side test: hole-type loop (domain outside)") {
    const OrientedBoundary hole = make_hole_boundary({1, 1}, {2, 2});
    CHECK(!hole.inside({1.5, 1.5}));
    CHECK(hole.inside({0.5, 0.5}));  // nearest feature is the hole corner
    CHECK(hole.inside({2.5, 1.5}));
    CHECK(hole.inside({0.0, 3.0}));
}

TEST_CASE("side test agrees with the winding oracle") {
    oracle::Rng rng(77);
    const Polygon loop = oracle::random_star_polygon(rng, {0.5, 0.5}, 0.25, 0.45, 12);
    const OrientedBoundary b = oracle::boundary_from_loop(loop);
    int checked = 0;
    for (int k = 0; k < 2000; ++k) {
        const Vec2 p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        const SideTest st = b.side_of(p);
        if (st.distance < 1e-6) continue;  // skip points essentially on the boundary
        CHECK(st.inside == oracle::point_in_domain(b, p));
        ++checked;
    }
    CHECK(checked > 1500);
}

TEST_CASE("bucket grid restriction is a superset of the brute-force answer") {
    oracle::Rng rng(5);
    const Polygon loop = oracle::random_star_polygon(rng, {1.5, 1.5}, 0.5, 1.2, 24);
    const OrientedBoundary b = oracle::boundary_from_loop(loop);
    BucketGrid grid(b.bounds(), 0.25);
    for (int e = 0; e < b.num_edges(); ++e) {
        BBox eb;
        eb.expand(b.edge_start(e));
        eb.expand(b.edge_end(e));
        grid.insert(e, eb);
    }
    for (int trial = 0; trial < 200; ++trial) {
        BBox q;
        q.expand({rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)});
        q.inflate(rng.uniform(0.05, 0.6));
        const std::vector<int> got = grid.query(q);
        for (int e = 0; e < b.num_edges(); ++e) {
            BBox eb;
            eb.expand(b.edge_start(e));
            eb.expand(b.edge_end(e));
            if (eb.overlaps(q))
                CHECK(std::find(got.begin(), got.end(), e) != got.end());
        }
    }
}

TEST_CASE("restriction translates consistently with the boundary") {
    oracle::Rng rng(6);
    const Polygon loop = oracle::random_star_polygon(rng, {1.0, 1.0}, 0.4, 0.9, 16);
    const OrientedBoundary b = oracle::boundary_from_loop(loop);
    const Vec2 shift{0.37, -0.21};
    std::vector<Vec2> moved = b.vertices();
    for (Vec2& v : moved) v += shift;
    const OrientedBoundary bt = b.with_vertices(moved);

    BucketGrid g0(b.bounds(), 0.2), g1(bt.bounds(), 0.2);
    for (int e = 0; e < b.num_edges(); ++e) {
        BBox e0, e1;
        e0.expand(b.edge_start(e));
        e0.expand(b.edge_end(e));
        e1.expand(bt.edge_start(e));
        e1.expand(bt.edge_end(e));
        g0.insert(e, e0);
        g1.insert(e, e1);
    }
    for (int trial = 0; trial < 100; ++trial) {
        BBox q;
        q.expand({rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)});
        q.inflate(0.15);
        BBox qt = q;
        qt.lo += shift;
        qt.hi += shift;
        // brute-force answers agree after translation; both grids must cover them
        for (int e = 0; e < b.num_edges(); ++e) {
            BBox e0;
            e0.expand(b.edge_start(e));
            e0.expand(b.edge_end(e));
            if (!e0.overlaps(q)) continue;
            const auto r0 = g0.query(q);
            const auto r1 = g1.query(qt);
            CHECK(std::find(r0.begin(), r0.end(), e) != r0.end());
            CHECK(std::find(r1.begin(), r1.end(), e) != r1.end());
        }
    }
}

TEST_CASE("boundary fully inside one cell restricts to all edges") {
    const OrientedBoundary b = make_box_boundary({0.4, 0.4}, {0.6, 0.6});
    BucketGrid grid(b.bounds(), 0.1);
    for (int e = 0; e < b.num_edges(); ++e) {
        BBox eb;
        eb.expand(b.edge_start(e));
        eb.expand(b.edge_end(e));
        grid.insert(e, eb);
    }
    BBox cell;
    cell.expand({0.0, 0.0});
    cell.expand({1.0, 1.0});
    CHECK(grid.query(cell).size() == 4);
    BBox far;
    far.expand({5.0, 5.0});
    far.expand({6.0, 6.0});
    CHECK(grid.query(far).empty());
}
