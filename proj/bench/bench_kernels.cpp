#include "stfem/assembly.hpp"
#include "stfem/config.hpp"
#include "stfem/cut.hpp"
#include "stfem/deformation.hpp"
#include "stfem/march.hpp"
#include "stfem/quadrature.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef STFEM_HAVE_OPENMP
#include <omp.h>
#endif

using namespace stfem;
using clk = std::chrono::steady_clock;

namespace {

double seconds(clk::time_point a, clk::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

OrientedBoundary circle_hole(const Vec2& center, double radius, int segments) {
    std::vector<Vec2> v;
    std::vector<std::array<int, 2>> e;
    // clockwise loop: the domain interior (outside the hole) lies on the left
    for (int k = 0; k < segments; ++k) {
        const double a = -2.0 * M_PI * k / segments;
        v.push_back(center + Vec2{radius * std::cos(a), radius * std::sin(a)});
        e.push_back({k, (k + 1) % segments});
    }
    return OrientedBoundary(std::move(v), std::move(e));
}

template <class F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto a = clk::now();
        f();
        best = std::min(best, seconds(a, clk::now()));
    }
    return best;
}

double checksum(const std::vector<CutCellGeometry>& gs) {
    double s = 0.0;
    for (const auto& g : gs) s += g.measure * (1.0 + 1e-7 * g.cell);
    return s;
}

} // namespace

int main(int argc, char** argv) {
    int n = 160;
    int reps = 3;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--n") == 0 && i + 1 < argc) n = std::atoi(argv[++i]);
        if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) reps = std::atoi(argv[++i]);
    }
#ifdef STFEM_HAVE_OPENMP
    std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("openmp not available; both paths run serially\n");
#endif
    std::printf("background mesh %d x %d\n\n", n, n);

    auto mesh = std::make_shared<CartesianMesh>(
        CartesianMesh::build({0.0, 0.0}, {3.0, 3.0}, n, n));
    const OrientedBoundary boundary = circle_hole({1.45, 1.55}, 0.6, 128);

    std::printf("%-24s %12s %12s %9s\n", "kernel", "serial [s]", "openmp [s]", "speedup");
    auto report = [&](const char* name, double ts, double tp, bool equal) {
        std::printf("%-24s %12.4f %12.4f %8.2fx %s\n", name, ts, tp, ts / tp,
                    equal ? "" : "MISMATCH");
    };

    // classification
    std::vector<CellClass> cls_s, cls_p;
    const double t_cls_s =
        time_best_of(reps, [&] { cls_s = classify_cells(*mesh, boundary, ExecMode::Serial); });
    const double t_cls_p =
        time_best_of(reps, [&] { cls_p = classify_cells(*mesh, boundary, ExecMode::OpenMP); });
    report("classify_cells", t_cls_s, t_cls_p, cls_s == cls_p);

    // cut-cell geometry (clipping)
    const ActiveMesh am = make_active_mesh(mesh, cls_s);
    std::vector<CutCellGeometry> cut_s, cut_p;
    const double t_cut_s =
        time_best_of(reps, [&] { cut_s = build_cut_geometry(am, boundary, ExecMode::Serial); });
    const double t_cut_p =
        time_best_of(reps, [&] { cut_p = build_cut_geometry(am, boundary, ExecMode::OpenMP); });
    report("build_cut_geometry", t_cut_s, t_cut_p, checksum(cut_s) == checksum(cut_p));

    // triple intersection against a shifted copy of the mesh
    std::vector<IndexedCell> current;
    for (int c : am.active) current.push_back({c, mesh->cell_polygon(c)});
    std::vector<IndexedCell> previous;
    const Vec2 shift{0.45 * 3.0 / n, 0.3 * 3.0 / n};
    const double hx = 3.0 / n;
    CartesianMesh padded = CartesianMesh::build(Vec2{-hx, -hx} , {3.0 + 2 * hx, 3.0 + 2 * hx},
                                                n + 2, n + 2);
    for (int c = 0; c < padded.num_cells(); ++c) {
        ConvexPolygon poly = padded.cell_polygon(c);
        for (Vec2& v : poly) v += shift;
        previous.push_back({c, poly});
    }
    IntersectionMesh im_s, im_p;
    const double t_int_s = time_best_of(
        reps, [&] { im_s = intersect_triple(current, previous, boundary, ExecMode::Serial); });
    const double t_int_p = time_best_of(
        reps, [&] { im_p = intersect_triple(current, previous, boundary, ExecMode::OpenMP); });
    report("intersect_triple", t_int_s, t_int_p, im_s.total_measure == im_p.total_measure);

    // slab assembly (p = q = 1, rigid translation field)
    const CutQuadrature quad = build_quadrature(am, cut_s, 1, 1, 0.0, 3.0 / n);
    const SpaceTimeSpace space(SpatialSpace(mesh, 1, 1), 1, 0.0, 3.0 / n, am);
    BoundaryMotion motion;
    motion.kind = MotionKind::Translation;
    motion.velocity = {0.2, 0.0};
    BlendRegion blend;
    blend.center = {1.45, 1.55};
    blend.halfwidth = {0.6, 0.6};
    const DeformationField field = DeformationField::prescribed(motion, 0.0, blend);
    ManufacturedSolution mfg;
    const ModelProblem problem = mfg.problem();
    SlabSystem sys_s, sys_p;
    AssembleOptions opt_s, opt_p;
    opt_p.mode = ExecMode::OpenMP;
    const double t_asm_s =
        time_best_of(reps, [&] { sys_s = assemble_slab(problem, space, field, quad, opt_s); });
    const double t_asm_p =
        time_best_of(reps, [&] { sys_p = assemble_slab(problem, space, field, quad, opt_p); });
    const bool asm_equal = (sys_s.matrix - sys_p.matrix).norm() == 0.0 &&
                           (sys_s.rhs - sys_p.rhs).norm() == 0.0;
    report("assemble_slab", t_asm_s, t_asm_p, asm_equal);

    std::printf("\ndomain area %.12f, intersection cells %zu\n", im_s.total_measure,
                im_s.cells.size());
    return 0;
}
