#include "stfem/assembly.hpp"
#include "stfem/config.hpp"
#include "stfem/cut.hpp"
#include "stfem/errors.hpp"
#include "stfem/io.hpp"
#include "stfem/march.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using namespace stfem;

std::string resolve_out_dir(const std::string& cli_out, const std::string& config_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("STFEM_OUT_DIR"); env && *env) return env;
    return config_out;
}

double mesh_h(const CartesianMesh& mesh) {
    double h = 0.0;
    for (std::size_t k = 0; k + 1 < mesh.xcoords().size(); ++k)
        h = std::max(h, mesh.xcoords()[k + 1] - mesh.xcoords()[k]);
    for (std::size_t k = 0; k + 1 < mesh.ycoords().size(); ++k)
        h = std::max(h, mesh.ycoords()[k + 1] - mesh.ycoords()[k]);
    return h;
}

NormRow make_row(const RunConfig& cfg, const MarchResult& res) {
    NormRow row;
    row.n_cells = cfg.nx;
    row.h = 0.0;
    row.tau = cfg.t_end / cfg.slabs;
    row.p = cfg.p;
    row.q = cfg.q;
    if (res.has_norms) {
        row.dg_err = res.norms.dg_error();
        row.l2_err = res.norms.final_l2;
        row.h1_err = res.norms.final_h1;
    }
    for (const SlabRecord& rec : res.slabs)
        if (rec.cond) {
            row.cond_m = rec.cond->mass;
            row.cond_a = rec.cond->stiffness;
            break;
        }
    return row;
}

void write_run_outputs(const std::string& dir, const RunConfig& cfg, const RunObjects& run,
                       const MarchResult& res) {
    ensure_directory(dir);
    {
        std::ofstream f(dir + "/resolved_config.json");
        f << resolved_json(cfg).dump(2) << "\n";
    }
    NormRow row = make_row(cfg, res);
    row.h = mesh_h(*run.mesh);
    write_norm_csv(dir + "/norms.csv", {row});
    if (cfg.output.vtk) {
        for (const SlabRecord& rec : res.slabs) {
            std::ostringstream name;
            name << dir << "/solution_slab_" << std::setw(3) << std::setfill('0') << rec.index + 1
                 << ".vtk";
            write_vtk_solution(name.str(), *rec.space, rec.coeffs, rec.field, rec.t1);
        }
        const OrientedBoundary b0 = boundary_at(run.setup.boundary, run.setup.motion, 0.0);
        write_vtk_boundary(dir + "/boundary_t0.vtk", b0);
        write_vtk_mesh(dir + "/background_mesh.vtk", *run.mesh);
    }
    if (cfg.output.matrices && !res.slabs.empty()) {
        // re-assemble the first slab's reduced system for offline inspection
        const SlabRecord& rec = res.slabs.front();
        const ActiveMesh& am = rec.space->active();
        const OrientedBoundary bnd = boundary_at(run.setup.boundary, run.setup.motion, rec.t0);
        const auto cutgeo = build_cut_geometry(am, bnd);
        const CutQuadrature quad =
            build_quadrature(am, cutgeo, cfg.p, cfg.q, rec.t0, rec.t1, run.setup.side_bc);
        const AggregationMap agg = build_aggregates(am, rec.space->spatial());
        SlabSystem sys = assemble_slab(run.setup.problem, *rec.space, rec.field, quad);
        ReducedSystem red = constrain_system(sys.matrix, sys.rhs, agg, *rec.space);
        write_matrix_market(dir + "/slab1_matrix.mtx", red.matrix);
        write_matrix_market(dir + "/slab1_rhs.mtx", red.rhs);
    }
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    RunConfig cfg = load_config_file(config_path);
    cfg.output.dir = resolve_out_dir(out_dir, cfg.output.dir);
    RunObjects run = build_run(cfg);
    MarchResult res = march(run.setup);
    write_run_outputs(cfg.output.dir, cfg, run, res);
    std::cout << norm_csv_header() << "\n";
    NormRow row = make_row(cfg, res);
    row.h = mesh_h(*run.mesh);
    std::cout << norm_csv_line(row) << "\n";
    std::cout << "slabs " << res.slabs.size() << ", transfer skips " << res.transfer_skips
              << ", outputs in " << cfg.output.dir << "\n";
    return 0;
}

struct OrderPair {
    int p, q;
};

std::vector<OrderPair> parse_orders(const std::string& text) {
    std::vector<OrderPair> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        OrderPair op{1, 1};
        if (std::sscanf(item.c_str(), "p=%d,q=%d", &op.p, &op.q) != 2)
            config_error("cannot parse order pair `" + item + "` (expected p=1,q=1)");
        out.push_back(op);
    }
    if (out.empty()) config_error("no order pairs given");
    return out;
}

int cmd_convergence(const std::string& config_path, const std::string& out_dir,
                    const std::string& levels_text, const std::string& orders_text) {
    RunConfig base = load_config_file(config_path);
    base.output.dir = resolve_out_dir(out_dir, base.output.dir);
    std::vector<int> levels;
    {
        std::istringstream ss(levels_text);
        std::string item;
        while (std::getline(ss, item, ',')) levels.push_back(std::stoi(item));
        if (levels.size() < 3)
            std::cerr << "note: fewer than 3 levels; slopes will be rough\n";
    }
    const std::vector<OrderPair> orders = parse_orders(orders_text);
    ensure_directory(base.output.dir);
    {
        std::ofstream f(base.output.dir + "/resolved_config.json");
        f << resolved_json(base).dump(2) << "\n";
    }

    std::vector<NormRow> rows;
    std::ofstream slopes(base.output.dir + "/slopes.csv");
    slopes << "p,q,dg_slope,l2_slope,h1_slope,cond_a_slope,cond_m_ratio\n";
    std::cout << norm_csv_header() << "\n";
    for (const OrderPair& op : orders) {
        std::vector<double> hs, dgs, l2s, h1s, conda;
        double condm_min = 1e300, condm_max = 0.0;
        for (int n : levels) {
            RunConfig cfg = base;
            cfg.nx = cfg.ny = n;
            cfg.slabs = n;  // constant h/tau
            cfg.p = op.p;
            cfg.q = op.q;
            RunObjects run = build_run(cfg);
            MarchResult res = march(run.setup);
            NormRow row = make_row(cfg, res);
            row.h = mesh_h(*run.mesh);
            rows.push_back(row);
            std::cout << norm_csv_line(row) << "\n" << std::flush;
            hs.push_back(row.h);
            dgs.push_back(row.dg_err);
            l2s.push_back(row.l2_err);
            h1s.push_back(row.h1_err);
            if (row.cond_a > 0.0) conda.push_back(row.cond_a);
            if (row.cond_m > 0.0) {
                condm_min = std::min(condm_min, row.cond_m);
                condm_max = std::max(condm_max, row.cond_m);
            }
        }
        for (std::size_t i = 1; i < dgs.size(); ++i)
            if (dgs[i] > dgs[i - 1])
                std::cerr << "note: non-monotone DG error decay for p=" << op.p << ",q=" << op.q
                          << "\n";
        slopes << op.p << "," << op.q;
        slopes << "," << (hs.size() > 1 ? log_log_slope(hs, dgs) : 0.0);
        slopes << "," << (hs.size() > 1 ? log_log_slope(hs, l2s) : 0.0);
        slopes << "," << (hs.size() > 1 ? log_log_slope(hs, h1s) : 0.0);
        slopes << "," << (conda.size() > 1 ? log_log_slope(hs, conda) : 0.0);
        slopes << "," << (condm_max > 0.0 ? condm_max / condm_min : 0.0) << "\n";
    }
    write_norm_csv(base.output.dir + "/convergence.csv", rows);
    std::cout << "wrote " << base.output.dir << "/convergence.csv and slopes.csv\n";
    return 0;
}

CartesianMesh mesh_from_spec(const std::string& text) {
    nlohmann::json j;
    if (!text.empty() && text[0] == '@') {
        std::ifstream f(text.substr(1));
        if (!f) config_error("cannot open mesh spec file `" + text.substr(1) + "`");
        f >> j;
    } else {
        j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) config_error("cannot parse inline mesh spec");
    }
    Vec2 origin{0.0, 0.0}, lengths{1.0, 1.0};
    int nx = 8, ny = 8;
    bool simplexify = false;
    if (j.contains("origin")) origin = {j["origin"][0], j["origin"][1]};
    if (j.contains("lengths")) lengths = {j["lengths"][0], j["lengths"][1]};
    if (j.contains("counts")) {
        nx = j["counts"][0];
        ny = j["counts"][1];
    }
    if (j.contains("simplexify")) simplexify = j["simplexify"].get<bool>();
    CartesianMesh m = CartesianMesh::build(origin, lengths, nx, ny);
    return simplexify ? m.simplexified() : m;
}

int cmd_geom(const std::string& sub, const std::string& boundary_path,
             const std::string& mesh_spec, const std::string& out_dir, double shift_x,
             double shift_y) {
    const std::string dir = resolve_out_dir(out_dir, "out");
    ensure_directory(dir);
    const OrientedBoundary boundary = read_boundary_file(boundary_path);
    boundary.validate();
    auto mesh = std::make_shared<CartesianMesh>(mesh_from_spec(mesh_spec));

    if (sub == "classify") {
        const std::vector<CellClass> cls = classify_cells(*mesh, boundary);
        int nin = 0, ncut = 0, nout = 0;
        for (CellClass c : cls) {
            if (c == CellClass::Interior) ++nin;
            else if (c == CellClass::Cut) ++ncut;
            else ++nout;
        }
        write_vtk_mesh(dir + "/classification.vtk", *mesh, &cls);
        write_vtk_boundary(dir + "/boundary.vtk", boundary);
        std::cout << "interior " << nin << " cut " << ncut << " exterior " << nout << " total "
                  << mesh->num_cells() << "\n";
        return 0;
    }
    if (sub == "clip") {
        const ActiveMesh am = make_active_mesh(mesh, classify_cells(*mesh, boundary));
        const auto cutgeo = build_cut_geometry(am, boundary);
        std::vector<ConvexPolygon> pieces;
        std::vector<double> measures;
        std::ofstream csv(dir + "/clip_measures.csv");
        csv << "cell,measure,pieces\n";
        double total = 0.0;
        for (const CutCellGeometry& g : cutgeo) {
            csv << g.cell << "," << std::setprecision(16) << g.measure << "," << g.inside.size()
                << "\n";
            total += g.measure;
            for (const ConvexPolygon& piece : g.inside) {
                pieces.push_back(piece);
                measures.push_back(signed_area(piece));
            }
        }
        write_vtk_polygons(dir + "/clipped_pieces.vtk", pieces, &measures, "area");
        std::cout << "domain area " << std::setprecision(16) << total << " in " << cutgeo.size()
                  << " active cells\n";
        return 0;
    }
    if (sub == "intersect") {
        const ActiveMesh am = make_active_mesh(mesh, classify_cells(*mesh, boundary));
        std::vector<IndexedCell> current;
        for (int c : am.active) current.push_back({c, mesh->cell_polygon(c)});
        // previous mesh: ghost-padded copy (one extra ring) translated by the shift,
        // so small shifts keep the domain covered
        const double hx = mesh->lengths().x / mesh->nx();
        const double hy = mesh->lengths().y / mesh->ny();
        CartesianMesh padded = CartesianMesh::build(
            mesh->origin() - Vec2{hx, hy}, mesh->lengths() + Vec2{2 * hx, 2 * hy},
            mesh->nx() + 2, mesh->ny() + 2);
        std::vector<IndexedCell> previous;
        const Vec2 shift{shift_x, shift_y};
        for (int c = 0; c < padded.num_cells(); ++c) {
            ConvexPolygon poly = padded.cell_polygon(c);
            ConvexPolygon tri0{poly[0], poly[1], poly[2]};
            ConvexPolygon tri1{poly[0], poly[2], poly[3]};
            for (ConvexPolygon* t : {&tri0, &tri1}) {
                for (Vec2& v : *t) v += shift;
                previous.push_back({int(previous.size()), *t});
            }
        }
        const IntersectionMesh im = intersect_triple(current, previous, boundary);
        std::ofstream csv(dir + "/intersection_measures.csv");
        csv << "parent_current,parent_previous,pieces,measure\n";
        std::vector<ConvexPolygon> pieces;
        std::vector<double> measures;
        for (const PolyCell& pc : im.cells) {
            csv << pc.parent_current << "," << pc.parent_previous << "," << pc.pieces.size() << ","
                << std::setprecision(16) << pc.measure << "\n";
            for (const ConvexPolygon& piece : pc.pieces) {
                pieces.push_back(piece);
                measures.push_back(signed_area(piece));
            }
        }
        write_vtk_polygons(dir + "/intersection_cells.vtk", pieces, &measures, "area");
        std::cout << "intersection cells " << im.cells.size() << " total area "
                  << std::setprecision(16) << im.total_measure << "\n";
        return 0;
    }
    config_error("unknown geom subcommand `" + sub + "`");
}

int cmd_demo(const std::string& config_path, const std::string& out_dir) {
    RunConfig cfg = load_config_file(config_path);
    cfg.output.dir = resolve_out_dir(out_dir, cfg.output.dir);
    cfg.output.vtk = true;
    RunObjects run = build_run(cfg);
    MarchResult res = march(run.setup);
    write_run_outputs(cfg.output.dir, cfg, run, res);
    std::cout << "slab   t_end   active  cut  skipped\n";
    for (const SlabRecord& rec : res.slabs) {
        std::cout << std::setw(4) << rec.index + 1 << "  " << std::setw(7) << rec.t1 << "  "
                  << std::setw(6) << rec.n_active << " " << std::setw(4) << rec.n_cut << "  "
                  << (rec.skipped_transfer ? "yes" : "no") << "\n";
    }
    if (cfg.problem_kind == ProblemKind::Constant && res.has_norms) {
        std::cout << "constant drift (DG error) " << std::setprecision(6)
                  << res.norms.dg_error() << "\n";
    }
    std::cout << "transfer skips " << res.transfer_skips << ", outputs in " << cfg.output.dir
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"space-time unfitted FEM on moving boundary representations"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::string levels = "8,16,32", orders = "p=1,q=1";
    std::string geom_sub, boundary_path, mesh_spec;
    double shift_x = 0.0, shift_y = 0.0;

    CLI::App* run = app.add_subcommand("run", "single run from a JSON config");
    run->add_option("--config", config_path, "config path")->required();
    run->add_option("--out", out_dir, "output directory (overrides config and STFEM_OUT_DIR)");

    CLI::App* conv = app.add_subcommand("convergence", "mesh/time refinement study");
    conv->add_option("--config", config_path, "config path")->required();
    conv->add_option("--levels", levels, "comma-separated n per direction (default 8,16,32)");
    conv->add_option("--orders", orders, "semicolon-separated p=..,q=.. pairs");
    conv->add_option("--out", out_dir, "output directory");

    CLI::App* geom = app.add_subcommand("geom", "geometry debug dumps");
    geom->add_option("sub", geom_sub, "classify | clip | intersect")->required();
    geom->add_option("--boundary", boundary_path, "boundary file")->required();
    geom->add_option("--mesh", mesh_spec, "inline mesh JSON or @file")->required();
    geom->add_option("--shift-x", shift_x, "previous-mesh x shift (intersect)");
    geom->add_option("--shift-y", shift_y, "previous-mesh y shift (intersect)");
    geom->add_option("--out", out_dir, "output directory");

    CLI::App* demo = app.add_subcommand("demo", "moving-domain scalar transport demo");
    demo->add_option("--config", config_path, "config path")->required();
    demo->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (conv->parsed()) return cmd_convergence(config_path, out_dir, levels, orders);
        if (geom->parsed())
            return cmd_geom(geom_sub, boundary_path, mesh_spec, out_dir, shift_x, shift_y);
        if (demo->parsed()) return cmd_demo(config_path, out_dir);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const stfem::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
