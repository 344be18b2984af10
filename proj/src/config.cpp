#include "stfem/config.hpp"
#include "stfem/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace stfem {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    if (!j.is_object()) config_error(ctx + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            config_error(ctx + ": unknown key `" + it.key() + "`");
}

Vec2 parse_vec2(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 2) config_error(ctx + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::pair<Vec2, Vec2> parse_rect(const json& j, const std::string& ctx) {
    check_keys(j, {"lo", "hi"}, ctx);
    if (!j.contains("lo") || !j.contains("hi")) config_error(ctx + ": needs `lo` and `hi`");
    return {parse_vec2(j["lo"], ctx + ".lo"), parse_vec2(j["hi"], ctx + ".hi")};
}

int side_index(const std::string& name) {
    if (name == "xmin") return 0;
    if (name == "xmax") return 1;
    if (name == "ymin") return 2;
    if (name == "ymax") return 3;
    config_error("unknown side name `" + name + "` (use xmin/xmax/ymin/ymax)");
}

} // namespace

RunConfig parse_config(const json& j) {
    RunConfig c;
    check_keys(j, {"mesh", "time", "boundary", "motion", "problem", "discretization", "output"},
               "config");

    if (j.contains("mesh")) {
        const json& m = j["mesh"];
        check_keys(m, {"origin", "lengths", "counts", "simplexify", "grading"}, "mesh");
        if (m.contains("origin")) c.origin = parse_vec2(m["origin"], "mesh.origin");
        if (m.contains("lengths")) c.lengths = parse_vec2(m["lengths"], "mesh.lengths");
        if (m.contains("counts")) {
            const Vec2 n = parse_vec2(m["counts"], "mesh.counts");
            c.nx = int(n.x);
            c.ny = int(n.y);
        }
        if (m.contains("simplexify")) c.simplexify = m["simplexify"].get<bool>();
        if (m.contains("grading")) {
            const json& g = m["grading"];
            check_keys(g, {"x0", "alpha"}, "mesh.grading");
            const Vec2 x0 = g.contains("x0") ? parse_vec2(g["x0"], "grading.x0") : Vec2{0.5, 0.5};
            const Vec2 al =
                g.contains("alpha") ? parse_vec2(g["alpha"], "grading.alpha") : Vec2{1.0, 1.0};
            c.grading[0] = {x0.x, al.x, true};
            c.grading[1] = {x0.y, al.y, true};
        }
    }

    if (j.contains("time")) {
        const json& t = j["time"];
        check_keys(t, {"t_end", "slabs"}, "time");
        if (t.contains("t_end")) c.t_end = t["t_end"].get<double>();
        if (t.contains("slabs")) c.slabs = t["slabs"].get<int>();
        if (c.slabs < 1) config_error("time.slabs must be >= 1");
        if (c.t_end <= 0.0) config_error("time.t_end must be positive");
    }

    if (j.contains("boundary")) {
        const json& b = j["boundary"];
        check_keys(b, {"file", "hole", "box"}, "boundary");
        if (b.contains("file")) c.boundary_file = b["file"].get<std::string>();
        if (b.contains("hole")) c.hole = parse_rect(b["hole"], "boundary.hole");
        if (b.contains("box")) c.box = parse_rect(b["box"], "boundary.box");
        if (c.boundary_file.empty() && !c.hole && !c.box)
            config_error("boundary: give `file`, `hole` or `box`");
    } else {
        config_error("config: missing `boundary`");
    }

    if (j.contains("motion")) {
        const json& m = j["motion"];
        check_keys(m, {"kind", "velocity", "center", "omega", "amplitude", "omega_osc", "ramp"},
                   "motion");
        const std::string kind = m.value("kind", std::string("none"));
        if (kind == "none") c.motion.kind = MotionKind::None;
        else if (kind == "translation") c.motion.kind = MotionKind::Translation;
        else if (kind == "rotation") c.motion.kind = MotionKind::RigidRotationOscillation;
        else config_error("motion.kind must be none/translation/rotation");
        if (m.contains("velocity")) c.motion.velocity = parse_vec2(m["velocity"], "motion.velocity");
        if (m.contains("center")) c.motion.center = parse_vec2(m["center"], "motion.center");
        if (m.contains("omega")) c.motion.omega = m["omega"].get<double>();
        if (m.contains("amplitude"))
            c.motion.amplitude = parse_vec2(m["amplitude"], "motion.amplitude");
        if (m.contains("omega_osc")) c.motion.omega_osc = m["omega_osc"].get<double>();
        if (m.contains("ramp")) {
            const json& r = m["ramp"];
            check_keys(r, {"gamma", "t_a"}, "motion.ramp");
            c.motion.ramp_enabled = true;
            if (r.contains("gamma")) c.motion.ramp_gamma = r["gamma"].get<double>();
            if (r.contains("t_a")) c.motion.ramp_ta = r["t_a"].get<double>();
        }
    }

    if (j.contains("problem")) {
        const json& p = j["problem"];
        check_keys(p,
                   {"kind", "mu", "advection", "manufactured", "constant_value", "hot_radius",
                    "dirichlet_sides", "neumann_sides"},
                   "problem");
        const std::string kind = p.value("kind", std::string("manufactured"));
        if (kind == "manufactured") c.problem_kind = ProblemKind::Manufactured;
        else if (kind == "constant") c.problem_kind = ProblemKind::Constant;
        else if (kind == "hole_hot") c.problem_kind = ProblemKind::HoleHot;
        else config_error("problem.kind must be manufactured/constant/hole_hot");
        if (p.contains("mu")) c.mu = p["mu"].get<double>();
        if (p.contains("advection")) c.advection = parse_vec2(p["advection"], "problem.advection");
        if (p.contains("manufactured")) {
            const json& mfg = p["manufactured"];
            check_keys(mfg, {"alpha"}, "problem.manufactured");
            if (mfg.contains("alpha")) c.manufactured_alpha = mfg["alpha"].get<double>();
        }
        if (p.contains("constant_value")) c.constant_value = p["constant_value"].get<double>();
        if (p.contains("hot_radius")) c.hot_radius = p["hot_radius"].get<double>();
        if (p.contains("dirichlet_sides") || p.contains("neumann_sides")) {
            c.side_bc = {SideBC::Neumann, SideBC::Neumann, SideBC::Neumann, SideBC::Neumann};
            if (p.contains("dirichlet_sides"))
                for (const auto& s : p["dirichlet_sides"])
                    c.side_bc[std::size_t(side_index(s.get<std::string>()))] = SideBC::Dirichlet;
            if (p.contains("neumann_sides"))
                for (const auto& s : p["neumann_sides"])
                    c.side_bc[std::size_t(side_index(s.get<std::string>()))] = SideBC::Neumann;
        }
    }

    if (j.contains("discretization")) {
        const json& d = j["discretization"];
        check_keys(d,
                   {"p", "q", "nitsche_c0", "elastic_c0", "c_mu", "deformation", "blend",
                    "transfer_skip_threshold", "condition_numbers", "threads"},
                   "discretization");
        if (d.contains("p")) c.p = d["p"].get<int>();
        if (d.contains("q")) c.q = d["q"].get<int>();
        if (d.contains("nitsche_c0")) c.nitsche_c0 = d["nitsche_c0"].get<double>();
        if (d.contains("elastic_c0"))
            c.deformation.elastic.nitsche_c0 = d["elastic_c0"].get<double>();
        if (d.contains("c_mu")) c.c_mu = d["c_mu"].get<double>();
        if (d.contains("deformation")) {
            const std::string mode = d["deformation"].get<std::string>();
            if (mode == "prescribed") c.deformation.mode = DeformationSetup::Mode::Prescribed;
            else if (mode == "elastic") c.deformation.mode = DeformationSetup::Mode::Elastic;
            else config_error("discretization.deformation must be prescribed/elastic");
        }
        if (d.contains("blend")) {
            const json& b = d["blend"];
            if (b.is_boolean()) c.deformation.blend = b.get<bool>();
            else {
                check_keys(b, {"inner", "outer"}, "discretization.blend");
                c.deformation.blend = true;
                if (b.contains("inner")) c.deformation.blend_inner = b["inner"].get<double>();
                if (b.contains("outer")) c.deformation.blend_outer = b["outer"].get<double>();
            }
        }
        if (d.contains("transfer_skip_threshold"))
            c.transfer_skip_threshold = d["transfer_skip_threshold"].get<double>();
        if (d.contains("condition_numbers")) {
            const std::string m = d["condition_numbers"].get<std::string>();
            if (m == "none") c.cond = CondSlabs::None;
            else if (m == "first") c.cond = CondSlabs::First;
            else if (m == "all") c.cond = CondSlabs::All;
            else config_error("discretization.condition_numbers must be none/first/all");
        }
        if (d.contains("threads")) {
            const std::string m = d["threads"].get<std::string>();
            if (m == "serial") c.mode = ExecMode::Serial;
            else if (m == "openmp") c.mode = ExecMode::OpenMP;
            else config_error("discretization.threads must be serial/openmp");
        }
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, {"dir", "vtk", "matrices"}, "output");
        if (o.contains("dir")) c.output.dir = o["dir"].get<std::string>();
        if (o.contains("vtk")) c.output.vtk = o["vtk"].get<bool>();
        if (o.contains("matrices")) c.output.matrices = o["matrices"].get<bool>();
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) config_error("cannot open config file `" + path + "`");
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        config_error("config `" + path + "`: " + e.what());
    }
    return parse_config(j);
}

nlohmann::json resolved_json(const RunConfig& c) {
    json j;
    j["mesh"] = {{"origin", {c.origin.x, c.origin.y}},
                 {"lengths", {c.lengths.x, c.lengths.y}},
                 {"counts", {c.nx, c.ny}},
                 {"simplexify", c.simplexify}};
    if (c.grading[0].enabled || c.grading[1].enabled)
        j["mesh"]["grading"] = {{"x0", {c.grading[0].x0, c.grading[1].x0}},
                                {"alpha", {c.grading[0].alpha, c.grading[1].alpha}}};
    j["time"] = {{"t_end", c.t_end}, {"slabs", c.slabs}};
    if (!c.boundary_file.empty()) j["boundary"]["file"] = c.boundary_file;
    if (c.hole)
        j["boundary"]["hole"] = {{"lo", {c.hole->first.x, c.hole->first.y}},
                                 {"hi", {c.hole->second.x, c.hole->second.y}}};
    if (c.box)
        j["boundary"]["box"] = {{"lo", {c.box->first.x, c.box->first.y}},
                                {"hi", {c.box->second.x, c.box->second.y}}};
    const char* kinds[] = {"none", "translation", "rotation", "custom"};
    j["motion"] = {{"kind", kinds[int(c.motion.kind)]}};
    if (c.motion.kind == MotionKind::Translation)
        j["motion"]["velocity"] = {c.motion.velocity.x, c.motion.velocity.y};
    if (c.motion.kind == MotionKind::RigidRotationOscillation) {
        j["motion"]["center"] = {c.motion.center.x, c.motion.center.y};
        j["motion"]["omega"] = c.motion.omega;
        j["motion"]["amplitude"] = {c.motion.amplitude.x, c.motion.amplitude.y};
        j["motion"]["omega_osc"] = c.motion.omega_osc;
    }
    if (c.motion.ramp_enabled)
        j["motion"]["ramp"] = {{"gamma", c.motion.ramp_gamma}, {"t_a", c.motion.ramp_ta}};
    const char* pk = c.problem_kind == ProblemKind::Manufactured ? "manufactured"
                     : c.problem_kind == ProblemKind::Constant   ? "constant"
                                                                 : "hole_hot";
    j["problem"] = {{"kind", pk}, {"mu", c.mu}, {"advection", {c.advection.x, c.advection.y}}};
    if (c.problem_kind == ProblemKind::Manufactured)
        j["problem"]["manufactured"] = {{"alpha", c.manufactured_alpha}};
    if (c.problem_kind == ProblemKind::Constant) j["problem"]["constant_value"] = c.constant_value;
    if (c.problem_kind == ProblemKind::HoleHot) j["problem"]["hot_radius"] = c.hot_radius;
    {
        json ds = json::array(), ns = json::array();
        const char* names[] = {"xmin", "xmax", "ymin", "ymax"};
        for (int s = 0; s < 4; ++s) {
            if (c.side_bc[std::size_t(s)] == SideBC::Dirichlet) ds.push_back(names[s]);
            if (c.side_bc[std::size_t(s)] == SideBC::Neumann) ns.push_back(names[s]);
        }
        j["problem"]["dirichlet_sides"] = ds;
        j["problem"]["neumann_sides"] = ns;
    }
    j["discretization"] = {
        {"p", c.p},
        {"q", c.q},
        {"nitsche_c0", c.nitsche_c0},
        {"elastic_c0", c.deformation.elastic.nitsche_c0},
        {"c_mu", c.c_mu},
        {"deformation",
         c.deformation.mode == DeformationSetup::Mode::Prescribed ? "prescribed" : "elastic"},
        {"transfer_skip_threshold", c.transfer_skip_threshold},
        {"condition_numbers",
         c.cond == CondSlabs::None ? "none" : (c.cond == CondSlabs::First ? "first" : "all")},
        {"threads", c.mode == ExecMode::Serial ? "serial" : "openmp"}};
    if (c.deformation.blend)
        j["discretization"]["blend"] = {{"inner", c.deformation.blend_inner},
                                        {"outer", c.deformation.blend_outer}};
    else
        j["discretization"]["blend"] = false;
    j["output"] = {{"dir", c.output.dir}, {"vtk", c.output.vtk}, {"matrices", c.output.matrices}};
    return j;
}

RunObjects build_run(const RunConfig& c) {
    RunObjects run;
    CartesianMesh mesh = CartesianMesh::build(c.origin, c.lengths, c.nx, c.ny, c.grading);
    if (c.simplexify) mesh = mesh.simplexified();
    run.mesh = std::make_shared<CartesianMesh>(std::move(mesh));

    MarchSetup& s = run.setup;
    s.mesh = run.mesh;
    s.time = TimePartition::uniform(c.t_end, c.slabs);
    if (!c.boundary_file.empty()) {
        s.boundary = read_boundary_file(c.boundary_file);
    } else if (c.hole && c.box) {
        // outer box plus hole as one multi-loop boundary
        const OrientedBoundary bx = make_box_boundary(c.box->first, c.box->second);
        const OrientedBoundary hl = make_hole_boundary(c.hole->first, c.hole->second);
        std::vector<Vec2> v = bx.vertices();
        std::vector<std::array<int, 2>> e = bx.edges();
        const int off = bx.num_vertices();
        for (const Vec2& x : hl.vertices()) v.push_back(x);
        for (auto ed : hl.edges()) e.push_back({ed[0] + off, ed[1] + off});
        s.boundary = OrientedBoundary(std::move(v), std::move(e));
    } else if (c.hole) {
        s.boundary = make_hole_boundary(c.hole->first, c.hole->second);
    } else {
        s.boundary = make_box_boundary(c.box->first, c.box->second);
    }
    s.boundary.validate();
    s.motion = c.motion;
    s.p = c.p;
    s.q = c.q;
    s.side_bc = c.side_bc;
    s.deformation = c.deformation;
    s.transfer_skip_threshold = c.transfer_skip_threshold;
    s.c_mu = c.c_mu;
    s.cond = c.cond;
    s.mode = c.mode;

    switch (c.problem_kind) {
    case ProblemKind::Manufactured: {
        run.manufactured = std::make_unique<ManufacturedSolution>();
        run.manufactured->alpha = c.manufactured_alpha;
        run.manufactured->t_end = c.t_end;
        run.manufactured->mu = c.mu;
        run.manufactured->origin = c.origin;
        run.manufactured->lengths = c.lengths;
        run.manufactured->advection = c.advection;
        s.problem = run.manufactured->problem(c.nitsche_c0);
        run.exact = std::make_unique<ExactSolution>(run.manufactured->exact());
        s.exact = run.exact.get();
        break;
    }
    case ProblemKind::Constant: {
        const double value = c.constant_value;
        s.problem.mu = c.mu;
        s.problem.nitsche_c0 = c.nitsche_c0;
        if (norm2(c.advection) > 0.0) {
            const Vec2 w = c.advection;
            s.problem.advection = [w](const Vec2&, double) { return w; };
        }
        s.problem.dirichlet = [value](const Vec2&, double) { return value; };
        s.problem.initial = [value](const Vec2&) { return value; };
        run.exact = std::make_unique<ExactSolution>();
        run.exact->value = [value](const Vec2&, double) { return value; };
        run.exact->gradient = [](const Vec2&, double) { return Vec2{0.0, 0.0}; };
        run.exact->hessian = [](const Vec2&, double) {
            return std::array<double, 3>{0.0, 0.0, 0.0};
        };
        run.exact->time_derivative = [](const Vec2&, double) { return 0.0; };
        s.exact = run.exact.get();
        break;
    }
    case ProblemKind::HoleHot: {
        // hot moving object: a Gaussian bump riding on the hole center
        if (!c.hole) config_error("problem.kind hole_hot needs an inline boundary.hole");
        const Vec2 center0 = (c.hole->first + c.hole->second) * 0.5;
        const double r2 = c.hot_radius * c.hot_radius;
        const BoundaryMotion motion = c.motion;
        s.problem.mu = c.mu;
        s.problem.nitsche_c0 = c.nitsche_c0;
        s.problem.dirichlet = [center0, r2, motion](const Vec2& x, double t) {
            const Vec2 ct = motion.position(center0, t);
            return std::exp(-norm2(x - ct) / r2);
        };
        s.problem.initial = [](const Vec2&) { return 0.0; };
        s.exact = nullptr;
        break;
    }
    }
    return run;
}

} // namespace stfem
