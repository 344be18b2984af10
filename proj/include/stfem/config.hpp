#pragma once

#include "stfem/march.hpp"
#include "stfem/manufactured.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace stfem {

struct OutputConfig {
    std::string dir = "out";
    bool vtk = false;
    bool matrices = false;
};

enum class ProblemKind { Manufactured, Constant, HoleHot };

/// Parsed harness configuration; schema-validated (unknown keys rejected).
struct RunConfig {
    // mesh
    Vec2 origin{0.0, 0.0};
    Vec2 lengths{3.0, 3.0};
    int nx = 8, ny = 8;
    bool simplexify = false;
    std::array<Grading, 2> grading{};
    // time
    double t_end = 1.0;
    int slabs = 8;
    // boundary (file, or an inline axis-aligned loop)
    std::string boundary_file;
    std::optional<std::pair<Vec2, Vec2>> hole;
    std::optional<std::pair<Vec2, Vec2>> box;
    // motion
    BoundaryMotion motion;
    // problem
    ProblemKind problem_kind = ProblemKind::Manufactured;
    double mu = 1.0;
    Vec2 advection{0.0, 0.0};
    double manufactured_alpha = 0.5;
    double constant_value = 1.0;
    double hot_radius = 0.5;
    std::array<SideBC, 4> side_bc{SideBC::Dirichlet, SideBC::Dirichlet, SideBC::Dirichlet,
                                  SideBC::Dirichlet};
    // discretization
    int p = 1, q = 1;
    double nitsche_c0 = 10.0;
    double c_mu = 1.0;
    DeformationSetup deformation;
    double transfer_skip_threshold = 0.0;
    CondSlabs cond = CondSlabs::First;
    ExecMode mode = ExecMode::Serial;

    OutputConfig output;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);
nlohmann::json resolved_json(const RunConfig& config);

/// Everything march() needs, with owned callback storage.
struct RunObjects {
    std::shared_ptr<const CartesianMesh> mesh;
    MarchSetup setup;
    std::unique_ptr<ExactSolution> exact;  // kept alive for setup.exact
    std::unique_ptr<ManufacturedSolution> manufactured;
};

RunObjects build_run(const RunConfig& config);

} // namespace stfem
