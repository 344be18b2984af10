#pragma once

#include "stfem/assembly.hpp"
#include "stfem/cut.hpp"
#include "stfem/deformation.hpp"
#include "stfem/norms.hpp"
#include "stfem/quadrature.hpp"
#include "stfem/transfer.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace stfem {

struct DeformationSetup {
    enum class Mode { Prescribed, Elastic } mode = Mode::Prescribed;
    bool blend = true;          // taper the prescribed rigid map to zero at the box
    double blend_inner = 0.3;
    double blend_outer = 0.7;
    ElasticExtensionProblem elastic;
};

enum class CondSlabs { None, First, All };

struct MarchSetup {
    std::shared_ptr<const CartesianMesh> mesh;
    TimePartition time = TimePartition::uniform(1.0, 1);
    OrientedBoundary boundary;  // reference configuration B(0)
    BoundaryMotion motion;
    ModelProblem problem;
    int p = 1;
    int q = 1;
    std::array<SideBC, 4> side_bc{SideBC::Dirichlet, SideBC::Dirichlet, SideBC::Dirichlet,
                                  SideBC::Dirichlet};
    DeformationSetup deformation;
    double transfer_skip_threshold = 0.0;  // 0 disables the optimization
    double c_mu = 1.0;
    const ExactSolution* exact = nullptr;  // norms accumulate when set
    CondSlabs cond = CondSlabs::None;
    ExecMode mode = ExecMode::Serial;
};

struct SlabRecord {
    int index = 0;
    double t0 = 0.0, t1 = 0.0;
    std::shared_ptr<const SpaceTimeSpace> space;
    std::vector<double> coeffs;
    DeformationField field;
    int n_interior = 0, n_cut = 0, n_active = 0, n_extended = 0;
    int reduced_dofs = 0;
    double domain_area = 0.0;
    bool skipped_transfer = false;
    std::optional<ConditionNumbers> cond;
};

struct MarchResult {
    std::vector<SlabRecord> slabs;
    NormReport norms;
    bool has_norms = false;
    int transfer_skips = 0;
};

/// Slab marching: classify, aggregate, extend the map, assemble the
/// pulled-back forms, couple to the previous slab through the intersection
/// mesh (or directly when the transfer-skip optimization engages), solve,
/// and extend the active mesh for the next slab. Errors carry the slab
/// index and stage name.
MarchResult march(const MarchSetup& setup);

} // namespace stfem
