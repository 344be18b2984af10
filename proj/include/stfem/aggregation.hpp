#pragma once

#include "stfem/fe.hpp"
#include "stfem/mesh.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace stfem {

/// Master-DOF weights reproducing the root cell's polynomial at a
/// constrained node.
struct NodeConstraint {
    int node = -1;  // lattice node id
    std::vector<std::pair<int, double>> masters;  // (lattice node, coefficient)
};

/// Cut (and extended) cells aggregated onto face-connected interior roots;
/// DOFs not owned by any interior cell are slaved to their owner's root.
struct AggregationMap {
    std::vector<int> root;       // per mesh cell: interior root id, -1 outside the extended set
    std::vector<int> distance;   // BFS distance to the root, 0 for interior cells
    std::vector<char> wellposed; // per lattice node: owned by an interior cell
    std::vector<NodeConstraint> constraints;  // sorted by node id

    bool empty() const { return constraints.empty(); }
    const NodeConstraint* find(int node) const;
};

/// Nearest-interior-root assignment by multi-source BFS over face adjacency
/// within the extended cell set; equal distances break toward the lowest
/// root id. Throws when an aggregated cell reaches no interior cell.
AggregationMap build_aggregates(const ActiveMesh& active, const SpatialSpace& space);

/// Fill constrained DOFs of a space-time coefficient vector from the
/// well-posed ones (root-cell polynomial extension; temporal layers and
/// components are untouched by the spatial constraints). Idempotent.
void extension_apply(const AggregationMap& map, const SpaceTimeSpace& space,
                     std::vector<double>& coeffs);

/// Reduced numbering: well-posed nodes in active order.
struct ReducedNumbering {
    std::vector<int> of_active_node;  // reduced node index or -1 per active node
    int num_nodes = 0;

    int dof(const SpaceTimeSpace& space, int active_node, int comp, int tnode) const {
        const int r = of_active_node[std::size_t(active_node)];
        return (r * space.ncomp() + comp) * space.nt() + tnode;
    }
};

ReducedNumbering reduced_numbering(const AggregationMap& map, const SpaceTimeSpace& space);

/// Prolongation C from reduced (well-posed) to full space-time DOFs;
/// reduced DOFs keep the space's ordering restricted to well-posed nodes.
Eigen::SparseMatrix<double> constraint_prolongation(const AggregationMap& map,
                                                    const SpaceTimeSpace& space);

struct ReducedSystem {
    Eigen::SparseMatrix<double> matrix;  // C^T A C
    Eigen::VectorXd rhs;                 // C^T b
    Eigen::SparseMatrix<double> prolongation;
};

ReducedSystem constrain_system(const Eigen::SparseMatrix<double>& matrix,
                               const Eigen::VectorXd& rhs, const AggregationMap& map,
                               const SpaceTimeSpace& space);

} // namespace stfem
