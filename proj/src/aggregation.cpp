#include "stfem/aggregation.hpp"
#include "stfem/errors.hpp"

#include <algorithm>

namespace stfem {

const NodeConstraint* AggregationMap::find(int node) const {
    auto it = std::lower_bound(constraints.begin(), constraints.end(), node,
                               [](const NodeConstraint& c, int n) { return c.node < n; });
    if (it != constraints.end() && it->node == node) return &*it;
    return nullptr;
}

AggregationMap build_aggregates(const ActiveMesh& active, const SpatialSpace& space) {
    const CartesianMesh& mesh = *active.mesh;
    const int nc = mesh.num_cells();
    AggregationMap map;
    map.root.assign(std::size_t(nc), -1);
    map.distance.assign(std::size_t(nc), -1);

    bool any_interior = false;
    for (int c : active.extended) {
        if (active.cls[std::size_t(c)] == CellClass::Interior) {
            map.root[std::size_t(c)] = c;
            map.distance[std::size_t(c)] = 0;
            any_interior = true;
        }
    }
    if (!any_interior)
        geometry_error("aggregation failure: active mesh has no interior cell");

    // fixed-point relaxation of (distance, root id); deterministic
    std::vector<int> nbrs;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int c : active.extended) {
            if (map.distance[std::size_t(c)] == 0) continue;  // interior cells root themselves
            mesh.face_neighbors(c, nbrs);
            for (int nb : nbrs) {
                if (!active.is_extended(nb)) continue;
                if (map.distance[std::size_t(nb)] < 0) continue;
                const int cand_d = map.distance[std::size_t(nb)] + 1;
                const int cand_r = map.root[std::size_t(nb)];
                if (map.distance[std::size_t(c)] < 0 || cand_d < map.distance[std::size_t(c)] ||
                    (cand_d == map.distance[std::size_t(c)] && cand_r < map.root[std::size_t(c)])) {
                    map.root[std::size_t(c)] = cand_r;
                    map.distance[std::size_t(c)] = cand_d;
                    changed = true;
                }
            }
        }
    }
    for (int c : active.extended)
        if (map.root[std::size_t(c)] < 0)
            geometry_error("aggregation failure: cell " + std::to_string(c) +
                           " reaches no interior cell through the active mesh");

    // well-posed nodes: owned by at least one interior cell
    map.wellposed.assign(std::size_t(space.num_lattice_nodes()), 0);
    std::vector<int> cn;
    for (int c : active.extended) {
        if (active.cls[std::size_t(c)] != CellClass::Interior) continue;
        space.cell_nodes(c, cn);
        for (int n : cn) map.wellposed[std::size_t(n)] = 1;
    }

    // constrained nodes: active nodes not well-posed; owner = lowest-id
    // aggregated cell containing the node
    std::vector<int> owner(static_cast<std::size_t>(space.num_lattice_nodes()), -1);
    for (int c : active.extended) {
        if (active.cls[std::size_t(c)] == CellClass::Interior) continue;
        space.cell_nodes(c, cn);
        for (int n : cn) {
            if (map.wellposed[std::size_t(n)]) continue;
            if (owner[std::size_t(n)] < 0 || c < owner[std::size_t(n)]) owner[std::size_t(n)] = c;
        }
    }

    const int nloc = space.nodes_per_cell();
    std::vector<double> vals(static_cast<std::size_t>(nloc));
    std::vector<int> root_nodes;
    for (int n = 0; n < space.num_lattice_nodes(); ++n) {
        if (owner[std::size_t(n)] < 0) continue;
        const int root = map.root[std::size_t(owner[std::size_t(n)])];
        NodeConstraint con;
        con.node = n;
        space.eval(root, space.node_position(n), vals.data(), nullptr);
        space.cell_nodes(root, root_nodes);
        for (int i = 0; i < nloc; ++i) {
            if (!map.wellposed[std::size_t(root_nodes[std::size_t(i)])])
                geometry_error("aggregation failure: root cell carries a constrained node");
            con.masters.push_back({root_nodes[std::size_t(i)], vals[std::size_t(i)]});
        }
        map.constraints.push_back(std::move(con));
    }
    return map;
}

void extension_apply(const AggregationMap& map, const SpaceTimeSpace& space,
                     std::vector<double>& coeffs) {
    const int nt = space.nt();
    const int ncomp = space.ncomp();
    for (const NodeConstraint& con : map.constraints) {
        const int ai = space.active_index(con.node);
        if (ai < 0) continue;
        for (int comp = 0; comp < ncomp; ++comp) {
            for (int l = 0; l < nt; ++l) {
                double v = 0.0;
                for (const auto& [mn, w] : con.masters) {
                    const int mi = space.active_index(mn);
                    if (mi < 0) solver_error("constraint master outside the active space");
                    v += w * coeffs[std::size_t(space.dof(mi, comp, l))];
                }
                coeffs[std::size_t(space.dof(ai, comp, l))] = v;
            }
        }
    }
}

ReducedNumbering reduced_numbering(const AggregationMap& map, const SpaceTimeSpace& space) {
    ReducedNumbering rn;
    rn.of_active_node.assign(std::size_t(space.num_active_nodes()), -1);
    for (int a = 0; a < space.num_active_nodes(); ++a) {
        const int n = space.active_nodes()[std::size_t(a)];
        if (map.wellposed[std::size_t(n)]) rn.of_active_node[std::size_t(a)] = rn.num_nodes++;
    }
    return rn;
}

Eigen::SparseMatrix<double> constraint_prolongation(const AggregationMap& map,
                                                    const SpaceTimeSpace& space) {
    const int nt = space.nt();
    const int ncomp = space.ncomp();
    const ReducedNumbering rn = reduced_numbering(map, space);
    const std::vector<int>& reduced_of_active = rn.of_active_node;
    const int nred_nodes = rn.num_nodes;
    std::vector<Eigen::Triplet<double>> trips;
    for (int a = 0; a < space.num_active_nodes(); ++a) {
        const int n = space.active_nodes()[std::size_t(a)];
        if (map.wellposed[std::size_t(n)]) {
            const int r = reduced_of_active[std::size_t(a)];
            for (int comp = 0; comp < ncomp; ++comp)
                for (int l = 0; l < nt; ++l)
                    trips.emplace_back(space.dof(a, comp, l), (r * ncomp + comp) * nt + l, 1.0);
        } else {
            const NodeConstraint* con = map.find(n);
            if (!con) solver_error("active node " + std::to_string(n) +
                                   " is neither well-posed nor constrained");
            for (const auto& [mn, w] : con->masters) {
                const int ma = space.active_index(mn);
                const int mr = reduced_of_active[std::size_t(ma)];
                if (ma < 0 || mr < 0) solver_error("constraint master is not well-posed");
                for (int comp = 0; comp < ncomp; ++comp)
                    for (int l = 0; l < nt; ++l)
                        trips.emplace_back(space.dof(a, comp, l), (mr * ncomp + comp) * nt + l, w);
            }
        }
    }
    Eigen::SparseMatrix<double> C(space.num_dofs(), nred_nodes * ncomp * nt);
    C.setFromTriplets(trips.begin(), trips.end());
    return C;
}

ReducedSystem constrain_system(const Eigen::SparseMatrix<double>& matrix,
                               const Eigen::VectorXd& rhs, const AggregationMap& map,
                               const SpaceTimeSpace& space) {
    ReducedSystem red;
    red.prolongation = constraint_prolongation(map, space);
    red.matrix = red.prolongation.transpose() * matrix * red.prolongation;
    red.rhs = red.prolongation.transpose() * rhs;
    return red;
}

} // namespace stfem
