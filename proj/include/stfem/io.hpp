#pragma once

#include "stfem/boundary.hpp"
#include "stfem/cut.hpp"
#include "stfem/deformation.hpp"
#include "stfem/fe.hpp"
#include "stfem/mesh.hpp"

#include <Eigen/SparseCore>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stfem {

/// Legacy ASCII VTK unstructured grid of the background mesh, with the
/// classification as cell data when given.
void write_vtk_mesh(const std::string& path, const CartesianMesh& mesh,
                    const std::vector<CellClass>* classification = nullptr);

/// Legacy ASCII VTK polydata of convex polygons with an optional scalar per polygon.
void write_vtk_polygons(const std::string& path, const std::vector<ConvexPolygon>& polys,
                        const std::vector<double>* scalars = nullptr,
                        const std::string& scalar_name = "value");

/// Boundary polyline as VTK polydata lines.
void write_vtk_boundary(const std::string& path, const OrientedBoundary& boundary);

/// Solution snapshot: active cells as deformed polygons at time t with the
/// discrete solution sampled at cell corners (point data).
void write_vtk_solution(const std::string& path, const SpaceTimeSpace& space,
                        const std::vector<double>& coeffs, const DeformationField& field,
                        double t);

void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& m);
void write_matrix_market(const std::string& path, const Eigen::VectorXd& v);

/// One convergence-report row; fixed column order
/// n_cells,h,tau,p,q,dg_err,l2_err,h1_err,cond_M,cond_A.
struct NormRow {
    int n_cells = 0;
    double h = 0.0;
    double tau = 0.0;
    int p = 1;
    int q = 1;
    double dg_err = 0.0;
    double l2_err = 0.0;
    double h1_err = 0.0;
    double cond_m = 0.0;
    double cond_a = 0.0;
};

void write_norm_csv(const std::string& path, const std::vector<NormRow>& rows);
std::string norm_csv_header();
std::string norm_csv_line(const NormRow& row);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

void ensure_directory(const std::string& path);

} // namespace stfem
