#include "stfem/io.hpp"
#include "stfem/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace stfem {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) config_error("cannot open output file `" + path + "`");
    f << std::setprecision(17);
    return f;
}

} // namespace

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) config_error("cannot create output directory `" + path + "`: " + ec.message());
}

void write_vtk_mesh(const std::string& path, const CartesianMesh& mesh,
                    const std::vector<CellClass>* classification) {
    std::ofstream f = open_out(path);
    const auto& xc = mesh.xcoords();
    const auto& yc = mesh.ycoords();
    f << "# vtk DataFile Version 3.0\nbackground mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    f << "POINTS " << xc.size() * yc.size() << " double\n";
    for (double y : yc)
        for (double x : xc) f << x << " " << y << " 0\n";
    const int nc = mesh.num_cells();
    const int per = mesh.is_simplex() ? 3 : 4;
    f << "CELLS " << nc << " " << nc * (per + 1) << "\n";
    auto vid = [&](int i, int j) { return j * int(xc.size()) + i; };
    for (int c = 0; c < nc; ++c) {
        int i, j, tri;
        mesh.cell_location(c, i, j, tri);
        if (tri < 0)
            f << "4 " << vid(i, j) << " " << vid(i + 1, j) << " " << vid(i + 1, j + 1) << " "
              << vid(i, j + 1) << "\n";
        else if (tri == 0)
            f << "3 " << vid(i, j) << " " << vid(i + 1, j) << " " << vid(i + 1, j + 1) << "\n";
        else
            f << "3 " << vid(i, j) << " " << vid(i + 1, j + 1) << " " << vid(i, j + 1) << "\n";
    }
    f << "CELL_TYPES " << nc << "\n";
    for (int c = 0; c < nc; ++c) f << (per == 4 ? 9 : 5) << "\n";
    if (classification) {
        f << "CELL_DATA " << nc << "\nSCALARS classification int 1\nLOOKUP_TABLE default\n";
        for (int c = 0; c < nc; ++c) {
            const CellClass cl = (*classification)[std::size_t(c)];
            f << (cl == CellClass::Interior ? 1 : cl == CellClass::Cut ? 0 : -1) << "\n";
        }
    }
}

void write_vtk_polygons(const std::string& path, const std::vector<ConvexPolygon>& polys,
                        const std::vector<double>* scalars, const std::string& scalar_name) {
    std::ofstream f = open_out(path);
    std::size_t npts = 0, sz = 0;
    for (const auto& p : polys) {
        npts += p.size();
        sz += p.size() + 1;
    }
    f << "# vtk DataFile Version 3.0\nclipped polygons\nASCII\nDATASET POLYDATA\n";
    f << "POINTS " << npts << " double\n";
    for (const auto& p : polys)
        for (const Vec2& v : p) f << v.x << " " << v.y << " 0\n";
    f << "POLYGONS " << polys.size() << " " << sz << "\n";
    std::size_t base = 0;
    for (const auto& p : polys) {
        f << p.size();
        for (std::size_t k = 0; k < p.size(); ++k) f << " " << base + k;
        f << "\n";
        base += p.size();
    }
    if (scalars) {
        f << "CELL_DATA " << polys.size() << "\nSCALARS " << scalar_name
          << " double 1\nLOOKUP_TABLE default\n";
        for (double s : *scalars) f << s << "\n";
    }
}

void write_vtk_boundary(const std::string& path, const OrientedBoundary& boundary) {
    std::ofstream f = open_out(path);
    f << "# vtk DataFile Version 3.0\noriented boundary\nASCII\nDATASET POLYDATA\n";
    f << "POINTS " << boundary.num_vertices() << " double\n";
    for (const Vec2& v : boundary.vertices()) f << v.x << " " << v.y << " 0\n";
    f << "LINES " << boundary.num_edges() << " " << boundary.num_edges() * 3 << "\n";
    for (const auto& e : boundary.edges()) f << "2 " << e[0] << " " << e[1] << "\n";
}

void write_vtk_solution(const std::string& path, const SpaceTimeSpace& space,
                        const std::vector<double>& coeffs, const DeformationField& field,
                        double t) {
    std::ofstream f = open_out(path);
    const CartesianMesh& mesh = *space.active().mesh;
    const std::vector<int>& cells = space.active().active;
    std::size_t npts = 0;
    for (int c : cells) npts += mesh.cell_polygon(c).size();
    f << "# vtk DataFile Version 3.0\nsolution snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    f << "POINTS " << npts << " double\n";
    std::vector<double> values;
    for (int c : cells) {
        for (const Vec2& v : mesh.cell_polygon(c)) {
            const Vec2 x = field.map(c, v, t);
            f << x.x << " " << x.y << " 0\n";
            values.push_back(space.value(coeffs, c, v, t));
        }
    }
    std::size_t sz = 0;
    for (int c : cells) sz += mesh.cell_polygon(c).size() + 1;
    f << "CELLS " << cells.size() << " " << sz << "\n";
    std::size_t base = 0;
    for (int c : cells) {
        const std::size_t n = mesh.cell_polygon(c).size();
        f << n;
        for (std::size_t k = 0; k < n; ++k) f << " " << base + k;
        f << "\n";
        base += n;
    }
    f << "CELL_TYPES " << cells.size() << "\n";
    for (int c : cells) f << (mesh.cell_polygon(c).size() == 4 ? 9 : 5) << "\n";
    f << "POINT_DATA " << npts << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (double v : values) f << v << "\n";
}

void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& m) {
    std::ofstream f = open_out(path);
    f << "%%MatrixMarket matrix coordinate real general\n";
    f << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            f << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

void write_matrix_market(const std::string& path, const Eigen::VectorXd& v) {
    std::ofstream f = open_out(path);
    f << "%%MatrixMarket matrix array real general\n";
    f << v.size() << " 1\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) f << v[i] << "\n";
}

std::string norm_csv_header() { return "n_cells,h,tau,p,q,dg_err,l2_err,h1_err,cond_M,cond_A"; }

std::string norm_csv_line(const NormRow& r) {
    std::ostringstream os;
    os << std::setprecision(16);
    os << r.n_cells << "," << r.h << "," << r.tau << "," << r.p << "," << r.q << "," << r.dg_err
       << "," << r.l2_err << "," << r.h1_err << "," << r.cond_m << "," << r.cond_a;
    return os.str();
}

void write_norm_csv(const std::string& path, const std::vector<NormRow>& rows) {
    std::ofstream f = open_out(path);
    f << norm_csv_header() << "\n";
    for (const NormRow& r : rows) f << norm_csv_line(r) << "\n";
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) config_error("slope needs at least two points");
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::max(y[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

} // namespace stfem
