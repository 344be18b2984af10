#include "stfem/fe.hpp"
#include "stfem/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace stfem {

void gauss_legendre(int n, std::vector<double>& points, std::vector<double>& weights) {
    if (n < 1) config_error("gauss rule needs at least one point");
    points.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    // Newton on P_n over [-1,1], then map to [0,1]
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) { p1 = x; }
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        points[std::size_t(n - 1 - i)] = 0.5 * (1.0 + x);
        weights[std::size_t(n - 1 - i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

std::vector<double> gauss_lobatto_nodes(int q) {
    switch (q) {
    case 1: return {0.0, 1.0};
    case 2: return {0.0, 0.5, 1.0};
    case 3: {
        const double s = std::sqrt(0.2);
        return {0.0, 0.5 * (1.0 - s), 0.5 * (1.0 + s), 1.0};
    }
    default: config_error("temporal order q must be in [0, 3]");
    }
}

ScalarBasis1D::ScalarBasis1D(int q) : q_(q) {
    if (q == 0) nodes_ = {0.5};
    else nodes_ = gauss_lobatto_nodes(q);
}

void ScalarBasis1D::values(double t, double* vals) const {
    const int n = count();
    for (int i = 0; i < n; ++i) {
        double v = 1.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            v *= (t - nodes_[std::size_t(j)]) / (nodes_[std::size_t(i)] - nodes_[std::size_t(j)]);
        }
        vals[i] = v;
    }
}

void ScalarBasis1D::derivatives(double t, double* ders) const {
    const int n = count();
    for (int i = 0; i < n; ++i) {
        double d = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            double term = 1.0 / (nodes_[std::size_t(i)] - nodes_[std::size_t(k)]);
            for (int j = 0; j < n; ++j) {
                if (j == i || j == k) continue;
                term *= (t - nodes_[std::size_t(j)]) /
                        (nodes_[std::size_t(i)] - nodes_[std::size_t(j)]);
            }
            d += term;
        }
        ders[i] = d;
    }
}

RefBasis::RefBasis(int p, bool tri) : p_(p) {
    if (p < 1 || p > 4) config_error("spatial order p must be in [1, 4]");
    if (tri) {
        for (int b = 0; b <= p; ++b)
            for (int a = 0; a + b <= p; ++a) {
                nodes_.push_back({double(a) / p, double(b) / p});
                monomials_.push_back({a, b});
            }
    } else {
        for (int b = 0; b <= p; ++b)
            for (int a = 0; a <= p; ++a) {
                nodes_.push_back({double(a) / p, double(b) / p});
                monomials_.push_back({a, b});
            }
    }
    const int n = count();
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < n; ++m)
            V(i, m) = std::pow(nodes_[std::size_t(i)].x, monomials_[std::size_t(m)][0]) *
                      std::pow(nodes_[std::size_t(i)].y, monomials_[std::size_t(m)][1]);
    Eigen::MatrixXd C = V.fullPivLu().inverse();
    coeff_.resize(std::size_t(n) * std::size_t(n));
    for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i) coeff_[std::size_t(m * n + i)] = C(m, i);
}

const RefBasis& RefBasis::rect(int p) {
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<RefBasis>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[p];
    if (!slot) slot.reset(new RefBasis(p, false));
    return *slot;
}

const RefBasis& RefBasis::tri(int p) {
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<RefBasis>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& slot = cache[p];
    if (!slot) slot.reset(new RefBasis(p, true));
    return *slot;
}

namespace {

inline double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

} // namespace

void RefBasis::values(const Vec2& xi, double* vals) const {
    const int n = count();
    std::fill(vals, vals + n, 0.0);
    for (int m = 0; m < n; ++m) {
        const double mono = ipow(xi.x, monomials_[std::size_t(m)][0]) *
                            ipow(xi.y, monomials_[std::size_t(m)][1]);
        for (int i = 0; i < n; ++i) vals[i] += coeff_[std::size_t(m * n + i)] * mono;
    }
}

void RefBasis::gradients(const Vec2& xi, Vec2* grads) const {
    const int n = count();
    std::fill(grads, grads + n, Vec2{0.0, 0.0});
    for (int m = 0; m < n; ++m) {
        const int a = monomials_[std::size_t(m)][0];
        const int b = monomials_[std::size_t(m)][1];
        const double gx = a > 0 ? a * ipow(xi.x, a - 1) * ipow(xi.y, b) : 0.0;
        const double gy = b > 0 ? b * ipow(xi.x, a) * ipow(xi.y, b - 1) : 0.0;
        for (int i = 0; i < n; ++i) {
            grads[i].x += coeff_[std::size_t(m * n + i)] * gx;
            grads[i].y += coeff_[std::size_t(m * n + i)] * gy;
        }
    }
}

void RefBasis::hessians(const Vec2& xi, std::array<double, 3>* hess) const {
    const int n = count();
    std::fill(hess, hess + n, std::array<double, 3>{0.0, 0.0, 0.0});
    for (int m = 0; m < n; ++m) {
        const int a = monomials_[std::size_t(m)][0];
        const int b = monomials_[std::size_t(m)][1];
        const double hxx = a > 1 ? a * (a - 1) * ipow(xi.x, a - 2) * ipow(xi.y, b) : 0.0;
        const double hxy = (a > 0 && b > 0) ? a * b * ipow(xi.x, a - 1) * ipow(xi.y, b - 1) : 0.0;
        const double hyy = b > 1 ? b * (b - 1) * ipow(xi.x, a) * ipow(xi.y, b - 2) : 0.0;
        for (int i = 0; i < n; ++i) {
            hess[i][0] += coeff_[std::size_t(m * n + i)] * hxx;
            hess[i][1] += coeff_[std::size_t(m * n + i)] * hxy;
            hess[i][2] += coeff_[std::size_t(m * n + i)] * hyy;
        }
    }
}

SpatialSpace::SpatialSpace(std::shared_ptr<const CartesianMesh> mesh, int p, int ncomp)
    : mesh_(std::move(mesh)), p_(p), ncomp_(ncomp) {
    if (p < 1 || p > 4) config_error("spatial order p must be in [1, 4]");
    nodes_x_ = mesh_->node_coords(p, 0);
    nodes_y_ = mesh_->node_coords(p, 1);
}

int SpatialSpace::nodes_per_cell() const {
    return mesh_->is_simplex() ? (p_ + 1) * (p_ + 2) / 2 : (p_ + 1) * (p_ + 1);
}

Vec2 SpatialSpace::node_position(int node) const {
    const int nxn = int(nodes_x_.size());
    return {nodes_x_[std::size_t(node % nxn)], nodes_y_[std::size_t(node / nxn)]};
}

bool SpatialSpace::node_on_artificial_boundary(int node) const {
    for (int side = 0; side < 4; ++side)
        if (node_on_side(node, side)) return true;
    return false;
}

bool SpatialSpace::node_on_side(int node, int side) const {
    const int nxn = int(nodes_x_.size());
    const int gx = node % nxn;
    const int gy = node / nxn;
    switch (side) {
    case 0: return gx == 0;
    case 1: return gx == nxn - 1;
    case 2: return gy == 0;
    case 3: return gy == int(nodes_y_.size()) - 1;
    }
    return false;
}

void SpatialSpace::cell_nodes(int c, std::vector<int>& out) const {
    out.clear();
    int i, j, tri;
    mesh_->cell_location(c, i, j, tri);
    const int nxn = int(nodes_x_.size());
    auto node = [&](int gx, int gy) { return gy * nxn + gx; };
    if (tri < 0) {
        for (int b = 0; b <= p_; ++b)
            for (int a = 0; a <= p_; ++a) out.push_back(node(i * p_ + a, j * p_ + b));
    } else if (tri == 0) {
        // lower triangle (A, B, C): lattice (i p + a + b, j p + b)
        for (int b = 0; b <= p_; ++b)
            for (int a = 0; a + b <= p_; ++a) out.push_back(node(i * p_ + a + b, j * p_ + b));
    } else {
        // upper triangle (A, C, D): lattice (i p + a, j p + a + b)
        for (int b = 0; b <= p_; ++b)
            for (int a = 0; a + b <= p_; ++a) out.push_back(node(i * p_ + a, j * p_ + a + b));
    }
}

CellGeom SpatialSpace::cell_geometry(int c) const {
    int i, j, tri;
    mesh_->cell_location(c, i, j, tri);
    const auto& xc = mesh_->xcoords();
    const auto& yc = mesh_->ycoords();
    const double hx = xc[std::size_t(i) + 1] - xc[std::size_t(i)];
    const double hy = yc[std::size_t(j) + 1] - yc[std::size_t(j)];
    CellGeom g;
    g.v0 = {xc[std::size_t(i)], yc[std::size_t(j)]};
    if (tri < 0) g.jac = {hx, 0.0, 0.0, hy};
    else if (tri == 0) g.jac = {hx, hx, 0.0, hy};  // columns (B-A, C-A)
    else g.jac = {hx, 0.0, hy, hy};                // columns (C-A, D-A)
    g.jac_inv = g.jac.inverse();
    g.det = g.jac.det();
    return g;
}

const RefBasis& SpatialSpace::cell_basis(int c) const {
    (void)c;
    return mesh_->is_simplex() ? RefBasis::tri(p_) : RefBasis::rect(p_);
}

void SpatialSpace::eval(int c, const Vec2& x, double* vals, Vec2* grads) const {
    const CellGeom g = cell_geometry(c);
    const Vec2 xi = g.to_reference(x);
    const RefBasis& basis = cell_basis(c);
    basis.values(xi, vals);
    if (grads) {
        basis.gradients(xi, grads);
        const Mat2 jinv_t = g.jac_inv.transpose();
        for (int i = 0; i < basis.count(); ++i) grads[i] = jinv_t.apply(grads[i]);
    }
}

void SpatialSpace::eval_hessians(int c, const Vec2& x, std::array<double, 3>* hess) const {
    const CellGeom g = cell_geometry(c);
    const Vec2 xi = g.to_reference(x);
    const RefBasis& basis = cell_basis(c);
    basis.hessians(xi, hess);
    // H_phys = Jinv^T H_ref Jinv for affine cells
    const Mat2 A = g.jac_inv;
    for (int i = 0; i < basis.count(); ++i) {
        const double hxx = hess[i][0], hxy = hess[i][1], hyy = hess[i][2];
        const double a = A.a, b = A.b, c2 = A.c, d = A.d;
        // rows of Jinv^T are columns of Jinv
        hess[i][0] = a * (a * hxx + c2 * hxy) + c2 * (a * hxy + c2 * hyy);
        hess[i][1] = b * (a * hxx + c2 * hxy) + d * (a * hxy + c2 * hyy);
        hess[i][2] = b * (b * hxx + d * hxy) + d * (b * hxy + d * hyy);
    }
}

SpaceTimeSpace::SpaceTimeSpace(SpatialSpace spatial, int q, double t_begin, double t_end,
                               const ActiveMesh& active)
    : spatial_(std::move(spatial)), temporal_(q), t0_(t_begin), t1_(t_end),
      active_(std::make_shared<ActiveMesh>(active)) {
    if (t_end <= t_begin) config_error("slab with non-positive duration");
    node_to_active_.assign(std::size_t(spatial_.num_lattice_nodes()), -1);
    std::vector<int> nodes;
    std::vector<int> cn;
    for (int c : active_->extended) {
        spatial_.cell_nodes(c, cn);
        nodes.insert(nodes.end(), cn.begin(), cn.end());
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    active_nodes_ = std::move(nodes);
    for (std::size_t k = 0; k < active_nodes_.size(); ++k)
        node_to_active_[std::size_t(active_nodes_[k])] = int(k);
}

void SpaceTimeSpace::cell_active_nodes(int c, std::vector<int>& out) const {
    spatial_.cell_nodes(c, out);
    for (int& n : out) {
        n = node_to_active_[std::size_t(n)];
        if (n < 0) solver_error("cell outside the active space");
    }
}

double SpaceTimeSpace::value(const std::vector<double>& coeffs, int cell, const Vec2& x, double t,
                             int comp) const {
    const int nsp = spatial_.nodes_per_cell();
    std::vector<double> sv(static_cast<std::size_t>(nsp));
    spatial_.eval(cell, x, sv.data(), nullptr);
    std::vector<double> tv(static_cast<std::size_t>(nt()));
    temporal_.values(t_ref(t), tv.data());
    std::vector<int> an;
    cell_active_nodes(cell, an);
    double out = 0.0;
    for (int i = 0; i < nsp; ++i)
        for (int l = 0; l < nt(); ++l)
            out += coeffs[std::size_t(dof(an[std::size_t(i)], comp, l))] * sv[std::size_t(i)] *
                   tv[std::size_t(l)];
    return out;
}

Vec2 SpaceTimeSpace::gradient(const std::vector<double>& coeffs, int cell, const Vec2& x, double t,
                              int comp) const {
    const int nsp = spatial_.nodes_per_cell();
    std::vector<double> sv(static_cast<std::size_t>(nsp));
    std::vector<Vec2> sg(static_cast<std::size_t>(nsp));
    spatial_.eval(cell, x, sv.data(), sg.data());
    std::vector<double> tv(static_cast<std::size_t>(nt()));
    temporal_.values(t_ref(t), tv.data());
    std::vector<int> an;
    cell_active_nodes(cell, an);
    Vec2 out{0.0, 0.0};
    for (int i = 0; i < nsp; ++i)
        for (int l = 0; l < nt(); ++l)
            out += sg[std::size_t(i)] *
                   (coeffs[std::size_t(dof(an[std::size_t(i)], comp, l))] * tv[std::size_t(l)]);
    return out;
}

double SpaceTimeSpace::time_derivative(const std::vector<double>& coeffs, int cell, const Vec2& x,
                                       double t, int comp) const {
    const int nsp = spatial_.nodes_per_cell();
    std::vector<double> sv(static_cast<std::size_t>(nsp));
    spatial_.eval(cell, x, sv.data(), nullptr);
    std::vector<double> td(static_cast<std::size_t>(nt()));
    temporal_.derivatives(t_ref(t), td.data());
    const double scale = 1.0 / tau();
    std::vector<int> an;
    cell_active_nodes(cell, an);
    double out = 0.0;
    for (int i = 0; i < nsp; ++i)
        for (int l = 0; l < nt(); ++l)
            out += coeffs[std::size_t(dof(an[std::size_t(i)], comp, l))] * sv[std::size_t(i)] *
                   td[std::size_t(l)] * scale;
    return out;
}

} // namespace stfem
