#include "stfem/deformation.hpp"
#include "stfem/errors.hpp"

#include <cmath>

namespace stfem {

double time_ramp(double t, double gamma, double t_a) {
    if (t <= 0.0) return 0.0;
    if (t < t_a) return (t_a / gamma) * std::pow(t / t_a, gamma);
    return (t - t_a) + t_a / gamma;
}

double time_ramp_derivative(double t, double gamma, double t_a) {
    if (t <= 0.0) return 0.0;
    if (t < t_a) return std::pow(t / t_a, gamma - 1.0);
    return 1.0;
}

double BoundaryMotion::warped(double t) const {
    return ramp_enabled ? time_ramp(t, ramp_gamma, ramp_ta) : t;
}

double BoundaryMotion::warped_derivative(double t) const {
    return ramp_enabled ? time_ramp_derivative(t, ramp_gamma, ramp_ta) : 1.0;
}

Vec2 BoundaryMotion::position(const Vec2& x0, double t) const {
    const double s = warped(t);
    switch (kind) {
    case MotionKind::None: return x0;
    case MotionKind::Translation: return x0 + velocity * s;
    case MotionKind::RigidRotationOscillation:
        return center + Mat2::rotation(omega * s).apply(x0 - center) +
               amplitude * std::sin(omega_osc * s);
    case MotionKind::Custom:
        if (!custom_position) config_error("custom motion without a position callback");
        return custom_position(x0, t);
    }
    return x0;
}

Vec2 BoundaryMotion::velocity_at(const Vec2& x0, double t) const {
    const double s = warped(t);
    const double sd = warped_derivative(t);
    switch (kind) {
    case MotionKind::None: return {0.0, 0.0};
    case MotionKind::Translation: return velocity * sd;
    case MotionKind::RigidRotationOscillation: {
        // dR/dtheta = J R with J the quarter turn
        const Vec2 r = Mat2::rotation(omega * s).apply(x0 - center);
        return (perp(r) * omega + amplitude * (omega_osc * std::cos(omega_osc * s))) * sd;
    }
    case MotionKind::Custom:
        if (custom_velocity) return custom_velocity(x0, t);
        // central finite difference fallback
        {
            const double h = 1e-6;
            return (position(x0, t + h) - position(x0, t - h)) * (0.5 / h);
        }
    }
    return {0.0, 0.0};
}

Vec2 BoundaryMotion::relative_position(const Vec2& x, double t_ref, double t) const {
    switch (kind) {
    case MotionKind::None: return x;
    case MotionKind::Translation: return x + velocity * (warped(t) - warped(t_ref));
    case MotionKind::RigidRotationOscillation: {
        const double s = warped(t), sr = warped(t_ref);
        const Vec2 core = x - center - amplitude * std::sin(omega_osc * sr);
        return center + Mat2::rotation(omega * (s - sr)).apply(core) +
               amplitude * std::sin(omega_osc * s);
    }
    case MotionKind::Custom:
        geometry_error("prescribed deformation mode requires a rigid catalog motion");
    }
    return x;
}

Mat2 BoundaryMotion::relative_gradient(double t_ref, double t) const {
    switch (kind) {
    case MotionKind::None:
    case MotionKind::Translation: return Mat2::identity();
    case MotionKind::RigidRotationOscillation:
        return Mat2::rotation(omega * (warped(t) - warped(t_ref)));
    case MotionKind::Custom:
        geometry_error("prescribed deformation mode requires a rigid catalog motion");
    }
    return Mat2::identity();
}

Vec2 BoundaryMotion::relative_velocity(const Vec2& x, double t_ref, double t) const {
    const double sd = warped_derivative(t);
    switch (kind) {
    case MotionKind::None: return {0.0, 0.0};
    case MotionKind::Translation: return velocity * sd;
    case MotionKind::RigidRotationOscillation: {
        const double s = warped(t), sr = warped(t_ref);
        const Vec2 core = x - center - amplitude * std::sin(omega_osc * sr);
        const Vec2 r = Mat2::rotation(omega * (s - sr)).apply(core);
        return (perp(r) * omega + amplitude * (omega_osc * std::cos(omega_osc * s))) * sd;
    }
    case MotionKind::Custom:
        geometry_error("prescribed deformation mode requires a rigid catalog motion");
    }
    return {0.0, 0.0};
}

OrientedBoundary boundary_at(const OrientedBoundary& reference, const BoundaryMotion& motion,
                             double t) {
    std::vector<Vec2> v = reference.vertices();
    for (Vec2& x : v) x = motion.position(x, t);
    return reference.with_vertices(std::move(v));
}

SlabDirichletData::SlabDirichletData(const OrientedBoundary& reference,
                                     const BoundaryMotion& motion, double t_ref)
    : reference_(&reference), motion_(motion), t_ref_(t_ref) {}

Vec2 SlabDirichletData::at_vertex(int vertex, double t) const {
    const Vec2 x0 = reference_->vertices()[std::size_t(vertex)];
    return motion_.position(x0, t) - motion_.position(x0, t_ref_);
}

Vec2 SlabDirichletData::at_edge(int edge, double s, double t) const {
    const auto& e = reference_->edges()[std::size_t(edge)];
    const Vec2 da = at_vertex(e[0], t);
    const Vec2 db = at_vertex(e[1], t);
    return da * (1.0 - s) + db * s;
}

SlabDirichletData dirichlet_data(const OrientedBoundary& reference, const BoundaryMotion& motion,
                                 double t_ref) {
    return SlabDirichletData(reference, motion, t_ref);
}

PulledGradient pullback_gradients(const DeformEval& d, const Vec2& ghat_x, double ghat_t) {
    if (std::abs(d.det) < 1e-14)
        solver_error("singular map: det F_x vanishes in gradient pullback");
    PulledGradient out;
    out.grad_x = d.fx.solve_transposed(ghat_x);
    out.dt = ghat_t - dot(d.w, out.grad_x);
    return out;
}

Vec3 transport_normal(const DeformEval& d, const Vec3& nhat) {
    if (std::abs(d.det) < 1e-14) solver_error("singular map: det F_x vanishes in normal transport");
    Vec3 m;
    m.xy = d.fx.solve_transposed(nhat.xy);
    m.t = nhat.t - dot(d.w, m.xy);
    const double len = norm(m);
    if (len < 1e-14) solver_error("degenerate normal: transported normal vanishes");
    m.xy = m.xy * (1.0 / len);
    m.t /= len;
    return m;
}

double surface_measure_factor(const DeformEval& d, const Vec3& nhat) {
    // C = F^T F for the space-time block [[F_x, w], [0, 1]]
    const Mat2 A = d.fx;
    const Mat2 AtA = A.transpose() * A;
    const Vec2 Atw = A.transpose().apply(d.w);
    const double c33 = dot(d.w, d.w) + 1.0;
    // solve C z = nhat via cofactors of the symmetric 3x3
    const double a = AtA.a, b = AtA.b, c = AtA.c, e = AtA.d;
    const double f = Atw.x, g = Atw.y, h = c33;
    // C = [[a, b, f], [c, e, g], [f, g, h]] with b == c
    const double det = a * (e * h - g * g) - b * (c * h - g * f) + f * (c * g - e * f);
    if (std::abs(det) < 1e-28) solver_error("singular map: C is singular in measure pullback");
    const Vec3 rhs = nhat;
    const double z0 = ((e * h - g * g) * rhs.xy.x + (f * g - b * h) * rhs.xy.y +
                       (b * g - e * f) * rhs.t) / det;
    const double z1 = ((g * f - c * h) * rhs.xy.x + (a * h - f * f) * rhs.xy.y +
                       (c * f - a * g) * rhs.t) / det;
    const double z2 = ((c * g - e * f) * rhs.xy.x + (b * f - a * g) * rhs.xy.y +
                       (a * e - b * c) * rhs.t) / det;
    const double quad = dot(nhat, Vec3{{z0, z1}, z2});
    if (quad < 0.0) solver_error("singular map: negative metric in measure pullback");
    return std::abs(d.det) * std::sqrt(quad);
}

double BlendRegion::weight(const Vec2& x) const {
    const Vec2 q{std::max(std::abs(x.x - center.x) - halfwidth.x, 0.0),
                 std::max(std::abs(x.y - center.y) - halfwidth.y, 0.0)};
    const double d = norm(q);
    if (d <= inner) return 1.0;
    if (d >= outer) return 0.0;
    const double s = (outer - d) / (outer - inner);
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

Vec2 BlendRegion::weight_gradient(const Vec2& x) const {
    const double qx = std::abs(x.x - center.x) - halfwidth.x;
    const double qy = std::abs(x.y - center.y) - halfwidth.y;
    const Vec2 q{std::max(qx, 0.0), std::max(qy, 0.0)};
    const double d = norm(q);
    if (d <= inner || d >= outer || d == 0.0) return {0.0, 0.0};
    const double s = (outer - d) / (outer - inner);
    const double dwds = s * s * (30.0 + s * (-60.0 + 30.0 * s));
    const double dsdd = -1.0 / (outer - inner);
    Vec2 grad_d{0.0, 0.0};
    if (q.x > 0.0) grad_d.x = (q.x / d) * (x.x >= center.x ? 1.0 : -1.0);
    if (q.y > 0.0) grad_d.y = (q.y / d) * (x.y >= center.y ? 1.0 : -1.0);
    return grad_d * (dwds * dsdd);
}

DeformationField DeformationField::identity() { return DeformationField(); }

DeformationField DeformationField::analytic(std::function<DeformEval(const Vec2&, double)> eval) {
    DeformationField f;
    f.backend_ = Backend::Analytic;
    f.analytic_ = std::move(eval);
    return f;
}

DeformationField DeformationField::prescribed(const BoundaryMotion& motion, double t_ref,
                                              std::optional<BlendRegion> blend) {
    if (!motion.is_rigid())
        geometry_error("prescribed deformation mode requires a rigid catalog motion");
    DeformationField f;
    f.backend_ = Backend::Prescribed;
    f.motion_ = motion;
    f.t_ref_ = t_ref;
    f.blend_ = blend;
    return f;
}

DeformationField DeformationField::discrete(std::shared_ptr<const SpaceTimeSpace> vector_space,
                                            std::vector<double> coeffs) {
    if (vector_space->ncomp() != 2)
        config_error("discrete deformation needs a 2-component space");
    DeformationField f;
    f.backend_ = Backend::Discrete;
    f.space_ = std::move(vector_space);
    f.coeffs_ = std::move(coeffs);
    return f;
}

DeformEval DeformationField::eval(int cell, const Vec2& x, double t) const {
    DeformEval d;
    switch (backend_) {
    case Backend::Identity:
        d.phi = x;
        d.fx = Mat2::identity();
        d.w = {0.0, 0.0};
        d.det = 1.0;
        return d;
    case Backend::Analytic: return analytic_(x, t);
    case Backend::Prescribed: {
        const Vec2 rel = motion_.relative_position(x, t_ref_, t);
        const Mat2 grad = motion_.relative_gradient(t_ref_, t);
        const Vec2 vel = motion_.relative_velocity(x, t_ref_, t);
        if (!blend_) {
            d.phi = rel;
            d.fx = grad;
            d.w = vel;
        } else {
            const double w = blend_->weight(x);
            const Vec2 gw = blend_->weight_gradient(x);
            const Vec2 disp = rel - x;
            d.phi = x + disp * w;
            d.fx = Mat2::identity() + (grad + Mat2::identity() * -1.0) * w + Mat2::outer(disp, gw);
            d.w = vel * w;
        }
        d.det = d.fx.det();
        return d;
    }
    case Backend::Discrete: {
        const SpaceTimeSpace& sp = *space_;
        d.phi = x + Vec2{sp.value(coeffs_, cell, x, t, 0), sp.value(coeffs_, cell, x, t, 1)};
        const Vec2 g0 = sp.gradient(coeffs_, cell, x, t, 0);
        const Vec2 g1 = sp.gradient(coeffs_, cell, x, t, 1);
        d.fx = Mat2{1.0 + g0.x, g0.y, g1.x, 1.0 + g1.y};
        d.w = {sp.time_derivative(coeffs_, cell, x, t, 0),
               sp.time_derivative(coeffs_, cell, x, t, 1)};
        d.det = d.fx.det();
        return d;
    }
    }
    return d;
}

double DeformationField::max_displacement_gradient(int cell, const std::vector<Vec2>& points,
                                                   double t) const {
    double m = 0.0;
    for (const Vec2& x : points) {
        const DeformEval d = eval(cell, x, t);
        const Mat2 g{d.fx.a - 1.0, d.fx.b, d.fx.c, d.fx.d - 1.0};
        m = std::max({m, std::abs(g.a), std::abs(g.b), std::abs(g.c), std::abs(g.d)});
    }
    return m;
}

} // namespace stfem
