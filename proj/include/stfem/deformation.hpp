#pragma once

#include "stfem/aggregation.hpp"
#include "stfem/boundary.hpp"
#include "stfem/fe.hpp"
#include "stfem/quadrature.hpp"
#include "stfem/vec.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace stfem {

/// C2 time ramp: s(t) = (t_a/gamma)(t/t_a)^gamma below t_a, then linear;
/// gives zero motion velocity at t = 0 for gamma > 1.
double time_ramp(double t, double gamma, double t_a);
double time_ramp_derivative(double t, double gamma, double t_a);

enum class MotionKind { None, Translation, RigidRotationOscillation, Custom };

/// Boundary motion catalog. position(x0, t) maps reference boundary points;
/// position(x0, 0) = x0. The rigid kinds expose exact relative maps
/// D(t) ∘ D(t_ref)^{-1} used by the prescribed deformation mode.
struct BoundaryMotion {
    MotionKind kind = MotionKind::None;
    Vec2 velocity;      // translation: D(x, t) = x + velocity * s(t)
    Vec2 center;        // rotation center
    double omega = 0.0; // angular velocity
    Vec2 amplitude;     // oscillation A_x
    double omega_osc = 0.0;
    bool ramp_enabled = false;
    double ramp_gamma = 2.0;
    double ramp_ta = 0.125;
    std::function<Vec2(const Vec2&, double)> custom_position;
    std::function<Vec2(const Vec2&, double)> custom_velocity;

    Vec2 position(const Vec2& x0, double t) const;
    Vec2 velocity_at(const Vec2& x0, double t) const;

    bool is_rigid() const {
        return kind == MotionKind::None || kind == MotionKind::Translation ||
               kind == MotionKind::RigidRotationOscillation;
    }
    /// D(t) ∘ D(t_ref)^{-1} applied to x (rigid kinds only).
    Vec2 relative_position(const Vec2& x, double t_ref, double t) const;
    Mat2 relative_gradient(double t_ref, double t) const;
    Vec2 relative_velocity(const Vec2& x, double t_ref, double t) const;

private:
    double warped(double t) const;
    double warped_derivative(double t) const;
};

/// Boundary at time t: reference vertices pushed through the motion.
OrientedBoundary boundary_at(const OrientedBoundary& reference, const BoundaryMotion& motion,
                             double t);

/// Slab Dirichlet data for the map extension: per-vertex displacement
/// relative to the slab's initial configuration, interpolated linearly
/// along boundary edges. Zero at t = t_ref by construction.
class SlabDirichletData {
public:
    SlabDirichletData(const OrientedBoundary& reference, const BoundaryMotion& motion,
                      double t_ref);

    Vec2 at_vertex(int vertex, double t) const;
    /// Displacement at parameter s of directed edge `edge`, time t.
    Vec2 at_edge(int edge, double s, double t) const;
    double t_ref() const { return t_ref_; }

private:
    const OrientedBoundary* reference_;
    BoundaryMotion motion_;
    double t_ref_;
};

SlabDirichletData dirichlet_data(const OrientedBoundary& reference, const BoundaryMotion& motion,
                                 double t_ref);

/// Deformation state at one space-time point: map value, spatial Jacobian
/// F_x (standard convention F_ij = dphi_i/dx_j), deformation velocity w.
struct DeformEval {
    Vec2 phi;
    Mat2 fx;
    Vec2 w;
    double det = 1.0;
};

struct PulledGradient {
    Vec2 grad_x;   // F_x^{-T} ghat_x
    double dt = 0; // dhat_t - w . grad_x
};

/// Transported derivatives per the block-triangular space-time Jacobian.
PulledGradient pullback_gradients(const DeformEval& d, const Vec2& ghat_x, double ghat_t);

/// Unit space-time normal of the deformed boundary from a reference normal;
/// the spatial part feeds the Nitsche terms, the temporal part the upwind
/// well-posedness check. Throws on a degenerate transported vector.
Vec3 transport_normal(const DeformEval& d, const Vec3& nhat);

/// da factor: det(F) sqrt(nhat^T C^{-1} nhat) with C = F^T F (space-time).
double surface_measure_factor(const DeformEval& d, const Vec3& nhat);

/// Smooth cutoff around a tracked box: 1 within `inner` of the box, 0 past
/// `outer` (quintic smoothstep of the Euclidean distance to the box).
struct BlendRegion {
    Vec2 center;
    Vec2 halfwidth;
    double inner = 0.25;
    double outer = 0.75;

    double weight(const Vec2& x) const;
    Vec2 weight_gradient(const Vec2& x) const;
};

/// Slab deformation map phi(x, t), x in the reference (undeformed) slab
/// configuration. Backends: identity, analytic callback, prescribed rigid
/// motion (optionally blended to zero away from the geometry), or discrete
/// FE displacement.
class DeformationField {
public:
    static DeformationField identity();
    static DeformationField analytic(std::function<DeformEval(const Vec2&, double)> eval);
    static DeformationField prescribed(const BoundaryMotion& motion, double t_ref,
                                       std::optional<BlendRegion> blend = {});
    static DeformationField discrete(std::shared_ptr<const SpaceTimeSpace> vector_space,
                                     std::vector<double> coeffs);

    /// `cell` selects the polynomial for the discrete backend (and permits
    /// extension evaluation outside the cell); ignored by analytic backends.
    DeformEval eval(int cell, const Vec2& x, double t) const;
    Vec2 map(int cell, const Vec2& x, double t) const { return eval(cell, x, t).phi; }

    bool is_identity() const { return backend_ == Backend::Identity; }
    bool is_discrete() const { return backend_ == Backend::Discrete; }
    const std::vector<double>& coefficients() const { return coeffs_; }
    const SpaceTimeSpace* space() const { return space_.get(); }

    /// Max |grad u| over the given sample points (transfer-skip criterion).
    double max_displacement_gradient(int cell, const std::vector<Vec2>& points, double t) const;

private:
    enum class Backend { Identity, Analytic, Prescribed, Discrete };
    Backend backend_ = Backend::Identity;
    std::function<DeformEval(const Vec2&, double)> analytic_;
    BoundaryMotion motion_;
    double t_ref_ = 0.0;
    std::optional<BlendRegion> blend_;
    std::shared_ptr<const SpaceTimeSpace> space_;
    std::vector<double> coeffs_;
};

/// Linear elasticity extension of the boundary displacement (unit Lame
/// parameters by default; tau_D = c0 p^2 mu_e / h per cut facet). The
/// vector-valued Nitsche coercivity constant is larger than the scalar one:
/// c0 = 10 loses bijectivity on strongly sheared sliver cuts, 100 is robust.
struct ElasticExtensionProblem {
    double lambda = 1.0;
    double mu = 1.0;
    double nitsche_c0 = 100.0;
};

/// Solve the slab elasticity extension on the vector-valued space-time
/// AgFE space: Nitsche data on the unfitted boundary, strong zero on the
/// artificial boundary, strong values at the slab's initial time layer
/// (zero by default; `initial_displacement` carries per-(node, comp)
/// values for chained slabs). Requires q >= 1. Checks det F_x > 0 at the
/// volume quadrature points.
DeformationField solve_extension(const ElasticExtensionProblem& problem,
                                 std::shared_ptr<const SpaceTimeSpace> vector_space,
                                 const AggregationMap& aggregates, const CutQuadrature& quad,
                                 const SlabDirichletData& data,
                                 const std::vector<double>* initial_displacement = nullptr);

} // namespace stfem
