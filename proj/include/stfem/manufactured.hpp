#pragma once

#include "stfem/assembly.hpp"
#include "stfem/norms.hpp"
#include "stfem/vec.hpp"

#include <cmath>

namespace stfem {

/// u(x, t) = sin(pi alpha t / T) sin(pi (x - ox)/Lx) sin(pi (y - oy)/Ly),
/// with the source induced by the convection-diffusion equation.
struct ManufacturedSolution {
    double alpha = 0.5;
    double t_end = 1.0;
    double mu = 1.0;
    Vec2 origin{0.0, 0.0};
    Vec2 lengths{3.0, 3.0};
    Vec2 advection{0.0, 0.0};

    double value(const Vec2& x, double t) const {
        return tpart(t) * sx(x.x) * sy(x.y);
    }
    Vec2 gradient(const Vec2& x, double t) const {
        return {tpart(t) * cx(x.x) * (M_PI / lengths.x) * sy(x.y),
                tpart(t) * sx(x.x) * cy(x.y) * (M_PI / lengths.y)};
    }
    std::array<double, 3> hessian(const Vec2& x, double t) const {
        const double kx = M_PI / lengths.x, ky = M_PI / lengths.y;
        return {-kx * kx * value(x, t), tpart(t) * kx * cx(x.x) * ky * cy(x.y),
                -ky * ky * value(x, t)};
    }
    double dt(const Vec2& x, double t) const {
        return (M_PI * alpha / t_end) * std::cos(M_PI * alpha * t / t_end) * sx(x.x) * sy(x.y);
    }
    double source(const Vec2& x, double t) const {
        const double kx = M_PI / lengths.x, ky = M_PI / lengths.y;
        return dt(x, t) + dot(advection, gradient(x, t)) + mu * (kx * kx + ky * ky) * value(x, t);
    }

    ExactSolution exact() const {
        ExactSolution e;
        e.value = [*this](const Vec2& x, double t) { return value(x, t); };
        e.gradient = [*this](const Vec2& x, double t) { return gradient(x, t); };
        e.hessian = [*this](const Vec2& x, double t) { return hessian(x, t); };
        e.time_derivative = [*this](const Vec2& x, double t) { return dt(x, t); };
        return e;
    }

    ModelProblem problem(double nitsche_c0 = 10.0) const {
        ModelProblem mp;
        mp.mu = mu;
        mp.nitsche_c0 = nitsche_c0;
        if (norm2(advection) > 0.0) {
            const Vec2 w = advection;
            mp.advection = [w](const Vec2&, double) { return w; };
        }
        mp.source = [*this](const Vec2& x, double t) { return source(x, t); };
        mp.dirichlet = [*this](const Vec2& x, double t) { return value(x, t); };
        mp.initial = [*this](const Vec2& x) { return value(x, 0.0); };
        return mp;
    }

private:
    double tpart(double t) const { return std::sin(M_PI * alpha * t / t_end); }
    double sx(double x) const { return std::sin(M_PI * (x - origin.x) / lengths.x); }
    double cx(double x) const { return std::cos(M_PI * (x - origin.x) / lengths.x); }
    double sy(double y) const { return std::sin(M_PI * (y - origin.y) / lengths.y); }
    double cy(double y) const { return std::cos(M_PI * (y - origin.y) / lengths.y); }
};

} // namespace stfem
