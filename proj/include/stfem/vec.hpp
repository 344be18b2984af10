#pragma once

#include <array>
#include <cmath>

namespace stfem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::sqrt(dot(v, v)); }
inline double norm2(const Vec2& v) { return dot(v, v); }
/// 90-degree counterclockwise rotation.
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

/// 2x2 matrix, row-major: [[a, b], [c, d]].
struct Mat2 {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    static Mat2 identity() { return {}; }
    static Mat2 rotation(double angle) {
        const double ca = std::cos(angle), sa = std::sin(angle);
        return {ca, -sa, sa, ca};
    }
    /// Outer product u v^T.
    static Mat2 outer(const Vec2& u, const Vec2& v) {
        return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
    }

    double det() const { return a * d - b * c; }
    Mat2 transpose() const { return {a, c, b, d}; }
    Mat2 inverse() const {
        const double s = 1.0 / det();
        return {d * s, -b * s, -c * s, a * s};
    }
    Vec2 apply(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    /// Solve M^T y = v, i.e. y = M^{-T} v.
    Vec2 solve_transposed(const Vec2& v) const {
        const double s = 1.0 / det();
        return {(d * v.x - c * v.y) * s, (-b * v.x + a * v.y) * s};
    }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
};

/// Space-time vector (spatial part, temporal part).
struct Vec3 {
    Vec2 xy;
    double t = 0.0;
};

inline double dot(const Vec3& a, const Vec3& b) { return dot(a.xy, b.xy) + a.t * b.t; }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

struct BBox {
    Vec2 lo{1e300, 1e300};
    Vec2 hi{-1e300, -1e300};

    void expand(const Vec2& p) {
        lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
    }
    void inflate(double r) { lo.x -= r; lo.y -= r; hi.x += r; hi.y += r; }
    bool overlaps(const BBox& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
    }
    bool contains(const Vec2& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
    double diameter() const { return norm(hi - lo); }
};

} // namespace stfem
