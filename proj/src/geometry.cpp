#include "stfem/geometry.hpp"
#include "stfem/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stfem {

HalfPlane HalfPlane::from_edge(const Vec2& a, const Vec2& b) {
    Vec2 t = b - a;
    const double len = norm(t);
    if (len == 0.0) geometry_error("degenerate edge in half-plane construction");
    // interior on the left of a->b, so the outward normal is the right perp
    Vec2 n{t.y / len, -t.x / len};
    return {n, dot(n, a)};
}

double signed_area(const Polygon& poly) {
    if (poly.size() < 3) geometry_error("degenerate input: polygon with fewer than 3 vertices");
    double a = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        a += cross(p, q);
    }
    return 0.5 * a;
}

Vec2 centroid(const Polygon& poly) {
    // area-weighted centroid; falls back to vertex mean for near-degenerate loops
    double a = 0.0;
    Vec2 c{0.0, 0.0};
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        const double w = cross(p, q);
        a += w;
        c += (p + q) * w;
    }
    if (std::abs(a) < 1e-300) {
        Vec2 m{0.0, 0.0};
        for (const Vec2& p : poly) m += p;
        return m * (1.0 / double(poly.size()));
    }
    return c * (1.0 / (3.0 * a));
}

BBox bbox_of(const Polygon& poly) {
    BBox b;
    for (const Vec2& p : poly) b.expand(p);
    return b;
}

double diameter(const Polygon& poly) { return bbox_of(poly).diameter(); }

bool is_convex(const Polygon& poly, double eps) {
    if (poly.size() < 3) return false;
    const double tol = eps * diameter(poly) * diameter(poly);
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        const Vec2 e0 = poly[(i + 1) % n] - poly[i];
        const Vec2 e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
        if (cross(e0, e1) < -tol) return false;
    }
    return true;
}

namespace {

void push_unique(Polygon& out, const Vec2& p, double eps2) {
    if (!out.empty() && norm2(out.back() - p) <= eps2) return;
    out.push_back(p);
}

void close_unique(Polygon& out, double eps2) {
    while (out.size() > 1 && norm2(out.front() - out.back()) <= eps2) out.pop_back();
}

} // namespace

ConvexPolygon clip_convex_by_halfplane(const ConvexPolygon& poly, const HalfPlane& h,
                                       double eps_snap) {
    if (poly.empty()) return {};
    const std::size_t n = poly.size();
    std::vector<double> d(n);
    std::vector<int> side(n);  // -1 in, 0 on line (snapped), +1 out
    bool any_out = false, any_in = false;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = h.signed_distance(poly[i]);
        if (std::abs(d[i]) <= eps_snap) side[i] = 0;
        else if (d[i] < 0.0) { side[i] = -1; any_in = true; }
        else { side[i] = 1; any_out = true; }
    }
    if (!any_out) {
        if (std::all_of(side.begin(), side.end(), [](int s) { return s == 0; })) return {};
        // snap on-line vertices, keep everything else untouched
        ConvexPolygon out = poly;
        for (std::size_t i = 0; i < n; ++i)
            if (side[i] == 0) out[i] = out[i] - h.normal * d[i];
        return out;
    }
    if (!any_in && std::none_of(side.begin(), side.end(), [](int s) { return s == 0; }))
        return {};

    const double eps2 = eps_snap * eps_snap;
    ConvexPolygon out;
    out.reserve(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const Vec2 pi = side[i] == 0 ? poly[i] - h.normal * d[i] : poly[i];
        if (side[i] <= 0) push_unique(out, pi, eps2);
        // crossing edge: emit the intersection with the cut line
        if ((side[i] < 0 && side[j] > 0) || (side[i] > 0 && side[j] < 0)) {
            const double t = d[i] / (d[i] - d[j]);
            push_unique(out, poly[i] + (poly[j] - poly[i]) * t, eps2);
        }
    }
    close_unique(out, eps2);
    if (out.size() < 3) return {};
    double a = 0.0;
    for (std::size_t i = 0, m = out.size(); i < m; ++i) a += cross(out[i], out[(i + 1) % m]);
    if (0.5 * a <= eps2) return {};
    return out;
}

ConvexPolygon clip_convex_by_convex(const ConvexPolygon& poly, const ConvexPolygon& clipper,
                                    double eps_snap) {
    ConvexPolygon out = poly;
    for (std::size_t i = 0, n = clipper.size(); i < n && !out.empty(); ++i) {
        const HalfPlane h = HalfPlane::from_edge(clipper[i], clipper[(i + 1) % n]);
        out = clip_convex_by_halfplane(out, h, eps_snap);
    }
    return out;
}

Polygon simplify_loop(const Polygon& poly, double eps) {
    const double eps2 = eps * eps;
    Polygon tmp;
    tmp.reserve(poly.size());
    for (const Vec2& p : poly) push_unique(tmp, p, eps2);
    close_unique(tmp, eps2);
    if (tmp.size() < 3) return tmp;
    // drop collinear vertices
    const double cross_tol = eps * diameter(tmp);
    Polygon out;
    const std::size_t n = tmp.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& prev = tmp[(i + n - 1) % n];
        const Vec2& cur = tmp[i];
        const Vec2& next = tmp[(i + 1) % n];
        if (std::abs(cross(cur - prev, next - cur)) > cross_tol * (norm(cur - prev) + norm(next - cur)))
            out.push_back(cur);
    }
    return out.size() >= 3 ? out : tmp;
}

namespace {

bool proper_self_intersection(const Polygon& poly, double eps) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges (they share a vertex)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], eps))
                return true;
        }
    }
    return false;
}

} // namespace

std::vector<ConvexPolygon> convex_decompose(const Polygon& region_in) {
    Polygon region = region_in;
    if (region.size() < 3) geometry_error("degenerate input: region with fewer than 3 vertices");
    if (signed_area(region) < 0.0) std::reverse(region.begin(), region.end());
    const double diam = diameter(region);
    if (proper_self_intersection(region, 1e-12 * diam))
        geometry_error("invalid geometry: self-intersecting region in convex decomposition");

    Polygon work = simplify_loop(region, 1e-12 * diam);
    if (work.size() < 3) geometry_error("degenerate input: region collapses under simplification");
    if (is_convex(work)) return {work};

    // ear clipping; emits triangles
    std::vector<ConvexPolygon> pieces;
    const double area_tol = 1e-14 * diam * diam;
    int guard = int(work.size()) * int(work.size()) + 16;
    while (work.size() > 3 && guard-- > 0) {
        bool clipped = false;
        const std::size_t n = work.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& a = work[(i + n - 1) % n];
            const Vec2& b = work[i];
            const Vec2& c = work[(i + 1) % n];
            const double tri2 = cross(b - a, c - b);
            if (tri2 <= area_tol) continue;  // reflex or flat corner
            bool ear = true;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == (i + n - 1) % n || k == (i + 1) % n) continue;
                if (point_in_convex({a, b, c}, work[k], -1e-12 * diam)) { ear = false; break; }
            }
            if (!ear) continue;
            pieces.push_back({a, b, c});
            work.erase(work.begin() + std::ptrdiff_t(i));
            clipped = true;
            break;
        }
        if (!clipped) {
            // only flat corners left; drop the flattest and continue
            std::size_t best = 0;
            double bestc = 1e300;
            for (std::size_t i = 0; i < work.size(); ++i) {
                const std::size_t n2 = work.size();
                const double c2 = std::abs(cross(work[i] - work[(i + n2 - 1) % n2],
                                                 work[(i + 1) % n2] - work[i]));
                if (c2 < bestc) { bestc = c2; best = i; }
            }
            work.erase(work.begin() + std::ptrdiff_t(best));
            if (work.size() < 3) break;
        }
    }
    if (work.size() == 3 && cross(work[1] - work[0], work[2] - work[1]) > area_tol)
        pieces.push_back(work);
    if (pieces.empty()) geometry_error("invalid geometry: convex decomposition produced no pieces");
    return pieces;
}

std::vector<ConvexPolygon> fan_triangulate(const ConvexPolygon& poly) {
    std::vector<ConvexPolygon> tris;
    if (poly.size() < 3) return tris;
    const double tol = 1e-14 * diameter(poly) * diameter(poly);
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        if (cross(poly[i] - poly[0], poly[i + 1] - poly[0]) > tol)
            tris.push_back({poly[0], poly[i], poly[i + 1]});
    }
    return tris;
}

bool point_in_convex(const ConvexPolygon& poly, const Vec2& p, double eps) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        if (cross(b - a, p - a) < eps * norm(b - a)) return false;
    }
    return true;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d, double eps) {
    const Vec2 r = b - a, s = d - c;
    const double denom = cross(r, s);
    const double qpxr = cross(c - a, r);
    if (std::abs(denom) <= eps * (norm(r) * norm(s))) {
        // parallel: overlap only if collinear
        if (std::abs(qpxr) > eps * norm(r) * (norm(c - a) + norm(r))) return false;
        const double rr = dot(r, r);
        if (rr == 0.0) return norm2(c - a) <= eps * eps;
        double t0 = dot(c - a, r) / rr;
        double t1 = dot(d - a, r) / rr;
        if (t0 > t1) std::swap(t0, t1);
        return t1 >= -eps && t0 <= 1.0 + eps;
    }
    const double t = cross(c - a, s) / denom;
    const double u = qpxr / denom;
    return t >= -eps && t <= 1.0 + eps && u >= -eps && u <= 1.0 + eps;
}

std::optional<std::pair<double, double>> clip_segment_to_convex(const Vec2& a, const Vec2& b,
                                                                const ConvexPolygon& poly,
                                                                double eps_snap) {
    double t0 = 0.0, t1 = 1.0;
    const Vec2 dir = b - a;
    const double len = norm(dir);
    if (len == 0.0) return std::nullopt;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        const HalfPlane h = HalfPlane::from_edge(poly[i], poly[(i + 1) % n]);
        const double da = h.signed_distance(a);
        const double vel = dot(h.normal, dir);
        if (std::abs(vel) <= eps_snap) {
            if (da > eps_snap) return std::nullopt;  // parallel outside
            continue;
        }
        const double t_hit = -da / vel;
        if (vel > 0.0) t1 = std::min(t1, t_hit);
        else t0 = std::max(t0, t_hit);
        if (t0 >= t1 - eps_snap / len) return std::nullopt;
    }
    return std::make_pair(t0, t1);
}

} // namespace stfem
