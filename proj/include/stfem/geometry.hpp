#pragma once

#include "stfem/vec.hpp"

#include <optional>
#include <vector>

namespace stfem {

/// Counterclockwise point loop. Functions below state their convexity
/// requirements; nothing is enforced at the type level.
using Polygon = std::vector<Vec2>;
using ConvexPolygon = Polygon;

/// Closed half-plane { x : dot(normal, x) <= offset }, normal unit length.
struct HalfPlane {
    Vec2 normal;
    double offset = 0.0;

    static HalfPlane from_edge(const Vec2& a, const Vec2& b);  // inside = left of a->b
    double signed_distance(const Vec2& p) const { return dot(normal, p) - offset; }
};

/// Shoelace sum; positive iff counterclockwise. Throws on fewer than 3 vertices.
double signed_area(const Polygon& poly);

Vec2 centroid(const Polygon& poly);
BBox bbox_of(const Polygon& poly);
double diameter(const Polygon& poly);

/// All cross products of consecutive edges >= -eps * diameter^2.
bool is_convex(const Polygon& poly, double eps = 1e-12);

/// poly ∩ half-plane for convex poly. Vertices within eps_snap of the cut
/// line are projected onto it and kept, which makes the operation idempotent.
/// Empty result is a valid value.
ConvexPolygon clip_convex_by_halfplane(const ConvexPolygon& poly, const HalfPlane& h,
                                       double eps_snap);

/// Sutherland-Hodgman against every edge of a convex CCW clipper.
ConvexPolygon clip_convex_by_convex(const ConvexPolygon& poly, const ConvexPolygon& clipper,
                                    double eps_snap);

/// Convex pieces tiling a simple polygon: the input itself when convex,
/// ear-clip triangles otherwise. Throws invalid-geometry on self-intersection.
std::vector<ConvexPolygon> convex_decompose(const Polygon& region);

/// Fan triangles (v0, vi, vi+1) of a convex polygon; degenerate fans dropped.
std::vector<ConvexPolygon> fan_triangulate(const ConvexPolygon& poly);

bool point_in_convex(const ConvexPolygon& poly, const Vec2& p, double eps = 1e-12);

/// Proper or touching intersection of segments [a,b] and [c,d].
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d,
                        double eps = 1e-12);

/// Portion of segment [a,b] inside a convex polygon, as parameter interval
/// [t0,t1] of a + t(b-a); empty optional when the overlap is degenerate.
std::optional<std::pair<double, double>> clip_segment_to_convex(const Vec2& a, const Vec2& b,
                                                                const ConvexPolygon& poly,
                                                                double eps_snap);

/// Drop consecutive duplicates and collinear vertices (used before ear clipping).
Polygon simplify_loop(const Polygon& poly, double eps);

} // namespace stfem
